#ifndef RZF_OPCOUNT_HPP
#define RZF_OPCOUNT_HPP

#include <cstdint>

namespace rzf::ops {

// Complex multiply-accumulate counter used by the complexity benchmark.
// Thread-local, so concurrent workers never share it.
inline thread_local std::uint64_t counter = 0;

inline void add(std::int64_t n) { counter += static_cast<std::uint64_t>(n); }
inline void reset() { counter = 0; }
inline std::uint64_t count() { return counter; }

}  // namespace rzf::ops

#endif  // RZF_OPCOUNT_HPP
