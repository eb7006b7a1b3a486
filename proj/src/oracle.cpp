#include "rzf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "rzf/nnls.hpp"
#include "rzf/opcount.hpp"

namespace rzf {

namespace {

using C = Complex<double>;
using Vec = CVec<double>;
using Mat = CMat<double>;

struct Reduced {
  Mat basis;  // N x m, orthonormal, orthogonal to every zero-budget channel
  Vec h;
  std::vector<Vec> g;
  std::vector<double> radius;
  std::vector<Index> index;  // original receiver of each g
  double power = 0;
};

Reduced reduce(const MisoChannelSet& ch, Index i, const LeakageBudget& budget, std::vector<Index>& zero) {
  const Index N = ch.antennas();
  Reduced r;
  r.power = ch.power(i);
  zero.clear();
  for (Index j = 0; j < ch.users(); ++j)
    if (j != i && leakage_cap(ch, budget, j, i) <= 0) zero.push_back(j);

  if (zero.empty()) {
    r.basis = Mat::Identity(N, N);
  } else {
    Mat A(N, static_cast<Index>(zero.size()));
    for (std::size_t k = 0; k < zero.size(); ++k) A.col(static_cast<Index>(k)) = ch.h(zero[k], i);
    Eigen::ColPivHouseholderQR<Mat> qr(A);
    qr.setThreshold(tol::kSpanMembership);
    const Index rank = qr.rank();
    const Mat Q = qr.householderQ() * Mat::Identity(N, N);
    r.basis = Q.rightCols(N - rank);
  }
  r.h = r.basis.adjoint() * ch.h(i, i);
  for (Index j = 0; j < ch.users(); ++j) {
    if (j == i) continue;
    const double cap = leakage_cap(ch, budget, j, i);
    if (cap <= 0) continue;
    r.g.push_back(r.basis.adjoint() * ch.h(j, i));
    r.radius.push_back(std::sqrt(cap));
    r.index.push_back(j);
  }
  return r;
}


double violation(const Vec& x, const Reduced& r) {
  double worst = std::max(0.0, x.norm() - std::sqrt(r.power));
  for (std::size_t k = 0; k < r.g.size(); ++k)
    worst = std::max(worst, std::abs(r.g[k].dot(x)) - r.radius[k]);
  return worst;
}

// Scale toward the origin until every constraint holds; the set is star-shaped about 0.
Vec pull_inside(const Vec& x, const Reduced& r) {
  double s = 1;
  const double n2 = x.squaredNorm();
  if (n2 > r.power) s = std::min(s, std::sqrt(r.power / n2));
  for (std::size_t k = 0; k < r.g.size(); ++k) {
    const double a = std::abs(r.g[k].dot(x));
    if (a > r.radius[k]) s = std::min(s, r.radius[k] / a);
  }
  return s * x;
}

struct NewtonResult {
  std::optional<Vec> v;
  Index drop = -1;  // multiplier that headed for zero when the system had no solution
};

// Solves v = Q^{-1} h / 2 with |g_k^H v| = radius_k on `active` and ||v||^2 = P when
// `power_active`, Q = mu I + sum lambda_k g_k g_k^H, all multipliers positive.
NewtonResult newton_active_set(const Reduced& r, const Vec& seed, const std::vector<std::size_t>& active,
                               bool power_active) {
  NewtonResult out;
  const Index m = r.h.size();
  const Index nl = static_cast<Index>(active.size());
  const Index n = nl + (power_active ? 1 : 0);
  if (n == 0) return out;
  if (!power_active && nl < m) return out;

  // Seed the multipliers by a nonnegative fit of the stationarity equation at `seed`.
  Eigen::MatrixXd A(2 * m, n);
  for (Index k = 0; k < nl; ++k) {
    const Vec& g = r.g[active[static_cast<std::size_t>(k)]];
    const Vec col = g * g.dot(seed);
    A.col(k) << col.real(), col.imag();
  }
  if (power_active) A.col(nl) << seed.real(), seed.imag();
  Eigen::VectorXd b(2 * m);
  b << 0.5 * r.h.real(), 0.5 * r.h.imag();
  Eigen::VectorXd theta = nnls(A, b).x;
  const double top = std::max(theta.maxCoeff(), 1e-12);
  for (Index k = 0; k < n; ++k) theta(k) = std::max(theta(k), 1e-3 * top);

  auto evaluate = [&](const Eigen::VectorXd& t, Vec& v, Eigen::LLT<Mat>& llt) -> std::optional<Eigen::VectorXd> {
    Mat Q = Mat::Zero(m, m);
    if (power_active) Q.diagonal().setConstant(C(t(nl)));
    for (Index k = 0; k < nl; ++k) {
      const Vec& g = r.g[active[static_cast<std::size_t>(k)]];
      Q.noalias() += t(k) * g * g.adjoint();
    }
    llt.compute(Q);
    if (llt.info() != Eigen::Success) return std::nullopt;
    v = 0.5 * llt.solve(r.h);
    if (!v.allFinite()) return std::nullopt;
    Eigen::VectorXd F(n);
    for (Index k = 0; k < nl; ++k) {
      const std::size_t a = active[static_cast<std::size_t>(k)];
      F(k) = std::norm(r.g[a].dot(v)) / (r.radius[a] * r.radius[a]) - 1;
    }
    if (power_active) F(nl) = v.squaredNorm() / r.power - 1;
    return F;
  };

  auto weakest = [&] {
    Index w = 0;
    for (Index k = 1; k < n; ++k)
      if (theta(k) < theta(w)) w = k;
    return w;
  };

  Vec v;
  Eigen::LLT<Mat> llt;
  auto F = evaluate(theta, v, llt);
  if (!F) return out;

  for (int it = 0; it < 100; ++it) {
    if (F->lpNorm<Eigen::Infinity>() < 1e-15) break;
    Eigen::MatrixXd J(n, n);
    std::vector<Vec> dv(static_cast<std::size_t>(n));
    for (Index c = 0; c < n; ++c) {
      if (c < nl) {
        const Vec& g = r.g[active[static_cast<std::size_t>(c)]];
        dv[static_cast<std::size_t>(c)] = -llt.solve(Vec(g * g.dot(v)));
      } else {
        dv[static_cast<std::size_t>(c)] = -llt.solve(v);
      }
    }
    for (Index row = 0; row < n; ++row) {
      for (Index c = 0; c < n; ++c) {
        const Vec& d = dv[static_cast<std::size_t>(c)];
        if (row < nl) {
          const std::size_t a = active[static_cast<std::size_t>(row)];
          J(row, c) = 2 * std::real(std::conj(r.g[a].dot(v)) * r.g[a].dot(d)) / (r.radius[a] * r.radius[a]);
        } else {
          J(row, c) = 2 * std::real(v.dot(d)) / r.power;
        }
      }
    }
    const Eigen::VectorXd step = J.colPivHouseholderQr().solve(-*F);
    if (!step.allFinite()) break;

    double tau = 1;
    for (Index k = 0; k < n; ++k)
      if (step(k) < 0) tau = std::min(tau, 0.9 * theta(k) / -step(k));
    const double f0 = F->norm();
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls, tau *= 0.5) {
      const Eigen::VectorXd trial = theta + tau * step;
      Vec vt;
      Eigen::LLT<Mat> lt;
      auto Ft = evaluate(trial, vt, lt);
      if (Ft && Ft->norm() < f0) {
        theta = trial;
        v = vt;
        llt = lt;
        F = Ft;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  if (F->lpNorm<Eigen::Infinity>() > 1e-11) {
    out.drop = weakest();
    return out;
  }
  out.v = v;
  return out;
}

std::optional<Vec> polish(const Reduced& r, const Vec& x) {
  const double obj = std::real(r.h.dot(x));
  const std::size_t L = r.g.size();
  for (const double rel : {1e-7, 1e-5, 1e-3}) {
    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < L; ++k)
      if (std::abs(r.g[k].dot(x)) >= r.radius[k] * (1 - rel)) active.push_back(k);
    bool with_power = x.norm() >= std::sqrt(r.power) * (1 - rel);
    for (std::size_t attempt = 0; attempt < 3 * L + 4; ++attempt) {
      const auto res = newton_active_set(r, x, active, with_power);
      if (!res.v) {
        if (res.drop < 0) break;
        if (res.drop < static_cast<Index>(active.size()))
          active.erase(active.begin() + res.drop);
        else
          with_power = false;
        continue;
      }
      const Vec& v = *res.v;
      // add the worst violated constraint, if any
      double worst = 1e-10;
      std::size_t add = L + 1;
      for (std::size_t k = 0; k < L; ++k) {
        const double excess = std::abs(r.g[k].dot(v)) / r.radius[k] - 1;
        if (excess > worst) {
          worst = excess;
          add = k;
        }
      }
      if (!with_power && v.norm() / std::sqrt(r.power) - 1 > worst) add = L;
      if (add == L) {
        with_power = true;
        continue;
      }
      if (add < L) {
        active.push_back(add);
        continue;
      }
      if (std::real(r.h.dot(v)) >= obj - 1e-9 * std::max(1.0, std::abs(obj))) return v;
      break;
    }
  }
  return std::nullopt;
}

}  // namespace

CVec<double> project_leakage_cylinder(const CVec<double>& v, const CVec<double>& h, double r) {
  if (v.size() != h.size()) throw DimensionMismatch("beam and channel lengths differ");
  if (r < 0) throw ValidationError("cylinder radius must be >= 0");
  const C hv = h.dot(v);
  const double a = std::abs(hv);
  ops::add(2 * v.size());
  if (a <= r) return v;
  return v - ((a - r) / a) * h * (hv / h.squaredNorm());
}

CVec<double> project_intersection(const CVec<double>& y, double power, const std::vector<CVec<double>>& g,
                                  const std::vector<double>& radius, int max_cycles, double tol) {
  const std::size_t sets = g.size() + 1;
  std::vector<Vec> corr(sets, Vec::Zero(y.size()));
  Vec x = y;
  const double rad = std::sqrt(power);
  for (int cycle = 0; cycle < max_cycles; ++cycle) {
    const Vec start = x;
    for (std::size_t s = 0; s < sets; ++s) {
      const Vec z = x + corr[s];
      if (s == 0) {
        const double n = z.norm();
        x = n > rad ? Vec(z * (rad / n)) : z;
        ops::add(z.size());
      } else {
        x = project_leakage_cylinder(z, g[s - 1], radius[s - 1]);
      }
      corr[s] = z - x;
    }
    if ((x - start).norm() > tol * std::max(1.0, rad)) continue;
    double excess = std::max(0.0, x.norm() - rad);
    for (std::size_t k = 0; k < g.size(); ++k) excess = std::max(excess, std::abs(g[k].dot(x)) - radius[k]);
    if (excess <= tol * std::max(1.0, rad)) break;
  }
  return x;
}

OracleSolution exact_rzfcb(const MisoChannelSet& ch, Index i, const LeakageBudget& budget,
                           const OracleOptions& opts) {
  if (budget.users() != ch.users()) throw DimensionMismatch("budget and channel sizes differ");
  if (i < 0 || i >= ch.users()) throw DimensionMismatch("user index out of range");

  std::vector<Index> zero;
  const Reduced r = reduce(ch, i, budget, zero);
  const Index m = r.h.size();
  OracleSolution out;
  out.beam.owner = i;

  Vec x = Vec::Zero(m);
  if (m == 0 || r.h.norm() <= tol::kSpanMembership * ch.h(i, i).norm()) {
    out.converged = true;
  } else {
    const double hn = r.h.norm();
    double step = std::sqrt(r.power) / hn;
    double obj = 0;
    bool stalled = false;
    int it = 0;
    for (; it < opts.max_iter; ++it) {
      const Vec y = x + step * r.h;
      Vec xn = project_intersection(y, r.power, r.g, r.radius, opts.dykstra_cycles, opts.dykstra_tol);
      xn = pull_inside(xn, r);
      const double on = std::real(r.h.dot(xn));
      if (on < obj) {
        step *= 0.5;
        if (step < 1e-12 / hn) {
          // no ascent left at any step length
          stalled = true;
          out.converged = !opts.polish && violation(x, r) < opts.feasibility_tol;
          break;
        }
        continue;
      }
      const double change = on - obj;
      const double moved = (xn - x).norm();
      x = xn;
      obj = on;
      const bool small = change < opts.objective_tol && moved < 1e-8 * std::sqrt(r.power) &&
                         violation(x, r) < opts.feasibility_tol;
      if (small && !opts.polish) {
        out.converged = true;
        break;
      }
      // once the ascent has settled, try to finish on the identified active set
      if (opts.polish && (small || (stalled && it % 50 == 0))) {
        if (auto v = polish(r, x)) {
          x = pull_inside(*v, r);
          out.converged = true;
          break;
        }
        stalled = true;
      }
    }
    out.iterations = it + 1;
    if (!out.converged && opts.polish && stalled) {
      if (auto v = polish(r, x)) x = pull_inside(*v, r);
      out.converged = violation(x, r) < opts.feasibility_tol && it < opts.max_iter;
    }
  }

  Vec v = r.basis * x;
  const C phase = ch.h(i, i).dot(v);
  if (std::abs(phase) > 0) v *= std::conj(phase) / std::abs(phase);
  out.beam.v = v;
  out.objective = std::real(ch.h(i, i).dot(v));
  out.certificate = recover_duals(ch, i, v, budget);
  return out;
}

KktCertificate recover_duals(const MisoChannelSet& ch, Index i, const CVec<double>& v,
                             const LeakageBudget& budget, double tight_tol) {
  const Index K = ch.users();
  const Index N = ch.antennas();
  if (v.size() != N) throw DimensionMismatch("beam length differs from antenna count");

  KktCertificate cert;
  cert.lambda.assign(static_cast<std::size_t>(K), 0.0);
  const double P = ch.power(i);
  const bool power_tight = v.squaredNorm() >= P - tight_tol * std::max(1.0, P);

  for (Index j = 0; j < K; ++j) {
    if (j == i) continue;
    const double cap = leakage_cap(ch, budget, j, i);
    if (cap <= 0)
      cert.zero_budget.push_back(j);
    else if (leakage_power(v, ch.h(j, i)) >= cap - tight_tol * std::max(1.0, cap))
      cert.tight.push_back(j);
  }

  const Index nt = static_cast<Index>(cert.tight.size());
  const Index n = nt + (power_tight ? 1 : 0);
  const Index nz = static_cast<Index>(cert.zero_budget.size());
  auto stack = [N](const Vec& c) {
    Eigen::VectorXd out(2 * N);
    out << c.real(), c.imag();
    return out;
  };

  Eigen::MatrixXd A(2 * N, n);
  for (Index k = 0; k < nt; ++k) {
    const Vec& g = ch.h(cert.tight[static_cast<std::size_t>(k)], i);
    A.col(k) = stack(g * g.dot(v));
  }
  if (power_tight) A.col(nt) = stack(v);
  const Eigen::VectorXd b = stack(0.5 * ch.h(i, i));

  Eigen::MatrixXd F(2 * N, 2 * nz);
  for (Index k = 0; k < nz; ++k) {
    const Vec& g = ch.h(cert.zero_budget[static_cast<std::size_t>(k)], i);
    F.col(2 * k) = stack(g);
    F.col(2 * k + 1) = stack(C(0, 1) * g);
  }

  Eigen::MatrixXd A_fit = A;
  Eigen::VectorXd b_fit = b;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> fqr;
  if (nz > 0) {
    fqr.compute(F);
    const Index rank = fqr.rank();
    const Eigen::MatrixXd Q = Eigen::MatrixXd(fqr.householderQ()).leftCols(rank);
    A_fit -= Q * (Q.transpose() * A);
    b_fit -= Q * (Q.transpose() * b);
  }
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
  if (n > 0) theta = nnls(A_fit, b_fit).x;

  Eigen::VectorXd eta_real = Eigen::VectorXd::Zero(2 * nz);
  if (nz > 0) eta_real = fqr.solve(Eigen::VectorXd(b - A * theta));

  for (Index k = 0; k < nt; ++k) cert.lambda[static_cast<std::size_t>(cert.tight[static_cast<std::size_t>(k)])] = theta(k);
  cert.mu = power_tight ? theta(nt) : 0.0;
  for (Index k = 0; k < nz; ++k) cert.eta.emplace_back(eta_real(2 * k), eta_real(2 * k + 1));

  Vec residual = -0.5 * ch.h(i, i) + cert.mu * v;
  for (Index j = 0; j < K; ++j) {
    const double l = cert.lambda[static_cast<std::size_t>(j)];
    if (l != 0) residual += l * ch.h(j, i) * ch.h(j, i).dot(v);
  }
  for (Index k = 0; k < nz; ++k)
    residual += ch.h(cert.zero_budget[static_cast<std::size_t>(k)], i) * cert.eta[static_cast<std::size_t>(k)];
  cert.stationarity_residual = residual.norm();

  double slack = std::abs(cert.mu * (v.squaredNorm() - P));
  for (Index j = 0; j < K; ++j) {
    if (j == i) continue;
    const double l = cert.lambda[static_cast<std::size_t>(j)];
    slack = std::max(slack, std::abs(l * (leakage_power(v, ch.h(j, i)) - leakage_cap(ch, budget, j, i))));
  }
  cert.slackness_residual = slack;
  return cert;
}

}  // namespace rzf
