#include <algorithm>
#include <cmath>

#include "polyrto/error.hpp"
#include "polyrto/topopt.hpp"

namespace polyrto {

Mma::Mma(std::size_t n, MmaParams params) : params_(params) {
  const auto m = static_cast<Eigen::Index>(n);
  xold1_ = xold2_ = low_ = upp_ = Eigen::VectorXd::Zero(m);
}

Eigen::VectorXd Mma::update(const Eigen::VectorXd& x, double /*f*/, const Eigen::VectorXd& df, double g,
                            const Eigen::VectorXd& dg, const Eigen::VectorXd& xmin, const Eigen::VectorXd& xmax,
                            double move) {
  const Eigen::Index n = x.size();
  if (df.size() != n || dg.size() != n || xmin.size() != n || xmax.size() != n || low_.size() != n)
    throw Error("mma: size mismatch");
  if (!df.allFinite() || !dg.allFinite() || !std::isfinite(g)) throw Error("mma: non-finite gradient");

  // moving asymptotes
  for (Eigen::Index j = 0; j < n; ++j) {
    const double r = xmax[j] - xmin[j];
    if (iteration_ < 2) {
      low_[j] = x[j] - params_.asyinit * r;
      upp_[j] = x[j] + params_.asyinit * r;
    } else {
      const double osc = (x[j] - xold1_[j]) * (xold1_[j] - xold2_[j]);
      const double factor = osc > 0.0 ? params_.asyincr : (osc < 0.0 ? params_.asydecr : 1.0);
      low_[j] = x[j] - factor * (xold1_[j] - low_[j]);
      upp_[j] = x[j] + factor * (upp_[j] - xold1_[j]);
      low_[j] = std::clamp(low_[j], x[j] - 10.0 * r, x[j] - 0.01 * r);
      upp_[j] = std::clamp(upp_[j], x[j] + 0.01 * r, x[j] + 10.0 * r);
    }
  }

  Eigen::VectorXd alpha(n), beta(n), p0(n), q0(n), p1(n), q1(n);
  double b = -g;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double r = std::max(xmax[j] - xmin[j], 1e-12);
    alpha[j] = std::max({xmin[j], low_[j] + params_.albefa * (x[j] - low_[j]), x[j] - move * r});
    beta[j] = std::min({xmax[j], upp_[j] - params_.albefa * (upp_[j] - x[j]), x[j] + move * r});
    const double ux2 = (upp_[j] - x[j]) * (upp_[j] - x[j]);
    const double xl2 = (x[j] - low_[j]) * (x[j] - low_[j]);
    const double eps = params_.raa0 / r;
    p0[j] = ux2 * (1.001 * std::max(df[j], 0.0) + 0.001 * std::max(-df[j], 0.0) + eps);
    q0[j] = xl2 * (0.001 * std::max(df[j], 0.0) + 1.001 * std::max(-df[j], 0.0) + eps);
    p1[j] = ux2 * (1.001 * std::max(dg[j], 0.0) + 0.001 * std::max(-dg[j], 0.0) + eps);
    q1[j] = xl2 * (0.001 * std::max(dg[j], 0.0) + 1.001 * std::max(-dg[j], 0.0) + eps);
    b += p1[j] / (upp_[j] - x[j]) + q1[j] / (x[j] - low_[j]);
  }

  auto primal = [&](double lambda) {
    Eigen::VectorXd y(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double sp = std::sqrt(p0[j] + lambda * p1[j]);
      const double sq = std::sqrt(q0[j] + lambda * q1[j]);
      y[j] = std::clamp((low_[j] * sp + upp_[j] * sq) / (sp + sq), alpha[j], beta[j]);
    }
    return y;
  };
  // approximated constraint at y; non-increasing in λ
  auto constraint = [&](const Eigen::VectorXd& y) {
    double s = -b;
    for (Eigen::Index j = 0; j < n; ++j) s += p1[j] / (upp_[j] - y[j]) + q1[j] / (y[j] - low_[j]);
    return s;
  };

  Eigen::VectorXd y = primal(0.0);
  if (constraint(y) > 0.0) {
    double lo = 0.0, hi = 1.0;
    int guard = 0;
    while (constraint(primal(hi)) > 0.0) {
      lo = hi;
      hi *= 10.0;
      if (++guard > 60) throw Error("mma: dual problem has no feasible multiplier");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (constraint(primal(mid)) > 0.0 ? lo : hi) = mid;
    }
    y = primal(hi);
  }

  xold2_ = xold1_;
  xold1_ = x;
  ++iteration_;
  return y;
}

}  // namespace polyrto
