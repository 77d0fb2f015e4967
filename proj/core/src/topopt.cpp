#include "polyrto/topopt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_map>

#include "polyrto/error.hpp"

namespace polyrto {

// ---------------------------------------------------------------- filter

DensityFilter::DensityFilter(const PolyMesh& mesh, double radius) : radius_(radius) {
  if (!(radius >= 0.0)) throw Error("filter radius must be non-negative");
  const auto n = static_cast<Eigen::Index>(mesh.num_elements());
  P_.resize(n, n);
  if (radius == 0.0) {
    P_.setIdentity();
    return;
  }
  const auto& c = mesh.centroids();
  // bucket centroids on a grid of cell size `radius`
  auto key = [radius](const Vec2& p) {
    return std::pair<long long, long long>{static_cast<long long>(std::floor(p.x() / radius)),
                                           static_cast<long long>(std::floor(p.y() / radius))};
  };
  struct Hash {
    std::size_t operator()(const std::pair<long long, long long>& k) const noexcept {
      return std::hash<long long>()(k.first * 73856093LL ^ k.second * 19349663LL);
    }
  };
  std::unordered_map<std::pair<long long, long long>, std::vector<int>, Hash> buckets;
  for (Eigen::Index e = 0; e < n; ++e) buckets[key(c[e])].push_back(static_cast<int>(e));

  std::vector<Eigen::Triplet<double>> trip;
  std::vector<std::pair<int, double>> row;
  for (Eigen::Index e = 0; e < n; ++e) {
    row.clear();
    const auto [kx, ky] = key(c[e]);
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy) {
        const auto it = buckets.find({kx + dx, ky + dy});
        if (it == buckets.end()) continue;
        for (int f : it->second) {
          const double w = radius - (c[e] - c[f]).norm();
          if (w > 0.0) row.emplace_back(f, w);
        }
      }
    std::sort(row.begin(), row.end());
    double sum = 0.0;
    for (const auto& [f, w] : row) sum += w;
    for (const auto& [f, w] : row) trip.emplace_back(static_cast<int>(e), f, w / sum);
  }
  P_.setFromTriplets(trip.begin(), trip.end());
  P_.makeCompressed();
}

DensityFilter build_filter(const PolyMesh& mesh, double radius) { return DensityFilter(mesh, radius); }

double volume(std::span<const double> physical, const PolyMesh& mesh) {
  if (physical.size() != mesh.num_elements()) throw Error("density vector does not match the mesh");
  double v = 0.0;
  for (std::size_t e = 0; e < physical.size(); ++e) v += physical[e] * mesh.areas()[e];
  return v;
}

Eigen::VectorXd volume_sensitivity(const PolyMesh& mesh, const DensityFilter& filter) {
  const Eigen::Map<const Eigen::VectorXd> areas(mesh.areas().data(), static_cast<Eigen::Index>(mesh.num_elements()));
  return filter.backward(areas);
}

std::vector<int> top_row_elements(const PolyMesh& mesh, int rows) {
  if (rows <= 0 || mesh.num_elements() == 0) return {};
  double ymax = -std::numeric_limits<double>::infinity();
  for (const auto& p : mesh.nodes()) ymax = std::max(ymax, p.y());
  const double layer = std::sqrt(mesh.total_area() / static_cast<double>(mesh.num_elements()));
  std::vector<int> out;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e)
    if (mesh.centroids()[e].y() >= ymax - rows * layer) out.push_back(static_cast<int>(e));
  return out;
}

// ---------------------------------------------------------------- design map

DesignMap::DesignMap(const PolyMesh& mesh, double filter_radius, std::vector<int> passive)
    : filter_(mesh, filter_radius), passive_(mesh.num_elements(), 0) {
  areas_ = Eigen::Map<const Eigen::VectorXd>(mesh.areas().data(), static_cast<Eigen::Index>(mesh.num_elements()));
  total_area_ = areas_.sum();
  for (int e : passive) {
    if (e < 0 || static_cast<std::size_t>(e) >= mesh.num_elements()) throw Error("passive element out of range");
    passive_[e] = 1;
  }
  volume_gradient_ = pullback(areas_);
}

Eigen::VectorXd DesignMap::physical(const Eigen::VectorXd& design) const {
  Eigen::VectorXd x = design;
  for (std::size_t e = 0; e < passive_.size(); ++e)
    if (passive_[e]) x[e] = 1.0;
  Eigen::VectorXd p = filter_.apply(x);
  for (std::size_t e = 0; e < passive_.size(); ++e)
    if (passive_[e]) p[e] = 1.0;
  return p;
}

Eigen::VectorXd DesignMap::pullback(const Eigen::VectorXd& grad_physical) const {
  Eigen::VectorXd g = grad_physical;
  for (std::size_t e = 0; e < passive_.size(); ++e)
    if (passive_[e]) g[e] = 0.0;
  Eigen::VectorXd out = filter_.backward(g);
  for (std::size_t e = 0; e < passive_.size(); ++e)
    if (passive_[e]) out[e] = 0.0;
  return out;
}

double DesignMap::volume(const Eigen::VectorXd& design) const { return physical(design).dot(areas_); }

Eigen::VectorXd DesignMap::uniform_design(double target) const {
  auto fill = [&](double c) {
    Eigen::VectorXd x = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(size()), c);
    for (std::size_t e = 0; e < passive_.size(); ++e)
      if (passive_[e]) x[e] = 1.0;
    return x;
  };
  const double v0 = volume(fill(0.0)), v1 = volume(fill(1.0));
  const double c = v1 > v0 ? std::clamp((target - v0) / (v1 - v0), 0.0, 1.0) : 1.0;
  return fill(c);
}

// ---------------------------------------------------------------- optimality criteria

Eigen::VectorXd oc_update(const Eigen::VectorXd& rho, const Eigen::VectorXd& dC, const Eigen::VectorXd& dV,
                          double volume_target, double move, const std::vector<char>& fixed) {
  const Eigen::Index n = rho.size();
  if (dC.size() != n || dV.size() != n) throw Error("oc_update: size mismatch");
  if (!(move >= 0.0)) throw Error("oc_update: move limit must be non-negative");
  if (move == 0.0) return rho;
  constexpr double eta = 0.5;
  auto is_fixed = [&](Eigen::Index e) { return !fixed.empty() && fixed[e]; };
  auto trial = [&](double lambda) {
    Eigen::VectorXd x(n);
    for (Eigen::Index e = 0; e < n; ++e) {
      if (is_fixed(e) || !(dV[e] > 0.0)) {
        x[e] = rho[e];
        continue;
      }
      const double b = std::max(0.0, -dC[e]) / (lambda * dV[e]);
      const double lo = std::max(0.0, rho[e] - move), hi = std::min(1.0, rho[e] + move);
      x[e] = std::clamp(rho[e] * std::pow(b, eta), lo, hi);
    }
    return x;
  };
  auto vol = [&](const Eigen::VectorXd& x) { return dV.dot(x); };

  // volume is non-increasing in the multiplier; bracket in log space, then bisect
  double lo = 1.0, hi = 1.0;
  int guard = 0;
  while (vol(trial(lo)) < volume_target) {
    lo *= 1e-2;
    if (++guard > 300) throw Error("oc_update: multiplier bisection does not bracket the volume target");
  }
  guard = 0;
  while (vol(trial(hi)) > volume_target) {
    hi *= 1e2;
    if (++guard > 300) throw Error("oc_update: multiplier bisection does not bracket the volume target");
  }
  Eigen::VectorXd x = trial(hi);
  for (int it = 0; it < 500; ++it) {
    const double mid = std::sqrt(lo * hi);
    x = trial(mid);
    const double v = vol(x);
    if (std::abs(v - volume_target) <= 1e-7 * std::abs(volume_target)) return x;
    (v > volume_target ? lo : hi) = mid;
    if (hi / lo - 1.0 < 1e-15) break;
  }
  if (std::abs(vol(x) - volume_target) > 1e-6 * std::abs(volume_target))
    throw Error("oc_update: bisection did not reach the volume target");
  return x;
}

// ---------------------------------------------------------------- loop

void OptimizerConfig::validate() const {
  if (!(move > 0.0 && move <= 1.0)) throw Error("optimizer move limit must lie in (0,1]");
  if (!(tolerance > 0.0)) throw Error("optimizer tolerance must be positive");
  if (max_iterations < 1) throw Error("optimizer needs at least one iteration");
  if (!(mma.asyinit > 0.0 && mma.asyincr >= 1.0 && mma.asydecr > 0.0 && mma.asydecr <= 1.0))
    throw Error("invalid MMA asymptote parameters");
}

OptimizationResult optimize(const DesignMap& map, double volume_fraction, const OptimizerConfig& config,
                            Eigen::VectorXd initial, const Evaluator& evaluate) {
  config.validate();
  if (!(volume_fraction > 0.0 && volume_fraction <= 1.0)) throw Error("volume fraction must lie in (0,1]");
  const auto n = static_cast<Eigen::Index>(map.size());
  if (initial.size() != n) throw Error("initial design does not match the mesh");
  const double target = volume_fraction * map.total_area();
  const auto& dV = map.volume_gradient();

  std::vector<Eigen::Index> free;
  for (Eigen::Index e = 0; e < n; ++e)
    if (!map.passive()[e]) free.push_back(e);
  const auto nf = static_cast<Eigen::Index>(free.size());
  auto gather = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd out(nf);
    for (Eigen::Index i = 0; i < nf; ++i) out[i] = v[free[i]];
    return out;
  };
  Mma mma(static_cast<std::size_t>(nf), config.mma);
  const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(nf), ones = Eigen::VectorXd::Ones(nf);

  OptimizationResult result;
  Eigen::VectorXd rho = std::move(initial);
  for (std::size_t e = 0; e < map.passive().size(); ++e)
    if (map.passive()[e]) rho[e] = 1.0;
  double change = 0.0, scale = 1.0;
  for (int k = 0;; ++k) {
    Evaluation ev = evaluate(rho, k);
    if (ev.gradient.size() != n) throw Error("evaluator returned a gradient of the wrong size");
    if (!std::isfinite(ev.objective)) throw Error("objective is not finite");
    result.history.push_back({k, ev.objective, ev.mean, ev.std, map.volume(rho) / map.total_area(), change});
    result.iterations = k + 1;
    if (k == 0) scale = std::abs(ev.objective) > 0.0 ? 1.0 / std::abs(ev.objective) : 1.0;
    const bool done = (k > 0 && change < config.tolerance);
    if (done || k + 1 >= config.max_iterations) {
      result.converged = done;
      result.last = std::move(ev);
      break;
    }

    Eigen::VectorXd next;
    if (config.kind == OptimizerKind::oc) {
      // volume is affine in the design; shift the target by the constant part
      const double offset = map.volume(rho) - dV.dot(rho);
      next = oc_update(rho, ev.gradient, dV, target - offset, config.move, map.passive());
    } else {
      const double g = map.volume(rho) / target - 1.0;
      const Eigen::VectorXd xf = mma.update(gather(rho), scale * ev.objective, scale * gather(ev.gradient), g,
                                            gather(dV) / target, zeros, ones, config.move);
      next = rho;
      for (Eigen::Index i = 0; i < nf; ++i) next[free[i]] = xf[i];
    }
    change = (next - rho).cwiseAbs().maxCoeff();
    rho = std::move(next);
  }
  result.physical = map.physical(rho);
  result.design = std::move(rho);
  return result;
}

void write_history_csv(const std::vector<HistoryRecord>& history, std::ostream& out) {
  out << "iteration,objective,mean,std,volume,max-change\n";
  char buf[256];
  for (const auto& h : history) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", h.iteration, h.objective, h.mean, h.std,
                  h.volume, h.change);
    out << buf;
  }
}

}  // namespace polyrto
