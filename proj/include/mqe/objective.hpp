#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "mqe/errors.hpp"
#include "mqe/geometry.hpp"
#include "mqe/gp.hpp"

namespace mqe {

// Cumulative-probability levels of interest, e.g. quartiles or extrema.
struct QuantileSet {
  std::vector<double> qs;

  QuantileSet() = default;
  QuantileSet(std::initializer_list<double> v) : qs(v) {}
  explicit QuantileSet(std::vector<double> v) : qs(std::move(v)) {}

  static QuantileSet quartiles() { return QuantileSet{0.25, 0.5, 0.75}; }
  static QuantileSet extrema() { return QuantileSet{0.9, 0.95, 0.99}; }

  std::size_t size() const { return qs.size(); }

  void validate() const {
    if (qs.empty()) throw ValidationError("QuantileSet: empty");
    for (std::size_t i = 0; i < qs.size(); ++i) {
      if (!(qs[i] > 0.0 && qs[i] < 1.0))
        throw ValidationError("QuantileSet: quantiles must lie in (0,1)");
      if (i > 0 && !(qs[i] > qs[i - 1]))
        throw ValidationError("QuantileSet: quantiles must be strictly increasing");
    }
  }
};

enum class EstimateSource { model, aggregate };

struct QuantileEstimate {
  std::vector<double> values;
  EstimateSource source = EstimateSource::model;
};

// Linear interpolation between order statistics at rank h = 1 + q(n-1).
inline double interp_quantile_sorted(std::span<const double> sorted, double q) {
  const std::size_t n = sorted.size();
  if (n == 0) throw ValidationError("quantile of empty sample");
  if (n == 1) return sorted[0];
  const double h = 1.0 + q * static_cast<double>(n - 1);
  const double fl = std::floor(h);
  std::size_t lo = static_cast<std::size_t>(fl) - 1;
  if (lo >= n - 1) return sorted[n - 1];
  const double frac = h - fl;
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline QuantileEstimate quantiles(std::span<const double> values, const QuantileSet& Q,
                                  EstimateSource source = EstimateSource::model) {
  Q.validate();
  if (values.empty()) throw ValidationError("quantiles: empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  QuantileEstimate est;
  est.source = source;
  est.values.reserve(Q.size());
  for (double q : Q.qs) est.values.push_back(interp_quantile_sorted(sorted, q));
  return est;
}

// Asymptotic standard error of each estimated quantile:
//   se(q) = sqrt(q(1-q)/n_eff) / max(f(v_q), eps)
// with f a Gaussian KDE over the sample at Silverman's rule-of-thumb
// bandwidth. The density floor keeps flat-density tails from blowing up.
inline std::vector<double> quantile_se(std::span<const double> values, const QuantileSet& Q,
                                       std::size_t n_eff) {
  Q.validate();
  if (values.empty()) throw ValidationError("quantile_se: empty sample");
  if (n_eff < 1) throw ValidationError("quantile_se: n_eff must be >= 1");
  const std::size_t n = values.size();
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
  double ssq = 0.0;
  for (double v : sorted) ssq += (v - mean) * (v - mean);
  const double sd = n > 1 ? std::sqrt(ssq / static_cast<double>(n - 1)) : 0.0;
  const double iqr =
      interp_quantile_sorted(sorted, 0.75) - interp_quantile_sorted(sorted, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (spread <= 0.0) spread = std::max(sd, iqr / 1.34);
  double bw = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
  bw = std::max(bw, 1e-9);

  constexpr double kDensityFloor = 1e-6;
  const double norm = 1.0 / (static_cast<double>(n) * bw * std::sqrt(2.0 * M_PI));
  std::vector<double> out;
  out.reserve(Q.size());
  for (double q : Q.qs) {
    const double vq = interp_quantile_sorted(sorted, q);
    double dens = 0.0;
    for (double v : sorted) {
      const double z = (vq - v) / bw;
      dens += std::exp(-0.5 * z * z);
    }
    dens *= norm;
    out.push_back(std::sqrt(q * (1.0 - q) / static_cast<double>(n_eff)) /
                  std::max(dens, kDensityFloor));
  }
  return out;
}

namespace detail {

inline std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace detail

// Scores a candidate footprint against a working model in place. The model
// must have a registered query lattice; it is restored (push/pop) before
// returning. se_pre, when supplied, skips recomputing the current-model
// term shared between candidates at the same state.
inline double objective_score_inplace(BeliefModel& belief,
                                      const Eigen::Ref<const PointMatrix>& fp,
                                      const QuantileSet& Q, double c,
                                      const Eigen::MatrixXd* k_top = nullptr,
                                      Eigen::Index k_top_rows = 0,
                                      const Eigen::MatrixXd* lat_cols = nullptr,
                                      const std::vector<double>* se_pre = nullptr) {
  if (!belief.lattice()) throw ValidationError("objective score requires a registered lattice");
  const std::size_t n_eff = static_cast<std::size_t>(belief.lattice()->rows());

  std::vector<double> pre;
  if (!se_pre) {
    pre = quantile_se(detail::to_std(belief.lattice_mean()), Q, n_eff);
    se_pre = &pre;
  }

  auto h = belief.hallucinate_push(fp, k_top, k_top_rows, lat_cols);
  const double explore = c * h.vars.sum();
  const std::vector<double> post = quantile_se(detail::to_std(belief.lattice_mean()), Q, n_eff);
  belief.pop(h.checkpoint);

  double d = 0.0;
  for (std::size_t i = 0; i < Q.size(); ++i) d += std::abs((*se_pre)[i] - post[i]);
  return d / static_cast<double>(Q.size()) + explore;
}

// Expected information value of imaging one or more candidate cells:
// the L1 change in quantile standard errors that the expected new
// measurements would cause, plus an exploration bonus c * sum of posterior
// variance over the candidate footprint. Never mutates the caller's model.
inline double objective_score(const BeliefModel& belief, std::span<const Cell> candidate_cells,
                              const GridSpec& grid, const QuantileSet& Q, double c,
                              const LatticePtr& lattice) {
  Q.validate();
  if (candidate_cells.empty()) throw ValidationError("objective_score: no candidate cells");
  if (!lattice) throw ValidationError("objective_score: null lattice");
  std::vector<Vec2> pts;
  for (Cell cell : candidate_cells) {
    auto fp = footprint(cell, grid);
    pts.insert(pts.end(), fp.begin(), fp.end());
  }
  BeliefModel work(belief);
  if (work.lattice() != lattice) work.register_lattice(lattice);
  return objective_score_inplace(work, to_points(pts), Q, c);
}

}  // namespace mqe
