#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mqe/errors.hpp"
#include "mqe/objective.hpp"

namespace mqe {

inline double rmse(std::span<const double> truth, std::span<const double> estimate) {
  if (truth.size() != estimate.size() || truth.empty())
    throw ValidationError("rmse: length mismatch or empty input");
  double ssq = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = truth[i] - estimate[i];
    ssq += d * d;
  }
  return std::sqrt(ssq / static_cast<double>(truth.size()));
}

inline double rmse(const QuantileEstimate& truth, const QuantileEstimate& estimate) {
  return rmse(std::span<const double>(truth.values), std::span<const double>(estimate.values));
}

struct PairedSample {
  std::vector<double> xs;
  std::vector<double> ys;

  void validate() const {
    if (xs.size() != ys.size() || xs.empty())
      throw ValidationError("PairedSample: sizes must match and be >= 1");
  }
};

enum class Alternative { less, greater, two_sided };

inline Alternative parse_alternative(const std::string& s) {
  if (s == "less") return Alternative::less;
  if (s == "greater") return Alternative::greater;
  if (s == "two_sided" || s == "two-sided") return Alternative::two_sided;
  throw ValidationError("unknown alternative: " + s);
}

struct WilcoxonResult {
  double statistic = 0.0;  // W, sum of positive-difference ranks
  double p_value = 1.0;
  int n_used = 0;  // pairs remaining after zero-difference removal
  bool exact = false;
};

namespace detail {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Midranks of |d|, plus the tie correction term sum(t^3 - t).
inline std::pair<std::vector<double>, double> midranks(const std::vector<double>& absd) {
  const std::size_t m = absd.size();
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return absd[a] < absd[b]; });
  std::vector<double> ranks(m);
  double tie_term = 0.0;
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i;
    while (j + 1 < m && absd[order[j + 1]] == absd[order[i]]) ++j;
    const double r = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  return {std::move(ranks), tie_term};
}

}  // namespace detail

// Wilcoxon signed-rank test for paired samples. Zero differences are
// dropped; |d| ties get midranks. Exact p by full sign-pattern enumeration
// for m <= 12, otherwise the normal approximation with tie and continuity
// corrections.
inline WilcoxonResult wilcoxon_signed_rank(const PairedSample& sample, Alternative alt) {
  sample.validate();
  std::vector<double> d;
  for (std::size_t i = 0; i < sample.xs.size(); ++i) {
    const double v = sample.xs[i] - sample.ys[i];
    if (v != 0.0) d.push_back(v);
  }
  if (d.empty())
    throw ValidationError("wilcoxon_signed_rank: all differences are zero (degenerate sample)");
  const std::size_t m = d.size();

  std::vector<double> absd(m);
  for (std::size_t i = 0; i < m; ++i) absd[i] = std::abs(d[i]);
  auto [ranks, tie_term] = detail::midranks(absd);

  double w = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    if (d[i] > 0.0) w += ranks[i];

  WilcoxonResult res;
  res.statistic = w;
  res.n_used = static_cast<int>(m);

  constexpr std::size_t kExactLimit = 12;
  if (m <= kExactLimit) {
    res.exact = true;
    const std::uint64_t total = 1ull << m;
    std::uint64_t ge = 0, le = 0;
    constexpr double eps = 1e-9;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
      double wm = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        if (mask & (1ull << i)) wm += ranks[i];
      if (wm >= w - eps) ++ge;
      if (wm <= w + eps) ++le;
    }
    const double pg = static_cast<double>(ge) / static_cast<double>(total);
    const double pl = static_cast<double>(le) / static_cast<double>(total);
    switch (alt) {
      case Alternative::greater: res.p_value = pg; break;
      case Alternative::less: res.p_value = pl; break;
      case Alternative::two_sided: res.p_value = std::min(1.0, 2.0 * std::min(pg, pl)); break;
    }
  } else {
    res.exact = false;
    const double md = static_cast<double>(m);
    const double mu = md * (md + 1.0) / 4.0;
    const double var = md * (md + 1.0) * (2.0 * md + 1.0) / 24.0 - tie_term / 48.0;
    const double sd = std::sqrt(var);
    const double pg = 1.0 - detail::normal_cdf((w - mu - 0.5) / sd);
    const double pl = detail::normal_cdf((w - mu + 0.5) / sd);
    switch (alt) {
      case Alternative::greater: res.p_value = pg; break;
      case Alternative::less: res.p_value = pl; break;
      case Alternative::two_sided: res.p_value = std::min(1.0, 2.0 * std::min(pg, pl)); break;
    }
  }
  return res;
}

// Figure annotation bands: *** for p <= 1e-3, * for p <= 0.05, ns otherwise.
inline const char* significance_band(double p) {
  if (p <= 1e-3) return "***";
  if (p <= 0.05) return "*";
  return "ns";
}

struct Summary5 {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

inline Summary5 summary5(std::span<const double> values) {
  if (values.empty()) throw ValidationError("summary5: empty sample");
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  Summary5 out;
  out.min = s.front();
  out.q1 = interp_quantile_sorted(s, 0.25);
  out.median = interp_quantile_sorted(s, 0.5);
  out.q3 = interp_quantile_sorted(s, 0.75);
  out.max = s.back();
  return out;
}

}  // namespace mqe
