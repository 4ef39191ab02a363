#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdint>

#include "mqe/rng.hpp"
#include "mqe/stats.hpp"

using namespace mqe;

namespace {

// Enumeration oracle: ranks computed by counting, W distribution by walking
// every sign pattern. Written independently of the library implementation.
struct EnumOracle {
  double w_obs = 0.0;
  double p_greater = 0.0, p_less = 0.0;
};

EnumOracle enumerate_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> d;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != y[i]) d.push_back(x[i] - y[i]);
  const std::size_t m = d.size();
  // Midranks by pairwise counting.
  std::vector<double> rank(m);
  for (std::size_t i = 0; i < m; ++i) {
    double less = 0.0, equal = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (std::abs(d[j]) < std::abs(d[i])) less += 1.0;
      if (std::abs(d[j]) == std::abs(d[i])) equal += 1.0;
    }
    rank[i] = less + 0.5 * (equal + 1.0);
  }
  EnumOracle out;
  for (std::size_t i = 0; i < m; ++i)
    if (d[i] > 0) out.w_obs += rank[i];
  const std::uint64_t total = 1ull << m;
  std::uint64_t ge = 0, le = 0;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    double w = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      if (mask & (1ull << i)) w += rank[i];
    if (w >= out.w_obs - 1e-9) ++ge;
    if (w <= out.w_obs + 1e-9) ++le;
  }
  out.p_greater = static_cast<double>(ge) / static_cast<double>(total);
  out.p_less = static_cast<double>(le) / static_cast<double>(total);
  return out;
}

}  // namespace

TEST_CASE("rmse") {
  std::vector<double> a = {1.0, 2.0, 3.0};
  CHECK(rmse(a, a) == 0.0);
  std::vector<double> t = {0.0, 0.0};
  std::vector<double> e = {3.0, 4.0};
  CHECK(rmse(t, e) == Catch::Approx(std::sqrt(25.0 / 2.0)).margin(1e-12));
  SECTION("permutation symmetry") {
    std::vector<double> t2 = {0.3, 0.9, 0.1};
    std::vector<double> e2 = {0.2, 0.8, 0.4};
    std::vector<double> t3 = {0.9, 0.1, 0.3};
    std::vector<double> e3 = {0.8, 0.4, 0.2};
    CHECK(rmse(t2, e2) == Catch::Approx(rmse(t3, e3)).margin(1e-15));
  }
  SECTION("length mismatch rejected") {
    std::vector<double> s = {1.0};
    CHECK_THROWS_AS(rmse(t, s), ValidationError);
  }
}

TEST_CASE("wilcoxon exact branch") {
  SECTION("five uniformly positive differences") {
    PairedSample s;
    s.xs = {2.0, 3.0, 4.0, 5.0, 6.0};
    s.ys = {1.0, 1.0, 1.0, 1.0, 1.0};
    const auto res = wilcoxon_signed_rank(s, Alternative::greater);
    CHECK(res.exact);
    CHECK(res.statistic == 15.0);
    CHECK(res.p_value == Catch::Approx(1.0 / 32.0).margin(1e-12));
  }
  SECTION("antisymmetric differences give two-sided p of 1") {
    PairedSample s;
    s.xs = {1.0, -1.0, 2.0, -2.0};
    s.ys = {0.0, 0.0, 0.0, 0.0};
    const auto res = wilcoxon_signed_rank(s, Alternative::two_sided);
    CHECK(res.p_value == Catch::Approx(1.0).margin(1e-12));
  }
  SECTION("zero differences are dropped") {
    PairedSample s;
    s.xs = {1.0, 5.0, 2.0};
    s.ys = {1.0, 4.0, 1.0};
    const auto res = wilcoxon_signed_rank(s, Alternative::greater);
    CHECK(res.n_used == 2);
  }
  SECTION("all-zero differences is a degenerate sample") {
    PairedSample s;
    s.xs = {1.0, 2.0};
    s.ys = {1.0, 2.0};
    CHECK_THROWS_AS(wilcoxon_signed_rank(s, Alternative::greater), ValidationError);
  }
  SECTION("less and greater p-values sum to 1 + P(W = w)") {
    RngStream rng(15);
    for (int t = 0; t < 20; ++t) {
      PairedSample s;
      const int m = rng.uniform_int(3, 10);
      for (int i = 0; i < m; ++i) {
        s.xs.push_back(rng.uniform(0.0, 1.0));
        s.ys.push_back(rng.uniform(0.0, 1.0));
      }
      const auto g = wilcoxon_signed_rank(s, Alternative::greater);
      const auto l = wilcoxon_signed_rank(s, Alternative::less);
      // P(W = w) via the enumeration oracle: ge + le - total.
      const auto oracle = enumerate_oracle(s.xs, s.ys);
      const double p_eq = oracle.p_greater + oracle.p_less - 1.0;
      CHECK(g.p_value + l.p_value == Catch::Approx(1.0 + p_eq).margin(1e-12));
      CHECK(g.p_value > 0.0);
      CHECK(g.p_value <= 1.0);
    }
  }
  SECTION("exact branch matches the enumeration oracle with ties") {
    RngStream rng(16);
    for (int t = 0; t < 30; ++t) {
      PairedSample s;
      const int m = rng.uniform_int(3, 11);
      for (int i = 0; i < m; ++i) {
        // Coarse values force |d| ties regularly.
        s.xs.push_back(rng.uniform_int(0, 4) * 0.25);
        s.ys.push_back(rng.uniform_int(0, 4) * 0.25);
      }
      bool all_zero = true;
      for (std::size_t i = 0; i < s.xs.size(); ++i) all_zero &= s.xs[i] == s.ys[i];
      if (all_zero) continue;
      const auto oracle = enumerate_oracle(s.xs, s.ys);
      const auto g = wilcoxon_signed_rank(s, Alternative::greater);
      CHECK(g.statistic == Catch::Approx(oracle.w_obs).margin(1e-12));
      CHECK(g.p_value == Catch::Approx(oracle.p_greater).margin(1e-12));
    }
  }
}

TEST_CASE("wilcoxon approximate branch tracks the enumeration oracle") {
  RngStream rng(17);
  for (int m = 13; m <= 16; ++m) {
    PairedSample s;
    for (int i = 0; i < m; ++i) {
      s.xs.push_back(rng.uniform(0.0, 1.0));
      s.ys.push_back(rng.uniform(0.0, 1.0));
    }
    const auto oracle = enumerate_oracle(s.xs, s.ys);
    const auto g = wilcoxon_signed_rank(s, Alternative::greater);
    const auto l = wilcoxon_signed_rank(s, Alternative::less);
    CHECK_FALSE(g.exact);
    CHECK(g.p_value == Catch::Approx(oracle.p_greater).margin(0.01));
    CHECK(l.p_value == Catch::Approx(oracle.p_less).margin(0.01));
  }
}

TEST_CASE("wilcoxon is invariant under monotone transforms") {
  RngStream rng(18);
  PairedSample s;
  for (int i = 0; i < 9; ++i) {
    s.xs.push_back(rng.uniform(0.1, 1.0));
    s.ys.push_back(rng.uniform(0.1, 1.0));
  }
  const auto base = wilcoxon_signed_rank(s, Alternative::greater);
  PairedSample t;
  // Strictly monotone map applied to both sides. Rank-based statistics
  // depend only on difference signs and |d| ordering, which an affine map
  // preserves exactly.
  for (std::size_t i = 0; i < s.xs.size(); ++i) {
    t.xs.push_back(3.0 * s.xs[i] + 2.0);
    t.ys.push_back(3.0 * s.ys[i] + 2.0);
  }
  const auto mapped = wilcoxon_signed_rank(t, Alternative::greater);
  CHECK(mapped.statistic == base.statistic);
  CHECK(mapped.p_value == Catch::Approx(base.p_value).margin(1e-12));
}

TEST_CASE("significance bands") {
  CHECK(std::string(significance_band(0.0005)) == "***");
  CHECK(std::string(significance_band(0.03)) == "*");
  CHECK(std::string(significance_band(0.2)) == "ns");
}

TEST_CASE("five-number summary matches a sort oracle") {
  RngStream rng(19);
  for (int t = 0; t < 50; ++t) {
    const int n = rng.uniform_int(1, 40);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    const auto s = summary5(v);
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    CHECK(s.min == sorted.front());
    CHECK(s.max == sorted.back());
    CHECK(s.median == interp_quantile_sorted(sorted, 0.5));
    CHECK(s.q1 == interp_quantile_sorted(sorted, 0.25));
    CHECK(s.q3 == interp_quantile_sorted(sorted, 0.75));
  }
}
