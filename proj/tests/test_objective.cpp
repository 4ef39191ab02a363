#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>

#include "mqe/objective.hpp"
#include "mqe/planner.hpp"
#include "mqe/rng.hpp"

using namespace mqe;

namespace {

// Brute-force sort-and-interpolate reference written independently of the
// library path.
double oracle_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 1) return v[0];
  const double h = 1.0 + q * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h)) - 1;
  if (lo >= n - 1) return v[n - 1];
  return v[lo] + (h - std::floor(h)) * (v[lo + 1] - v[lo]);
}

// Reference KDE evaluated directly from the published formulas.
double oracle_density(const std::vector<double>& vals, double at) {
  const std::size_t n = vals.size();
  const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(n);
  double ssq = 0.0;
  for (double v : vals) ssq += (v - mean) * (v - mean);
  const double sd = n > 1 ? std::sqrt(ssq / static_cast<double>(n - 1)) : 0.0;
  const double iqr = oracle_quantile(vals, 0.75) - oracle_quantile(vals, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (spread <= 0.0) spread = std::max(sd, iqr / 1.34);
  double bw = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
  bw = std::max(bw, 1e-9);
  double dens = 0.0;
  for (double v : vals) {
    const double z = (at - v) / bw;
    dens += std::exp(-0.5 * z * z);
  }
  return dens / (static_cast<double>(n) * bw * std::sqrt(2.0 * M_PI));
}

GridSpec toy_grid() {
  GridSpec g;
  g.cells_x = g.cells_y = 4;
  g.width_m = g.height_m = 16.0;
  g.pixels_per_cell_side = 2;
  return g;
}

}  // namespace

TEST_CASE("quantile set validation") {
  CHECK_THROWS_AS(QuantileSet{}.validate(), ValidationError);
  CHECK_THROWS_AS(QuantileSet({0.5, 0.5}).validate(), ValidationError);
  CHECK_THROWS_AS(QuantileSet({0.0, 0.5}).validate(), ValidationError);
  QuantileSet::quartiles().validate();
  QuantileSet::extrema().validate();
}

TEST_CASE("quantiles on known inputs") {
  SECTION("1..100 median") {
    std::vector<double> v(100);
    std::iota(v.begin(), v.end(), 1.0);
    auto est = quantiles(v, QuantileSet({0.5}));
    CHECK(est.values[0] == Catch::Approx(50.5).margin(1e-12));
  }
  SECTION("single sample") {
    std::vector<double> v = {7.0};
    auto est = quantiles(v, QuantileSet::quartiles());
    for (double x : est.values) CHECK(x == 7.0);
  }
  SECTION("two-point interpolation") {
    std::vector<double> v = {0.0, 1.0};
    auto est = quantiles(v, QuantileSet::quartiles());
    CHECK(est.values[0] == Catch::Approx(0.25).margin(1e-12));
    CHECK(est.values[1] == Catch::Approx(0.5).margin(1e-12));
    CHECK(est.values[2] == Catch::Approx(0.75).margin(1e-12));
  }
  SECTION("empty input rejected") {
    std::vector<double> v;
    CHECK_THROWS_AS(quantiles(v, QuantileSet::quartiles()), ValidationError);
  }
}

TEST_CASE("quantiles match the brute-force oracle on 1000 random instances") {
  RngStream rng(7);
  for (int t = 0; t < 1000; ++t) {
    const int n = rng.uniform_int(1, 50);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = rng.uniform(-2.0, 2.0);
    const double q = rng.uniform(0.01, 0.99);
    auto est = quantiles(v, QuantileSet({q}));
    REQUIRE(est.values[0] == oracle_quantile(v, q));
  }
}

TEST_CASE("quantiles are monotone in the input and nondecreasing in q") {
  RngStream rng(8);
  const QuantileSet Q = QuantileSet::quartiles();
  for (int t = 0; t < 100; ++t) {
    std::vector<double> a(20), b(20);
    for (std::size_t i = 0; i < 20; ++i) {
      a[i] = rng.uniform(0.0, 1.0);
      b[i] = a[i] + rng.uniform(0.0, 0.5);
    }
    auto ea = quantiles(a, Q);
    auto eb = quantiles(b, Q);
    for (std::size_t i = 0; i < Q.size(); ++i) CHECK(eb.values[i] >= ea.values[i]);
    for (std::size_t i = 1; i < Q.size(); ++i) CHECK(ea.values[i] >= ea.values[i - 1]);
  }
}

TEST_CASE("quantile standard errors") {
  SECTION("matches the formula against a reference density") {
    RngStream rng(21);
    const QuantileSet Q({0.25, 0.5, 0.9});
    for (int t = 0; t < 50; ++t) {
      const int n = rng.uniform_int(5, 200);
      std::vector<double> v(static_cast<std::size_t>(n));
      for (auto& x : v) x = rng.uniform(0.0, 1.0);
      const std::size_t n_eff = static_cast<std::size_t>(rng.uniform_int(1, 5000));
      const auto se = quantile_se(v, Q, n_eff);
      for (std::size_t i = 0; i < Q.size(); ++i) {
        const double q = Q.qs[i];
        const double vq = oracle_quantile(v, q);
        const double expected = std::sqrt(q * (1.0 - q) / static_cast<double>(n_eff)) /
                                std::max(oracle_density(v, vq), 1e-6);
        REQUIRE(se[i] == Catch::Approx(expected).margin(1e-12));
      }
    }
  }
  SECTION("sqrt(q(1-q)) ratio arithmetic") {
    CHECK(std::sqrt(0.25) / std::sqrt(0.0099) == Catch::Approx(5.02519).margin(1e-4));
  }
  SECTION("quadrupling n_eff halves every se") {
    RngStream rng(3);
    std::vector<double> v(80);
    for (auto& x : v) x = rng.uniform(0.0, 1.0);
    const auto a = quantile_se(v, QuantileSet::quartiles(), 100);
    const auto b = quantile_se(v, QuantileSet::quartiles(), 400);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == Catch::Approx(a[i] / 2.0).margin(1e-15));
  }
  SECTION("constant values give near-zero se") {
    std::vector<double> v(50, 0.3);
    const auto se = quantile_se(v, QuantileSet::quartiles(), 50);
    for (double s : se) {
      CHECK(s >= 0.0);
      CHECK(s < 1e-6);
    }
  }
}

TEST_CASE("objective score") {
  const GridSpec grid = toy_grid();
  const auto lattice = make_cell_lattice(grid);
  const QuantileSet Q = QuantileSet::quartiles();

  SECTION("empty prior: score equals c times footprint size times signal variance") {
    BeliefModel belief;
    const Cell cell{1, 2};
    const double c = 1.7;
    const double score = objective_score(belief, std::vector<Cell>{cell}, grid, Q, c, lattice);
    // Expected measurements equal the prior mean, so the se term vanishes.
    CHECK(score == Catch::Approx(c * grid.footprint_size() * belief.kernel().signal_variance)
                       .margin(1e-9));
  }

  SECTION("already-measured footprint with near-zero noise scores near zero") {
    KernelParams kp;
    kp.noise_variance = 1e-9;
    BeliefModel belief(kp);
    const Cell cell{2, 2};
    const auto fp = footprint(cell, grid);
    std::vector<double> ys(fp.size(), 0.6);
    belief.update(fp, ys);
    const double score = objective_score(belief, std::vector<Cell>{cell}, grid, Q, 1.0, lattice);
    CHECK(score >= 0.0);
    CHECK(score < 1e-4);
  }

  SECTION("linearity of the exploration term in c") {
    RngStream rng(11);
    BeliefModel belief;
    std::vector<Vec2> xs;
    std::vector<double> ys;
    for (int i = 0; i < 12; ++i) {
      xs.push_back({rng.uniform(0.0, 16.0), rng.uniform(0.0, 16.0)});
      ys.push_back(rng.uniform(0.0, 1.0));
    }
    belief.update(xs, ys);
    const Cell a{0, 0}, b{3, 3};
    auto gap = [&](double c) {
      return objective_score(belief, std::vector<Cell>{a}, grid, Q, c, lattice) -
             objective_score(belief, std::vector<Cell>{b}, grid, Q, c, lattice);
    };
    const double d0 = gap(0.0);  // pure se term difference
    const double d1 = gap(1.0) - d0;
    const double d2 = gap(2.0) - d0;
    CHECK(d2 == Catch::Approx(2.0 * d1).margin(1e-9));
  }

  SECTION("score is nonnegative and invariant under footprint permutation") {
    RngStream rng(12);
    BeliefModel belief;
    std::vector<Vec2> xs;
    std::vector<double> ys;
    for (int i = 0; i < 10; ++i) {
      xs.push_back({rng.uniform(0.0, 16.0), rng.uniform(0.0, 16.0)});
      ys.push_back(rng.uniform(0.0, 1.0));
    }
    belief.update(xs, ys);

    BeliefModel work(belief);
    work.register_lattice(lattice);
    auto pts = footprint({1, 1}, grid);
    const double s1 = objective_score_inplace(work, to_points(pts), Q, 0.9);
    std::reverse(pts.begin(), pts.end());
    const double s2 = objective_score_inplace(work, to_points(pts), Q, 0.9);
    CHECK(s1 >= 0.0);
    CHECK(s1 == Catch::Approx(s2).margin(1e-9));
  }

  SECTION("planner fast path agrees with the plain scorer") {
    RngStream rng(13);
    KernelParams kp;
    BeliefModel belief(kp);
    std::vector<Vec2> xs;
    std::vector<double> ys;
    for (int i = 0; i < 18; ++i) {
      xs.push_back({rng.uniform(0.0, 16.0), rng.uniform(0.0, 16.0)});
      ys.push_back(rng.uniform(0.0, 1.0));
    }
    belief.update(xs, ys);
    const Cell cell{2, 1};

    const double plain = objective_score(belief, std::vector<Cell>{cell}, grid, Q, 1.3, lattice);

    CellKernelCache cache(lattice, kp, grid);
    BeliefModel work(belief);
    work.register_lattice(lattice);
    Eigen::MatrixXd k_root;
    se_kernel(kp, work.train_x(), cache.footprint_points(cell), k_root);
    const double fast =
        objective_score_inplace(work, cache.footprint_points(cell), Q, 1.3, &k_root,
                                work.size(), cache.lattice_cols(cell));
    CHECK(fast == Catch::Approx(plain).margin(1e-10));
  }
}
