#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mqe/errors.hpp"
#include "mqe/field.hpp"
#include "mqe/geometry.hpp"
#include "mqe/gp.hpp"
#include "mqe/objective.hpp"
#include "mqe/planner.hpp"
#include "mqe/rng.hpp"

namespace mqe {

enum class BudgetPolicy { complete, shared };
enum class CommRegime { none, stochastic, full, partitioned };
enum class PlannerMode { pomcpow, random_walk, sweep };
enum class SeLattice { cells, pixels };

inline const char* to_string(BudgetPolicy p) {
  return p == BudgetPolicy::complete ? "complete" : "shared";
}
inline const char* to_string(CommRegime r) {
  switch (r) {
    case CommRegime::none: return "none";
    case CommRegime::stochastic: return "stochastic";
    case CommRegime::full: return "full";
    case CommRegime::partitioned: return "partitioned";
  }
  return "?";
}
inline const char* to_string(PlannerMode m) {
  switch (m) {
    case PlannerMode::pomcpow: return "pomcpow";
    case PlannerMode::random_walk: return "random_walk";
    case PlannerMode::sweep: return "sweep";
  }
  return "?";
}
inline BudgetPolicy parse_budget_policy(const std::string& s) {
  if (s == "complete") return BudgetPolicy::complete;
  if (s == "shared") return BudgetPolicy::shared;
  throw ValidationError("unknown budget policy: " + s);
}
inline CommRegime parse_comm_regime(const std::string& s) {
  if (s == "none") return CommRegime::none;
  if (s == "stochastic") return CommRegime::stochastic;
  if (s == "full") return CommRegime::full;
  if (s == "partitioned") return CommRegime::partitioned;
  throw ValidationError("unknown comm regime: " + s);
}
inline PlannerMode parse_planner_mode(const std::string& s) {
  if (s == "pomcpow") return PlannerMode::pomcpow;
  if (s == "random_walk") return PlannerMode::random_walk;
  if (s == "sweep") return PlannerMode::sweep;
  throw ValidationError("unknown planner mode: " + s);
}

struct PlacementSpec {
  int n_robots = 1;
  double alpha = 0.0;  // start-area spread: 0 = all at center, 1 = whole workspace
  Rect workspace;
  int lloyd_iters = 100;
  int samples_per_robot = 100;

  void validate() const {
    if (n_robots < 1) throw ValidationError("PlacementSpec: n_robots >= 1");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("PlacementSpec: alpha in [0,1]");
    if (lloyd_iters < 0 || samples_per_robot < 1)
      throw ValidationError("PlacementSpec: bad iteration counts");
  }
};

struct CommSpec {
  double eta = 0.5;  // sigmoid steepness, 1/m
  double r = 10.0;   // distance where link quality degrades past threshold, m

  void validate() const {
    if (!(eta > 0.0) || !(r > 0.0)) throw ValidationError("CommSpec: eta and r must be positive");
  }
};

struct BudgetSpec {
  int total = 15;
  BudgetPolicy policy = BudgetPolicy::complete;

  void validate() const {
    if (total < 0) throw ValidationError("BudgetSpec: total >= 0");
  }
};

// Lloyd-style relaxation inside the alpha-scaled centered rectangle:
// fresh uniform samples each iteration are assigned to the nearest current
// location, which then moves to its assignment centroid. Results snap to
// grid cells whose centers lie inside the rectangle.
inline std::vector<Cell> place_initial(const PlacementSpec& spec, const GridSpec& grid,
                                       RngStream& rng) {
  spec.validate();
  grid.validate();
  const Rect area = spec.workspace.scaled(spec.alpha);

  std::vector<Vec2> locs(static_cast<std::size_t>(spec.n_robots));
  for (auto& l : locs) l = {rng.uniform(area.x0, area.x1), rng.uniform(area.y0, area.y1)};

  const int n_pts = spec.samples_per_robot * spec.n_robots;
  std::vector<Vec2> pts(static_cast<std::size_t>(n_pts));
  std::vector<Vec2> sum(locs.size());
  std::vector<int> count(locs.size());
  for (int it = 0; it < spec.lloyd_iters; ++it) {
    for (auto& p : pts) p = {rng.uniform(area.x0, area.x1), rng.uniform(area.y0, area.y1)};
    std::fill(sum.begin(), sum.end(), Vec2{});
    std::fill(count.begin(), count.end(), 0);
    for (const Vec2& p : pts) {
      std::size_t best = 0;
      double bd = sq_dist(p, locs[0]);
      for (std::size_t j = 1; j < locs.size(); ++j) {
        const double d = sq_dist(p, locs[j]);
        if (d < bd) {
          bd = d;
          best = j;
        }
      }
      sum[best].x += p.x;
      sum[best].y += p.y;
      count[best] += 1;
    }
    for (std::size_t j = 0; j < locs.size(); ++j)
      if (count[j] > 0) locs[j] = {sum[j].x / count[j], sum[j].y / count[j]};
  }

  // Snap to the nearest cell whose center stays inside the start area.
  std::vector<Cell> cells;
  cells.reserve(locs.size());
  for (const Vec2& l : locs) {
    Cell best{-1, -1};
    double bd = std::numeric_limits<double>::infinity();
    for (int cy = 0; cy < grid.cells_y; ++cy)
      for (int cx = 0; cx < grid.cells_x; ++cx) {
        const Cell c{cx, cy};
        const Vec2 cc = grid.cell_center(c);
        if (!area.contains(cc, 1e-9)) continue;
        const double d = sq_dist(l, cc);
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
    if (best.x < 0) best = grid.cell_containing(l);  // area smaller than a cell
    cells.push_back(best);
  }
  return cells;
}

// complete: every robot receives the full budget. shared: the total is
// divided evenly, remainder split among the most robots possible.
inline std::vector<int> allocate_budgets(const BudgetSpec& spec, int n_robots) {
  spec.validate();
  if (n_robots < 1) throw ValidationError("allocate_budgets: n_robots >= 1");
  std::vector<int> out(static_cast<std::size_t>(n_robots), spec.total);
  if (spec.policy == BudgetPolicy::shared) {
    const int base = spec.total / n_robots;
    const int rem = spec.total % n_robots;
    for (int i = 0; i < n_robots; ++i) out[static_cast<std::size_t>(i)] = base + (i < rem ? 1 : 0);
  }
  return out;
}

// p_success = 1 / (1 + e^{eta (distance - r)})
inline double comm_success_prob(double distance, const CommSpec& spec) {
  spec.validate();
  if (distance < 0.0) throw ValidationError("comm_success_prob: distance >= 0");
  return 1.0 / (1.0 + std::exp(spec.eta * (distance - spec.r)));
}

// Every grid cell goes to the nearest seed (Euclidean between cell centers);
// ties go to the lowest robot id. Duplicate seeds are nudged to a free
// neighboring cell so each robot owns its own start.
inline Partition voronoi_partition(const GridSpec& grid, std::span<const Cell> seeds) {
  grid.validate();
  if (seeds.empty()) throw ValidationError("voronoi_partition: no seeds");
  std::vector<Cell> s(seeds.begin(), seeds.end());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!grid.in_bounds(s[i])) throw ValidationError("voronoi_partition: seed outside grid");
    auto taken = [&](Cell c) {
      for (std::size_t j = 0; j < i; ++j)
        if (s[j] == c) return true;
      return false;
    };
    if (taken(s[i])) {
      bool placed = false;
      for (int radius = 1; radius < grid.cells_x + grid.cells_y && !placed; ++radius)
        for (int dy = -radius; dy <= radius && !placed; ++dy)
          for (int dx = -radius; dx <= radius && !placed; ++dx) {
            if (std::abs(dx) + std::abs(dy) != radius) continue;
            const Cell c{s[i].x + dx, s[i].y + dy};
            if (grid.in_bounds(c) && !taken(c)) {
              s[i] = c;
              placed = true;
            }
          }
      if (!placed) throw ValidationError("voronoi_partition: more seeds than cells");
    }
  }

  Partition part;
  part.n_regions = static_cast<int>(s.size());
  part.owner.resize(static_cast<std::size_t>(grid.n_cells()));
  for (int idx = 0; idx < grid.n_cells(); ++idx) {
    const Vec2 cc = grid.cell_center(grid.cell_at(idx));
    int best = 0;
    double bd = sq_dist(cc, grid.cell_center(s[0]));
    for (std::size_t j = 1; j < s.size(); ++j) {
      const double d = sq_dist(cc, grid.cell_center(s[j]));
      if (d < bd - 1e-12) {
        bd = d;
        best = static_cast<int>(j);
      }
    }
    part.owner[static_cast<std::size_t>(idx)] = best;
  }
  // Each seed owns its own cell even under exact ties.
  for (std::size_t j = 0; j < s.size(); ++j)
    part.owner[static_cast<std::size_t>(grid.cell_index(s[j]))] = static_cast<int>(j);
  return part;
}

struct RobotState {
  int id = 0;
  Cell position;
  int budget_left = 0;
  BeliefModel belief;
  std::vector<Measurement> log;
  int region = -1;  // partition region, when partitioned
};

struct DeliveryOutcome {
  int receiver = -1;
  bool delivered = false;
};

// All-or-nothing payload delivery to every other robot. full always
// delivers, none/partitioned never deliver, stochastic runs an independent
// Bernoulli trial per receiver with sigmoidal success in distance.
// Successful receivers incorporate the entire payload immediately.
inline std::vector<DeliveryOutcome> broadcast(RobotState& sender,
                                              std::span<RobotState*> others, CommRegime regime,
                                              const CommSpec& spec, const GridSpec& grid,
                                              std::span<const Measurement> payload,
                                              RngStream& rng) {
  std::vector<DeliveryOutcome> outcomes;
  outcomes.reserve(others.size());
  PointMatrix xs(static_cast<Eigen::Index>(payload.size()), 2);
  Eigen::VectorXd ys(static_cast<Eigen::Index>(payload.size()));
  for (Eigen::Index i = 0; i < ys.size(); ++i) {
    xs(i, 0) = payload[static_cast<std::size_t>(i)].location.x;
    xs(i, 1) = payload[static_cast<std::size_t>(i)].location.y;
    ys[i] = payload[static_cast<std::size_t>(i)].value;
  }
  for (RobotState* other : others) {
    DeliveryOutcome oc;
    oc.receiver = other->id;
    switch (regime) {
      case CommRegime::full: oc.delivered = true; break;
      case CommRegime::none:
      case CommRegime::partitioned: oc.delivered = false; break;
      case CommRegime::stochastic: {
        const double d = dist(grid.cell_center(sender.position), grid.cell_center(other->position));
        oc.delivered = rng.uniform() < comm_success_prob(d, spec);
        break;
      }
    }
    if (oc.delivered && payload.size() > 0) {
      other->belief.update(xs, ys);
      other->log.insert(other->log.end(), payload.begin(), payload.end());
    }
    outcomes.push_back(oc);
  }
  return outcomes;
}

// Full experiment parameterization for one mission.
struct MissionConfig {
  GridSpec grid;
  int n_robots = 1;
  double alpha = 0.66;
  int total_budget = 15;
  BudgetPolicy policy = BudgetPolicy::complete;
  CommRegime regime = CommRegime::none;
  CommSpec comm;
  QuantileSet Q = QuantileSet::quartiles();
  KernelParams kernel;
  PlannerConfig planner;
  double c = 1.0;           // exploration weight in the objective
  double noise_sd = 0.05;   // measurement noise
  PlannerMode mode = PlannerMode::pomcpow;
  SeLattice se_lattice = SeLattice::cells;
  int lloyd_iters = 100;
  int samples_per_robot = 100;
  std::uint64_t seed = 0;
  std::optional<std::vector<Cell>> start_override;
  std::optional<std::vector<std::uint64_t>> robot_seeds;

  void validate() const {
    grid.validate();
    if (n_robots < 1) throw ValidationError("MissionConfig: n_robots >= 1");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("MissionConfig: alpha in [0,1]");
    if (total_budget < 0) throw ValidationError("MissionConfig: total_budget >= 0");
    if (regime == CommRegime::partitioned && alpha != 1.0)
      throw ValidationError("MissionConfig: partitioned missions require alpha = 1.0");
    if (!(noise_sd >= 0.0)) throw ValidationError("MissionConfig: noise_sd >= 0");
    if (!(c >= 0.0)) throw ValidationError("MissionConfig: c >= 0");
    comm.validate();
    Q.validate();
    kernel.validate();
    planner.validate();
    if (start_override && static_cast<int>(start_override->size()) != n_robots)
      throw ValidationError("MissionConfig: start_override size != n_robots");
    if (robot_seeds && static_cast<int>(robot_seeds->size()) != n_robots)
      throw ValidationError("MissionConfig: robot_seeds size != n_robots");
  }
};

struct TrialResult {
  MissionConfig config;
  std::vector<std::vector<Cell>> paths;     // per robot, starting cell first
  std::vector<Measurement> measurements;    // pooled, in acquisition order
  QuantileEstimate v_true;                  // quantiles of the ground-truth lattice
  QuantileEstimate v_final;                 // quantiles of pooled raw measurements
  std::vector<QuantileEstimate> v_robot;    // per-robot model estimates
  double rmse_final = 0.0;
  std::vector<double> abs_err;              // per-quantile |v_true - v_final|
  double total_reward = 0.0;                // sum of objective scores of executed moves
  int executed_steps = 0;
  double wall_seconds = 0.0;
  std::optional<Partition> partition;

  nlohmann::json to_json() const;
  static TrialResult from_json(const nlohmann::json& j);
};

namespace detail {

inline Move sweep_move(Cell pos, const GridSpec& grid) {
  // Serpentine coverage: even rows go +x, odd rows -x, row ends go +y.
  if (pos.y % 2 == 0) {
    if (pos.x < grid.cells_x - 1) return Move::pos_x;
  } else {
    if (pos.x > 0) return Move::neg_x;
  }
  return Move::pos_y;
}

}  // namespace detail

// Called after each round's broadcast phase with the round index and the
// robot states; used by tests to assert per-round invariants.
using MissionObserver = std::function<void(int, const std::vector<RobotState>&)>;

// Synchronized mission: place, take initial images, then rounds of
// plan/move/measure per robot in id order with an end-of-round broadcast
// phase, until every budget is spent. Deterministic for a fixed config.
inline TrialResult run_mission(const MissionConfig& config, const Field& field,
                               const MissionObserver& observer = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  config.validate();
  if (!(field.grid().cells_x == config.grid.cells_x && field.grid().cells_y == config.grid.cells_y &&
        field.grid().pixels_per_cell_side == config.grid.pixels_per_cell_side))
    throw ValidationError("run_mission: field raster does not match configured grid");
  const GridSpec& grid = field.grid();

  TrialResult result;
  result.config = config;

  // Placement
  std::vector<Cell> starts;
  if (config.start_override) {
    starts = *config.start_override;
    for (Cell c : starts)
      if (!grid.in_bounds(c)) throw ValidationError("run_mission: start cell outside grid");
  } else {
    PlacementSpec pspec;
    pspec.n_robots = config.n_robots;
    pspec.alpha = config.alpha;
    pspec.workspace = grid.workspace();
    pspec.lloyd_iters = config.lloyd_iters;
    pspec.samples_per_robot = config.samples_per_robot;
    RngStream place_rng(derive_seed(config.seed, StreamTag::placement));
    starts = place_initial(pspec, grid, place_rng);
  }

  const auto budgets = allocate_budgets({config.total_budget, config.policy}, config.n_robots);

  std::optional<Partition> partition;
  if (config.regime == CommRegime::partitioned)
    partition = voronoi_partition(grid, starts);

  const LatticePtr lattice = config.se_lattice == SeLattice::cells ? make_cell_lattice(grid)
                                                                   : make_pixel_lattice(grid);
  CellKernelCache cache(lattice, config.kernel, grid);

  std::vector<RobotState> robots;
  std::vector<std::uint64_t> rseeds(static_cast<std::size_t>(config.n_robots));
  std::vector<RngStream> meas_rngs;
  for (int k = 0; k < config.n_robots; ++k) {
    rseeds[static_cast<std::size_t>(k)] =
        config.robot_seeds ? (*config.robot_seeds)[static_cast<std::size_t>(k)]
                           : derive_seed(config.seed, StreamTag::robot, static_cast<std::uint64_t>(k));
    RobotState r;
    r.id = k;
    r.position = starts[static_cast<std::size_t>(k)];
    r.budget_left = budgets[static_cast<std::size_t>(k)];
    r.belief = BeliefModel(config.kernel);
    r.belief.register_lattice(lattice);
    if (partition) r.region = k;
    robots.push_back(std::move(r));
    result.paths.push_back({starts[static_cast<std::size_t>(k)]});
    meas_rngs.emplace_back(derive_seed(rseeds[static_cast<std::size_t>(k)], StreamTag::measure));
  }

  RngStream comm_rng(derive_seed(config.seed, StreamTag::comm));

  auto measure_cell = [&](RobotState& r, Cell c, int step) {
    const auto fp = footprint(c, grid);
    auto ms = sample(field, fp, config.noise_sd, meas_rngs[static_cast<std::size_t>(r.id)], r.id,
                     step);
    PointMatrix xs = to_points(fp);
    Eigen::VectorXd ys(static_cast<Eigen::Index>(ms.size()));
    for (Eigen::Index i = 0; i < ys.size(); ++i) ys[i] = ms[static_cast<std::size_t>(i)].value;
    r.belief.update(xs, ys, cache.lattice_cols(c));
    r.log.insert(r.log.end(), ms.begin(), ms.end());
    result.measurements.insert(result.measurements.end(), ms.begin(), ms.end());
    return ms;
  };

  auto comm_phase = [&](const std::vector<std::vector<Measurement>>& payloads) {
    if (config.regime == CommRegime::none || config.regime == CommRegime::partitioned) return;
    for (std::size_t k = 0; k < robots.size(); ++k) {
      if (payloads[k].empty()) continue;
      std::vector<RobotState*> others;
      for (std::size_t j = 0; j < robots.size(); ++j)
        if (j != k) others.push_back(&robots[j]);
      broadcast(robots[k], others, config.regime, config.comm, grid, payloads[k], comm_rng);
    }
  };

  // Round 0: initial images at the start cells (free of budget).
  {
    std::vector<std::vector<Measurement>> payloads(robots.size());
    for (auto& r : robots) payloads[static_cast<std::size_t>(r.id)] = measure_cell(r, r.position, 0);
    comm_phase(payloads);
    if (observer) observer(0, robots);
  }

  // Planning rounds.
  int round = 0;
  for (;;) {
    bool any_active = false;
    for (const auto& r : robots) any_active |= r.budget_left > 0;
    if (!any_active) break;
    ++round;

    std::vector<std::vector<Measurement>> payloads(robots.size());
    for (auto& r : robots) {
      if (r.budget_left <= 0) continue;
      const Partition* part = partition ? &*partition : nullptr;
      const auto acts = legal_actions(r.position, grid, part, r.region);
      if (acts.empty()) {
        r.budget_left = 0;  // boxed in: treated as finished
        continue;
      }

      RngStream plan_rng(derive_seed(rseeds[static_cast<std::size_t>(r.id)], StreamTag::plan,
                                     static_cast<std::uint64_t>(round)));
      Move move;
      switch (config.mode) {
        case PlannerMode::pomcpow: {
          PlanContext ctx;
          ctx.grid = &grid;
          ctx.Q = config.Q;
          ctx.c = config.c;
          ctx.partition = part;
          ctx.region = r.region;
          ctx.cache = &cache;
          PlanningState st{r.position, &r.belief, r.budget_left};
          move = plan_step(st, config.planner, ctx, plan_rng).move;
          break;
        }
        case PlannerMode::random_walk:
          move = acts[static_cast<std::size_t>(
              plan_rng.uniform_int(0, static_cast<int>(acts.size()) - 1))];
          break;
        case PlannerMode::sweep: {
          move = detail::sweep_move(r.position, grid);
          if (std::find(acts.begin(), acts.end(), move) == acts.end()) move = acts[0];
          break;
        }
      }

      // Executed-step reward, scored on the pre-move belief.
      const Cell dest = apply_move(r.position, move);
      result.total_reward += objective_score_inplace(
          r.belief, cache.footprint_points(dest), config.Q, config.c, nullptr, 0,
          cache.lattice_cols(dest));

      r.position = dest;
      result.paths[static_cast<std::size_t>(r.id)].push_back(dest);
      payloads[static_cast<std::size_t>(r.id)] = measure_cell(r, dest, round);
      r.budget_left -= 1;
      result.executed_steps += 1;
    }
    comm_phase(payloads);
    if (observer) observer(round, robots);
  }

  // Final estimates.
  result.v_true = quantiles(field.values(), config.Q, EstimateSource::aggregate);
  std::vector<double> pooled;
  pooled.reserve(result.measurements.size());
  for (const auto& m : result.measurements) pooled.push_back(m.value);
  result.v_final = quantiles(pooled, config.Q, EstimateSource::aggregate);

  const LatticePtr full = make_pixel_lattice(grid);
  for (auto& r : robots) {
    const Eigen::VectorXd mu = r.belief.predict_mean(*full);
    result.v_robot.push_back(
        quantiles(std::span<const double>(mu.data(), static_cast<std::size_t>(mu.size())),
                  config.Q, EstimateSource::model));
  }

  result.abs_err.resize(config.Q.size());
  double ssq = 0.0;
  for (std::size_t i = 0; i < config.Q.size(); ++i) {
    const double d = result.v_true.values[i] - result.v_final.values[i];
    result.abs_err[i] = std::abs(d);
    ssq += d * d;
  }
  result.rmse_final = std::sqrt(ssq / static_cast<double>(config.Q.size()));
  result.partition = std::move(partition);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

// ---------------------------------------------------------------------------
// JSON serialization (trial documents consumed by the render subcommand)

inline void to_json(nlohmann::json& j, const Cell& c) { j = nlohmann::json{c.x, c.y}; }
inline void from_json(const nlohmann::json& j, Cell& c) {
  c.x = j.at(0).get<int>();
  c.y = j.at(1).get<int>();
}

inline nlohmann::json config_to_json(const MissionConfig& c) {
  nlohmann::json j;
  j["grid"] = {{"cells_x", c.grid.cells_x},
               {"cells_y", c.grid.cells_y},
               {"width_m", c.grid.width_m},
               {"height_m", c.grid.height_m},
               {"pixels_per_cell_side", c.grid.pixels_per_cell_side}};
  j["n_robots"] = c.n_robots;
  j["alpha"] = c.alpha;
  j["total_budget"] = c.total_budget;
  j["policy"] = to_string(c.policy);
  j["comm"] = to_string(c.regime);
  j["comm_eta"] = c.comm.eta;
  j["comm_r"] = c.comm.r;
  j["quantiles"] = c.Q.qs;
  j["kernel"] = {{"lengthscale", c.kernel.lengthscale},
                 {"signal_variance", c.kernel.signal_variance},
                 {"noise_variance", c.kernel.noise_variance}};
  j["planner"] = {{"rollouts_per_step", c.planner.rollouts_per_step},
                  {"max_depth", c.planner.max_depth},
                  {"discount", c.planner.discount},
                  {"ucb_c", c.planner.ucb_c},
                  {"k_obs", c.planner.k_obs},
                  {"alpha_obs", c.planner.alpha_obs},
                  {"rollout_policy",
                   c.planner.rollout_policy == PlannerConfig::Rollout::random ? "random"
                                                                              : "greedy"}};
  j["c"] = c.c;
  j["noise_sd"] = c.noise_sd;
  j["mode"] = to_string(c.mode);
  j["se_lattice"] = c.se_lattice == SeLattice::cells ? "cells" : "pixels";
  j["seed"] = c.seed;
  return j;
}

inline MissionConfig config_from_json(const nlohmann::json& j) {
  MissionConfig c;
  const auto& g = j.at("grid");
  c.grid.cells_x = g.at("cells_x").get<int>();
  c.grid.cells_y = g.at("cells_y").get<int>();
  c.grid.width_m = g.at("width_m").get<double>();
  c.grid.height_m = g.at("height_m").get<double>();
  c.grid.pixels_per_cell_side = g.at("pixels_per_cell_side").get<int>();
  c.n_robots = j.at("n_robots").get<int>();
  c.alpha = j.at("alpha").get<double>();
  c.total_budget = j.at("total_budget").get<int>();
  c.policy = parse_budget_policy(j.at("policy").get<std::string>());
  c.regime = parse_comm_regime(j.at("comm").get<std::string>());
  c.comm.eta = j.at("comm_eta").get<double>();
  c.comm.r = j.at("comm_r").get<double>();
  c.Q = QuantileSet(j.at("quantiles").get<std::vector<double>>());
  const auto& k = j.at("kernel");
  c.kernel.lengthscale = k.at("lengthscale").get<double>();
  c.kernel.signal_variance = k.at("signal_variance").get<double>();
  c.kernel.noise_variance = k.at("noise_variance").get<double>();
  const auto& p = j.at("planner");
  c.planner.rollouts_per_step = p.at("rollouts_per_step").get<int>();
  c.planner.max_depth = p.at("max_depth").get<int>();
  c.planner.discount = p.at("discount").get<double>();
  c.planner.ucb_c = p.at("ucb_c").get<double>();
  c.planner.k_obs = p.at("k_obs").get<double>();
  c.planner.alpha_obs = p.at("alpha_obs").get<double>();
  c.planner.rollout_policy = p.at("rollout_policy").get<std::string>() == "greedy"
                                 ? PlannerConfig::Rollout::greedy
                                 : PlannerConfig::Rollout::random;
  c.c = j.at("c").get<double>();
  c.noise_sd = j.at("noise_sd").get<double>();
  c.mode = parse_planner_mode(j.at("mode").get<std::string>());
  c.se_lattice = j.at("se_lattice").get<std::string>() == "pixels" ? SeLattice::pixels
                                                                   : SeLattice::cells;
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

inline nlohmann::json TrialResult::to_json() const {
  nlohmann::json j;
  j["config"] = config_to_json(config);
  j["paths"] = paths;
  nlohmann::json ms = nlohmann::json::array();
  for (const auto& m : measurements)
    ms.push_back({m.location.x, m.location.y, m.value, m.robot_id, m.step});
  j["measurements"] = std::move(ms);
  j["v_true"] = v_true.values;
  j["v_final"] = v_final.values;
  nlohmann::json vr = nlohmann::json::array();
  for (const auto& v : v_robot) vr.push_back(v.values);
  j["v_robot"] = std::move(vr);
  j["rmse_final"] = rmse_final;
  j["abs_err"] = abs_err;
  j["total_reward"] = total_reward;
  j["executed_steps"] = executed_steps;
  j["wall_seconds"] = wall_seconds;
  if (partition) j["partition_owner"] = partition->owner;
  return j;
}

inline TrialResult TrialResult::from_json(const nlohmann::json& j) {
  TrialResult r;
  r.config = config_from_json(j.at("config"));
  r.paths = j.at("paths").get<std::vector<std::vector<Cell>>>();
  for (const auto& m : j.at("measurements")) {
    Measurement mm;
    mm.location = {m.at(0).get<double>(), m.at(1).get<double>()};
    mm.value = m.at(2).get<double>();
    mm.robot_id = m.at(3).get<int>();
    mm.step = m.at(4).get<int>();
    r.measurements.push_back(mm);
  }
  r.v_true.values = j.at("v_true").get<std::vector<double>>();
  r.v_final.values = j.at("v_final").get<std::vector<double>>();
  for (const auto& v : j.at("v_robot")) {
    QuantileEstimate e;
    e.values = v.get<std::vector<double>>();
    r.v_robot.push_back(std::move(e));
  }
  r.rmse_final = j.at("rmse_final").get<double>();
  r.abs_err = j.at("abs_err").get<std::vector<double>>();
  r.total_reward = j.at("total_reward").get<double>();
  r.executed_steps = j.at("executed_steps").get<int>();
  r.wall_seconds = j.at("wall_seconds").get<double>();
  if (j.contains("partition_owner")) {
    Partition p;
    p.owner = j.at("partition_owner").get<std::vector<int>>();
    p.n_regions = r.config.n_robots;
    r.partition = std::move(p);
  }
  return r;
}

}  // namespace mqe
