#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <unordered_map>
#include <vector>

#include "mqe/errors.hpp"
#include "mqe/geometry.hpp"
#include "mqe/gp.hpp"
#include "mqe/objective.hpp"
#include "mqe/rng.hpp"

namespace mqe {

// Grid moves in deterministic order; ties always break toward the lower index.
enum class Move : int { pos_x = 0, neg_x = 1, pos_y = 2, neg_y = 3 };

inline constexpr std::array<Move, 4> kAllMoves = {Move::pos_x, Move::neg_x, Move::pos_y,
                                                  Move::neg_y};

inline Cell apply_move(Cell c, Move m) {
  switch (m) {
    case Move::pos_x: return {c.x + 1, c.y};
    case Move::neg_x: return {c.x - 1, c.y};
    case Move::pos_y: return {c.x, c.y + 1};
    case Move::neg_y: return {c.x, c.y - 1};
  }
  return c;
}

inline const char* to_string(Move m) {
  switch (m) {
    case Move::pos_x: return "+x";
    case Move::neg_x: return "-x";
    case Move::pos_y: return "+y";
    case Move::neg_y: return "-y";
  }
  return "?";
}

// Moves that stay inside the grid and, when a partition region is given,
// inside that region.
inline std::vector<Move> legal_actions(Cell pos, const GridSpec& grid,
                                       const Partition* partition = nullptr, int region = -1) {
  if (!grid.in_bounds(pos)) throw ValidationError("legal_actions: position outside grid");
  std::vector<Move> out;
  for (Move m : kAllMoves) {
    const Cell dest = apply_move(pos, m);
    if (!grid.in_bounds(dest)) continue;
    if (partition && region >= 0 && !partition->allows(grid, dest, region)) continue;
    out.push_back(m);
  }
  return out;
}

struct PlannerConfig {
  int rollouts_per_step = 100;
  int max_depth = 4;
  double discount = 0.8;
  double ucb_c = 2.0;      // UCB exploration constant
  double k_obs = 4.0;      // observation widening coefficient
  double alpha_obs = 0.25; // observation widening exponent
  enum class Rollout { random, greedy } rollout_policy = Rollout::random;

  void validate() const {
    if (rollouts_per_step < 1) throw ValidationError("PlannerConfig: rollouts_per_step >= 1");
    if (max_depth < 1) throw ValidationError("PlannerConfig: max_depth >= 1");
    if (!(discount > 0.0 && discount <= 1.0))
      throw ValidationError("PlannerConfig: discount in (0,1]");
    if (!(k_obs > 0.0)) throw ValidationError("PlannerConfig: k_obs > 0");
    if (!(alpha_obs >= 0.0 && alpha_obs <= 1.0))
      throw ValidationError("PlannerConfig: alpha_obs in [0,1]");
    if (ucb_c < 0.0) throw ValidationError("PlannerConfig: ucb_c >= 0");
  }
};

// Per-mission cache of footprint geometry and lattice cross-kernel blocks,
// keyed by cell. Kernel quantities depend only on locations, so these are
// shared by every planning call and belief update in a mission.
class CellKernelCache {
 public:
  CellKernelCache(LatticePtr lattice, KernelParams kp, GridSpec grid)
      : lattice_(std::move(lattice)), params_(kp), grid_(grid) {}

  const LatticePtr& lattice() const { return lattice_; }

  const PointMatrix& footprint_points(Cell c) { return entry(c).fp; }

  // k(lattice, footprint(c)); null when no lattice is set.
  const Eigen::MatrixXd* lattice_cols(Cell c) {
    if (!lattice_) return nullptr;
    return &entry(c).lat_cols;
  }

 private:
  struct Entry {
    PointMatrix fp;
    Eigen::MatrixXd lat_cols;
  };
  Entry& entry(Cell c) {
    const int idx = grid_.cell_index(c);
    auto it = cells_.find(idx);
    if (it != cells_.end()) return it->second;
    Entry e;
    auto pts = footprint(c, grid_);
    e.fp = to_points(pts);
    if (lattice_) se_kernel(params_, *lattice_, e.fp, e.lat_cols);
    return cells_.emplace(idx, std::move(e)).first->second;
  }

  LatticePtr lattice_;
  KernelParams params_;
  GridSpec grid_;
  std::unordered_map<int, Entry> cells_;
};

struct PlanningState {
  Cell position;
  const BeliefModel* belief = nullptr;
  int steps_remaining = 0;
};

struct PlanContext {
  const GridSpec* grid = nullptr;
  QuantileSet Q;
  double c = 1.0;
  const Partition* partition = nullptr;
  int region = -1;
  CellKernelCache* cache = nullptr;
};

struct PlanDecision {
  Move move = Move::pos_x;
  std::array<double, 4> value{};  // root action values, indexed by Move
  std::array<int, 4> visits{};
  std::array<bool, 4> legal{};
};

namespace detail {

struct ObsNode;

struct ActionEdge {
  Move move;
  Cell dest;
  int n = 0;
  double q = 0.0;
  bool reward_ready = false;
  double reward = 0.0;
  std::vector<std::unique_ptr<ObsNode>> children;
};

struct VNode {
  int n = 0;
  bool expanded = false;
  std::vector<ActionEdge> edges;
  bool se_ready = false;
  std::vector<double> se_pre;
};

struct ObsNode {
  Eigen::VectorXd values;
  int n = 0;
  VNode child;
};

// One POMCPOW search over a working belief. Observation branches carry the
// hallucinated measurements that produced them; the working belief is
// extended lazily, only when a node actually needs posterior quantities,
// so fully-cached descents cost no linear algebra at all.
class Search {
 public:
  Search(const PlannerConfig& cfg, const PlanContext& ctx, BeliefModel& work, RngStream& rng)
      : cfg_(cfg), ctx_(ctx), work_(work), rng_(rng), root_n_(work.size()) {}

  double simulate(VNode& v, Cell pos, int steps, int depth) {
    if (steps <= 0 || depth <= 0) return 0.0;
    if (!v.expanded) {
      for (Move m : legal_actions(pos, *ctx_.grid, ctx_.partition, ctx_.region))
        v.edges.push_back(ActionEdge{m, apply_move(pos, m)});
      v.expanded = true;
    }
    if (v.edges.empty()) return 0.0;

    ActionEdge& e = v.edges[select_ucb(v)];
    const double r = edge_reward(v, e);

    double future = 0.0;
    const int limit =
        static_cast<int>(std::ceil(cfg_.k_obs * std::pow(static_cast<double>(e.n + 1),
                                                         cfg_.alpha_obs)));
    if (static_cast<int>(e.children.size()) < limit) {
      // New observation branch: sample measurements from the predictive
      // distribution at the destination footprint.
      BeliefModel& b = materialize();
      const PointMatrix& fp = fp_points(e.dest);
      Eigen::VectorXd mean, var;
      b.predict(fp, mean, var);
      const double nv = b.kernel().noise_variance;
      Eigen::VectorXd obs(mean.size());
      for (Eigen::Index i = 0; i < obs.size(); ++i)
        obs[i] = mean[i] + rng_.normal(0.0, std::sqrt(var[i] + nv));
      auto child = std::make_unique<ObsNode>();
      child->values = std::move(obs);
      child->n = 1;
      if (steps > 1 && depth > 1) {
        const int ck = b.push(fp, child->values, lat_cols(e.dest), k_root(e.dest), root_n_);
        future = rollout(e.dest, steps - 1, depth - 1);
        b.pop(ck);
      }
      e.children.push_back(std::move(child));
    } else {
      ObsNode& o = pick_child(e);
      layers_.push_back(Layer{&fp_points(e.dest), &o.values, e.dest});
      future = simulate(o.child, e.dest, steps - 1, depth - 1);
      pop_layer();
      o.n += 1;
    }

    const double value = r + cfg_.discount * future;
    v.n += 1;
    e.n += 1;
    e.q += (value - e.q) / e.n;
    return value;
  }

 private:
  struct Layer {
    const PointMatrix* fp;
    const Eigen::VectorXd* values;
    Cell cell;
    int checkpoint = -1;
  };

  std::size_t select_ucb(const VNode& v) {
    for (std::size_t i = 0; i < v.edges.size(); ++i)
      if (v.edges[i].n == 0) return i;
    const double logn = std::log(std::max(1, v.n));
    std::size_t best = 0;
    double best_u = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.edges.size(); ++i) {
      const ActionEdge& e = v.edges[i];
      const double u = e.q + cfg_.ucb_c * std::sqrt(logn / e.n);
      if (u > best_u) {
        best_u = u;
        best = i;
      }
    }
    return best;
  }

  ObsNode& pick_child(ActionEdge& e) {
    int total = 0;
    for (const auto& c : e.children) total += c->n;
    int r = rng_.uniform_int(0, total - 1);
    for (const auto& c : e.children) {
      r -= c->n;
      if (r < 0) return *c;
    }
    return *e.children.back();
  }

  double edge_reward(VNode& v, ActionEdge& e) {
    if (!e.reward_ready) {
      BeliefModel& b = materialize();
      if (!v.se_ready) {
        v.se_pre = quantile_se(mqe::detail::to_std(b.lattice_mean()), ctx_.Q,
                               static_cast<std::size_t>(b.lattice()->rows()));
        v.se_ready = true;
      }
      e.reward = objective_score_inplace(b, fp_points(e.dest), ctx_.Q, ctx_.c, k_root(e.dest),
                                         root_n_, lat_cols(e.dest), &v.se_pre);
      e.reward_ready = true;
    }
    return e.reward;
  }

  double rollout(Cell pos, int steps, int depth) {
    double total = 0.0, disc = 1.0;
    std::vector<int> cks;
    BeliefModel& b = materialize();
    while (steps > 0 && depth > 0) {
      const auto acts = legal_actions(pos, *ctx_.grid, ctx_.partition, ctx_.region);
      if (acts.empty()) break;
      Move mv;
      double r;
      if (cfg_.rollout_policy == PlannerConfig::Rollout::greedy) {
        mv = acts[0];
        r = -1.0;
        for (Move cand : acts) {
          const Cell dest = apply_move(pos, cand);
          const double s = objective_score_inplace(b, fp_points(dest), ctx_.Q, ctx_.c,
                                                   k_root(dest), root_n_, lat_cols(dest));
          if (s > r) {
            r = s;
            mv = cand;
          }
        }
      } else {
        mv = acts[static_cast<std::size_t>(rng_.uniform_int(0, static_cast<int>(acts.size()) - 1))];
        const Cell dest = apply_move(pos, mv);
        r = objective_score_inplace(b, fp_points(dest), ctx_.Q, ctx_.c, k_root(dest), root_n_,
                                    lat_cols(dest));
      }
      total += disc * r;
      const Cell dest = apply_move(pos, mv);
      --steps;
      --depth;
      disc *= cfg_.discount;
      if (steps > 0 && depth > 0) {
        const PointMatrix& fp = fp_points(dest);
        Eigen::VectorXd mean, var;
        b.predict(fp, mean, var);
        const double nv = b.kernel().noise_variance;
        Eigen::VectorXd obs(mean.size());
        for (Eigen::Index i = 0; i < obs.size(); ++i)
          obs[i] = mean[i] + rng_.normal(0.0, std::sqrt(var[i] + nv));
        cks.push_back(b.push(fp, obs, lat_cols(dest), k_root(dest), root_n_));
      }
      pos = dest;
    }
    for (auto it = cks.rbegin(); it != cks.rend(); ++it) b.pop(*it);
    return total;
  }

  BeliefModel& materialize() {
    for (auto& l : layers_)
      if (l.checkpoint < 0)
        l.checkpoint = work_.push(*l.fp, *l.values, lat_cols(l.cell), k_root(l.cell), root_n_);
    return work_;
  }
  void pop_layer() {
    Layer& l = layers_.back();
    if (l.checkpoint >= 0) work_.pop(l.checkpoint);
    layers_.pop_back();
  }

  const PointMatrix& fp_points(Cell c) {
    if (ctx_.cache) return ctx_.cache->footprint_points(c);
    const int idx = ctx_.grid->cell_index(c);
    auto it = local_fp_.find(idx);
    if (it == local_fp_.end()) {
      auto pts = footprint(c, *ctx_.grid);
      it = local_fp_.emplace(idx, to_points(pts)).first;
    }
    return it->second;
  }
  const Eigen::MatrixXd* lat_cols(Cell c) {
    if (ctx_.cache && ctx_.cache->lattice() == work_.lattice()) return ctx_.cache->lattice_cols(c);
    return nullptr;
  }
  // Cross-kernel block between the root training set (stable during one
  // search) and a cell's footprint.
  const Eigen::MatrixXd* k_root(Cell c) {
    if (root_n_ == 0) return nullptr;
    const int idx = ctx_.grid->cell_index(c);
    auto it = rootk_.find(idx);
    if (it == rootk_.end()) {
      Eigen::MatrixXd k;
      se_kernel(work_.kernel(), work_.train_x().topRows(root_n_), fp_points(c), k);
      it = rootk_.emplace(idx, std::move(k)).first;
    }
    return &it->second;
  }

  const PlannerConfig& cfg_;
  const PlanContext& ctx_;
  BeliefModel& work_;
  RngStream& rng_;
  Eigen::Index root_n_;
  std::vector<Layer> layers_;
  std::unordered_map<int, Eigen::MatrixXd> rootk_;
  std::unordered_map<int, PointMatrix> local_fp_;
};

}  // namespace detail

// One online planning step: POMCPOW over the belief-space search tree.
// Rewards are objective scores of candidate footprints; observations are
// hallucinated measurement vectors, progressively widened. Deterministic
// for a fixed rng state.
inline PlanDecision plan_step(const PlanningState& state, const PlannerConfig& cfg,
                              const PlanContext& ctx, RngStream& rng) {
  cfg.validate();
  ctx.Q.validate();
  if (!ctx.grid || !state.belief) throw ValidationError("plan_step: missing grid or belief");
  const auto acts = legal_actions(state.position, *ctx.grid, ctx.partition, ctx.region);
  if (acts.empty()) throw PlanningError("plan_step: no legal actions");

  PlanDecision d;
  for (Move m : acts) d.legal[static_cast<int>(m)] = true;
  if (acts.size() == 1) {
    d.move = acts[0];
    return d;
  }

  BeliefModel work(*state.belief);
  if (!work.lattice()) {
    if (!ctx.cache || !ctx.cache->lattice())
      throw ValidationError("plan_step: belief has no registered query lattice");
    work.register_lattice(ctx.cache->lattice());
  }
  work.reserve(work.size() + (cfg.max_depth + 2) * ctx.grid->footprint_size() + 8);

  detail::VNode root;
  detail::Search search(cfg, ctx, work, rng);
  for (int i = 0; i < cfg.rollouts_per_step; ++i)
    search.simulate(root, state.position, state.steps_remaining, cfg.max_depth);

  bool found = false;
  double best_q = 0.0;
  for (const auto& e : root.edges) {
    d.value[static_cast<int>(e.move)] = e.q;
    d.visits[static_cast<int>(e.move)] = e.n;
    if (e.n > 0 && (!found || e.q > best_q)) {
      found = true;
      best_q = e.q;
      d.move = e.move;
    }
  }
  if (!found) d.move = acts[0];
  return d;
}

}  // namespace mqe
