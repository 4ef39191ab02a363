#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mqe/errors.hpp"
#include "mqe/field.hpp"
#include "mqe/stats.hpp"
#include "mqe/svg.hpp"
#include "mqe/team.hpp"

namespace mqe {

struct FieldSource {
  enum class Kind { synth, csv, pgm } kind = Kind::synth;
  SynthKind synth_kind = SynthKind::blobs;
  std::uint64_t synth_seed = 7;
  std::string path;
};

inline Field make_field(const FieldSource& src, const GridSpec& grid) {
  switch (src.kind) {
    case FieldSource::Kind::synth: return synth_field(src.synth_kind, grid, src.synth_seed);
    case FieldSource::Kind::csv:
      return load_field(src.path, FieldFormat::csv, grid.pixels_per_cell_side, grid.width_m,
                        grid.height_m);
    case FieldSource::Kind::pgm:
      return load_field(src.path, FieldFormat::pgm, grid.pixels_per_cell_side, grid.width_m,
                        grid.height_m);
  }
  throw ValidationError("make_field: bad source");
}

// Cross-product experiment description covering every studied axis.
struct SweepSpec {
  FieldSource field;
  GridSpec grid;
  std::vector<QuantileSet> quantile_sets = {QuantileSet::quartiles()};
  std::vector<double> alphas = {0.66};
  std::vector<int> budgets = {15};
  std::vector<BudgetPolicy> policies = {BudgetPolicy::complete};
  std::vector<CommRegime> regimes = {CommRegime::stochastic};
  std::vector<int> team_sizes = {4};
  int seed_count = 2;
  std::vector<std::uint64_t> explicit_seeds;  // overrides seed_count when nonempty
  std::uint64_t master_seed = 1;
  PlannerConfig planner;
  KernelParams kernel;
  CommSpec comm;
  double c = 1.0;
  double noise_sd = 0.05;
  PlannerMode mode = PlannerMode::pomcpow;
  SeLattice se_lattice = SeLattice::cells;

  void validate() const {
    grid.validate();
    if (quantile_sets.empty() || alphas.empty() || budgets.empty() || policies.empty() ||
        regimes.empty() || team_sizes.empty())
      throw ValidationError("SweepSpec: every axis list must be nonempty");
    for (const auto& q : quantile_sets) q.validate();
    if (explicit_seeds.empty() && seed_count < 1)
      throw ValidationError("SweepSpec: seed_count >= 1");
    for (std::size_t i = 0; i < explicit_seeds.size(); ++i)
      for (std::size_t j = i + 1; j < explicit_seeds.size(); ++j)
        if (explicit_seeds[i] == explicit_seeds[j])
          throw ValidationError("SweepSpec: explicit seeds must be distinct");
    planner.validate();
    kernel.validate();
    comm.validate();
  }

  int n_seeds() const {
    return explicit_seeds.empty() ? seed_count : static_cast<int>(explicit_seeds.size());
  }
};

namespace detail {

inline std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

inline std::string fmt_prec(double v, const char* spec = "%.12g") {
  if (std::isnan(v)) return "nan";
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

inline std::string join_colon(const std::vector<double>& vs, const char* spec = "%g") {
  std::string out;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) out += ':';
    out += fmt_prec(vs[i], spec);
  }
  return out;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string csv_sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

}  // namespace detail

// One mission variant within a sweep. The id encodes every varied
// parameter and feeds trial-seed derivation, so adding configs never
// perturbs existing rows. Partitioned missions run with alpha forced to
// 1.0; the row keeps the axis value.
struct SweepConfig {
  std::string id;
  QuantileSet Q;
  double alpha = 0.0;  // axis value
  int budget = 0;
  BudgetPolicy policy = BudgetPolicy::complete;
  CommRegime regime = CommRegime::none;
  int team = 1;

  double effective_alpha() const { return regime == CommRegime::partitioned ? 1.0 : alpha; }
};

inline std::vector<SweepConfig> enumerate_configs(const SweepSpec& spec) {
  std::vector<SweepConfig> out;
  for (const auto& Q : spec.quantile_sets)
    for (double alpha : spec.alphas)
      for (int budget : spec.budgets)
        for (BudgetPolicy policy : spec.policies)
          for (CommRegime regime : spec.regimes)
            for (int team : spec.team_sizes) {
              SweepConfig c;
              c.Q = Q;
              c.alpha = alpha;
              c.budget = budget;
              c.policy = policy;
              c.regime = regime;
              c.team = team;
              c.id = "q" + detail::join_colon(Q.qs) + "_a" + detail::fmt_g(alpha) + "_b" +
                     std::to_string(budget) + "_" + to_string(policy) + "_" + to_string(regime) +
                     "_n" + std::to_string(team);
              out.push_back(std::move(c));
            }
  return out;
}

struct ResultRow {
  std::string config_id;
  std::string quantiles;
  double alpha = 0.0;
  int budget = 0;
  std::string policy;
  std::string comm;
  int team = 0;
  double c = 0.0;
  int seed_index = 0;
  std::uint64_t seed = 0;
  std::string status;  // "ok" or sanitized error text
  double rmse = std::numeric_limits<double>::quiet_NaN();
  std::string qerr;  // colon-joined per-quantile absolute errors
  double wall_ms = 0.0;
};

struct ResultsTable {
  std::vector<ResultRow> rows;

  static const char* csv_header() {
    return "config_id,quantiles,alpha,budget,policy,comm,team,c,seed_index,seed,status,rmse,qerr";
  }

  // Deterministic bytes: wall times go to a separate timings file.
  void write_results_csv(std::ostream& os) const {
    os << csv_header() << '\n';
    for (const auto& r : rows) {
      os << r.config_id << ',' << r.quantiles << ',' << detail::fmt_g(r.alpha) << ',' << r.budget
         << ',' << r.policy << ',' << r.comm << ',' << r.team << ',' << detail::fmt_g(r.c) << ','
         << r.seed_index << ',' << r.seed << ',' << r.status << ',' << detail::fmt_prec(r.rmse)
         << ',' << r.qerr << '\n';
    }
  }
  void write_timings_csv(std::ostream& os) const {
    os << "config_id,seed_index,wall_ms\n";
    for (const auto& r : rows)
      os << r.config_id << ',' << r.seed_index << ',' << detail::fmt_prec(r.wall_ms, "%.3f")
         << '\n';
  }
};

inline ResultsTable load_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("results CSV: empty file " + path);
  if (line != ResultsTable::csv_header())
    throw ValidationError("results CSV: unexpected header in " + path);
  ResultsTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t pos = 0;
    while (true) {
      std::size_t next = line.find(',', pos);
      if (next == std::string::npos) {
        f.push_back(line.substr(pos));
        break;
      }
      f.push_back(line.substr(pos, next - pos));
      pos = next + 1;
    }
    if (f.size() != 13) throw ValidationError("results CSV: bad row: " + line);
    ResultRow r;
    r.config_id = f[0];
    r.quantiles = f[1];
    r.alpha = std::stod(f[2]);
    r.budget = std::stoi(f[3]);
    r.policy = f[4];
    r.comm = f[5];
    r.team = std::stoi(f[6]);
    r.c = std::stod(f[7]);
    r.seed_index = std::stoi(f[8]);
    r.seed = std::stoull(f[9]);
    r.status = f[10];
    r.rmse = f[11] == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(f[11]);
    r.qerr = f[12];
    table.rows.push_back(std::move(r));
  }
  return table;
}

using TrialSink = std::function<void(const ResultRow&, const TrialResult&)>;

// Runs the full cross product of configs x seeds. Rows come back in
// deterministic config-then-seed order regardless of worker count. A
// mission whose config fails validation yields a logged error row, not a
// sweep abort.
inline ResultsTable run_sweep(const SweepSpec& spec, int workers = 1,
                              const TrialSink& sink = nullptr) {
  spec.validate();
  const Field field = make_field(spec.field, spec.grid);
  const GridSpec& grid = field.grid();
  const auto configs = enumerate_configs(spec);
  const int n_seeds = spec.n_seeds();

  struct Job {
    const SweepConfig* config;
    int seed_index;
  };
  std::vector<Job> jobs;
  for (const auto& c : configs)
    for (int s = 0; s < n_seeds; ++s) jobs.push_back({&c, s});

  ResultsTable table;
  table.rows.resize(jobs.size());
  std::mutex sink_mutex;
  std::atomic<std::size_t> next{0};

  auto run_job = [&](std::size_t ji) {
    const Job& job = jobs[ji];
    const SweepConfig& sc = *job.config;
    ResultRow row;
    row.config_id = sc.id;
    row.quantiles = detail::join_colon(sc.Q.qs);
    row.alpha = sc.alpha;
    row.budget = sc.budget;
    row.policy = to_string(sc.policy);
    row.comm = to_string(sc.regime);
    row.team = sc.team;
    row.c = spec.c;
    row.seed_index = job.seed_index;
    const std::uint64_t base = spec.explicit_seeds.empty()
                                   ? spec.master_seed
                                   : spec.explicit_seeds[static_cast<std::size_t>(job.seed_index)];
    row.seed = derive_seed(base ^ detail::fnv1a(sc.id), StreamTag::trial,
                           static_cast<std::uint64_t>(job.seed_index));

    MissionConfig mc;
    mc.grid = grid;
    mc.n_robots = sc.team;
    mc.alpha = sc.effective_alpha();
    mc.total_budget = sc.budget;
    mc.policy = sc.policy;
    mc.regime = sc.regime;
    mc.comm = spec.comm;
    mc.Q = sc.Q;
    mc.kernel = spec.kernel;
    mc.planner = spec.planner;
    mc.c = spec.c;
    mc.noise_sd = spec.noise_sd;
    mc.mode = spec.mode;
    mc.se_lattice = spec.se_lattice;
    mc.seed = row.seed;

    try {
      TrialResult res = run_mission(mc, field);
      row.status = "ok";
      row.rmse = res.rmse_final;
      row.qerr = detail::join_colon(res.abs_err, "%.12g");
      row.wall_ms = res.wall_seconds * 1e3;
      if (sink) {
        std::lock_guard<std::mutex> lock(sink_mutex);
        sink(row, res);
      }
    } catch (const Error& e) {
      row.status = detail::csv_sanitize(std::string("error: ") + e.what());
    }
    table.rows[ji] = std::move(row);
  };

  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run_job(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= jobs.size()) return;
          run_job(i);
        }
      });
    for (auto& t : pool) t.join();
  }
  return table;
}

// The studied parameterizations, one per experiment axis.
inline SweepSpec preset(const std::string& name, int seed_count = 2) {
  SweepSpec s;
  s.seed_count = seed_count;
  if (name == "alpha_study") {
    s.alphas = {0.0, 0.33, 0.66, 1.0};
    s.budgets = {15};
    s.policies = {BudgetPolicy::complete};
    s.regimes = {CommRegime::none, CommRegime::stochastic};
    s.team_sizes = {2, 4, 8};
  } else if (name == "budget_study") {
    s.alphas = {0.66};
    s.budgets = {10, 15, 30};
    s.policies = {BudgetPolicy::complete};
    s.regimes = {CommRegime::stochastic};
    s.team_sizes = {1, 2, 4, 8};
  } else if (name == "comms_study") {
    s.alphas = {0.66};
    s.budgets = {15};
    s.policies = {BudgetPolicy::complete};
    s.regimes = {CommRegime::full, CommRegime::stochastic, CommRegime::none,
                 CommRegime::partitioned};
    s.team_sizes = {1, 2, 4, 8};
  } else {
    throw ValidationError("unknown preset: " + name +
                          " (expected alpha_study, budget_study, or comms_study)");
  }
  return s;
}

// ---------------------------------------------------------------------------
// Reporting

struct ReportPair {
  std::string a, b;
};

struct ReportOptions {
  std::string group_by;  // alpha | budget | policy | comm | team | quantiles | c
  std::vector<ReportPair> pairs;
  Alternative alternative = Alternative::greater;  // tests rmse(a) > rmse(b)
};

struct GroupStats {
  std::string key;
  std::size_t n = 0;
  Summary5 stats;
};

struct PairTest {
  std::string a, b;
  int n_pairs = 0;
  double statistic = 0.0;
  double p_value = 1.0;
  std::string band;
};

struct Report {
  std::string group_by;
  std::vector<GroupStats> groups;
  std::vector<PairTest> tests;
};

namespace detail {

inline std::string group_key(const ResultRow& r, const std::string& by) {
  if (by == "alpha") return fmt_g(r.alpha);
  if (by == "budget") return std::to_string(r.budget);
  if (by == "policy") return r.policy;
  if (by == "comm") return r.comm;
  if (by == "team") return std::to_string(r.team);
  if (by == "quantiles") return r.quantiles;
  if (by == "c") return fmt_g(r.c);
  throw ValidationError("report: unknown group-by parameter: " + by);
}

// All parameters except the grouped one, plus the seed index.
inline std::string residual_key(const ResultRow& r, const std::string& by) {
  std::string k;
  auto add = [&](const std::string& name, const std::string& v) {
    if (name == by) return;
    k += name + "=" + v + "|";
  };
  add("quantiles", r.quantiles);
  add("alpha", fmt_g(r.alpha));
  add("budget", std::to_string(r.budget));
  add("policy", r.policy);
  add("comm", r.comm);
  add("team", std::to_string(r.team));
  add("c", fmt_g(r.c));
  k += "seed=" + std::to_string(r.seed_index);
  return k;
}

}  // namespace detail

inline Report make_report(const ResultsTable& table, const ReportOptions& opts) {
  Report rep;
  rep.group_by = opts.group_by;

  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> by_group;
  std::map<std::string, std::map<std::string, double>> paired;  // group -> residual -> rmse
  for (const auto& r : table.rows) {
    if (r.status != "ok") continue;
    const std::string g = detail::group_key(r, opts.group_by);
    if (by_group.find(g) == by_group.end()) order.push_back(g);
    by_group[g].push_back(r.rmse);
    paired[g][detail::residual_key(r, opts.group_by)] = r.rmse;
  }
  if (by_group.empty()) throw ValidationError("report: no successful rows to group");

  for (const auto& g : order) {
    GroupStats gs;
    gs.key = g;
    gs.n = by_group[g].size();
    gs.stats = summary5(by_group[g]);
    rep.groups.push_back(gs);
  }

  for (const auto& pr : opts.pairs) {
    auto ia = paired.find(pr.a);
    auto ib = paired.find(pr.b);
    if (ia == paired.end() || ib == paired.end())
      throw ValidationError("report: pair group not found: " + pr.a + " vs " + pr.b);
    PairedSample ps;
    std::vector<std::string> orphans;
    for (const auto& [key, va] : ia->second) {
      auto it = ib->second.find(key);
      if (it == ib->second.end()) {
        orphans.push_back(pr.a + "/" + key);
        continue;
      }
      ps.xs.push_back(va);
      ps.ys.push_back(it->second);
    }
    for (const auto& [key, vb] : ib->second)
      if (ia->second.find(key) == ia->second.end()) orphans.push_back(pr.b + "/" + key);
    if (!orphans.empty()) {
      std::string msg = "report: unpairable rows for " + pr.a + " vs " + pr.b + ":";
      for (const auto& o : orphans) msg += " " + o;
      throw ValidationError(msg);
    }
    if (ps.xs.empty())
      throw ValidationError("report: no paired rows for " + pr.a + " vs " + pr.b);

    PairTest t;
    t.a = pr.a;
    t.b = pr.b;
    t.n_pairs = static_cast<int>(ps.xs.size());
    try {
      const WilcoxonResult w = wilcoxon_signed_rank(ps, opts.alternative);
      t.statistic = w.statistic;
      t.p_value = w.p_value;
    } catch (const ValidationError&) {
      // Identical samples in both groups: no evidence of a difference.
      t.statistic = 0.0;
      t.p_value = 1.0;
    }
    t.band = significance_band(t.p_value);
    rep.tests.push_back(std::move(t));
  }
  return rep;
}

inline void write_report_csv(const Report& rep, std::ostream& os) {
  os << "kind," << "group_a,group_b,n,min,q1,median,q3,max,W,p,band\n";
  for (const auto& g : rep.groups)
    os << "group," << g.key << ",," << g.n << ',' << detail::fmt_prec(g.stats.min) << ','
       << detail::fmt_prec(g.stats.q1) << ',' << detail::fmt_prec(g.stats.median) << ','
       << detail::fmt_prec(g.stats.q3) << ',' << detail::fmt_prec(g.stats.max) << ",,,\n";
  for (const auto& t : rep.tests)
    os << "pair," << t.a << ',' << t.b << ',' << t.n_pairs << ",,,,,," << detail::fmt_prec(t.statistic)
       << ',' << detail::fmt_prec(t.p_value) << ',' << t.band << '\n';
}

inline void render_report_boxplot(const Report& rep, const std::string& out_path) {
  std::vector<BoxplotGroup> groups;
  for (const auto& g : rep.groups) groups.push_back({g.key, g.stats});
  std::vector<BoxplotBracket> brackets;
  for (const auto& t : rep.tests) {
    BoxplotBracket b;
    bool found_a = false, found_b = false;
    for (std::size_t i = 0; i < rep.groups.size(); ++i) {
      if (rep.groups[i].key == t.a) {
        b.a = i;
        found_a = true;
      }
      if (rep.groups[i].key == t.b) {
        b.b = i;
        found_b = true;
      }
    }
    if (!found_a || !found_b) continue;
    b.band = t.band;
    brackets.push_back(b);
  }
  render_boxplot(groups, brackets, "RMSE", out_path);
}

// ---------------------------------------------------------------------------
// JSON sweep configuration (unknown keys rejected)

namespace detail {

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok |= it.key() == k;
    if (!ok) throw ValidationError("config: unknown key '" + it.key() + "' in " + where);
  }
}

}  // namespace detail

// Applies a JSON document on top of an existing spec (preset or defaults).
inline void apply_sweep_json(SweepSpec& s, const nlohmann::json& j) {
  detail::check_keys(j,
                     {"field", "grid", "quantile_sets", "alphas", "budgets", "policies", "comms",
                      "teams", "seeds", "master_seed", "planner", "kernel", "comm", "c",
                      "noise_sd", "mode", "se_lattice"},
                     "top level");
  if (j.contains("field")) {
    const auto& f = j.at("field");
    detail::check_keys(f, {"source", "kind", "seed", "path"}, "field");
    const std::string src = f.value("source", "synth");
    if (src == "synth") {
      s.field.kind = FieldSource::Kind::synth;
      if (f.contains("kind")) s.field.synth_kind = parse_synth_kind(f.at("kind").get<std::string>());
      if (f.contains("seed")) s.field.synth_seed = f.at("seed").get<std::uint64_t>();
    } else if (src == "csv" || src == "pgm") {
      s.field.kind = src == "csv" ? FieldSource::Kind::csv : FieldSource::Kind::pgm;
      s.field.path = f.at("path").get<std::string>();
    } else {
      throw ValidationError("config: field.source must be synth, csv, or pgm");
    }
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    detail::check_keys(g, {"cells_x", "cells_y", "width_m", "height_m", "pixels_per_cell_side"},
                       "grid");
    if (g.contains("cells_x")) s.grid.cells_x = g.at("cells_x").get<int>();
    if (g.contains("cells_y")) s.grid.cells_y = g.at("cells_y").get<int>();
    if (g.contains("width_m")) s.grid.width_m = g.at("width_m").get<double>();
    if (g.contains("height_m")) s.grid.height_m = g.at("height_m").get<double>();
    if (g.contains("pixels_per_cell_side"))
      s.grid.pixels_per_cell_side = g.at("pixels_per_cell_side").get<int>();
  }
  if (j.contains("quantile_sets")) {
    s.quantile_sets.clear();
    for (const auto& q : j.at("quantile_sets"))
      s.quantile_sets.push_back(QuantileSet(q.get<std::vector<double>>()));
  }
  if (j.contains("alphas")) s.alphas = j.at("alphas").get<std::vector<double>>();
  if (j.contains("budgets")) s.budgets = j.at("budgets").get<std::vector<int>>();
  if (j.contains("policies")) {
    s.policies.clear();
    for (const auto& p : j.at("policies")) s.policies.push_back(parse_budget_policy(p));
  }
  if (j.contains("comms")) {
    s.regimes.clear();
    for (const auto& r : j.at("comms")) s.regimes.push_back(parse_comm_regime(r));
  }
  if (j.contains("teams")) s.team_sizes = j.at("teams").get<std::vector<int>>();
  if (j.contains("seeds")) {
    const auto& sd = j.at("seeds");
    if (sd.is_number_integer()) {
      s.seed_count = sd.get<int>();
      s.explicit_seeds.clear();
    } else {
      s.explicit_seeds = sd.get<std::vector<std::uint64_t>>();
    }
  }
  if (j.contains("master_seed")) s.master_seed = j.at("master_seed").get<std::uint64_t>();
  if (j.contains("planner")) {
    const auto& p = j.at("planner");
    detail::check_keys(p,
                       {"rollouts_per_step", "max_depth", "discount", "ucb_c", "k_obs",
                        "alpha_obs", "rollout_policy"},
                       "planner");
    if (p.contains("rollouts_per_step"))
      s.planner.rollouts_per_step = p.at("rollouts_per_step").get<int>();
    if (p.contains("max_depth")) s.planner.max_depth = p.at("max_depth").get<int>();
    if (p.contains("discount")) s.planner.discount = p.at("discount").get<double>();
    if (p.contains("ucb_c")) s.planner.ucb_c = p.at("ucb_c").get<double>();
    if (p.contains("k_obs")) s.planner.k_obs = p.at("k_obs").get<double>();
    if (p.contains("alpha_obs")) s.planner.alpha_obs = p.at("alpha_obs").get<double>();
    if (p.contains("rollout_policy"))
      s.planner.rollout_policy = p.at("rollout_policy").get<std::string>() == "greedy"
                                     ? PlannerConfig::Rollout::greedy
                                     : PlannerConfig::Rollout::random;
  }
  if (j.contains("kernel")) {
    const auto& k = j.at("kernel");
    detail::check_keys(k, {"lengthscale", "signal_variance", "noise_variance"}, "kernel");
    if (k.contains("lengthscale")) s.kernel.lengthscale = k.at("lengthscale").get<double>();
    if (k.contains("signal_variance"))
      s.kernel.signal_variance = k.at("signal_variance").get<double>();
    if (k.contains("noise_variance"))
      s.kernel.noise_variance = k.at("noise_variance").get<double>();
  }
  if (j.contains("comm")) {
    const auto& cm = j.at("comm");
    detail::check_keys(cm, {"eta", "r"}, "comm");
    if (cm.contains("eta")) s.comm.eta = cm.at("eta").get<double>();
    if (cm.contains("r")) s.comm.r = cm.at("r").get<double>();
  }
  if (j.contains("c")) s.c = j.at("c").get<double>();
  if (j.contains("noise_sd")) s.noise_sd = j.at("noise_sd").get<double>();
  if (j.contains("mode")) s.mode = parse_planner_mode(j.at("mode").get<std::string>());
  if (j.contains("se_lattice")) {
    const std::string v = j.at("se_lattice").get<std::string>();
    if (v != "cells" && v != "pixels")
      throw ValidationError("config: se_lattice must be cells or pixels");
    s.se_lattice = v == "pixels" ? SeLattice::pixels : SeLattice::cells;
  }
}

inline SweepSpec sweep_from_json_file(const std::string& path,
                                      std::optional<SweepSpec> base = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config: JSON parse error in " + path + ": " + e.what());
  }
  SweepSpec s = base ? *base : SweepSpec{};
  apply_sweep_json(s, j);
  return s;
}

}  // namespace mqe
