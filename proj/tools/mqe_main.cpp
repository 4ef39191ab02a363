// Command-line front end: run parameter sweeps, report grouped statistics
// with significance tests, and render mission path overlays.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "mqe/harness.hpp"

namespace fs = std::filesystem;

namespace {

int cmd_run(const std::string& config_path, const std::string& preset_name, int seeds,
            std::uint64_t master_seed, bool has_master, int workers, const std::string& out_dir,
            bool save_trials) {
  mqe::SweepSpec spec;
  if (!preset_name.empty()) spec = mqe::preset(preset_name);
  if (!config_path.empty()) spec = mqe::sweep_from_json_file(config_path, spec);
  if (config_path.empty() && preset_name.empty())
    throw mqe::ValidationError("run: provide --config and/or --preset");
  if (seeds > 0) {
    spec.seed_count = seeds;
    spec.explicit_seeds.clear();
  }
  if (has_master) spec.master_seed = master_seed;
  spec.validate();

  fs::create_directories(out_dir);
  fs::path trials_dir = fs::path(out_dir) / "trials";
  if (save_trials) fs::create_directories(trials_dir);

  // Echo the resolved field so render can reuse it.
  const mqe::Field field = mqe::make_field(spec.field, spec.grid);
  mqe::save_field_csv(field, (fs::path(out_dir) / "field.csv").string());

  mqe::TrialSink sink;
  if (save_trials) {
    sink = [&](const mqe::ResultRow& row, const mqe::TrialResult& res) {
      const fs::path p = trials_dir / ("trial_" + row.config_id + "_s" +
                                       std::to_string(row.seed_index) + ".json");
      std::ofstream out(p);
      if (!out) throw mqe::IoError("cannot write " + p.string());
      out << res.to_json().dump(1) << '\n';
    };
  }

  const auto t0 = std::chrono::steady_clock::now();
  mqe::ResultsTable table = mqe::run_sweep(spec, workers, sink);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  {
    std::ofstream out(fs::path(out_dir) / "results.csv");
    if (!out) throw mqe::IoError("cannot write results.csv in " + out_dir);
    table.write_results_csv(out);
  }
  {
    std::ofstream out(fs::path(out_dir) / "timings.csv");
    if (!out) throw mqe::IoError("cannot write timings.csv in " + out_dir);
    table.write_timings_csv(out);
  }

  std::size_t ok = 0;
  for (const auto& r : table.rows) ok += r.status == "ok";
  std::cout << "wrote " << table.rows.size() << " rows (" << ok << " ok) to " << out_dir
            << "/results.csv in " << mqe::detail::fmt_prec(secs, "%.1f") << " s\n";
  return 0;
}

int cmd_report(const std::string& in_path, const std::string& group_by,
               const std::string& pairs_arg, const std::string& alternative,
               const std::string& out_dir) {
  mqe::ResultsTable table = mqe::load_results_csv(in_path);
  mqe::ReportOptions opts;
  opts.group_by = group_by;
  opts.alternative = mqe::parse_alternative(alternative);
  if (!pairs_arg.empty()) {
    std::size_t pos = 0;
    while (pos <= pairs_arg.size()) {
      std::size_t next = pairs_arg.find(',', pos);
      if (next == std::string::npos) next = pairs_arg.size();
      const std::string tok = pairs_arg.substr(pos, next - pos);
      const std::size_t colon = tok.find(':');
      if (colon == std::string::npos)
        throw mqe::ValidationError("report: pair must look like A:B, got '" + tok + "'");
      opts.pairs.push_back({tok.substr(0, colon), tok.substr(colon + 1)});
      pos = next + 1;
      if (next == pairs_arg.size()) break;
    }
  }

  const mqe::Report rep = mqe::make_report(table, opts);
  fs::create_directories(out_dir);
  {
    std::ofstream out(fs::path(out_dir) / "report.csv");
    if (!out) throw mqe::IoError("cannot write report.csv in " + out_dir);
    mqe::write_report_csv(rep, out);
  }
  mqe::render_report_boxplot(rep, (fs::path(out_dir) / "boxplot.svg").string());

  for (const auto& g : rep.groups)
    std::cout << group_by << "=" << g.key << "  n=" << g.n
              << "  median=" << mqe::detail::fmt_prec(g.stats.median, "%.6g")
              << "  max=" << mqe::detail::fmt_prec(g.stats.max, "%.6g") << "\n";
  for (const auto& t : rep.tests)
    std::cout << t.a << " vs " << t.b << ": W=" << mqe::detail::fmt_prec(t.statistic, "%.6g")
              << " p=" << mqe::detail::fmt_prec(t.p_value, "%.4g") << " [" << t.band << "]\n";
  std::cout << "wrote report.csv and boxplot.svg to " << out_dir << "\n";
  return 0;
}

int cmd_render(const std::string& trial_path, const std::string& field_path,
               const std::string& out_path) {
  std::ifstream in(trial_path);
  if (!in) throw mqe::IoError("cannot open " + trial_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw mqe::ValidationError("render: bad trial JSON: " + std::string(e.what()));
  }
  const mqe::TrialResult result = mqe::TrialResult::from_json(j);

  const mqe::GridSpec& g = result.config.grid;
  const bool pgm = field_path.size() > 4 && field_path.substr(field_path.size() - 4) == ".pgm";
  const mqe::Field field =
      mqe::load_field(field_path, pgm ? mqe::FieldFormat::pgm : mqe::FieldFormat::csv,
                      g.pixels_per_cell_side, g.width_m, g.height_m);
  mqe::render_paths(result, field, out_path);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multirobot quantile estimation simulator"};
  app.require_subcommand(1);

  std::string config_path, preset_name, out_dir = "out";
  int seeds = 0;
  std::uint64_t master_seed = 0;
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  bool save_trials = false;

  auto* run = app.add_subcommand("run", "run a sweep from a config and/or preset");
  run->add_option("--config", config_path, "sweep config JSON");
  run->add_option("--preset", preset_name, "alpha_study | budget_study | comms_study");
  run->add_option("--seeds", seeds, "number of seeds per config");
  auto* ms = run->add_option("--master-seed", master_seed, "master seed");
  run->add_option("--workers", workers, "parallel trial workers");
  run->add_option("--out", out_dir, "output directory");
  run->add_flag("--save-trials", save_trials, "write per-trial JSON documents");

  std::string in_path, group_by, pairs_arg, alternative = "greater";
  auto* report = app.add_subcommand("report", "grouped statistics and significance tests");
  report->add_option("--in", in_path, "results.csv path")->required();
  report->add_option("--group-by", group_by, "grouping parameter")->required();
  report->add_option("--pairs", pairs_arg, "comma-separated A:B group pairs to test");
  report->add_option("--alternative", alternative, "less | greater | two_sided");
  report->add_option("--out", out_dir, "output directory");

  std::string trial_path, field_path, svg_out = "paths.svg";
  auto* render = app.add_subcommand("render", "draw mission paths over the field");
  render->add_option("--trial", trial_path, "trial JSON document")->required();
  render->add_option("--field", field_path, "field raster (csv or pgm)")->required();
  render->add_option("--out", svg_out, "output SVG path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(run))
      return cmd_run(config_path, preset_name, seeds, master_seed, !ms->empty(), workers, out_dir,
                     save_trials);
    if (app.got_subcommand(report))
      return cmd_report(in_path, group_by, pairs_arg, alternative, out_dir);
    if (app.got_subcommand(render)) return cmd_render(trial_path, field_path, svg_out);
  } catch (const mqe::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const mqe::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
