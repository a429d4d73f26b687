#include "heterosim/cli.hpp"

#include "heterosim/report.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>

namespace heterosim {

namespace fs = std::filesystem;

namespace {

struct Flags {
  std::string config;
  std::optional<Index> reps, n_deriv, n_valid, curve_reps, large_n, loess_grid;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<Scalar> loess_span;
  std::optional<std::string> outdir, noise_scale, input;
  std::vector<std::string> families, panels;
  std::vector<Scalar> mv_percent;
  bool svg = false;
};

void add_common(CLI::App* sub, Flags& f, bool replicated) {
  sub->add_option("--config", f.config, "Config file (key = value sections)");
  sub->add_option("--seed", f.seed, "Master seed (required)");
  sub->add_option("--outdir", f.outdir, "Output directory (default $HETEROSIM_OUTDIR)");
  sub->add_option("--loess-span", f.loess_span, "Loess span");
  sub->add_option("--loess-grid", f.loess_grid, "Calibration-curve grid points");
  sub->add_flag("--svg", f.svg, "Also write SVG calibration overlays");
  if (replicated) {
    sub->add_option("--reps", f.reps, "Replicates per scenario");
    sub->add_option("--workers", f.workers, "Worker threads");
    sub->add_option("--n-deriv", f.n_deriv, "Derivation sample size");
    sub->add_option("--n-valid", f.n_valid, "Validation sample size");
    sub->add_option("--curve-reps", f.curve_reps, "Replicates per scenario with calibration curves");
    sub->add_option("--noise-scale", f.noise_scale, "Grid noise levels are 'sd' or 'variance'");
  }
}

void log_line(std::ostream& log, const std::string& msg) { log << msg << '\n' << std::flush; }

}  // namespace

RunConfig parse_args(int argc, const char* const* argv) {
  CLI::App app{"heterosim: predictor measurement heterogeneity simulations"};
  app.require_subcommand(1);
  Flags f;

  auto* grid = app.add_subcommand("grid", "Factorial scenario grid");
  add_common(grid, f, true);
  grid->add_option("--family", f.families,
                   "single, two_pred_one_consistent, two_pred_both, single_differential");

  auto* differential = app.add_subcommand("differential", "The four differential presets");
  add_common(differential, f, true);

  auto* large = app.add_subcommand("large-sample", "Large-sample single-predictor panels");
  add_common(large, f, false);
  large->add_option("--panel", f.panels, "Panel name(s); default all");
  large->add_option("--n", f.large_n, "Cohort size");

  auto* sweep = app.add_subcommand("brier-sweep", "Decomposed Brier score against %MV");
  add_common(sweep, f, false);
  sweep->add_option("--mv", f.mv_percent, "%MV grid");
  sweep->add_option("--n", f.large_n, "Cohort size");

  auto* scenario = app.add_subcommand("scenario", "Custom scenarios from a config file");
  add_common(scenario, f, true);

  auto* report = app.add_subcommand("report", "Re-aggregate an existing replicates.csv");
  report->add_option("input", f.input, "replicates.csv")->required();
  report->add_option("--outdir", f.outdir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    throw CliExit{app.exit(e)};
  }

  RunConfig c;
  const CLI::App* chosen = app.get_subcommands().front();
  if (!f.config.empty()) c = parse_config_file(f.config);
  c.command = command_from_string(chosen->get_name());

  if (!f.families.empty()) {
    c.families.clear();
    for (const auto& name : f.families) {
      try {
        c.families.push_back(family_from_string(name));
      } catch (const InvalidParameter& e) {
        throw ConfigError(e.what(), 0, "family");
      }
    }
  }
  if (f.noise_scale) {
    if (*f.noise_scale == "sd") c.noise_scale = NoiseScale::standard_deviation;
    else if (*f.noise_scale == "variance") c.noise_scale = NoiseScale::variance;
    else throw ConfigError("noise scale must be 'sd' or 'variance'", 0, "noise_scale");
  }
  if (f.reps) c.reps = *f.reps;
  if (f.n_deriv) c.n_deriv = *f.n_deriv;
  if (f.n_valid) c.n_valid = *f.n_valid;
  if (f.seed) c.seed = *f.seed;
  if (f.workers) c.workers = *f.workers;
  if (f.curve_reps) c.curve_reps = *f.curve_reps;
  if (f.svg) c.svg = true;
  if (f.loess_span) c.loess.span = *f.loess_span;
  if (f.loess_grid) c.loess.grid = static_cast<int>(*f.loess_grid);
  if (!f.panels.empty()) c.panels = f.panels;
  if (f.large_n) c.large_n = *f.large_n;
  if (!f.mv_percent.empty()) c.mv_percent = f.mv_percent;
  if (f.input) c.input = *f.input;
  if (f.outdir) c.outdir = *f.outdir;
  return c;
}

void run(const RunConfig& c, std::ostream& log) {
  validate(c);
  const fs::path outdir = resolve_outdir(c);
  const auto started = std::chrono::steady_clock::now();

  switch (c.command) {
    case Command::grid:
    case Command::differential:
    case Command::scenario: {
      GridRunOptions opt;
      opt.reps = c.reps;
      opt.master_seed = *c.seed;
      opt.workers = c.workers;
      opt.curve_reps = c.curve_reps;
      opt.loess = c.loess;
      std::vector<Scenario> scenarios = scenarios_for(c);
      log_line(log, "running " + std::to_string(scenarios.size()) + " scenario(s) x " +
                        std::to_string(c.reps) + " replicate(s) on " +
                        std::to_string(c.workers) + " worker(s)");
      const GridRun result = run_grid(std::move(scenarios), opt);
      ReportOptions ro;
      ro.table4 = c.command == Command::differential;
      ro.svg = c.svg;
      for (const auto& path : emit_reports(result, outdir, ro)) log_line(log, "wrote " + path.string());
      break;
    }
    case Command::large_sample: {
      const std::vector<std::string> names = c.panels.empty() ? large_sample_panel_names() : c.panels;
      std::vector<LargeSampleResult> results;
      fs::create_directories(outdir);
      for (std::size_t k = 0; k < names.size(); ++k) {
        LargeSampleConfig cfg = large_sample_panel(names[k]);
        cfg.n = c.large_n;
        cfg.seed = derive_seed(*c.seed, fnv1a64(names[k]));
        cfg.curves = true;
        cfg.loess = c.loess;
        log_line(log, "panel " + names[k]);
        results.push_back(run_large_sample(cfg));
      }
      {
        std::ofstream out(outdir / "large_sample.csv", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write large_sample.csv");
        write_large_sample_csv(out, results);
      }
      fs::create_directories(outdir / "curves");
      for (const auto& r : results) {
        for (const auto& [mode, curve] : {std::pair{"transported", &r.transported_curve},
                                          std::pair{"reestimated", &r.reestimated_curve}}) {
          const fs::path stem = outdir / "curves" / (r.name + "_" + mode);
          std::ofstream csv(stem.string() + ".csv", std::ios::binary);
          write_curve_csv(csv, *curve);
          if (c.svg) {
            std::ofstream svg(stem.string() + ".svg", std::ios::binary);
            write_curves_svg(svg, r.name + " (" + mode + ")", std::span(curve, 1));
          }
        }
      }
      log_line(log, "wrote " + (outdir / "large_sample.csv").string());
      break;
    }
    case Command::brier_sweep: {
      BrierSweepOptions opt;
      opt.n = c.large_n;
      opt.seed = *c.seed;
      const auto rows = brier_sweep(c.mv_percent, opt);
      fs::create_directories(outdir);
      std::ofstream out(outdir / "brier_sweep.csv", std::ios::binary);
      if (!out) throw std::runtime_error("cannot write brier_sweep.csv");
      write_brier_sweep_csv(out, rows);
      log_line(log, "wrote " + (outdir / "brier_sweep.csv").string());
      break;
    }
    case Command::report: {
      std::ifstream in(c.input);
      if (!in) throw std::runtime_error("cannot read '" + c.input + "'");
      const GridRun result = read_replicates_csv(in);
      ReportOptions ro;
      ro.svg = false;
      for (const auto& path : emit_reports(result, outdir, ro)) log_line(log, "wrote " + path.string());
      break;
    }
  }

  const auto seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  char buf[64];
  std::snprintf(buf, sizeof buf, "done in %.1f s", seconds);
  log_line(log, buf);
}

int main_entry(int argc, const char* const* argv) {
  try {
    const RunConfig config = parse_args(argc, argv);
    run(config, std::cerr);
    return 0;
  } catch (const CliExit& e) {
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "heterosim: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace heterosim
