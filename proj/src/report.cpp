#include "heterosim/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace heterosim {

namespace fs = std::filesystem;

namespace {

std::string num(Scalar v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string exact(Scalar v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Scalar parse_field(const std::string& s) {
  if (s == "NA" || s.empty()) return std::numeric_limits<Scalar>::quiet_NaN();
  char* end = nullptr;
  const Scalar v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw std::runtime_error("replicates CSV: bad number '" + s + "'");
  return v;
}

void summary_fields(std::ostream& out, const GridSummary& s) {
  out << num(s.c_deriv_mean) << ',' << num(s.c_deriv_sd) << ',' << num(s.c_valid_mean) << ','
      << num(s.c_valid_sd) << ',' << num(s.slope_median) << ',' << num(s.slope_sd) << ','
      << num(s.citl_mean) << ',' << num(s.citl_sd) << ',' << num(s.brier_deriv_mean) << ','
      << num(s.brier_deriv_sd) << ',' << num(s.brier_valid_mean) << ',' << num(s.brier_valid_sd);
}

// Keeps file names portable; ids are already restricted but '|' may appear.
std::string file_stem(const std::string& id) {
  std::string out = id;
  for (char& ch : out) {
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.')) ch = '_';
  }
  return out;
}

std::ofstream open_for_write(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

void write_summary_csv(std::ostream& out, std::span<const GridSummary> summaries) {
  out << kSummaryHeader << '\n';
  for (const auto& s : summaries) {
    out << s.scenario_id << ',';
    summary_fields(out, s);
    out << ',' << s.n_excluded << '\n';
  }
}

void write_replicates_csv(std::ostream& out, const GridRun& run) {
  out << kReplicateHeader << '\n';
  for (const auto& reps : run.replicates) {
    for (const auto& r : reps) {
      out << r.scenario_id << ',' << r.rep_index << ',' << (r.excluded ? 1 : 0);
      if (r.excluded) {
        out << ",NA,NA,NA,NA,NA,NA,NA,NA,NA,NA,NA,NA,NA,NA\n";
        continue;
      }
      const auto& d = r.in_sample;
      const auto& v = r.out_of_sample;
      out << ',' << exact(d.c_statistic) << ',' << exact(v.c_statistic) << ','
          << exact(d.calib_slope) << ',' << exact(v.calib_slope) << ',' << exact(d.citl) << ','
          << exact(v.citl) << ',' << exact(d.brier.total) << ','
          << exact(d.brier.calibration_term) << ',' << exact(d.brier.refinement_term) << ','
          << exact(v.brier.total) << ',' << exact(v.brier.calibration_term) << ','
          << exact(v.brier.refinement_term) << ',' << exact(r.deriv_fit.alpha_hat) << ',';
      for (Index j = 0; j < r.deriv_fit.beta_hat.size(); ++j) {
        out << (j ? ";" : "") << exact(r.deriv_fit.beta_hat[j]);
      }
      out << '\n';
    }
  }
}

void write_table3_csv(std::ostream& out, std::span<const PooledRow> rows) {
  out << "variance_order,psi_valid,theta_valid,c_deriv_mean,c_deriv_sd,c_valid_mean,c_valid_sd,"
         "slope_median,slope_sd,citl_x10_mean,citl_x10_sd,brier_deriv_mean,brier_deriv_sd,"
         "brier_valid_mean,brier_valid_sd,n_cells,n_excluded\n";
  for (const auto& row : rows) {
    const GridSummary& s = row.summary;
    out << to_string(row.order) << ',' << num(row.psi) << ',' << num(row.theta) << ','
        << num(s.c_deriv_mean) << ',' << num(s.c_deriv_sd) << ',' << num(s.c_valid_mean) << ','
        << num(s.c_valid_sd) << ',' << num(s.slope_median) << ',' << num(s.slope_sd) << ','
        << num(10.0 * s.citl_mean) << ',' << num(10.0 * s.citl_sd) << ','
        << num(s.brier_deriv_mean) << ',' << num(s.brier_deriv_sd) << ','
        << num(s.brier_valid_mean) << ',' << num(s.brier_valid_sd) << ',' << row.n_cells << ','
        << s.n_excluded << '\n';
  }
}

void write_table4_csv(std::ostream& out, const GridRun& presets) {
  out << "differential_at,case_level,c_deriv_mean,c_deriv_sd,c_valid_mean,c_valid_sd,"
         "slope_median,slope_sd,brier_deriv_mean,brier_deriv_sd,brier_valid_mean,"
         "brier_valid_sd,n_excluded\n";
  for (const auto& s : presets.summaries) {
    // ids look like differential_<setting>_case<level>
    std::string setting = "custom";
    std::string level = "NA";
    const std::string& id = s.scenario_id;
    if (const auto c = id.rfind("_case"); c != std::string::npos && id.rfind("differential_", 0) == 0) {
      setting = id.substr(13, c - 13);
      level = id.substr(c + 5);
    }
    out << setting << ',' << level << ',' << num(s.c_deriv_mean) << ',' << num(s.c_deriv_sd)
        << ',' << num(s.c_valid_mean) << ',' << num(s.c_valid_sd) << ',' << num(s.slope_median)
        << ',' << num(s.slope_sd) << ',' << num(s.brier_deriv_mean) << ','
        << num(s.brier_deriv_sd) << ',' << num(s.brier_valid_mean) << ','
        << num(s.brier_valid_sd) << ',' << s.n_excluded << '\n';
  }
}

void write_large_sample_csv(std::ostream& out, std::span<const LargeSampleResult> results) {
  out << "panel,mode,c_statistic,brier,brier_calibration,brier_refinement,calib_slope,citl,"
         "n,n_events\n";
  for (const auto& r : results) {
    const std::pair<const char*, const PerformanceReport*> modes[] = {
        {"derivation", &r.derivation}, {"transported", &r.transported}, {"reestimated", &r.reestimated}};
    for (const auto& [mode, p] : modes) {
      out << r.name << ',' << mode << ',' << num(p->c_statistic) << ',' << num(p->brier.total)
          << ',' << num(p->brier.calibration_term) << ',' << num(p->brier.refinement_term) << ','
          << num(p->calib_slope) << ',' << num(p->citl) << ',' << p->n << ',' << p->n_events
          << '\n';
    }
  }
}

void write_brier_sweep_csv(std::ostream& out, std::span<const BrierSweepRow> rows) {
  out << "mv_percent,var_eps_deriv,var_eps_valid,reest_total,reest_calibration,"
         "reest_refinement,transp_total,transp_calibration,transp_refinement\n";
  for (const auto& r : rows) {
    out << num(r.mv_percent) << ',' << num(r.var_deriv) << ',' << num(r.var_valid) << ','
        << num(r.reestimated.total) << ',' << num(r.reestimated.calibration_term) << ','
        << num(r.reestimated.refinement_term) << ',' << num(r.transported.total) << ','
        << num(r.transported.calibration_term) << ',' << num(r.transported.refinement_term)
        << '\n';
  }
}

void write_curves_svg(std::ostream& out, const std::string& title,
                      std::span<const CalibrationCurve> curves) {
  constexpr int size = 400;
  constexpr int margin = 40;
  const auto px = [&](Scalar v) { return margin + v * (size - 2 * margin); };
  const auto py = [&](Scalar v) { return size - margin - v * (size - 2 * margin); };
  char buf[96];

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
      << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << size / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"12\">"
      << title << "</text>\n";
  std::snprintf(buf, sizeof buf, "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" ", margin,
                margin, size - 2 * margin, size - 2 * margin);
  out << buf << "fill=\"none\" stroke=\"black\"/>\n";
  std::snprintf(buf, sizeof buf, "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" ", px(0),
                py(0), px(1), py(1));
  out << buf << "stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  out << "<text x=\"" << size / 2 << "\" y=\"" << size - 10
      << "\" text-anchor=\"middle\" font-size=\"11\">Predicted probability</text>\n";
  out << "<text x=\"12\" y=\"" << size / 2 << "\" transform=\"rotate(-90 12 " << size / 2
      << ")\" text-anchor=\"middle\" font-size=\"11\">Observed proportion</text>\n";

  const Scalar opacity = std::clamp(8.0 / static_cast<Scalar>(std::max<std::size_t>(1, curves.size())), 0.02, 0.8);
  for (const auto& curve : curves) {
    out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-opacity=\"" << num(opacity)
        << "\" points=\"";
    for (const auto& pt : curve) {
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ", px(std::clamp(pt.predicted, 0.0, 1.0)),
                    py(std::clamp(pt.observed, 0.0, 1.0)));
      out << buf;
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
}

GridRun read_replicates_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kReplicateHeader) {
    throw std::runtime_error("replicates CSV: unexpected header");
  }

  std::map<std::string, Scenario> known;
  for (auto& s : build_grid()) known.emplace(s.id, std::move(s));

  GridRun run;
  std::map<std::string, std::size_t> index;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 17) {
      throw std::runtime_error("replicates CSV line " + std::to_string(line_no) +
                               ": expected 17 fields");
    }

    ReplicateResult r;
    r.scenario_id = f[0];
    r.rep_index = static_cast<Index>(std::stoll(f[1]));
    r.excluded = f[2] == "1";
    if (!r.excluded) {
      r.in_sample.c_statistic = parse_field(f[3]);
      r.out_of_sample.c_statistic = parse_field(f[4]);
      r.in_sample.calib_slope = parse_field(f[5]);
      r.out_of_sample.calib_slope = parse_field(f[6]);
      r.in_sample.citl = parse_field(f[7]);
      r.out_of_sample.citl = parse_field(f[8]);
      r.in_sample.brier = {parse_field(f[9]), parse_field(f[10]), parse_field(f[11])};
      r.out_of_sample.brier = {parse_field(f[12]), parse_field(f[13]), parse_field(f[14])};
      r.deriv_fit.alpha_hat = parse_field(f[15]);
      std::vector<Scalar> beta;
      std::istringstream bs(f[16]);
      while (std::getline(bs, field, ';')) beta.push_back(parse_field(field));
      r.deriv_fit.beta_hat = Eigen::Map<const Vector>(beta.data(), static_cast<Index>(beta.size()));
      r.deriv_fit.converged = true;
    }

    auto [it, inserted] = index.emplace(r.scenario_id, run.scenarios.size());
    if (inserted) {
      Scenario s;
      if (auto k = known.find(r.scenario_id); k != known.end()) {
        s = k->second;
      } else {
        s.id = r.scenario_id;
      }
      run.scenarios.push_back(std::move(s));
      run.replicates.emplace_back();
    }
    run.replicates[it->second].push_back(std::move(r));
  }
  for (std::size_t i = 0; i < run.scenarios.size(); ++i) {
    run.summaries.push_back(summarize(run.scenarios[i].id, run.replicates[i]));
  }
  return run;
}

std::vector<fs::path> emit_reports(const GridRun& run, const fs::path& outdir,
                                   const ReportOptions& options) {
  std::size_t total = 0;
  for (const auto& reps : run.replicates) total += reps.size();
  if (run.summaries.empty() || total == 0) {
    throw InvalidParameter("emit_reports: no results to write");
  }

  // Pooled rows are computed before any file is created.
  std::vector<PooledRow> pooled;
  if (options.table3) {
    const bool has_single = std::any_of(run.scenarios.begin(), run.scenarios.end(), [](const Scenario& s) {
      return s.family == Family::single && s.cell.has_value();
    });
    if (has_single) pooled = pool_rows(run, Family::single);
  }

  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec || !fs::is_directory(outdir)) {
    throw std::runtime_error("cannot create output directory '" + outdir.string() + "'");
  }

  std::vector<fs::path> written;
  const auto emit = [&](const fs::path& path, const auto& writer) {
    auto out = open_for_write(path);
    writer(out);
    out.flush();
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
    written.push_back(path);
  };

  emit(outdir / "replicates.csv", [&](std::ostream& o) { write_replicates_csv(o, run); });
  emit(outdir / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, run.summaries); });
  if (!pooled.empty()) {
    emit(outdir / "table3.csv", [&](std::ostream& o) { write_table3_csv(o, pooled); });
  }
  if (options.table4) {
    emit(outdir / "table4.csv", [&](std::ostream& o) { write_table4_csv(o, run); });
  }

  for (std::size_t si = 0; si < run.scenarios.size(); ++si) {
    std::vector<CalibrationCurve> curves;
    std::vector<Index> reps;
    for (const auto& r : run.replicates[si]) {
      if (!r.curve.empty()) {
        curves.push_back(r.curve);
        reps.push_back(r.rep_index);
      }
    }
    if (curves.empty()) continue;
    const fs::path dir = outdir / "curves";
    fs::create_directories(dir, ec);
    const std::string stem = file_stem(run.scenarios[si].id);
    emit(dir / (stem + ".csv"), [&](std::ostream& o) {
      o << "rep,predicted,observed\n";
      for (std::size_t k = 0; k < curves.size(); ++k) {
        for (const auto& pt : curves[k]) {
          o << reps[k] << ',' << num(pt.predicted) << ',' << num(pt.observed) << '\n';
        }
      }
    });
    if (options.svg) {
      emit(dir / (stem + ".svg"),
           [&](std::ostream& o) { write_curves_svg(o, run.scenarios[si].id, curves); });
    }
  }
  return written;
}

}  // namespace heterosim
