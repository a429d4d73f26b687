#pragma once

#include "heterosim/simgrid.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace heterosim {

inline constexpr const char* kSummaryHeader =
    "scenario_id,c_deriv_mean,c_deriv_sd,c_valid_mean,c_valid_sd,slope_median,slope_sd,"
    "citl_mean,citl_sd,brier_deriv_mean,brier_deriv_sd,brier_valid_mean,brier_valid_sd,"
    "n_excluded";

inline constexpr const char* kReplicateHeader =
    "scenario_id,rep,excluded,c_deriv,c_valid,slope_deriv,slope_valid,citl_deriv,citl_valid,"
    "brier_deriv,brier_deriv_calibration,brier_deriv_refinement,brier_valid,"
    "brier_valid_calibration,brier_valid_refinement,alpha_hat,beta_hat";

void write_summary_csv(std::ostream& out, std::span<const GridSummary> summaries);
void write_replicates_csv(std::ostream& out, const GridRun& run);

/// Pooled single-predictor layout; CITL is reported times 10.
void write_table3_csv(std::ostream& out, std::span<const PooledRow> rows);

/// Differential preset layout: setting, case level, then summary columns.
void write_table4_csv(std::ostream& out, const GridRun& presets);

void write_large_sample_csv(std::ostream& out, std::span<const LargeSampleResult> results);
void write_brier_sweep_csv(std::ostream& out, std::span<const BrierSweepRow> rows);

/// Overlaid calibration curves with the diagonal, as a standalone SVG.
void write_curves_svg(std::ostream& out, const std::string& title,
                      std::span<const CalibrationCurve> curves);

/// Reads rows written by write_replicates_csv back into a GridRun. Scenarios
/// whose id matches the factorial grid regain their grid factors so pooling
/// works. Summaries are recomputed.
GridRun read_replicates_csv(std::istream& in);

struct ReportOptions {
  bool table3 = true;
  bool table4 = false;
  bool svg = false;
};

/// Writes replicates.csv, summary.csv, table3.csv / table4.csv where they
/// apply, and per-scenario calibration-curve files (curves/<id>.csv, and
/// curves/<id>.svg with `svg`). Throws InvalidParameter on empty results
/// before touching the filesystem, std::runtime_error when the directory
/// cannot be written. Returns the written paths.
std::vector<std::filesystem::path> emit_reports(const GridRun& run,
                                                const std::filesystem::path& outdir,
                                                const ReportOptions& options = {});

}  // namespace heterosim
