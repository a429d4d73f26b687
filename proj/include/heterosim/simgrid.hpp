#pragma once

#include "heterosim/cohort.hpp"
#include "heterosim/glm.hpp"
#include "heterosim/measurement.hpp"
#include "heterosim/metrics.hpp"
#include "heterosim/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace heterosim {

enum class Family { single, two_pred_one_consistent, two_pred_both, single_differential };

const char* to_string(Family family) noexcept;
Family family_from_string(const std::string& name);
Index predictor_count(Family family) noexcept;

/// How the tabulated noise levels of the finite-sample grid map onto error
/// variances. The factor values 0.5, 1.0, 2.0 are standard deviations by
/// default (variances 0.25, 1, 4).
enum class NoiseScale { standard_deviation, variance };

Scalar noise_variance(Scalar level, NoiseScale scale) noexcept;

/// Factor levels of one grid cell, as tabulated (before NoiseScale).
struct GridCell {
  Scalar noise_deriv = 0.0;
  Scalar psi_valid = 0.0;
  Scalar theta_valid = 1.0;
  Scalar noise_valid = 0.0;
};

struct Scenario {
  std::string id;
  Family family = Family::single;
  Scalar rho = 0.0;
  std::vector<MeasurementModel> deriv_models;
  std::vector<MeasurementModel> valid_models;
  Index n_deriv = 2000;
  Index n_valid = 2000;
  std::optional<GridCell> cell;  // set for factorial-grid scenarios
};

/// Throws InvalidParameter when model counts or sample sizes are invalid.
void validate(const Scenario& scenario);

/// Data-generating model for a family (standard single or two-predictor).
struct Population {
  PredictorSpec spec;
  OutcomeModel outcome;
};

Population standard_population(const Scenario& scenario);

struct GridOptions {
  NoiseScale scale = NoiseScale::standard_deviation;
  Index n_deriv = 2000;
  Index n_valid = 2000;
};

/// The full factorial: 54 single, 162 + 162 two-predictor, 54 differential.
///
/// Derivation measurements are random error at the derivation level. In the
/// one-consistent family predictor 1 keeps the derivation-level random error
/// in both settings and predictor 2 follows the validation factors. In the
/// differential family non-cases keep the derivation-level random error at
/// validation while cases follow the validation factors.
std::vector<Scenario> build_grid(const GridOptions& options = {});

/// Scenarios of one family only, in grid order.
std::vector<Scenario> build_family(Family family, const GridOptions& options = {});

/// The four differential presets: differential case-class error at
/// derivation or at validation with case level 0.5 or 2.0; every other
/// class has level 1.0.
std::vector<Scenario> differential_presets(const GridOptions& options = {});

struct ReplicateOptions {
  bool keep_curve = false;
  LoessOptions loess;
};

struct ReplicateResult {
  std::string scenario_id;
  Index rep_index = 0;
  bool excluded = false;
  std::string exclusion_reason;
  FittedModel deriv_fit;
  PerformanceReport in_sample;
  PerformanceReport out_of_sample;
  CalibrationCurve curve;  // out-of-sample, only when requested
};

/// Derive on measured derivation predictors, evaluate in-sample, transport
/// the coefficients to an independent validation cohort and evaluate there.
/// Deterministic in (master_seed, scenario.id, rep_index).
ReplicateResult run_replicate(const Scenario& scenario, const Population& population,
                              Index rep_index, std::uint64_t master_seed,
                              const ReplicateOptions& options = {});

struct GridSummary {
  std::string scenario_id;
  Index n_reps = 0;
  Index n_excluded = 0;
  Scalar c_deriv_mean = 0.0, c_deriv_sd = 0.0;
  Scalar c_valid_mean = 0.0, c_valid_sd = 0.0;
  Scalar slope_median = 0.0, slope_sd = 0.0;
  Scalar citl_mean = 0.0, citl_sd = 0.0;
  Scalar brier_deriv_mean = 0.0, brier_deriv_sd = 0.0;
  Scalar brier_valid_mean = 0.0, brier_valid_sd = 0.0;
};

/// Aggregate over non-excluded replicates. SDs use the n - 1 denominator and
/// are NaN with fewer than two replicates.
GridSummary summarize(const std::string& id, std::span<const ReplicateResult> replicates);

struct GridRunOptions {
  Index reps = 1000;
  std::uint64_t master_seed = 0;
  unsigned workers = 1;
  // Replicates per scenario for which calibration curves are kept.
  Index curve_reps = 0;
  LoessOptions loess;
};

struct GridRun {
  std::vector<Scenario> scenarios;
  std::vector<std::vector<ReplicateResult>> replicates;  // [scenario][rep]
  std::vector<GridSummary> summaries;
};

/// Runs every (scenario, rep) task on `workers` threads. Output does not
/// depend on the worker count or on scheduling.
GridRun run_grid(std::vector<Scenario> scenarios, const GridRunOptions& options);

GridRun run_differential_presets(const GridRunOptions& options,
                                 const GridOptions& grid = {});

enum class VarianceOrder { less, equal, greater };

const char* to_string(VarianceOrder order) noexcept;

/// One row of the pooled single-predictor table: all cells with the given
/// ordering of derivation against validation noise, at fixed psi and theta.
struct PooledRow {
  VarianceOrder order = VarianceOrder::equal;
  Scalar psi = 0.0;
  Scalar theta = 1.0;
  Index n_cells = 0;
  GridSummary summary;
};

/// How grid cells sharing a table row are combined.
///   cell_means: average the per-cell summaries (means, and medians for the
///     slope); sds are taken across those cell-level values.
///   replicates: pool all replicate-level values of the cells, then take
///     mean / sd / median over the pooled set.
enum class PoolMode { cell_means, replicates };

/// Groups grid scenarios of `family` by (variance order, psi, theta). Rows
/// come out in table order. Throws InvalidParameter when no scenario of the
/// family carries grid factors.
std::vector<PooledRow> pool_rows(const GridRun& run, Family family = Family::single,
                                 PoolMode mode = PoolMode::cell_means);

// Large-sample experiments ---------------------------------------------------

struct LargeSampleConfig {
  std::string name;
  Index n = 1'000'000;
  MeasurementModel deriv_model;
  MeasurementModel valid_model;
  std::uint64_t seed = 0;
  bool curves = false;
  LoessOptions loess;
};

/// Named single-predictor panels under logit = log(8) X, X ~ N(0, 0.5).
/// Error levels here are variances.
LargeSampleConfig large_sample_panel(const std::string& name);
std::vector<std::string> large_sample_panel_names();

struct LargeSampleResult {
  std::string name;
  FittedModel deriv_fit;
  FittedModel reestimated_fit;
  PerformanceReport derivation;   // in-sample on w_D
  PerformanceReport transported;  // deriv coefficients applied to w_V
  PerformanceReport reestimated;  // refit on w_V, in-sample
  CalibrationCurve transported_curve;
  CalibrationCurve reestimated_curve;
};

/// One cohort of size n carrying two independent measurements w_D and w_V
/// of the same x.
LargeSampleResult run_large_sample(const LargeSampleConfig& config);

struct BrierSweepRow {
  Scalar mv_percent = 100.0;
  Scalar var_deriv = 0.0;  // error variance of the derivation measurement
  Scalar var_valid = 0.0;  // error variance of the validation measurement
  BrierDecomposition reestimated;
  BrierDecomposition transported;
};

struct BrierSweepOptions {
  Index n = 1'000'000;
  std::uint64_t seed = 0;
};

/// %MV is the variance of the validation measurement relative to the
/// derivation measurement. Below 100 the model is derived on w and validated
/// on x; from 100 on it is derived on x and validated on w. The error
/// variance follows from Var(X): Var(X) * (100 / %MV - 1) resp.
/// Var(X) * (%MV / 100 - 1). Throws InvalidParameter for %MV <= 0.
std::vector<BrierSweepRow> brier_sweep(std::span<const Scalar> mv_percent,
                                       const BrierSweepOptions& options = {});

}  // namespace heterosim
