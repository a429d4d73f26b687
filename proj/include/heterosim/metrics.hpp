#pragma once

#include "heterosim/measurement.hpp"
#include "heterosim/types.hpp"

#include <Eigen/Core>

#include <cmath>
#include <iosfwd>
#include <vector>

namespace heterosim {

/// Standard normal CDF.
inline Scalar normal_cdf(Scalar z) noexcept { return 0.5 * std::erfc(-z * M_SQRT1_2); }

/// Probability that a case outscores a non-case; ties count one half.
/// O(n log n) in the number of observations. Throws UndefinedMetric when
/// either class is empty.
Scalar concordance(const Vector& scores, const Outcome& y);

/// Per-class sample moments (n - 1 denominator).
struct GroupStats {
  Scalar mean_case = 0.0;
  Scalar mean_noncase = 0.0;
  Scalar var_case = 0.0;
  Scalar var_noncase = 0.0;
};

GroupStats group_stats(const Vector& values, const Outcome& y);

/// Phi((mean_case - mean_noncase) / sqrt(var_case + var_noncase)).
Scalar binormal_auc(const GroupStats& stats);

/// Class moments of W implied by the measurement model applied to X.
GroupStats transform_stats(const GroupStats& stats_x, const MeasurementModel& model);

/// binormal_auc(transform_stats(stats_x, model)) - binormal_auc(stats_x).
Scalar delta_auc(const GroupStats& stats_x, const MeasurementModel& model);

/// Brier score split as total = calibration_term + refinement_term.
struct BrierDecomposition {
  Scalar total = 0.0;
  Scalar calibration_term = 0.0;
  Scalar refinement_term = 0.0;
};

BrierDecomposition brier(const Vector& probs, const Outcome& y);

/// Expected Brier change under perfect calibration:
/// mean pi_w (1 - pi_w) - mean pi_x (1 - pi_x).
Scalar expected_delta_bs(const Vector& probs_w, const Vector& probs_x);

struct LoessOptions {
  Scalar span = 0.75;
  int grid = 100;
};

struct CurvePoint {
  Scalar predicted = 0.0;
  Scalar observed = 0.0;
};

using CalibrationCurve = std::vector<CurvePoint>;

/// Degree-1 loess of y on predicted probability with tricube weights,
/// evaluated on `grid` equally spaced points across the observed range.
/// Requires at least 50 observations.
CalibrationCurve loess_calibration_curve(const Vector& probs, const Outcome& y,
                                         const LoessOptions& options = {});

void write_curve_csv(std::ostream& out, const CalibrationCurve& curve);

/// Performance of a linear predictor against observed outcomes.
struct PerformanceReport {
  Scalar c_statistic = 0.0;
  BrierDecomposition brier;
  Scalar calib_slope = 1.0;
  Scalar citl = 0.0;
  Index n = 0;
  Index n_events = 0;
  bool converged = true;  // recalibration fits
};

/// Concordance on lp, Brier on inverse-logit(lp), recalibration slope and
/// calibration-in-the-large.
PerformanceReport evaluate(const Vector& lp, const Outcome& y);

}  // namespace heterosim
