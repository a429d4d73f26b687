#pragma once

#include "heterosim/types.hpp"

#include <optional>
#include <utility>

namespace heterosim {

/// Result of a maximum-likelihood logistic fit. An intercept is always
/// estimated; beta_hat holds the coefficients of the design columns.
struct FittedModel {
  Scalar alpha_hat = 0.0;
  Vector beta_hat;
  bool converged = false;
  bool separated = false;
  int iterations = 0;
  Scalar max_abs_score = 0.0;
  Scalar log_likelihood = 0.0;
};

struct FitOptions {
  int max_iterations = 50;
  int max_halvings = 10;
  Scalar score_tolerance = 1e-10;
  Scalar step_tolerance = 1e-10;
  // A coefficient beyond this magnitude with a non-vanishing score is
  // treated as separation.
  Scalar separation_bound = 25.0;
  // Initial (intercept, coefficients); default is the logit of the event
  // rate with zero coefficients.
  std::optional<Vector> start;
};

/// Newton-Raphson / IRLS maximiser of the Bernoulli log-likelihood with
/// logit link. `design` may have zero columns (intercept-only). `offset`
/// enters the linear predictor with a fixed coefficient of one.
///
/// Throws DegenerateOutcome when y has a single class, DimensionMismatch on
/// inconsistent sizes and DegenerateDesign when n <= P or the information
/// matrix is singular. Separation is reported through `separated` and
/// `converged = false`, never as a silent result.
FittedModel fit(const Matrix& design, const Outcome& y, const std::optional<Vector>& offset = {},
                const FitOptions& options = {});

/// Log-odds alpha + X beta (+ offset).
Vector linear_predictor(const FittedModel& model, const Matrix& design,
                        const std::optional<Vector>& offset = {});

inline constexpr Scalar kProbabilityClamp = 1e-12;

/// Inverse-logit of the linear predictor, clamped to [1e-12, 1 - 1e-12].
Vector predict_prob(const FittedModel& model, const Matrix& design,
                    const std::optional<Vector>& offset = {});

/// Clamped inverse logit of an existing linear predictor.
Vector inverse_logit(const Vector& lp);

/// Bernoulli log-likelihood of probabilities implied by `lp`.
Scalar log_likelihood(const Vector& lp, const Outcome& y);

struct Recalibration {
  Scalar intercept = 0.0;  // a
  Scalar slope = 1.0;      // b
  bool converged = false;
};

/// Fits logit P(y=1) = a + b * lp. Throws DegenerateDesign for constant lp.
Recalibration recalibrate(const Vector& lp, const Outcome& y);

struct CalibrationInTheLarge {
  Scalar intercept = 0.0;
  bool converged = false;
};

/// Intercept of logit P(y=1) = a + lp with lp as a fixed offset.
CalibrationInTheLarge calibration_in_the_large(const Vector& lp, const Outcome& y);

}  // namespace heterosim
