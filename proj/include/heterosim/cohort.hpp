#pragma once

#include "heterosim/measurement.hpp"
#include "heterosim/random.hpp"
#include "heterosim/types.hpp"

#include <iosfwd>
#include <utility>
#include <vector>

namespace heterosim {

/// Logistic data-generating model: logit P(Y=1 | x) = alpha + beta' x.
struct OutcomeModel {
  Scalar alpha = 0.0;
  Vector beta;
};

/// Multivariate normal predictor distribution.
struct PredictorSpec {
  Vector mean;
  Matrix covariance;

  Index dimension() const noexcept { return mean.size(); }
};

/// One simulated sample: outcomes, exact predictors x, measured predictors w.
struct Cohort {
  Outcome y;
  Matrix x;  // n x P
  Matrix w;  // n x P
  Index n_cases = 0;
  Index n_noncases = 0;

  Index size() const noexcept { return y.size(); }
  Index predictors() const noexcept { return x.cols(); }
};

/// Draws n rows of x ~ N(mean, covariance) through the lower Cholesky factor.
/// Throws DecompositionError when the covariance is not positive definite.
Matrix sample_predictors(Index n, const PredictorSpec& spec, RandomStream& rng);

/// Bernoulli outcomes with logistic probabilities.
Outcome sample_outcomes(const Matrix& x, const OutcomeModel& outcome, RandomStream& rng);

/// Measured view of x: column j through models[j], each column on its own
/// substream of `rng` so noise is independent across predictors.
Matrix measure(const Matrix& x, const Outcome& y, const std::vector<MeasurementModel>& models,
               const RandomStream& rng);

/// Full cohort. Outcomes are drawn before measurement so differential models
/// can condition on y. Uses three substreams of `rng` (predictors, outcomes,
/// measurement).
Cohort sample_cohort(Index n, const PredictorSpec& spec, const OutcomeModel& outcome,
                     const std::vector<MeasurementModel>& models, const RandomStream& rng);

enum class ScenarioKind { single, two_pred };

/// Standard data-generating models: single predictor logit = log(4) X with
/// X ~ N(0,1); two predictors with unit variances, correlation rho and
/// beta = 2.3 (rho in {0, 0.5}) or 2.1 (rho = 0.9).
std::pair<PredictorSpec, OutcomeModel> standard_scenario_outcome(ScenarioKind kind, Scalar rho = 0.0);

/// Large-sample model: logit = log(8) X with X ~ N(0, 0.5).
std::pair<PredictorSpec, OutcomeModel> large_sample_outcome();

/// Writes `y,x1..xP,w1..wP` with a header line.
void write_cohort_csv(std::ostream& out, const Cohort& cohort);

}  // namespace heterosim
