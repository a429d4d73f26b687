#include "heterosim/cohort.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <cstdio>
#include <ostream>

namespace heterosim {

namespace {

enum StreamTag : std::uint64_t { kPredictors = 1, kOutcomes = 2, kMeasurement = 3 };

}  // namespace

Matrix sample_predictors(Index n, const PredictorSpec& spec, RandomStream& rng) {
  const Index p = spec.dimension();
  if (p < 1 || spec.covariance.rows() != p || spec.covariance.cols() != p) {
    throw DimensionMismatch("predictor spec: mean and covariance dimensions disagree");
  }
  if (!spec.covariance.isApprox(spec.covariance.transpose())) {
    throw DecompositionError("predictor spec: covariance is not symmetric");
  }
  Eigen::LLT<Matrix> llt(spec.covariance);
  if (llt.info() != Eigen::Success) {
    throw DecompositionError("predictor spec: covariance is not positive definite");
  }
  const Matrix lower = llt.matrixL();

  Matrix z(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) z(i, j) = rng.normal();
  }
  Matrix x = z * lower.transpose();
  x.rowwise() += spec.mean.transpose();
  return x;
}

Outcome sample_outcomes(const Matrix& x, const OutcomeModel& outcome, RandomStream& rng) {
  if (outcome.beta.size() != x.cols()) {
    throw DimensionMismatch("outcome model: beta length differs from predictor count");
  }
  const Vector lp = (x * outcome.beta).array() + outcome.alpha;
  Outcome y(x.rows());
  for (Index i = 0; i < x.rows(); ++i) {
    const Scalar pi = 1.0 / (1.0 + std::exp(-lp[i]));
    y[i] = rng.uniform() < pi ? 1 : 0;
  }
  return y;
}

Matrix measure(const Matrix& x, const Outcome& y, const std::vector<MeasurementModel>& models,
               const RandomStream& rng) {
  if (static_cast<Index>(models.size()) != x.cols()) {
    throw DimensionMismatch("measure: one measurement model per predictor required");
  }
  Matrix w(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    RandomStream column_rng = rng.substream(static_cast<std::uint64_t>(j));
    w.col(j) = apply_vector(models[static_cast<std::size_t>(j)], x.col(j), y, column_rng);
  }
  return w;
}

Cohort sample_cohort(Index n, const PredictorSpec& spec, const OutcomeModel& outcome,
                     const std::vector<MeasurementModel>& models, const RandomStream& rng) {
  if (n < 1) throw InvalidParameter("sample_cohort: n must be at least 1");

  RandomStream predictor_rng = rng.substream(kPredictors);
  RandomStream outcome_rng = rng.substream(kOutcomes);

  Cohort c;
  c.x = sample_predictors(n, spec, predictor_rng);
  c.y = sample_outcomes(c.x, outcome, outcome_rng);
  c.w = measure(c.x, c.y, models, rng.substream(kMeasurement));
  c.n_cases = c.y.cast<Index>().sum();
  c.n_noncases = n - c.n_cases;
  return c;
}

std::pair<PredictorSpec, OutcomeModel> standard_scenario_outcome(ScenarioKind kind, Scalar rho) {
  PredictorSpec spec;
  OutcomeModel outcome;
  if (kind == ScenarioKind::single) {
    spec.mean = Vector::Zero(1);
    spec.covariance = Matrix::Identity(1, 1);
    outcome.beta = Vector::Constant(1, std::log(4.0));
    return {spec, outcome};
  }

  Scalar beta = 0.0;
  if (rho == 0.0 || rho == 0.5) {
    beta = 2.3;
  } else if (rho == 0.9) {
    beta = 2.1;
  } else {
    throw InvalidParameter("two-predictor scenario: rho must be 0, 0.5 or 0.9");
  }
  spec.mean = Vector::Zero(2);
  spec.covariance.resize(2, 2);
  spec.covariance << 1.0, rho, rho, 1.0;
  outcome.beta = Vector::Constant(2, beta);
  return {spec, outcome};
}

std::pair<PredictorSpec, OutcomeModel> large_sample_outcome() {
  PredictorSpec spec;
  spec.mean = Vector::Zero(1);
  spec.covariance = Matrix::Constant(1, 1, 0.5);
  OutcomeModel outcome;
  outcome.beta = Vector::Constant(1, std::log(8.0));
  return {spec, outcome};
}

void write_cohort_csv(std::ostream& out, const Cohort& cohort) {
  const Index p = cohort.predictors();
  out << "y";
  for (Index j = 1; j <= p; ++j) out << ",x" << j;
  for (Index j = 1; j <= p; ++j) out << ",w" << j;
  out << '\n';
  char buf[32];
  for (Index i = 0; i < cohort.size(); ++i) {
    out << static_cast<int>(cohort.y[i]);
    for (Index j = 0; j < p; ++j) {
      std::snprintf(buf, sizeof buf, ",%.17g", cohort.x(i, j));
      out << buf;
    }
    for (Index j = 0; j < p; ++j) {
      std::snprintf(buf, sizeof buf, ",%.17g", cohort.w(i, j));
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace heterosim
