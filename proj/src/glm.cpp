#include "heterosim/glm.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>

namespace heterosim {

namespace {

Scalar sigmoid(Scalar t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const Scalar e = std::exp(t);
  return e / (1.0 + e);
}

// Log-likelihood of eta against y; fills prob = sigmoid(eta) in the same pass.
Scalar loglik_and_prob(const Vector& eta, const Outcome& y, Vector& prob) {
  Scalar ll = 0.0;
  for (Index i = 0; i < eta.size(); ++i) {
    const Scalar t = eta[i];
    const Scalar e = std::exp(-std::abs(t));
    const Scalar inv = 1.0 / (1.0 + e);
    prob[i] = t >= 0.0 ? inv : e * inv;
    ll += (y[i] ? t : 0.0) - (std::max(t, 0.0) + std::log(1.0 + e));
  }
  return ll;
}

Scalar loglik(const Vector& eta, const Outcome& y) {
  Scalar ll = 0.0;
  for (Index i = 0; i < eta.size(); ++i) {
    const Scalar t = eta[i];
    ll += (y[i] ? t : 0.0) - (std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))));
  }
  return ll;
}

}  // namespace

FittedModel fit(const Matrix& design, const Outcome& y, const std::optional<Vector>& offset,
                const FitOptions& options) {
  const Index n = design.rows();
  const Index p = design.cols();
  const Index k = p + 1;
  if (y.size() != n) throw DimensionMismatch("fit: design and outcome row counts differ");
  if (offset && offset->size() != n) throw DimensionMismatch("fit: offset length differs");
  if (options.start && options.start->size() != k) {
    throw DimensionMismatch("fit: start vector must hold intercept and coefficients");
  }
  if (n <= k) throw DegenerateDesign("fit: need more observations than parameters");

  const Index events = y.cast<Index>().sum();
  if (events == 0 || events == n) {
    throw DegenerateOutcome("fit: outcome contains a single class");
  }

  const auto linear = [&](const Vector& params, Vector& eta) {
    eta.setConstant(params[0]);
    for (Index j = 0; j < p; ++j) eta += params[j + 1] * design.col(j);
    if (offset) eta += *offset;
  };

  Vector params = Vector::Zero(k);
  if (options.start) {
    params = *options.start;
  } else {
    // Intercept at the logit of the event rate net of the mean offset.
    const Scalar rate = static_cast<Scalar>(events) / static_cast<Scalar>(n);
    params[0] = std::log(rate / (1.0 - rate)) - (offset ? offset->mean() : 0.0);
  }

  Vector eta(n);
  Vector prob(n);
  linear(params, eta);
  Scalar ll = loglik_and_prob(eta, y, prob);

  FittedModel result;
  Vector score(k);
  Matrix info(k, k);
  Vector trial(k);
  Vector trial_eta(n);
  Vector trial_prob(n);

  // Score X'(y - p) and information X' W X with an implicit intercept column.
  const auto accumulate = [&] {
    score.setZero();
    info.setZero();
    for (Index i = 0; i < n; ++i) {
      const Scalar r = static_cast<Scalar>(y[i]) - prob[i];
      const Scalar w = prob[i] * (1.0 - prob[i]);
      score[0] += r;
      info(0, 0) += w;
      for (Index a = 0; a < p; ++a) {
        const Scalar xa = design(i, a);
        score[a + 1] += r * xa;
        info(a + 1, 0) += w * xa;
        for (Index b = 0; b <= a; ++b) info(a + 1, b + 1) += w * xa * design(i, b);
      }
    }
    info.triangularView<Eigen::StrictlyUpper>() = info.transpose();
  };

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    accumulate();
    result.max_abs_score = score.cwiseAbs().maxCoeff();
    result.iterations = iter;
    if (result.max_abs_score < options.score_tolerance) {
      result.converged = true;
      break;
    }

    Eigen::LDLT<Matrix> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-300) {
      const bool diverging =
          (p > 0 && params.tail(p).cwiseAbs().maxCoeff() > options.separation_bound) ||
          eta.cwiseAbs().maxCoeff() > 2.0 * options.separation_bound;
      if (diverging) {
        result.separated = true;
        break;
      }
      throw DegenerateDesign("fit: information matrix is singular");
    }
    Vector step = ldlt.solve(score);

    // Step-halving until the likelihood does not decrease.
    trial = params + step;
    linear(trial, trial_eta);
    Scalar trial_ll = loglik_and_prob(trial_eta, y, trial_prob);
    // Rounding noise near the optimum is not a decrease.
    const Scalar slack = 1e-12 * (1.0 + std::abs(ll));
    int halvings = 0;
    while (!(trial_ll >= ll - slack) && halvings < options.max_halvings) {
      step *= 0.5;
      trial = params + step;
      linear(trial, trial_eta);
      trial_ll = loglik_and_prob(trial_eta, y, trial_prob);
      ++halvings;
    }

    params.swap(trial);
    eta.swap(trial_eta);
    prob.swap(trial_prob);
    ll = trial_ll;
    result.iterations = iter + 1;

    if (p > 0 && params.tail(p).cwiseAbs().maxCoeff() > options.separation_bound) {
      result.separated = true;
      break;
    }
    if (step.cwiseAbs().maxCoeff() < options.step_tolerance) {
      accumulate();
      result.max_abs_score = score.cwiseAbs().maxCoeff();
      result.converged = true;
      break;
    }
  }

  // Complete separation: every case ranks above every non-case.
  if (!result.separated && p > 0) {
    Scalar min_case = std::numeric_limits<Scalar>::infinity();
    Scalar max_noncase = -std::numeric_limits<Scalar>::infinity();
    for (Index i = 0; i < n; ++i) {
      if (y[i]) min_case = std::min(min_case, eta[i]);
      else max_noncase = std::max(max_noncase, eta[i]);
    }
    result.separated = min_case > max_noncase;
  }

  if (result.separated) {
    accumulate();
    result.max_abs_score = score.cwiseAbs().maxCoeff();
    result.converged = false;
  }

  result.alpha_hat = params[0];
  result.beta_hat = params.tail(p);
  result.log_likelihood = ll;
  return result;
}

Vector linear_predictor(const FittedModel& model, const Matrix& design,
                        const std::optional<Vector>& offset) {
  if (design.cols() != model.beta_hat.size()) {
    throw DimensionMismatch("linear_predictor: design columns differ from coefficients");
  }
  if (offset && offset->size() != design.rows()) {
    throw DimensionMismatch("linear_predictor: offset length differs");
  }
  Vector lp = (design * model.beta_hat).array() + model.alpha_hat;
  if (offset) lp += *offset;
  return lp;
}

Vector inverse_logit(const Vector& lp) {
  Vector out(lp.size());
  for (Index i = 0; i < lp.size(); ++i) {
    out[i] = std::clamp(sigmoid(lp[i]), kProbabilityClamp, 1.0 - kProbabilityClamp);
  }
  return out;
}

Vector predict_prob(const FittedModel& model, const Matrix& design,
                    const std::optional<Vector>& offset) {
  return inverse_logit(linear_predictor(model, design, offset));
}

Scalar log_likelihood(const Vector& lp, const Outcome& y) {
  if (lp.size() != y.size()) throw DimensionMismatch("log_likelihood: length mismatch");
  return loglik(lp, y);
}

Recalibration recalibrate(const Vector& lp, const Outcome& y) {
  if (lp.size() != y.size()) throw DimensionMismatch("recalibrate: length mismatch");
  if (lp.size() == 0 || lp.maxCoeff() == lp.minCoeff()) {
    throw DegenerateDesign("recalibrate: linear predictor is constant");
  }
  FitOptions options;
  options.start = Vector::Zero(2);
  (*options.start)[1] = 1.0;
  const FittedModel m = fit(Matrix(lp), y, {}, options);
  return {m.alpha_hat, m.beta_hat[0], m.converged};
}

CalibrationInTheLarge calibration_in_the_large(const Vector& lp, const Outcome& y) {
  if (lp.size() != y.size()) throw DimensionMismatch("calibration_in_the_large: length mismatch");
  FitOptions options;
  options.start = Vector::Zero(1);
  const FittedModel m = fit(Matrix(lp.size(), 0), y, lp, options);
  return {m.alpha_hat, m.converged};
}

}  // namespace heterosim
