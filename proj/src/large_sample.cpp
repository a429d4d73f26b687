#include "heterosim/simgrid.hpp"

#include <cmath>
#include <map>

namespace heterosim {

namespace {

enum : std::uint64_t { kCohortStream = 0, kDerivMeasurement = 10, kValidMeasurement = 11 };

struct Panel {
  MeasurementModel deriv;
  MeasurementModel valid;
};

const std::map<std::string, Panel>& panels() {
  static const std::map<std::string, Panel> table = [] {
    const MeasurementModel base = make_random(0.5);
    const ClassParams b{0.0, 1.0, 0.5};
    std::map<std::string, Panel> t;
    t["random_less_precise"] = {base, make_random(2.0)};
    t["random_consistent"] = {base, base};
    t["random_more_precise"] = {base, make_random(0.0)};
    t["additive_psi0"] = {base, make_systematic(0.0, 1.0, 0.5)};
    t["additive_psi0.25"] = {base, make_systematic(0.25, 1.0, 0.5)};
    t["multiplicative_theta0.5"] = {base, make_systematic(0.0, 0.5, 0.5)};
    t["multiplicative_theta1"] = {base, make_systematic(0.0, 1.0, 0.5)};
    t["multiplicative_theta2"] = {base, make_systematic(0.0, 2.0, 0.5)};
    t["differential_validation_case_less_precise"] = {base, make_differential(b, {0.0, 1.0, 2.0})};
    t["differential_validation_case_more_precise"] = {base, make_differential(b, {0.0, 1.0, 0.0})};
    t["differential_validation_case_theta0.5"] = {base, make_differential(b, {0.0, 0.5, 0.5})};
    t["differential_derivation_case_more_precise"] = {make_differential(b, {0.0, 1.0, 0.0}), base};
    t["differential_derivation_case_less_precise"] = {make_differential(b, {0.0, 1.0, 2.0}), base};
    t["differential_derivation_case_theta0.5"] = {make_differential(b, {0.0, 0.5, 0.5}), base};
    // Measurement variance at validation relative to derivation: 200, 100, 50 %.
    t["mv200"] = {make_random(0.0), base};
    t["mv100"] = {base, base};
    t["mv50"] = {base, make_random(0.0)};
    return t;
  }();
  return table;
}

struct TwoMeasurementCohort {
  Outcome y;
  Matrix w_deriv;
  Matrix w_valid;
};

TwoMeasurementCohort sample_two_measurements(Index n, const MeasurementModel& deriv,
                                             const MeasurementModel& valid, std::uint64_t seed) {
  const auto [spec, outcome] = large_sample_outcome();
  const RandomStream rng(seed);
  // Exact measurement for the base cohort; the two measured views get their
  // own noise streams.
  Cohort base = sample_cohort(n, spec, outcome, {MeasurementModel{}}, rng.substream(kCohortStream));
  TwoMeasurementCohort c;
  c.w_deriv = measure(base.x, base.y, {deriv}, rng.substream(kDerivMeasurement));
  c.w_valid = measure(base.x, base.y, {valid}, rng.substream(kValidMeasurement));
  c.y = std::move(base.y);
  return c;
}

FittedModel checked_fit(const Matrix& w, const Outcome& y) {
  FittedModel m = fit(w, y);
  if (!m.converged) throw DegenerateDesign("large-sample fit did not converge");
  return m;
}

}  // namespace

std::vector<std::string> large_sample_panel_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : panels()) names.push_back(name);
  return names;
}

LargeSampleConfig large_sample_panel(const std::string& name) {
  const auto it = panels().find(name);
  if (it == panels().end()) throw InvalidParameter("unknown large-sample panel '" + name + "'");
  LargeSampleConfig cfg;
  cfg.name = name;
  cfg.deriv_model = it->second.deriv;
  cfg.valid_model = it->second.valid;
  return cfg;
}

LargeSampleResult run_large_sample(const LargeSampleConfig& config) {
  if (config.n < 2) throw InvalidParameter("run_large_sample: n must be at least 2");
  const TwoMeasurementCohort c =
      sample_two_measurements(config.n, config.deriv_model, config.valid_model, config.seed);

  LargeSampleResult r;
  r.name = config.name;
  r.deriv_fit = checked_fit(c.w_deriv, c.y);
  r.derivation = evaluate(linear_predictor(r.deriv_fit, c.w_deriv), c.y);

  const Vector lp_transported = linear_predictor(r.deriv_fit, c.w_valid);
  r.transported = evaluate(lp_transported, c.y);

  r.reestimated_fit = checked_fit(c.w_valid, c.y);
  const Vector lp_reestimated = linear_predictor(r.reestimated_fit, c.w_valid);
  r.reestimated = evaluate(lp_reestimated, c.y);

  if (config.curves) {
    r.transported_curve = loess_calibration_curve(inverse_logit(lp_transported), c.y, config.loess);
    r.reestimated_curve = loess_calibration_curve(inverse_logit(lp_reestimated), c.y, config.loess);
  }
  return r;
}

std::vector<BrierSweepRow> brier_sweep(std::span<const Scalar> mv_percent,
                                       const BrierSweepOptions& options) {
  const auto [spec, outcome] = large_sample_outcome();
  const Scalar var_x = spec.covariance(0, 0);

  std::vector<BrierSweepRow> rows;
  rows.reserve(mv_percent.size());
  std::uint64_t index = 0;
  for (Scalar mv : mv_percent) {
    if (!(mv > 0.0) || !std::isfinite(mv)) {
      throw InvalidParameter("brier_sweep: %MV must be positive and finite");
    }
    BrierSweepRow row;
    row.mv_percent = mv;
    if (mv < 100.0) {
      row.var_deriv = var_x * (100.0 / mv - 1.0);
    } else {
      row.var_valid = var_x * (mv / 100.0 - 1.0);
    }
    const TwoMeasurementCohort c =
        sample_two_measurements(options.n, make_random(row.var_deriv), make_random(row.var_valid),
                                derive_seed(options.seed, index++));

    const FittedModel deriv = checked_fit(c.w_deriv, c.y);
    row.transported = brier(predict_prob(deriv, c.w_valid), c.y);
    const FittedModel reest = checked_fit(c.w_valid, c.y);
    row.reestimated = brier(predict_prob(reest, c.w_valid), c.y);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace heterosim
