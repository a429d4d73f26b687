#include "heterosim/simgrid.hpp"

#include <array>
#include <cstdio>

namespace heterosim {

namespace {

constexpr std::array<Scalar, 3> kNoiseLevels = {0.5, 1.0, 2.0};
constexpr std::array<Scalar, 2> kPsiValid = {0.0, 0.25};
constexpr std::array<Scalar, 3> kThetaValid = {0.5, 1.0, 2.0};
constexpr std::array<Scalar, 3> kRho = {0.0, 0.5, 0.9};

std::string cell_id(Family family, Scalar rho, const GridCell& c) {
  char buf[128];
  if (family == Family::single || family == Family::single_differential) {
    std::snprintf(buf, sizeof buf, "%s_sd%g_psi%g_th%g_sv%g", to_string(family), c.noise_deriv,
                  c.psi_valid, c.theta_valid, c.noise_valid);
  } else {
    std::snprintf(buf, sizeof buf, "%s_rho%g_sd%g_psi%g_th%g_sv%g", to_string(family), rho,
                  c.noise_deriv, c.psi_valid, c.theta_valid, c.noise_valid);
  }
  return buf;
}

Scenario make_cell(Family family, Scalar rho, const GridCell& c, const GridOptions& opt) {
  const Scalar var_d = noise_variance(c.noise_deriv, opt.scale);
  const Scalar var_v = noise_variance(c.noise_valid, opt.scale);
  const MeasurementModel deriv = make_random(var_d);
  const MeasurementModel valid = make_systematic(c.psi_valid, c.theta_valid, var_v);

  Scenario s;
  s.id = cell_id(family, rho, c);
  s.family = family;
  s.rho = rho;
  s.n_deriv = opt.n_deriv;
  s.n_valid = opt.n_valid;
  s.cell = c;
  switch (family) {
    case Family::single:
      s.deriv_models = {deriv};
      s.valid_models = {valid};
      break;
    case Family::two_pred_one_consistent:
      s.deriv_models = {deriv, deriv};
      s.valid_models = {deriv, valid};
      break;
    case Family::two_pred_both:
      s.deriv_models = {deriv, deriv};
      s.valid_models = {valid, valid};
      break;
    case Family::single_differential:
      s.deriv_models = {deriv};
      s.valid_models = {make_differential(deriv.noncase(), valid.cased())};
      break;
  }
  return s;
}

}  // namespace

const char* to_string(Family family) noexcept {
  switch (family) {
    case Family::single: return "single";
    case Family::two_pred_one_consistent: return "two_pred_one_consistent";
    case Family::two_pred_both: return "two_pred_both";
    case Family::single_differential: return "single_differential";
  }
  return "?";
}

Family family_from_string(const std::string& name) {
  for (Family f : {Family::single, Family::two_pred_one_consistent, Family::two_pred_both,
                   Family::single_differential}) {
    if (name == to_string(f)) return f;
  }
  if (name == "one_consistent") return Family::two_pred_one_consistent;
  if (name == "both") return Family::two_pred_both;
  if (name == "differential") return Family::single_differential;
  throw InvalidParameter("unknown scenario family '" + name + "'");
}

Index predictor_count(Family family) noexcept {
  return family == Family::two_pred_one_consistent || family == Family::two_pred_both ? 2 : 1;
}

Scalar noise_variance(Scalar level, NoiseScale scale) noexcept {
  return scale == NoiseScale::standard_deviation ? level * level : level;
}

void validate(const Scenario& s) {
  const auto p = static_cast<std::size_t>(predictor_count(s.family));
  if (s.deriv_models.size() != p || s.valid_models.size() != p) {
    throw InvalidParameter("scenario '" + s.id + "': measurement model count does not match family");
  }
  if (s.n_deriv < 1 || s.n_valid < 1) {
    throw InvalidParameter("scenario '" + s.id + "': sample sizes must be at least 1");
  }
  if (s.id.empty()) throw InvalidParameter("scenario: empty id");
}

Population standard_population(const Scenario& s) {
  const ScenarioKind kind = predictor_count(s.family) == 1 ? ScenarioKind::single : ScenarioKind::two_pred;
  auto [spec, outcome] = standard_scenario_outcome(kind, s.rho);
  return {std::move(spec), std::move(outcome)};
}

std::vector<Scenario> build_family(Family family, const GridOptions& options) {
  std::vector<Scenario> out;
  const bool two = predictor_count(family) == 2;
  const std::vector<Scalar> rhos = two ? std::vector<Scalar>(kRho.begin(), kRho.end())
                                       : std::vector<Scalar>{0.0};
  for (Scalar rho : rhos) {
    for (Scalar sd : kNoiseLevels) {
      for (Scalar psi : kPsiValid) {
        for (Scalar theta : kThetaValid) {
          for (Scalar sv : kNoiseLevels) {
            out.push_back(make_cell(family, rho, GridCell{sd, psi, theta, sv}, options));
          }
        }
      }
    }
  }
  return out;
}

std::vector<Scenario> build_grid(const GridOptions& options) {
  std::vector<Scenario> out;
  for (Family f : {Family::single, Family::two_pred_one_consistent, Family::two_pred_both,
                   Family::single_differential}) {
    auto part = build_family(f, options);
    out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return out;
}

std::vector<Scenario> differential_presets(const GridOptions& options) {
  const Scalar base = noise_variance(1.0, options.scale);
  const MeasurementModel homogeneous = make_random(base);
  const auto differential = [&](Scalar case_level) {
    return make_differential(ClassParams{0.0, 1.0, base},
                             ClassParams{0.0, 1.0, noise_variance(case_level, options.scale)});
  };

  std::vector<Scenario> out;
  for (bool at_derivation : {true, false}) {
    for (Scalar level : {0.5, 2.0}) {
      Scenario s;
      char buf[64];
      std::snprintf(buf, sizeof buf, "differential_%s_case%g",
                    at_derivation ? "derivation" : "validation", level);
      s.id = buf;
      s.family = Family::single_differential;
      s.n_deriv = options.n_deriv;
      s.n_valid = options.n_valid;
      s.deriv_models = {at_derivation ? differential(level) : homogeneous};
      s.valid_models = {at_derivation ? homogeneous : differential(level)};
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace heterosim
