#include "heterosim/measurement.hpp"

#include <cmath>
#include <string>

namespace heterosim {

namespace {

void validate(const ClassParams& p, const char* which) {
  if (!std::isfinite(p.psi) || !std::isfinite(p.theta) || !std::isfinite(p.var_eps)) {
    throw InvalidParameter(std::string("measurement model: non-finite ") + which + " parameter");
  }
  if (p.var_eps < 0.0) {
    throw InvalidParameter(std::string("measurement model: negative ") + which + " error variance");
  }
}

}  // namespace

MeasurementModel::MeasurementModel(const ClassParams& noncase, const ClassParams& cased)
    : noncase_(noncase), case_(cased) {
  validate(noncase_, "non-case");
  validate(case_, "case");
}

bool MeasurementModel::is_random() const noexcept {
  return !is_differential() && noncase_.psi == 0.0 && noncase_.theta == 1.0;
}

bool MeasurementModel::is_systematic() const noexcept {
  return !is_differential() && (noncase_.psi != 0.0 || noncase_.theta != 1.0);
}

bool MeasurementModel::is_exact() const noexcept {
  return is_random() && noncase_.var_eps == 0.0;
}

MeasurementModel make_random(Scalar var_eps) { return make_systematic(0.0, 1.0, var_eps); }

MeasurementModel make_systematic(Scalar psi, Scalar theta, Scalar var_eps) {
  const ClassParams p{psi, theta, var_eps};
  return MeasurementModel(p, p);
}

MeasurementModel make_differential(const ClassParams& noncase, const ClassParams& cased) {
  return MeasurementModel(noncase, cased);
}

}  // namespace heterosim
