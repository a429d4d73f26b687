#pragma once

#include "heterosim/random.hpp"
#include "heterosim/types.hpp"

#include <Eigen/Core>

#include <cmath>

namespace heterosim {

/// Measurement parameters for one outcome class:
///   W = psi + theta * X + eps,   eps ~ N(0, var_eps).
struct ClassParams {
  Scalar psi = 0.0;
  Scalar theta = 1.0;
  Scalar var_eps = 0.0;

  friend bool operator==(const ClassParams&, const ClassParams&) = default;
};

/// Measurement-error model conditioned on the outcome class. Non-cases
/// (y = 0) and cases (y = 1) may carry different parameters; when they do
/// the error is differential.
class MeasurementModel {
 public:
  /// Exact measurement, W == X.
  MeasurementModel() = default;

  /// Throws InvalidParameter on negative variance or non-finite values.
  MeasurementModel(const ClassParams& noncase, const ClassParams& cased);

  const ClassParams& noncase() const noexcept { return noncase_; }
  const ClassParams& cased() const noexcept { return case_; }
  const ClassParams& params(int y) const noexcept { return y ? case_ : noncase_; }

  bool is_differential() const noexcept { return !(noncase_ == case_); }
  bool is_random() const noexcept;
  bool is_systematic() const noexcept;
  bool is_exact() const noexcept;

  friend bool operator==(const MeasurementModel&, const MeasurementModel&) = default;

 private:
  ClassParams noncase_;
  ClassParams case_;
};

MeasurementModel make_random(Scalar var_eps);
MeasurementModel make_systematic(Scalar psi, Scalar theta, Scalar var_eps);
MeasurementModel make_differential(const ClassParams& noncase, const ClassParams& cased);

/// One measurement of `x` for an individual with outcome `y`. Always
/// consumes exactly one normal draw, even when the variance is zero, so a
/// stream advances identically for every model.
inline Scalar apply(const MeasurementModel& model, Scalar x, int y, RandomStream& rng) {
  const ClassParams& p = model.params(y);
  const Scalar eps = rng.normal();
  return p.psi + p.theta * x + std::sqrt(p.var_eps) * eps;
}

/// Elementwise apply in index order.
template <typename DerivedX, typename DerivedY>
Vector apply_vector(const MeasurementModel& model, const Eigen::MatrixBase<DerivedX>& x,
                    const Eigen::MatrixBase<DerivedY>& y, RandomStream& rng) {
  if (x.size() != y.size()) {
    throw DimensionMismatch("apply_vector: x and y lengths differ");
  }
  Vector w(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    w[i] = apply(model, static_cast<Scalar>(x[i]), static_cast<int>(y[i]), rng);
  }
  return w;
}

}  // namespace heterosim
