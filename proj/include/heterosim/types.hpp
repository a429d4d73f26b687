#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace heterosim {

using Scalar = double;

template <typename T = Scalar>
using VectorT = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <typename T = Scalar>
using MatrixT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorT<Scalar>;
using Matrix = MatrixT<Scalar>;

// Binary outcomes are stored as 0/1 bytes.
using Outcome = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

// Error hierarchy. Everything derives from std::runtime_error or
// std::invalid_argument so callers can catch broadly.
struct InvalidParameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DegenerateOutcome : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateDesign : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DecompositionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UndefinedMetric : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace heterosim
