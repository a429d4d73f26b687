#include "heterosim/measurement.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace heterosim;

TEST_CASE("make_random") {
  const MeasurementModel exact = make_random(0.0);
  CHECK(exact.is_exact());
  CHECK(exact.is_random());
  RandomStream rng(1);
  CHECK(apply(exact, 1.23, 0, rng) == 1.23);
  CHECK(apply(exact, 1.23, 1, rng) == 1.23);

  const MeasurementModel m = make_random(1.0);
  for (int y : {0, 1}) {
    CHECK(m.params(y).psi == 0.0);
    CHECK(m.params(y).theta == 1.0);
    CHECK(m.params(y).var_eps == 1.0);
  }
  CHECK(m.is_random());
  CHECK_FALSE(m.is_systematic());
  CHECK_FALSE(m.is_differential());

  CHECK_THROWS_AS(make_random(-0.1), InvalidParameter);
  CHECK_THROWS_AS(make_random(std::numeric_limits<double>::quiet_NaN()), InvalidParameter);
}

TEST_CASE("make_systematic") {
  const MeasurementModel m = make_systematic(0.25, 1.0, 0.5);
  CHECK(m.noncase() == m.cased());
  CHECK(m.cased().psi == 0.25);
  CHECK(m.cased().var_eps == 0.5);
  CHECK(m.is_systematic());
  CHECK_FALSE(m.is_differential());
  CHECK_FALSE(m.is_random());

  CHECK(make_systematic(0, 1, 0.7) == make_random(0.7));
  CHECK_FALSE(make_systematic(0, 1, 0.7).is_systematic());

  const MeasurementModel scaled = make_systematic(0, 2.0, 1.0);
  CHECK(scaled.noncase().theta == 2.0);
  CHECK(scaled.is_systematic());

  CHECK_THROWS_AS(make_systematic(0, 1, -1), InvalidParameter);
  CHECK_THROWS_AS(make_systematic(std::numeric_limits<double>::infinity(), 1, 0), InvalidParameter);
  CHECK_THROWS_AS(make_systematic(0, std::numeric_limits<double>::quiet_NaN(), 0), InvalidParameter);
}

TEST_CASE("make_differential") {
  const MeasurementModel d = make_differential({0, 1, 1}, {0.5, 1, 1});
  CHECK(d.is_differential());
  CHECK_FALSE(d.is_random());
  CHECK_FALSE(d.is_systematic());
  CHECK(make_differential({0, 1, 1}, {0, 1, 2}).is_differential());
  CHECK_FALSE(make_differential({0, 1, 1}, {0, 1, 1}).is_differential());
  CHECK_THROWS_AS(make_differential({0, 1, -1}, {0, 1, 1}), InvalidParameter);
}

TEST_CASE("apply without noise follows the linear map") {
  const MeasurementModel m = make_systematic(0.25, 2.0, 0.0);
  RandomStream rng(3);
  CHECK(apply(m, 0.5, 0, rng) == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(apply(m, 0.5, 1, rng) == doctest::Approx(1.25).epsilon(1e-15));

  const MeasurementModel d = make_differential({0, 1, 0}, {1, 3, 0});
  CHECK(apply(d, 2.0, 0, rng) == 2.0);
  CHECK(apply(d, 2.0, 1, rng) == 7.0);
}

TEST_CASE("zero-noise apply ignores the rng state") {
  const MeasurementModel m = make_systematic(0.1, 0.7, 0.0);
  RandomStream a(1), b(99);
  for (int i = 0; i < 10; ++i) (void)b.normal();
  for (double x : {-2.0, 0.0, 0.3, 5.0}) CHECK(apply(m, x, 1, a) == apply(m, x, 1, b));
}

TEST_CASE("random error is unbiased") {
  const MeasurementModel m = make_random(1.0);
  RandomStream rng(42);
  const int draws = 1'000'000;
  double sum = 0;
  for (int i = 0; i < draws; ++i) sum += apply(m, 0.3, i & 1, rng) - 0.3;
  CHECK(std::abs(sum / draws) < 0.004);
}

TEST_CASE("variance of W is theta^2 Var(X) + var_eps") {
  const MeasurementModel m = make_systematic(0.25, 2.0, 1.0);
  RandomStream rng(5);
  const int draws = 200'000;
  double s = 0, s2 = 0;
  for (int i = 0; i < draws; ++i) {
    const double w = apply(m, rng.normal(), 0, rng);
    s += w;
    s2 += w * w;
  }
  const double mean = s / draws;
  const double var = (s2 - draws * mean * mean) / (draws - 1);
  const double expected = 4.0 + 1.0;
  CHECK(std::abs(mean - 0.25) < 4 * std::sqrt(expected / draws));
  CHECK(std::abs(var - expected) < 4 * expected * std::sqrt(2.0 / draws));
}

TEST_CASE("reduction chain is bit-identical") {
  const Vector x = Vector::LinSpaced(50, -2, 2);
  Outcome y(50);
  for (Index i = 0; i < 50; ++i) y[i] = static_cast<std::uint8_t>(i % 3 == 0);

  RandomStream r1(8), r2(8), r3(8);
  const Vector a = apply_vector(make_differential({0.2, 1.5, 0.3}, {0.2, 1.5, 0.3}), x, y, r1);
  const Vector b = apply_vector(make_systematic(0.2, 1.5, 0.3), x, y, r2);
  CHECK(a == b);

  RandomStream r4(9), r5(9);
  CHECK(apply_vector(make_systematic(0, 1, 0.3), x, y, r4) == apply_vector(make_random(0.3), x, y, r5));
  (void)r3;
}

TEST_CASE("apply_vector") {
  const Vector x = Vector::LinSpaced(7, -1, 1);
  Outcome y = Outcome::Zero(7);
  RandomStream rng(1);
  CHECK(apply_vector(make_random(0), x, y, rng) == x);

  Vector x2(2);
  x2 << 0.4, -0.6;
  Outcome y2(2);
  y2 << 0, 1;
  const MeasurementModel m = make_differential({0, 1, 1}, {0.1, 1, 2});
  RandomStream s1(77), s2(77);
  const Vector w = apply_vector(m, x2, y2, s1);
  const double w0 = apply(m, 0.4, 0, s2);
  const double w1 = apply(m, -0.6, 1, s2);
  CHECK(w[0] == w0);
  CHECK(w[1] == w1);
  CHECK(w[0] - 0.4 != w[1] + 0.6 - 0.1);

  CHECK_THROWS_AS(apply_vector(m, x2, Outcome::Zero(3), rng), DimensionMismatch);
}
