#include "heterosim/metrics.hpp"

#include "heterosim/glm.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace heterosim {

Scalar concordance(const Vector& scores, const Outcome& y) {
  const Index n = scores.size();
  if (y.size() != n) throw DimensionMismatch("concordance: length mismatch");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return scores[a] < scores[b]; });

  // Twice the concordant-pair count, kept integral so ties are exact.
  std::int64_t twice_concordant = 0;
  std::int64_t noncases_below = 0;
  std::int64_t n_cases = 0;
  std::int64_t n_noncases = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    std::int64_t group_cases = 0;
    std::int64_t group_noncases = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (y[order[j]] ? group_cases : group_noncases) += 1;
      ++j;
    }
    twice_concordant += 2 * group_cases * noncases_below + group_cases * group_noncases;
    noncases_below += group_noncases;
    n_cases += group_cases;
    n_noncases += group_noncases;
    i = j;
  }
  if (n_cases == 0 || n_noncases == 0) {
    throw UndefinedMetric("concordance: both outcome classes are required");
  }
  return static_cast<Scalar>(twice_concordant) /
         (2.0 * static_cast<Scalar>(n_cases) * static_cast<Scalar>(n_noncases));
}

GroupStats group_stats(const Vector& values, const Outcome& y) {
  if (values.size() != y.size()) throw DimensionMismatch("group_stats: length mismatch");
  Scalar sum[2] = {0.0, 0.0};
  Index count[2] = {0, 0};
  for (Index i = 0; i < values.size(); ++i) {
    sum[y[i]] += values[i];
    ++count[y[i]];
  }
  if (count[0] < 2 || count[1] < 2) {
    throw UndefinedMetric("group_stats: each class needs at least two observations");
  }
  const Scalar mean[2] = {sum[0] / count[0], sum[1] / count[1]};
  Scalar ss[2] = {0.0, 0.0};
  for (Index i = 0; i < values.size(); ++i) {
    const Scalar d = values[i] - mean[y[i]];
    ss[y[i]] += d * d;
  }
  return {mean[1], mean[0], ss[1] / (count[1] - 1), ss[0] / (count[0] - 1)};
}

Scalar binormal_auc(const GroupStats& s) {
  const Scalar total = s.var_case + s.var_noncase;
  if (!(total > 0.0)) throw UndefinedMetric("binormal_auc: zero total variance");
  return normal_cdf((s.mean_case - s.mean_noncase) / std::sqrt(total));
}

GroupStats transform_stats(const GroupStats& s, const MeasurementModel& model) {
  const ClassParams& p0 = model.noncase();
  const ClassParams& p1 = model.cased();
  return {p1.psi + p1.theta * s.mean_case, p0.psi + p0.theta * s.mean_noncase,
          p1.theta * p1.theta * s.var_case + p1.var_eps,
          p0.theta * p0.theta * s.var_noncase + p0.var_eps};
}

Scalar delta_auc(const GroupStats& stats_x, const MeasurementModel& model) {
  return binormal_auc(transform_stats(stats_x, model)) - binormal_auc(stats_x);
}

BrierDecomposition brier(const Vector& probs, const Outcome& y) {
  if (probs.size() != y.size()) throw DimensionMismatch("brier: length mismatch");
  if (probs.size() == 0) throw UndefinedMetric("brier: empty input");
  Scalar total = 0.0, calibration = 0.0, refinement = 0.0;
  for (Index i = 0; i < probs.size(); ++i) {
    const Scalar p = probs[i];
    const Scalar r = static_cast<Scalar>(y[i]) - p;
    total += r * r;
    calibration += r * (1.0 - 2.0 * p);
    refinement += p * (1.0 - p);
  }
  const auto n = static_cast<Scalar>(probs.size());
  return {total / n, calibration / n, refinement / n};
}

Scalar expected_delta_bs(const Vector& probs_w, const Vector& probs_x) {
  if (probs_w.size() != probs_x.size()) {
    throw DimensionMismatch("expected_delta_bs: length mismatch");
  }
  const auto refinement = [](const Vector& p) {
    return (p.array() * (1.0 - p.array())).mean();
  };
  return refinement(probs_w) - refinement(probs_x);
}

CalibrationCurve loess_calibration_curve(const Vector& probs, const Outcome& y,
                                         const LoessOptions& options) {
  const Index n = probs.size();
  if (y.size() != n) throw DimensionMismatch("loess: length mismatch");
  if (n < 50) throw InvalidParameter("loess: at least 50 observations required");
  if (options.grid < 1) throw InvalidParameter("loess: grid must be positive");
  if (!(options.span > 0.0 && options.span <= 1.0)) {
    throw InvalidParameter("loess: span must lie in (0, 1]");
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return probs[a] < probs[b]; });
  std::vector<Scalar> xs(order.size()), ys(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    xs[k] = probs[order[k]];
    ys[k] = static_cast<Scalar>(y[order[k]]);
  }

  const auto q = std::max<std::size_t>(2, static_cast<std::size_t>(options.span * static_cast<Scalar>(n)));
  const Scalar lo_x = xs.front();
  const Scalar hi_x = xs.back();

  CalibrationCurve curve;
  curve.reserve(static_cast<std::size_t>(options.grid));
  std::size_t lo = 0;
  for (int g = 0; g < options.grid; ++g) {
    const Scalar x0 = options.grid == 1
                          ? 0.5 * (lo_x + hi_x)
                          : lo_x + (hi_x - lo_x) * static_cast<Scalar>(g) / (options.grid - 1);

    // Window of the q nearest neighbours; grid points increase, so the
    // window only slides right.
    while (lo + q < xs.size() && x0 - xs[lo] > xs[lo + q] - x0) ++lo;
    const Scalar h = std::max(x0 - xs[lo], xs[lo + q - 1] - x0);

    Scalar sw = 0.0, swx = 0.0, swy = 0.0, swxx = 0.0, swxy = 0.0;
    for (std::size_t k = lo; k < lo + q; ++k) {
      Scalar w = 1.0;
      if (h > 0.0) {
        const Scalar u = std::abs(xs[k] - x0) / h;
        const Scalar t = u < 1.0 ? 1.0 - u * u * u : 0.0;
        w = t * t * t;
      }
      const Scalar dx = xs[k] - x0;
      sw += w;
      swx += w * dx;
      swy += w * ys[k];
      swxx += w * dx * dx;
      swxy += w * dx * ys[k];
    }
    Scalar fitted = swy / sw;
    const Scalar det = sw * swxx - swx * swx;
    if (det > 1e-14 * sw * swxx) {
      // Local line centred at x0, so the intercept is the fitted value.
      fitted = (swxx * swy - swx * swxy) / det;
    }
    curve.push_back({x0, fitted});
  }
  return curve;
}

void write_curve_csv(std::ostream& out, const CalibrationCurve& curve) {
  out << "predicted,observed\n";
  char buf[64];
  for (const auto& pt : curve) {
    std::snprintf(buf, sizeof buf, "%.6g,%.6g\n", pt.predicted, pt.observed);
    out << buf;
  }
}

PerformanceReport evaluate(const Vector& lp, const Outcome& y) {
  PerformanceReport r;
  r.n = y.size();
  r.n_events = y.cast<Index>().sum();
  r.c_statistic = concordance(lp, y);
  r.brier = brier(inverse_logit(lp), y);
  const Recalibration rc = recalibrate(lp, y);
  const CalibrationInTheLarge citl = calibration_in_the_large(lp, y);
  r.calib_slope = rc.slope;
  r.citl = citl.intercept;
  r.converged = rc.converged && citl.converged;
  return r;
}

}  // namespace heterosim
