#include "heterosim/simgrid.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

namespace heterosim {

namespace {

enum : std::uint64_t { kDerivationStream = 0, kValidationStream = 1 };

struct Moments {
  Scalar mean = 0.0;
  Scalar sd = std::numeric_limits<Scalar>::quiet_NaN();
};

Moments moments(const std::vector<Scalar>& v) {
  Moments m;
  if (v.empty()) {
    m.mean = std::numeric_limits<Scalar>::quiet_NaN();
    return m;
  }
  Scalar sum = 0.0;
  for (Scalar x : v) sum += x;
  m.mean = sum / static_cast<Scalar>(v.size());
  if (v.size() > 1) {
    Scalar ss = 0.0;
    for (Scalar x : v) ss += (x - m.mean) * (x - m.mean);
    m.sd = std::sqrt(ss / static_cast<Scalar>(v.size() - 1));
  }
  return m;
}

Scalar median(std::vector<Scalar> v) {
  if (v.empty()) return std::numeric_limits<Scalar>::quiet_NaN();
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const Scalar upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const Scalar lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

VarianceOrder order_of(const GridCell& c) {
  if (c.noise_deriv < c.noise_valid) return VarianceOrder::less;
  if (c.noise_deriv > c.noise_valid) return VarianceOrder::greater;
  return VarianceOrder::equal;
}

}  // namespace

ReplicateResult run_replicate(const Scenario& scenario, const Population& population,
                              Index rep_index, std::uint64_t master_seed,
                              const ReplicateOptions& options) {
  validate(scenario);
  ReplicateResult r;
  r.scenario_id = scenario.id;
  r.rep_index = rep_index;

  const RandomStream rng(
      derive_seed(master_seed, fnv1a64(scenario.id), static_cast<std::uint64_t>(rep_index)));

  try {
    const Cohort deriv = sample_cohort(scenario.n_deriv, population.spec, population.outcome,
                                       scenario.deriv_models, rng.substream(kDerivationStream));
    r.deriv_fit = fit(deriv.w, deriv.y);
    if (!r.deriv_fit.converged) {
      r.excluded = true;
      r.exclusion_reason = r.deriv_fit.separated ? "derivation fit separated"
                                                 : "derivation fit did not converge";
      return r;
    }
    r.in_sample = evaluate(linear_predictor(r.deriv_fit, deriv.w), deriv.y);

    const Cohort valid = sample_cohort(scenario.n_valid, population.spec, population.outcome,
                                       scenario.valid_models, rng.substream(kValidationStream));
    const Vector lp_transported = linear_predictor(r.deriv_fit, valid.w);
    r.out_of_sample = evaluate(lp_transported, valid.y);
    if (!r.in_sample.converged || !r.out_of_sample.converged) {
      r.excluded = true;
      r.exclusion_reason = "recalibration fit did not converge";
      return r;
    }
    if (options.keep_curve) {
      r.curve = loess_calibration_curve(inverse_logit(lp_transported), valid.y, options.loess);
    }
  } catch (const DegenerateOutcome& e) {
    r.excluded = true;
    r.exclusion_reason = e.what();
  } catch (const DegenerateDesign& e) {
    r.excluded = true;
    r.exclusion_reason = e.what();
  } catch (const UndefinedMetric& e) {
    r.excluded = true;
    r.exclusion_reason = e.what();
  }
  if (r.excluded) {
    r.in_sample = {};
    r.out_of_sample = {};
    r.curve.clear();
  }
  return r;
}

GridSummary summarize(const std::string& id, std::span<const ReplicateResult> replicates) {
  GridSummary s;
  s.scenario_id = id;
  s.n_reps = static_cast<Index>(replicates.size());
  std::vector<Scalar> c_d, c_v, slope, citl, b_d, b_v;
  for (const auto& r : replicates) {
    if (r.excluded) {
      ++s.n_excluded;
      continue;
    }
    c_d.push_back(r.in_sample.c_statistic);
    c_v.push_back(r.out_of_sample.c_statistic);
    slope.push_back(r.out_of_sample.calib_slope);
    citl.push_back(r.out_of_sample.citl);
    b_d.push_back(r.in_sample.brier.total);
    b_v.push_back(r.out_of_sample.brier.total);
  }
  const Moments mc_d = moments(c_d), mc_v = moments(c_v), ms = moments(slope),
                mcitl = moments(citl), mb_d = moments(b_d), mb_v = moments(b_v);
  s.c_deriv_mean = mc_d.mean;
  s.c_deriv_sd = mc_d.sd;
  s.c_valid_mean = mc_v.mean;
  s.c_valid_sd = mc_v.sd;
  s.slope_median = median(slope);
  s.slope_sd = ms.sd;
  s.citl_mean = mcitl.mean;
  s.citl_sd = mcitl.sd;
  s.brier_deriv_mean = mb_d.mean;
  s.brier_deriv_sd = mb_d.sd;
  s.brier_valid_mean = mb_v.mean;
  s.brier_valid_sd = mb_v.sd;
  return s;
}

GridRun run_grid(std::vector<Scenario> scenarios, const GridRunOptions& options) {
  if (options.reps < 1) throw InvalidParameter("run_grid: reps must be at least 1");
  for (const auto& s : scenarios) validate(s);

  GridRun run;
  run.scenarios = std::move(scenarios);
  const std::size_t n_scen = run.scenarios.size();
  const auto reps = static_cast<std::size_t>(options.reps);
  run.replicates.assign(n_scen, std::vector<ReplicateResult>(reps));

  std::vector<Population> populations;
  populations.reserve(n_scen);
  for (const auto& s : run.scenarios) populations.push_back(standard_population(s));

  const std::size_t total = n_scen * reps;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (std::size_t task = next++; task < total; task = next++) {
      const std::size_t si = task / reps;
      const std::size_t rep = task % reps;
      try {
        ReplicateOptions ro;
        ro.keep_curve = static_cast<Index>(rep) < options.curve_reps;
        ro.loess = options.loess;
        run.replicates[si][rep] = run_replicate(run.scenarios[si], populations[si],
                                                static_cast<Index>(rep), options.master_seed, ro);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = total;
      }
    }
  };

  const unsigned workers = std::max(1u, options.workers);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  run.summaries.reserve(n_scen);
  for (std::size_t si = 0; si < n_scen; ++si) {
    run.summaries.push_back(summarize(run.scenarios[si].id, run.replicates[si]));
  }
  return run;
}

GridRun run_differential_presets(const GridRunOptions& options, const GridOptions& grid) {
  return run_grid(differential_presets(grid), options);
}

const char* to_string(VarianceOrder order) noexcept {
  switch (order) {
    case VarianceOrder::less: return "deriv<valid";
    case VarianceOrder::equal: return "deriv=valid";
    case VarianceOrder::greater: return "deriv>valid";
  }
  return "?";
}

std::vector<PooledRow> pool_rows(const GridRun& run, Family family, PoolMode mode) {
  using Key = std::tuple<int, Scalar, Scalar>;
  std::map<Key, std::vector<std::size_t>> groups;
  for (std::size_t si = 0; si < run.scenarios.size(); ++si) {
    const Scenario& s = run.scenarios[si];
    if (s.family != family || !s.cell) continue;
    groups[{static_cast<int>(order_of(*s.cell)), s.cell->psi_valid, s.cell->theta_valid}].push_back(si);
  }
  if (groups.empty()) {
    throw InvalidParameter(std::string("pool_rows: no grid scenarios of family ") + to_string(family));
  }

  std::vector<PooledRow> rows;
  rows.reserve(groups.size());
  for (const auto& [key, members] : groups) {
    PooledRow row;
    row.order = static_cast<VarianceOrder>(std::get<0>(key));
    row.psi = std::get<1>(key);
    row.theta = std::get<2>(key);
    row.n_cells = static_cast<Index>(members.size());
    char id[96];
    std::snprintf(id, sizeof id, "%s|psi=%g|theta=%g", to_string(row.order), row.psi, row.theta);

    if (mode == PoolMode::replicates) {
      std::vector<ReplicateResult> pooled;
      for (std::size_t si : members) {
        for (const auto& r : run.replicates[si]) {
          ReplicateResult copy = r;
          copy.curve.clear();
          pooled.push_back(std::move(copy));
        }
      }
      row.summary = summarize(id, pooled);
    } else {
      std::vector<Scalar> c_d, c_v, slope, citl, b_d, b_v;
      GridSummary& out = row.summary;
      out.scenario_id = id;
      for (std::size_t si : members) {
        const GridSummary& cell = run.summaries[si];
        out.n_reps += cell.n_reps;
        out.n_excluded += cell.n_excluded;
        c_d.push_back(cell.c_deriv_mean);
        c_v.push_back(cell.c_valid_mean);
        slope.push_back(cell.slope_median);
        citl.push_back(cell.citl_mean);
        b_d.push_back(cell.brier_deriv_mean);
        b_v.push_back(cell.brier_valid_mean);
      }
      const auto set = [](const std::vector<Scalar>& v, Scalar& mean, Scalar& sd) {
        const Moments m = moments(v);
        mean = m.mean;
        sd = m.sd;
      };
      set(c_d, out.c_deriv_mean, out.c_deriv_sd);
      set(c_v, out.c_valid_mean, out.c_valid_sd);
      set(slope, out.slope_median, out.slope_sd);
      set(citl, out.citl_mean, out.citl_sd);
      set(b_d, out.brier_deriv_mean, out.brier_deriv_sd);
      set(b_v, out.brier_valid_mean, out.brier_valid_sd);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace heterosim
