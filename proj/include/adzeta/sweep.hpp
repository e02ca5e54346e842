#ifndef ADZETA_SWEEP_HPP
#define ADZETA_SWEEP_HPP

// Experiment driver: per-R rows of the determinant-ratio pipeline,
// R-sweeps with Richardson summaries, and the named verification suites.

#include <iosfwd>

#include "adzeta/zeta_eta.hpp"

namespace adzeta {

struct SweepOptions {
  double t_heat = 0.02;     // smallest certified heat time
  int threads = 1;          // concurrent rows
  bool s_value_report = true;
  int family_points = 21;
};

struct SweepRow {
  double R = 0.0;
  double det_ratio = 0.0;
  double scaled = 0.0;   // R^{-2h} det_ratio
  double rhs = 0.0;      // decomposition-formula right side
  double rel_error = 0.0;
  int n_svalues = 0;
  double max_sval_gap = 0.0;
  double fitted_rate = 0.0;  // cumulative decay rate of the s-value gaps
  bool evalue_ok = false;
  double wall_ms = 0.0;
  bool failed = false;
  std::string error;
  // diagnostics
  int h = 0, h_M = 0, h1 = 0, h2 = 0, h_Y = 0;
  double zeta_prime0 = 0.0;
  double small_time = 0.0;  // should drift toward zeta_{B^2}(0) log 2
  double model_gap_scaled = 0.0;  // max |2R lambda - model| R^kappa
};

struct SweepSummary {
  double limit = 0.0;          // Richardson-extrapolated scaled ratio
  double fitted_power = 0.0;   // fitted R^{-p} residual power
  double final_rel_error = 0.0;
  double extrapolated_rel_error = 0.0;
  double rhs = 0.0;
};

SweepRow compute_row(const ManifoldConfig& cfg, const SweepOptions& opt = {});

std::vector<SweepRow> run_sweep(const ManifoldConfig& cfg,
                                std::vector<double> R_list,
                                const SweepOptions& opt = {},
                                SweepSummary* summary = nullptr);

std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string sweep_json(const std::vector<SweepRow>& rows,
                       const SweepSummary* summary);

// Named verification suites (exit-code style: true = pass); the report
// stream receives one JSON object.
bool run_suite(const std::string& name, std::uint64_t seed,
               std::ostream& report);

// Deterministic built-in test configurations.
ManifoldConfig example_config(const std::string& name);

}  // namespace adzeta

#endif
