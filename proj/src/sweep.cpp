#include "adzeta/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "adzeta/circle.hpp"
#include "adzeta/linalg.hpp"
#include "adzeta/special.hpp"

namespace adzeta {

using nlohmann::json;

namespace {

double heat_window(const ManifoldConfig& cfg, double t_heat) {
  const double L = cfg.total_length();
  const double db = 3.0 * (2.0 * cfg.fiber.m * L / kPi) + 8.0;
  double lo = 5.0, hi = 400.0;
  auto bound = [&](double W) {
    return db * std::exp(-t_heat * W * W) / std::max(t_heat * W, 1e-3);
  };
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    (bound(mid) > 0.5e-9 ? lo : hi) = mid;
  }
  return hi + 1.0;
}

EigenvalueList sub_window(const EigenvalueList& list, double window) {
  EigenvalueList out;
  out.window = window;
  out.operator_id = list.operator_id;
  out.weyl_expected = 0;
  for (const auto& e : list.entries)
    if (std::abs(e.value) <= window) out.entries.push_back(e);
  return out;
}

}  // namespace

SweepRow compute_row(const ManifoldConfig& cfg, const SweepOptions& opt) {
  auto t0 = std::chrono::steady_clock::now();
  SweepRow row;
  row.R = cfg.R;
  CountData counts = compute_counts(cfg);
  row.h = counts.h;
  row.h_M = counts.h_M;
  row.h1 = counts.h1;
  row.h2 = counts.h2;
  row.h_Y = counts.h_Y;
  const double eth = evalue_threshold(cfg);
  const double window = heat_window(cfg, opt.t_heat);

  SpectralProblem closed =
      SpectralProblem::closed(build_closed_operator(cfg));
  auto halves = build_half_operators(cfg);
  SpectralProblem half1 = SpectralProblem::half(halves.first);
  SpectralProblem half2 = SpectralProblem::half(halves.second);
  EigenvalueList spec_cl = enumerate_eigenvalues(closed, window);
  EigenvalueList spec_1 = enumerate_eigenvalues(half1, window);
  EigenvalueList spec_2 = enumerate_eigenvalues(half2, window);

  EvalueReport ev = validate_evalue_assumption(cfg, spec_cl, counts);
  row.evalue_ok = ev.pass;
  require(ev.pass, "e-value hypothesis failed: " + ev.detail);

  RelativeHeatTrace tr =
      RelativeHeatTrace::from_lists(spec_cl, spec_1, spec_2, counts, eth);
  ZetaResult zr = relative_zeta_prime0(tr);
  row.zeta_prime0 = zr.zeta_prime0;
  row.det_ratio = zr.det;
  row.scaled = std::pow(cfg.R, -2.0 * counts.h) * zr.det;
  row.small_time = small_time_diagnostic(tr, cfg.R, cfg.epsilon);

  const int zb2 = zeta_b2_zero(cfg.fiber);
  if (cfg.fiber.h_Y == 0) {
    Mat empty(0, 0);
    row.rhs = paper_rhs(empty, empty, empty, 0, counts.h_M, zb2);
    row.n_svalues = 0;
  } else {
    double delta = 1.35 * std::pow(cfg.R, -cfg.kappa) + 0.02;
    if (std::isfinite(cfg.fiber.mu1)) delta = std::min(delta, 0.9 * cfg.fiber.mu1);
    ScatteringFamily f1 =
        scattering_family(cfg, 1, delta, opt.family_points);
    ScatteringFamily f2 =
        scattering_family(cfg, 2, delta, opt.family_points);
    ScatteringFamily c12 = compose_c12(f1, f2);
    ScatteringFamily s1 = s_sigma(f1, cfg.sigma1);
    ScatteringFamily s2 = s_sigma(f2, cfg.sigma2);
    row.rhs = paper_rhs(c12.value_at_zero(), s1.value_at_zero(),
                        s2.value_at_zero(), counts.h_Y, counts.h_M, zb2);
    if (opt.s_value_report) {
      double sw = std::pow(cfg.R, -cfg.kappa);
      EigenvalueList svals = sub_window(spec_cl, sw);
      SecularSet omega = omega_set(c12, cfg.R, cfg.kappa, 4);
      MatchReport mr = match_svalues(svals, omega, eth);
      row.n_svalues = mr.n_spectrum;
      row.max_sval_gap = mr.max_gap;
      require(mr.counts_match, "s-value count mismatch: " + mr.detail);
      ModelSpectrum model = model_spectrum(
          CircleOperator(c12.value_at_zero(), "c12"),
          2.0 * std::pow(cfg.R, 1.0 - cfg.kappa));
      MatchReport mm = match_model(svals, model, cfg.R, cfg.kappa, 2.0, eth);
      if (mm.counts_match)
        row.model_gap_scaled = mm.max_gap * std::pow(cfg.R, cfg.kappa);
    }
  }
  row.rel_error = std::abs(row.scaled - row.rhs) / std::abs(row.rhs);
  row.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return row;
}

std::vector<SweepRow> run_sweep(const ManifoldConfig& cfg,
                                std::vector<double> R_list,
                                const SweepOptions& opt,
                                SweepSummary* summary) {
  if (R_list.empty()) return {};
  std::sort(R_list.begin(), R_list.end());
  std::vector<SweepRow> rows(R_list.size());
  std::atomic<size_t> next{0};
  int nthreads = std::max(1, opt.threads);
  nthreads = std::min<int>(nthreads, static_cast<int>(R_list.size()));
  auto worker = [&]() {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= R_list.size()) return;
      try {
        rows[i] = compute_row(cfg.with_R(R_list[i]), opt);
      } catch (const std::exception& e) {
        rows[i].R = R_list[i];
        rows[i].failed = true;
        rows[i].error = e.what();
      }
    }
  };
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  // cumulative decay-rate fit of the s-value gaps
  for (size_t i = 0; i < rows.size(); ++i) {
    std::vector<double> xs, ys;
    for (size_t j = 0; j <= i; ++j) {
      if (rows[j].failed || rows[j].max_sval_gap <= 0) continue;
      xs.push_back(rows[j].R);
      ys.push_back(std::log(rows[j].max_sval_gap));
    }
    if (xs.size() >= 2) rows[i].fitted_rate = -linear_fit(xs, ys).second;
  }
  if (summary) {
    *summary = SweepSummary{};
    std::vector<const SweepRow*> ok;
    for (const auto& r : rows)
      if (!r.failed) ok.push_back(&r);
    if (!ok.empty()) {
      summary->rhs = ok.back()->rhs;
      summary->final_rel_error = ok.back()->rel_error;
      summary->limit = ok.back()->scaled;
    }
    if (ok.size() >= 3) {
      // scaled(R) = limit + c R^{-p}: solve p from the last three rows
      const SweepRow* a = ok[ok.size() - 3];
      const SweepRow* b = ok[ok.size() - 2];
      const SweepRow* c = ok[ok.size() - 1];
      double num = a->scaled - b->scaled;
      double den = b->scaled - c->scaled;
      if (num * den > 0) {
        auto ratio = [&](double p) {
          return (std::pow(a->R, -p) - std::pow(b->R, -p)) /
                 (std::pow(b->R, -p) - std::pow(c->R, -p));
        };
        double target = num / den;
        double lo = 0.05, hi = 6.0;
        for (int it = 0; it < 200; ++it) {
          double mid = 0.5 * (lo + hi);
          (ratio(mid) > target ? lo : hi) = mid;
        }
        double p = 0.5 * (lo + hi);
        double cc = (b->scaled - c->scaled) /
                    (std::pow(b->R, -p) - std::pow(c->R, -p));
        summary->fitted_power = p;
        summary->limit = c->scaled - cc * std::pow(c->R, -p);
        summary->extrapolated_rel_error =
            std::abs(summary->limit - summary->rhs) / std::abs(summary->rhs);
      } else {
        summary->extrapolated_rel_error = summary->final_rel_error;
      }
    } else {
      summary->extrapolated_rel_error = summary->final_rel_error;
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "# adzeta-sweep-v1 columns=R,det_ratio,scaled,rhs,rel_error,"
        "n_svalues,max_sval_gap,fitted_rate,evalue_ok,wall_ms\n";
  char buf[512];
  for (const auto& r : rows) {
    if (r.failed) {
      os << r.R << ",failed,,,,,,,," << "\n";
      continue;
    }
    std::snprintf(buf, sizeof(buf),
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g,%d,%.0f\n",
                  r.R, r.det_ratio, r.scaled, r.rhs, r.rel_error, r.n_svalues,
                  r.max_sval_gap, r.fitted_rate, r.evalue_ok ? 1 : 0,
                  r.wall_ms);
    os << buf;
  }
  return os.str();
}

std::string sweep_json(const std::vector<SweepRow>& rows,
                       const SweepSummary* summary) {
  json j;
  j["rows"] = json::array();
  for (const auto& r : rows) {
    json row;
    row["R"] = r.R;
    if (r.failed) {
      row["failed"] = true;
      row["error"] = r.error;
    } else {
      row["det_ratio"] = r.det_ratio;
      row["scaled"] = r.scaled;
      row["rhs"] = r.rhs;
      row["rel_error"] = r.rel_error;
      row["n_svalues"] = r.n_svalues;
      row["max_sval_gap"] = r.max_sval_gap;
      row["fitted_rate"] = r.fitted_rate;
      row["evalue_ok"] = r.evalue_ok;
      row["wall_ms"] = r.wall_ms;
      row["h"] = r.h;
      row["h_M"] = r.h_M;
      row["h_Y"] = r.h_Y;
      row["zeta_prime0"] = r.zeta_prime0;
      row["small_time_diagnostic"] = r.small_time;
      row["model_gap_scaled"] = r.model_gap_scaled;
    }
    j["rows"].push_back(row);
  }
  if (summary) {
    j["summary"] = {{"limit", summary->limit},
                    {"fitted_power", summary->fitted_power},
                    {"final_rel_error", summary->final_rel_error},
                    {"extrapolated_rel_error",
                     summary->extrapolated_rel_error},
                    {"rhs", summary->rhs}};
  }
  return j.dump(2);
}

// ----------------------------------------------------------------- configs

namespace {

ArcProfile bump_arc(double length, cplx amplitude, double center = -1,
                    double width = -1) {
  ArcProfile a;
  a.kind = ArcProfile::Kind::bump;
  a.length = length;
  a.amplitude = amplitude * Mat::Identity(1, 1);
  a.center = center;
  a.width = width;
  return a;
}

ArcProfile const_arc(double length) {
  ArcProfile a;
  a.kind = ArcProfile::Kind::constant;
  a.length = length;
  return a;
}

}  // namespace

ManifoldConfig example_config(const std::string& name) {
  ManifoldConfig cfg;
  cfg.name = name;
  cfg.R_list = {4, 6, 8, 12, 16, 24, 32};
  if (name == "invertible") {
    cfg.fiber = FiberStructure::standard(1, Mat::Identity(1, 1));
    cfg.arc1 = bump_arc(3.0, cplx(0.55, 0.35));
    cfg.arc2 = bump_arc(2.5, cplx(-0.40, 0.20));
    return cfg;
  }
  if (name == "cylinder") {
    cfg.fiber = FiberStructure::standard(1, Mat::Identity(1, 1));
    cfg.arc1 = const_arc(3.0);
    cfg.arc2 = const_arc(2.5);
    return cfg;
  }
  if (name == "generic") {
    cfg.fiber = FiberStructure::standard(1, Mat::Zero(1, 1));
    cfg.arc1 = bump_arc(3.0, cplx(0.80, 0.50));
    cfg.arc2 = bump_arc(2.5, cplx(-0.60, 0.30));
    std::mt19937_64 rng(42);
    cfg.sigma1 = involution_from_block(random_unitary(2, rng));
    cfg.sigma2 = involution_from_block(random_unitary(2, rng));
    return cfg;
  }
  if (name == "mirror") {
    cfg.fiber = FiberStructure::standard(1, Mat::Zero(1, 1));
    const double l = 3.0, c = 1.2, w = 1.4;
    cfg.arc1 = bump_arc(l, cplx(0.75, 0.45), c, w);
    // w2(y) = -w1(l - y): reflected bump with the opposite amplitude
    cfg.arc2 = bump_arc(l, cplx(-0.75, -0.45), l - c, w);
    std::mt19937_64 rng(43);
    cfg.sigma1 = involution_from_block(random_unitary(2, rng));
    cfg.sigma2 = involution_from_block(random_unitary(2, rng));
    return cfg;
  }
  if (name == "free") {
    cfg.fiber = FiberStructure::standard(1, Mat::Zero(1, 1));
    cfg.arc1 = const_arc(3.0);
    cfg.arc2 = const_arc(2.5);
    cfg.sigma1 = involution_from_block(Mat::Identity(2, 2));
    std::mt19937_64 rng(44);
    cfg.sigma2 = involution_from_block(random_unitary(2, rng));
    return cfg;
  }
  throw invariant_error("unknown example config '" + name + "'");
}

// ------------------------------------------------------------------ suites

namespace {

struct SuiteReport {
  json checks = json::array();
  bool pass = true;
  void add(const std::string& name, bool ok, double value, double bound) {
    checks.push_back({{"check", name},
                      {"pass", ok},
                      {"value", value},
                      {"bound", bound}});
    pass = pass && ok;
  }
  void leq(const std::string& name, double value, double bound) {
    add(name, value <= bound, value, bound);
  }
};

bool suite_fiber(std::uint64_t seed, SuiteReport& rep) {
  std::mt19937_64 rng(seed);
  auto F = FiberStructure::standard(2, Mat::Zero(2, 2), 2);
  Mat kb = F.ker_basis();
  Mat GY = F.GY();
  double worst_inv = 0.0, worst_lemma = 0.0;
  for (int t = 0; t < 25; ++t) {
    auto sig = involution_from_block(random_unitary(F.h_Y / 2, rng));
    check_involution(sig.sigma);
    Mat sf = kb * sig.sigma * kb.adjoint();
    worst_inv = std::max(worst_inv, (sf * sf - (kb * kb.adjoint())).norm());
    Vec phi = F.ker_plus_basis() * Vec::Random(F.h_Y / 2);
    Vec psi = 0.5 * (phi + sf * phi);
    worst_lemma = std::max(
        worst_lemma, (psi - cplx(0, 1) * (GY * psi) - phi).norm());
  }
  rep.leq("involution_square", worst_inv, 1e-10);
  rep.leq("inversion_lemma", worst_lemma, 1e-12);
  double worst_det = 0.0;
  for (int t = 0; t < 10; ++t) {
    Mat A = random_hermitian(4, rng);
    Mat U = random_unitary(4, rng);
    worst_det = std::max(worst_det,
                         std::abs(reduced_det(A) -
                                  reduced_det(Mat(U * A * U.adjoint()))));
  }
  rep.leq("reduced_det_conjugation", worst_det, 1e-8);
  return rep.pass;
}

bool suite_circle(std::uint64_t seed, SuiteReport& rep) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    int d = 1 + static_cast<int>(rng() % 6);
    CircleOperator op(random_unitary(d, rng));
    auto closed = zeta_det_circle(op);
    worst = std::max(worst, std::abs(zeta_det_circle_hurwitz(op) -
                                     closed.det) / closed.det);
  }
  rep.leq("hurwitz_vs_closed_rel", worst, 1e-10);
  double worst_eta = 0.0;
  for (int t = 0; t < 25; ++t) {
    CircleOperator op(random_unitary(3, rng));
    worst_eta = std::max(
        worst_eta, mod1_dist(eta_series(op, 40.0), eta_circle(op)));
  }
  rep.leq("eta_series_vs_matrix", worst_eta, 1e-10);
  return rep.pass;
}

bool suite_scattering(std::uint64_t, SuiteReport& rep) {
  for (const char* name : {"free", "generic", "mirror"}) {
    ManifoldConfig cfg = example_config(name).with_R(6.0);
    for (int side : {1, 2}) {
      SideSolver solver(cfg, side);
      double wu = 0, wf = 0, wg = 0, wi = 0;
      Mat G = Mat::Zero(cfg.fiber.h_Y, cfg.fiber.h_Y);
      const int dt = cfg.fiber.h_Y / 2;
      G.topLeftCorner(dt, dt) = cplx(0, 1) * Mat::Identity(dt, dt);
      G.bottomRightCorner(dt, dt) = cplx(0, -1) * Mat::Identity(dt, dt);
      for (int i = 0; i < 20; ++i) {
        double lam = -0.30 + 0.60 * i / 19.0;
        Mat C = solver.full(lam);
        Mat Cm = solver.full(-lam);
        wu = std::max(wu, unitary_defect(C));
        wf = std::max(wf, (C * Cm - Mat::Identity(C.rows(), C.rows())).norm());
        wg = std::max(wg, (G * C + C * G).norm());
      }
      Mat C0 = solver.full(0.0);
      wi = (C0 * C0 - Mat::Identity(C0.rows(), C0.rows())).norm();
      std::string tag = std::string(name) + "_side" + std::to_string(side);
      rep.leq(tag + "_unitary", wu, 1e-8);
      rep.leq(tag + "_funceq", wf, 1e-8);
      rep.leq(tag + "_anticommute", wg, 1e-8);
      rep.leq(tag + "_involution0", wi, 1e-8);
    }
  }
  return rep.pass;
}

bool suite_svalues(std::uint64_t, SuiteReport& rep) {
  ManifoldConfig base = example_config("generic");
  std::vector<double> gaps;
  for (double R : {6.0, 9.0}) {
    ManifoldConfig cfg = base.with_R(R);
    double sw = std::pow(R, -cfg.kappa);
    SpectralProblem closed =
        SpectralProblem::closed(build_closed_operator(cfg));
    EigenvalueList spec = enumerate_eigenvalues(closed, sw);
    double delta = 1.35 * sw + 0.02;
    ScatteringFamily f1 = scattering_family(cfg, 1, delta, 21);
    ScatteringFamily f2 = scattering_family(cfg, 2, delta, 21);
    ScatteringFamily c12 = compose_c12(f1, f2);
    SecularSet omega = omega_set(c12, R, cfg.kappa, 4);
    MatchReport mr = match_svalues(spec, omega, evalue_threshold(cfg));
    rep.add("count_match_R" + std::to_string(static_cast<int>(R)),
            mr.counts_match, mr.n_spectrum, mr.n_predicted);
    if (mr.counts_match) {
      rep.leq("max_gap_R" + std::to_string(static_cast<int>(R)), mr.max_gap,
              1e-2);
      gaps.push_back(mr.max_gap);
    }
  }
  if (gaps.size() == 2)
    rep.add("gap_decay", gaps[1] < gaps[0], gaps[1], gaps[0]);
  return rep.pass;
}

bool suite_maass_selberg(std::uint64_t, SuiteReport& rep) {
  ManifoldConfig cfg = example_config("free");
  Vec phi = Vec::Zero(4);
  // unit vector in L1 for the free channel: (e_p^+ + e_p^-) pattern
  phi(0) = 1.0 / std::sqrt(2.0);
  phi(2) = 1.0 / std::sqrt(2.0);
  double lambda = 0.05;
  double prev = 1e300;
  bool decaying = true;
  for (double R : {6.0, 10.0}) {
    MaassSelberg ms = maass_selberg_check(cfg, 1, phi, phi, lambda, R);
    double expect = 4.0 * R + 2.0 * cfg.arc1.length;
    rep.leq("freechannel_rhs_R" + std::to_string(static_cast<int>(R)),
            std::abs(ms.rhs - expect), 2e-3);
    rep.leq("diff_R" + std::to_string(static_cast<int>(R)), ms.diff, 1e-4);
    decaying = decaying && ms.diff < prev + 1e-12;
    prev = ms.diff;
  }
  rep.add("diff_decreasing", decaying, 0, 0);
  return rep.pass;
}

bool suite_eta(std::uint64_t seed, SuiteReport& rep) {
  std::mt19937_64 rng(seed);
  double worst_dev = 0.0, worst_det = 0.0;
  for (int t = 0; t < 200; ++t) {
    int d = 1 + static_cast<int>(rng() % 3);
    auto mk = [&]() { return involution_from_block(random_unitary(d, rng)); };
    Mat C1 = mk().sigma, C2 = mk().sigma;
    Mat s1 = mk().sigma, s2 = mk().sigma;
    auto repd = eta_decomposition_check(C1, C2, s1, s2);
    worst_dev = std::max(worst_dev, repd.dev_mod1);
    worst_det = std::max(worst_det, repd.det_identity_dev);
  }
  rep.leq("det_identity", worst_det, 1e-10);
  rep.leq("eta_mod1_identity", worst_dev, 1e-8);
  auto s = involution_from_block(random_unitary(2, rng));
  rep.leq("eta_sigma_equal",
          mod1_dist(eta_cylinder(s, s).value, 0.5 * 2.0), 1e-12);
  return rep.pass;
}

bool suite_main(std::uint64_t, SuiteReport& rep) {
  // reduced-size shadow of the decomposition run
  ManifoldConfig cfg = example_config("invertible");
  SweepOptions opt;
  SweepSummary summary;
  auto rows = run_sweep(cfg, {4.0, 8.0}, opt, &summary);
  bool ok = !rows.empty();
  for (const auto& r : rows) ok = ok && !r.failed;
  rep.add("rows_computed", ok, rows.size(), 2);
  if (ok && rows.size() == 2) {
    rep.add("error_decreasing", rows[1].rel_error < rows[0].rel_error,
            rows[1].rel_error, rows[0].rel_error);
    rep.leq("rel_error_R8", rows[1].rel_error, 0.35);
  }
  // p:L12 / t:eev shadow on the mirror config
  ManifoldConfig mc = example_config("mirror").with_R(6.0);
  CountData cd = compute_counts(mc);
  ScatteringFamily f1 = scattering_family(mc, 1, 0.4, 11);
  ScatteringFamily f2 = scattering_family(mc, 2, 0.4, 11);
  ScatteringFamily c12 = compose_c12(f1, f2);
  int mult = plus_one_multiplicity(c12.value_at_zero());
  rep.add("plus_one_multiplicity", mult == cd.dim_L1_cap_L2, mult,
          cd.dim_L1_cap_L2);
  SpectralProblem closed = SpectralProblem::closed(build_closed_operator(mc));
  EigenvalueList spec = enumerate_eigenvalues(closed, 0.5);
  auto ev = validate_evalue_assumption(mc, spec, cd);
  rep.add("evalue_count", ev.pass, ev.found, ev.expected);
  return rep.pass;
}

}  // namespace

bool run_suite(const std::string& name, std::uint64_t seed,
               std::ostream& report) {
  SuiteReport rep;
  bool pass = false;
  auto t0 = std::chrono::steady_clock::now();
  if (name == "fiber") pass = suite_fiber(seed, rep);
  else if (name == "circle") pass = suite_circle(seed, rep);
  else if (name == "scattering") pass = suite_scattering(seed, rep);
  else if (name == "svalues") pass = suite_svalues(seed, rep);
  else if (name == "maass-selberg") pass = suite_maass_selberg(seed, rep);
  else if (name == "eta") pass = suite_eta(seed, rep);
  else if (name == "main") pass = suite_main(seed, rep);
  else throw dimension_error("unknown suite '" + name + "'");
  json out;
  out["suite"] = name;
  out["seed"] = seed;
  out["pass"] = pass;
  out["checks"] = rep.checks;
  out["wall_ms"] = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  report << out.dump(2) << "\n";
  return pass;
}

}  // namespace adzeta
