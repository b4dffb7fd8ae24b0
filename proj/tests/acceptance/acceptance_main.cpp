// Acceptance suite: one numbered criterion per run (or all without
// arguments), one PASS/FAIL line each, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "relopt/benchmarks.hpp"
#include "relopt/hull.hpp"
#include "relopt/math.hpp"
#include "relopt/rbdo.hpp"
#include "relopt/refine.hpp"
#include "relopt/rng.hpp"
#include "relopt/run_config.hpp"
#include "relopt/runs.hpp"
#include "relopt/sampling.hpp"
#include "relopt/subset.hpp"

using namespace relopt;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition && ok) {
      ok = false;
      detail = what;
    }
  }
};

double elapsed_seconds(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

// ---------------------------------------------------------------------------
// 1. Kriging exactness on 50 random fitted models.
Check criterion_1() {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  RngStream rng(derive_seed(1001, "criterion-1"));
  for (int model_index = 0; model_index < 50; ++model_index) {
    const int dim = 1 + static_cast<int>(rng.below(10));
    const int points =
        std::max(10 + static_cast<int>(rng.below(191)), 2 * (dim + 1));
    VectorXd lo(dim), hi(dim);
    for (int k = 0; k < dim; ++k) {
      lo[k] = rng.uniform(-3.0, 0.0);
      hi[k] = lo[k] + rng.uniform(0.5, 10.0);
    }
    DesignOfExperiments doe;
    doe.inputs = latin_hypercube(lo, hi, points, rng);
    doe.outputs.resize(points);
    // Random deterministic smooth field (the emulator's domain usage).
    const int waves = 1 + static_cast<int>(rng.below(3));
    std::vector<VectorXd> freq(static_cast<size_t>(waves));
    std::vector<double> phase(static_cast<size_t>(waves));
    for (auto& f : freq) {
      f.resize(dim);
      for (int k = 0; k < dim; ++k) f[k] = rng.uniform(-2.0, 2.0) / (hi[k] - lo[k]);
    }
    for (auto& p : phase) p = rng.uniform(0.0, 6.28);
    for (int i = 0; i < points; ++i) {
      double y = 0.2 * doe.inputs.row(i).sum() / dim;
      for (int w = 0; w < waves; ++w)
        y += std::sin(freq[static_cast<size_t>(w)].dot(doe.inputs.row(i)) * 6.28 +
                      phase[static_cast<size_t>(w)]);
      doe.outputs[i] = y;
    }

    KrigingFitOptions options;
    options.seed = derive_seed(1001, "fit", model_index);
    options.threads = 2;
    const KrigingModel model = KrigingModel::fit(doe, options);
    for (int i = 0; i < points; ++i) {
      double mean = 0.0, variance = 0.0;
      model.predict(doe.inputs.row(i).transpose(), mean, variance);
      c.require(std::abs(mean - doe.outputs[i]) <=
                    1e-8 * std::max(1.0, std::abs(doe.outputs[i])),
                "model " + std::to_string(model_index) + ": DOE mean error " +
                    std::to_string(std::abs(mean - doe.outputs[i])));
      c.require(variance <= 1e-6 * std::max(model.process_variance(), 1e-300),
                "model " + std::to_string(model_index) + ": DOE variance " +
                    std::to_string(variance));
    }
  }
  const double seconds = elapsed_seconds(start);
  c.require(seconds < 60.0, "runtime " + std::to_string(seconds) + " s >= 60 s");
  if (c.ok) c.detail = "50 models interpolate exactly";
  return c;
}

// ---------------------------------------------------------------------------
// 2. Margin probability formula against direct Gaussian CDF evaluation.
Check criterion_2() {
  Check c;
  RngStream rng(derive_seed(1002, "criterion-2"));
  const VectorXd x = VectorXd::Zero(1);
  for (int rep = 0; rep < 10000; ++rep) {
    const double g_hat = rng.uniform(-10.0, 10.0);
    const double sd = rng.uniform(0.01, 5.0);
    const double k = rng.uniform(0.3, 3.5);
    const AnalyticSurface surface([g_hat](const VectorXd&) { return g_hat; },
                                  [sd](const VectorXd&) { return sd; });
    const double direct = 0.5 * std::erfc(-((k * sd - g_hat) / sd) / std::sqrt(2.0)) -
                          0.5 * std::erfc(-((-k * sd - g_hat) / sd) / std::sqrt(2.0));
    const double value = margin_probability(surface, x, k);
    c.require(std::abs(value - direct) <= 1e-13,
              "triple (" + std::to_string(g_hat) + ", " + std::to_string(sd) + ", " +
                  std::to_string(k) + "): |" + std::to_string(value) + " - " +
                  std::to_string(direct) + "| > 1e-13");
  }
  const AnalyticSurface centered([](const VectorXd&) { return 0.0; },
                                 [](const VectorXd&) { return 1.7; });
  const double central = margin_probability(centered, x, default_margin_k());
  c.require(std::abs(central - 0.95) <= 1e-12,
            "centered case " + std::to_string(central) + " != 0.95");
  if (c.ok) c.detail = "1e4 triples at machine precision; centered = 0.95";
  return c;
}

// ---------------------------------------------------------------------------
// 3. Subset simulation accuracy on the linear benchmark.
Check criterion_3() {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  for (double beta_true : {2.0, 3.0, 4.0}) {
    const BenchmarkProblem bench = linear_benchmark(2, beta_true);
    int within = 0;
    double sum_pf = 0.0, sum_pf2 = 0.0, sum_cov = 0.0;
    const int runs = 100;
    for (int run = 0; run < runs; ++run) {
      SubsetConfig cfg;
      cfg.samples_per_level = 10000;
      cfg.seed = derive_seed(1003, "criterion-3",
                             static_cast<uint64_t>(beta_true * 10),
                             static_cast<uint64_t>(run));
      const SubsetResult r =
          subset_simulate(bench.limit_states[0], bench.spec, bench.design, cfg);
      if (std::abs(r.beta - beta_true) <= 0.1) ++within;
      sum_pf += r.pf;
      sum_pf2 += r.pf * r.pf;
      sum_cov += r.cov;
    }
    c.require(within >= 95, "beta " + std::to_string(beta_true) + ": only " +
                                std::to_string(within) + "/100 within 0.1");
    const double mean_pf = sum_pf / runs;
    const double sd_pf = std::sqrt(std::max(0.0, sum_pf2 / runs - mean_pf * mean_pf));
    const double empirical_cov = sd_pf / mean_pf;
    const double reported_cov = sum_cov / runs;
    const double ratio = empirical_cov / reported_cov;
    c.require(ratio >= 0.5 && ratio <= 2.0,
              "beta " + std::to_string(beta_true) + ": dispersion/cov ratio " +
                  std::to_string(ratio));
  }
  const double seconds = elapsed_seconds(start);
  c.require(seconds < 300.0, "runtime " + std::to_string(seconds) + " s >= 300 s");
  if (c.ok) c.detail = "beta within 0.1 in >=95/100 runs; dispersion consistent";
  return c;
}

// ---------------------------------------------------------------------------
// 4. Score-function sensitivities: analytic and CRN finite differences.
Check criterion_4() {
  Check c;
  {
    // 1-D Gaussian: dPf/dtheta = pdf(c - theta).
    const double threshold = 2.0;
    RandomVectorSpec spec;
    spec.marginals = {{"x", MarginalFamily::Normal, 0.0, 1.0, 0}};
    DesignVector design;
    design.values = VectorXd::Zero(1);
    design.lower = VectorXd::Constant(1, -5.0);
    design.upper = VectorXd::Constant(1, 5.0);
    SubsetConfig cfg;
    cfg.samples_per_level = 10000;
    cfg.seed = derive_seed(1004, "gaussian");
    const SubsetResult r = subset_simulate(
        [threshold](const VectorXd& x) { return threshold - x[0]; }, spec, design,
        cfg, true);
    const double exact = normal_pdf(threshold);
    c.require(std::abs(r.sensitivities[0].value - exact) <= 0.2 * exact,
              "1-D Gaussian: estimate " + std::to_string(r.sensitivities[0].value) +
                  " vs analytic " + std::to_string(exact));
  }
  {
    // Linear benchmark: score estimate vs common-random-number differences.
    const BenchmarkProblem bench = linear_benchmark(2, 3.0);
    SubsetConfig cfg;
    cfg.samples_per_level = 10000;
    cfg.seed = derive_seed(1004, "linear");
    const SubsetResult at =
        subset_simulate(bench.limit_states[0], bench.spec, bench.design, cfg, true);
    const double delta = 0.05;
    DesignVector plus = bench.design, minus = bench.design;
    plus.values[0] += delta;
    minus.values[0] -= delta;
    const SubsetResult rp =
        subset_simulate(bench.limit_states[0], bench.spec, plus, cfg);
    const SubsetResult rm =
        subset_simulate(bench.limit_states[0], bench.spec, minus, cfg);
    const double fd = (rp.pf - rm.pf) / (2.0 * delta);
    c.require(std::abs(at.sensitivities[0].value - fd) <= 0.2 * std::abs(fd),
              "linear benchmark: score " + std::to_string(at.sensitivities[0].value) +
                  " vs CRN differences " + std::to_string(fd));
  }
  if (c.ok) c.detail = "score estimator within 20% of analytic and CRN differences";
  return c;
}

// ---------------------------------------------------------------------------
// 5. Refinement budget and accuracy on the series system benchmark.
Check criterion_5() {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  const BenchmarkProblem bench = series_2d_benchmark();

  SurrogateSet set;
  set.box = augmented_confidence_box(bench.spec, bench.design, 8.0);
  set.dims = bench.spec.augmented_indices();

  const int initial_points = 10;
  RngStream doe_rng(derive_seed(1005, "doe"));
  DesignOfExperiments doe;
  doe.inputs = latin_hypercube(set.sub_lower(), set.sub_upper(), initial_points, doe_rng);
  doe.outputs.resize(initial_points);
  for (int i = 0; i < initial_points; ++i)
    doe.outputs[i] = bench.limit_states[0](doe.inputs.row(i).transpose());
  KrigingFitOptions fit_options;
  fit_options.seed = derive_seed(1005, "fit");
  set.models.push_back(KrigingModel::fit(doe, fit_options));

  RefineOptions options;
  options.epsilon_pf0 = 5e-2;
  options.budget = 300 - initial_points;
  options.subset.samples_per_level = 10000;
  options.seed = derive_seed(1005, "refine");
  options.refit = fit_options;

  const RefinementState state =
      enrich(set, bench.limit_states, bench.spec, bench.design, options);
  const long long total_calls = initial_points + state.calls_used;
  c.require(state.converged, "refinement did not reach the spread target");
  c.require(state.log10_spread <= 5e-2,
            "final spread " + std::to_string(state.log10_spread));
  c.require(total_calls <= 300,
            "true-function calls " + std::to_string(total_calls) + " > 300");

  // Brute-force oracle at 1e7 samples; the subset-run scatter dominates the
  // combined standard error.
  const long long n_mc = 10000000;
  const double pf_mc = bench.brute_force_pf(n_mc, derive_seed(1005, "oracle"));
  const double se_mc = std::sqrt(pf_mc * (1.0 - pf_mc) / n_mc);
  const double se_subset = state.pf_zero * 0.1;
  const double combined = std::sqrt(se_mc * se_mc + se_subset * se_subset);
  c.require(std::abs(state.pf_zero - pf_mc) <= 3.0 * combined,
            "surrogate pf " + std::to_string(state.pf_zero) + " vs oracle " +
                std::to_string(pf_mc));
  const double seconds = elapsed_seconds(start);
  c.require(seconds < 600.0, "runtime " + std::to_string(seconds) + " s >= 600 s");
  if (c.ok)
    c.detail = "spread <= 0.05 with " + std::to_string(total_calls) +
               " calls; pf matches the 1e7-sample oracle";
  return c;
}

// ---------------------------------------------------------------------------
// 6. Polak-He correctness: analytic KKT point, step table, warm restart.
Check criterion_6() {
  Check c;
  const FullEvaluator evaluate = [](const VectorXd& t) {
    PointEval e;
    e.cost = (t[0] - 1.0) * (t[0] - 1.0) + (t[1] - 2.0) * (t[1] - 2.0);
    e.cost_gradient.resize(2);
    e.cost_gradient << 2.0 * (t[0] - 1.0), 2.0 * (t[1] - 2.0);
    ConstraintEval cons;
    cons.value = t[0] + t[1] - 2.0;
    cons.gradient = VectorXd::Ones(2);
    e.constraints.push_back(std::move(cons));
    return e;
  };
  PolakHeOptions options;
  options.direction_tolerance = 1e-9;
  VectorXd start(2);
  start << -1.0, 0.5;
  const DriverResult r = polak_he_minimize(evaluate, start, options);
  c.require(r.history.size() <= 200, "used more than 200 iterations");
  c.require(std::abs(r.design[0] - 0.5) <= 1e-3 && std::abs(r.design[1] - 1.5) <= 1e-3,
            "final design (" + std::to_string(r.design[0]) + ", " +
                std::to_string(r.design[1]) + ") not at (0.5, 1.5)");

  c.require(step_factor(0.6, 5) == 0.07776, "0.6^5 != 0.07776 exactly");

  // Warm restart: an immediately-successful saved exponent probes k-1 next.
  const auto values = [](const VectorXd& t) {
    PointValues v;
    v.cost = t.squaredNorm();
    return v;
  };
  VectorXd theta(1), direction(1);
  theta << 1.0;
  direction << -2.0;
  const LineSearchResult first =
      goldstein_armijo_step(theta, values(theta), direction, 3, values, options);
  c.require(first.accepted && first.probed == std::vector<int>{3},
            "saved exponent was not probed first");
  c.require(first.next_start_k == 2, "immediate success did not move to k-1");
  const LineSearchResult second = goldstein_armijo_step(
      first.design, first.values, VectorXd::Constant(1, -2.0 * first.design[0]),
      first.next_start_k, values, options);
  c.require(!second.probed.empty() && second.probed.front() == 2,
            "next iteration did not probe k-1 first");
  if (c.ok) c.detail = "KKT point reached; step table exact; warm restart verified";
  return c;
}

// ---------------------------------------------------------------------------
// 7. End-to-end RBDO on the closed-form benchmark.
Check criterion_7() {
  Check c;
  const BenchmarkProblem bench = rbdo_closed_form_benchmark();
  double previous_cost = -std::numeric_limits<double>::infinity();
  for (double beta_target : {3.0, 4.5, 6.0}) {
    const auto start = std::chrono::steady_clock::now();
    RbdoProblem p;
    p.cost = bench.cost;
    p.cost_gradient = bench.cost_gradient;
    p.limit_states = bench.limit_states;
    p.spec = bench.spec;
    p.design = bench.design;
    p.design_names = {"theta1", "theta2"};
    p.beta_targets = {beta_target};
    p.refine_budget = 500;
    p.seed = derive_seed(1007, "rbdo", static_cast<uint64_t>(beta_target * 10));
    p.design.values << 0.0, 0.0;  // deterministic optimum

    const RbdoHistory history = rbdo_solve(p);
    c.require(history.converged,
              "beta " + std::to_string(beta_target) + ": not converged");

    // Surrogate-reuse invariant: the true-call counters move only when an
    // iteration re-entered enrichment.
    for (size_t i = 1; i < history.iterations.size(); ++i)
      if (!history.iterations[i].refined)
        c.require(history.iterations[i].true_calls ==
                      history.iterations[i - 1].true_calls,
                  "true calls moved outside enrichment");
    for (long long calls : history.true_calls)
      c.require(calls <= 500, "true calls " + std::to_string(calls) + " > 500");

    const auto verified = verify_design(p, history.final_design);
    c.require(std::abs(verified[0].beta - beta_target) <= 0.1 * beta_target,
              "beta " + std::to_string(beta_target) + ": verified " +
                  std::to_string(verified[0].beta));

    const double cost = p.cost_at(history.final_design.values);
    c.require(cost > previous_cost,
              "cost not increasing in the reliability target");
    previous_cost = cost;

    const double seconds = elapsed_seconds(start);
    c.require(seconds < 900.0, "runtime " + std::to_string(seconds) + " s >= 900 s");
  }
  if (c.ok) c.detail = "beta targets verified within 10%; cost increasing; reuse holds";
  return c;
}

// ---------------------------------------------------------------------------
// 8. Hull cost reproduction under the frozen volume convention.
Check criterion_8() {
  Check c;
  const Material material;
  HullGeometry nominal;
  nominal.shell_thickness = 24.0;
  nominal.web_height = 156.0;
  nominal.web_thickness = 10.0;
  nominal.flange_width = 120.0;
  nominal.flange_thickness = 24.0;
  nominal.frame_spacing = 600.0;
  nominal.radius = 2488.0;
  const double nominal_pct = 100.0 * hull_cost(nominal, material);
  c.require(std::abs(nominal_pct - 18.86) <= 0.5,
            "nominal design cost " + std::to_string(nominal_pct) + "% vs 18.86%");

  HullGeometry optimum = nominal;
  optimum.shell_thickness = 16.90;
  optimum.web_height = 160.27;
  optimum.web_thickness = 7.16;
  optimum.flange_width = 81.89;
  optimum.flange_thickness = 16.76;
  const double optimum_pct = 100.0 * hull_cost(optimum, material);
  c.require(std::abs(optimum_pct - 12.75) <= 0.5,
            "deterministic optimum cost " + std::to_string(optimum_pct) +
                "% vs 12.75%");
  if (c.ok)
    c.detail = "18.86% and 12.75% reproduced (" + std::to_string(nominal_pct) +
               ", " + std::to_string(optimum_pct) + ")";
  return c;
}

// ---------------------------------------------------------------------------
// 9. Byte-identical artifacts for identical manifests, any thread count.
Check criterion_9() {
  Check c;
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "relopt_acceptance_9";
  fs::remove_all(base);

  const auto compare_trees = [&](const fs::path& a, const fs::path& b) {
    for (const auto& entry : fs::directory_iterator(a)) {
      const fs::path other = b / entry.path().filename();
      std::ifstream f1(entry.path(), std::ios::binary), f2(other, std::ios::binary);
      c.require(f1.good() && f2.good(),
                "missing artifact " + entry.path().filename().string());
      if (!f1.good() || !f2.good()) continue;
      std::string s1((std::istreambuf_iterator<char>(f1)),
                     std::istreambuf_iterator<char>());
      std::string s2((std::istreambuf_iterator<char>(f2)),
                     std::istreambuf_iterator<char>());
      c.require(s1 == s2, "artifact differs: " + entry.path().filename().string());
    }
  };

  {
    RunConfig config = RunConfig::parse(
        R"({"problem": "linear", "seed": 9, "subset": {"samples_per_level": 5000}})");
    run_reliability(config, base / "rel1");
    config.threads = 4;
    run_reliability(config, base / "rel2");
    compare_trees(base / "rel1", base / "rel2");
  }
  {
    RunConfig config = RunConfig::parse(
        R"({"problem": "series-2d", "seed": 9, "initial_doe": 10,
            "refine_budget": 120, "enrichment_batch": 20,
            "candidate_count": 2000, "epsilon_pf0": 0.2,
            "subset": {"samples_per_level": 2000}})");
    run_refine(config, base / "ref1");
    config.threads = 4;
    run_refine(config, base / "ref2");
    compare_trees(base / "ref1", base / "ref2");
  }
  {
    RunConfig config = RunConfig::parse(
        R"({"problem": "rbdo-closed-form", "seed": 9, "beta_targets": [2.0],
            "initial_doe": 15, "enrichment_batch": 15, "refine_budget": 100,
            "candidate_count": 1000, "verification_samples_per_level": 10000,
            "subset": {"samples_per_level": 1000}})");
    run_rbdo(config, base / "rbdo1");
    config.threads = 4;
    run_rbdo(config, base / "rbdo2");
    compare_trees(base / "rbdo1", base / "rbdo2");
  }
  fs::remove_all(base);
  if (c.ok) c.detail = "reliability, refine and rbdo artifacts byte-identical";
  return c;
}

using CriterionFn = Check (*)();

struct Criterion {
  int number;
  const char* title;
  CriterionFn run;
};

const Criterion kCriteria[] = {
    {1, "kriging exactness at DOE points", criterion_1},
    {2, "margin probability formula", criterion_2},
    {3, "subset simulation accuracy", criterion_3},
    {4, "failure probability sensitivities", criterion_4},
    {5, "refinement budget and oracle match", criterion_5},
    {6, "optimizer correctness", criterion_6},
    {7, "end-to-end RBDO", criterion_7},
    {8, "hull cost reproduction", criterion_8},
    {9, "deterministic artifacts", criterion_9},
};

}  // namespace

int main(int argc, char** argv) {
  int failures = 0;
  const int selected = argc > 1 ? std::atoi(argv[1]) : 0;
  for (const auto& criterion : kCriteria) {
    if (selected != 0 && criterion.number != selected) continue;
    Check result;
    try {
      result = criterion.run();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s criterion %d (%s): %s\n", result.ok ? "PASS" : "FAIL",
                criterion.number, criterion.title, result.detail.c_str());
    std::fflush(stdout);
    if (!result.ok) ++failures;
  }
  return failures;
}
