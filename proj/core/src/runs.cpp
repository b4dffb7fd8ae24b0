#include "relopt/runs.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "relopt/benchmarks.hpp"
#include "relopt/output.hpp"
#include "relopt/rng.hpp"
#include "relopt/sampling.hpp"

namespace relopt {

namespace {

using nlohmann::json;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
}

void write_manifest(const RunConfig& config, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  json m;
  m["format"] = "relopt-manifest v1";
  m["config"] = json::parse(config.serialize());
  m["config_hash"] = config.manifest_hash();
  write_text(out_dir / "manifest.json", m.dump(2) + "\n");
}

json subset_result_json(const SubsetResult& r, const std::vector<std::string>& names) {
  json j;
  j["pf"] = r.pf;
  j["cov"] = r.cov;
  j["beta"] = r.beta;
  j["levels"] = r.levels;
  j["thresholds"] = r.thresholds;
  j["calls"] = r.calls;
  json sens = json::object();
  for (size_t k = 0; k < r.sensitivities.size(); ++k) {
    const std::string key = k < names.size() ? names[k] : "theta" + std::to_string(k);
    sens[key] = {{"dpf_dtheta", r.sensitivities[k].value},
                 {"std_error", r.sensitivities[k].std_error}};
  }
  j["sensitivities"] = std::move(sens);
  return j;
}

void apply_overrides(const RunConfig& config, RbdoProblem& problem) {
  if (!config.marginals.empty()) {
    problem.spec.marginals.clear();
    for (const auto& m : config.marginals)
      problem.spec.marginals.push_back(m.to_spec());
  }
  if (config.design) {
    const auto& d = *config.design;
    const int n = static_cast<int>(d.initial.size());
    problem.design.values = Eigen::Map<const Eigen::VectorXd>(d.initial.data(), n);
    problem.design.lower = Eigen::Map<const Eigen::VectorXd>(d.lower.data(), n);
    problem.design.upper = Eigen::Map<const Eigen::VectorXd>(d.upper.data(), n);
  }
  if (config.start) {
    const auto& s = *config.start;
    if (static_cast<int>(s.size()) != problem.design.dim())
      throw ConfigError("start vector length does not match the design dimension");
    problem.design.values =
        Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<int>(s.size()));
  }
  problem.spec.validate(problem.design.dim());
  problem.design.validate();
}

}  // namespace

BuiltProblem build_problem(const RunConfig& config) {
  BuiltProblem built;
  RbdoProblem& p = built.problem;

  if (config.problem == "hull") {
    built.collapse = make_collapse_model(config.collapse_model);
    p.spec = hull_stochastic_model();
    p.design = hull_design_space();
    p.design_names = {"mu_e", "mu_h_w", "mu_e_w", "mu_w_f", "mu_e_f"};
    auto collapse = built.collapse;
    p.limit_states.push_back([collapse](const Eigen::VectorXd& x) {
      return std::get<0>(hull_limit_states(x, *collapse));
    });
    p.limit_states.push_back([collapse](const Eigen::VectorXd& x) {
      return std::get<1>(hull_limit_states(x, *collapse));
    });
    p.cost = [](const Eigen::VectorXd& x) {
      return hull_cost(hull_geometry_from_physical(x), hull_material_from_physical(x));
    };
    RandomVectorSpec spec_copy = p.spec;
    DesignVector design_copy = p.design;
    p.cost_gradient = [spec_copy, design_copy](const Eigen::VectorXd& theta) {
      DesignVector d = design_copy;
      d.values = theta;
      const Eigen::VectorXd x = spec_copy.mean_vector(d);
      return hull_cost_gradient(hull_geometry_from_physical(x),
                                hull_material_from_physical(x));
    };
    const double c_web = config.bs5500_c_web, c_flange = config.bs5500_c_flange;
    const Material mean_material;  // Table means
    p.deterministic_constraints.push_back(
        [spec_copy, design_copy, mean_material, c_web](const Eigen::VectorXd& theta) {
          DesignVector d = design_copy;
          d.values = theta;
          const Eigen::VectorXd x = spec_copy.mean_vector(d);
          return bs5500_stiffener_bounds(hull_geometry_from_physical(x), mean_material,
                                         c_web, std::numeric_limits<double>::infinity())
              .first;
        });
    p.deterministic_constraints.push_back(
        [spec_copy, design_copy, mean_material, c_flange](const Eigen::VectorXd& theta) {
          DesignVector d = design_copy;
          d.values = theta;
          const Eigen::VectorXd x = spec_copy.mean_vector(d);
          return bs5500_stiffener_bounds(hull_geometry_from_physical(x), mean_material,
                                         std::numeric_limits<double>::infinity(),
                                         c_flange)
              .second;
        });
  } else {
    BenchmarkProblem bench =
        config.problem == "linear"
            ? linear_benchmark(config.linear_dimension, config.linear_beta_true)
            : benchmark_by_name(config.problem);
    p.spec = bench.spec;
    p.design = bench.design;
    p.limit_states = bench.limit_states;
    p.cost = bench.cost;
    p.cost_gradient = bench.cost_gradient;
    for (int j = 0; j < p.design.dim(); ++j)
      p.design_names.push_back("theta" + std::to_string(j + 1));
  }

  p.mode = config.constraint_mode == "system" ? ReliabilityConstraintMode::SystemMin
                                              : ReliabilityConstraintMode::PerComponent;
  p.beta_targets = config.beta_targets;
  if (p.mode == ReliabilityConstraintMode::PerComponent &&
      p.beta_targets.size() == 1 && p.limit_states.size() > 1)
    p.beta_targets.assign(p.limit_states.size(), config.beta_targets[0]);
  p.epsilon_pf0 = config.epsilon_pf0;
  p.initial_doe_size = config.initial_doe;
  p.enrichment_batch = config.enrichment_batch;
  p.candidate_count = config.candidate_count;
  p.margin_k = config.margin_k;
  p.box_beta = config.box_beta;
  p.refine_budget = config.refine_budget;
  p.subset_inner = config.subset;
  p.subset_verify = config.subset;
  p.subset_verify.samples_per_level = config.verification_samples_per_level;
  p.optimizer = config.optimizer;
  p.max_outer_iterations = config.max_outer_iterations;
  p.seed = config.seed;
  p.threads = config.threads;

  apply_overrides(config, p);
  return built;
}

void run_reliability(const RunConfig& config, const std::filesystem::path& out_dir) {
  write_manifest(config, out_dir);
  const BuiltProblem built = build_problem(config);
  const RbdoProblem& p = built.problem;
  const std::string hash = config.manifest_hash();

  SubsetConfig cfg = config.subset;
  cfg.seed = derive_seed(config.seed, "reliability");
  const auto& ls = p.limit_states;
  const LimitState system = [&ls](const Eigen::VectorXd& x) {
    double g = std::numeric_limits<double>::infinity();
    for (const auto& f : ls) g = std::min(g, f(x));
    return g;
  };

  json j;
  try {
    const SubsetResult r = subset_simulate(system, p.spec, p.design, cfg, true);
    j = subset_result_json(r, p.design_names);
    j["floor_reached"] = false;
    TableWriter levels(out_dir / "levels.tsv", hash, {"level", "threshold"});
    for (size_t i = 0; i < r.thresholds.size(); ++i)
      levels.row(std::vector<double>{static_cast<double>(i), r.thresholds[i]});
  } catch (const PfFloorError& floor) {
    j = subset_result_json(floor.partial(), p.design_names);
    j["floor_reached"] = true;
  }
  j["manifest"] = hash;
  write_text(out_dir / "reliability.json", j.dump(2) + "\n");
}

void run_refine(const RunConfig& config, const std::filesystem::path& out_dir) {
  write_manifest(config, out_dir);
  const BuiltProblem built = build_problem(config);
  const RbdoProblem& p = built.problem;
  const std::string hash = config.manifest_hash();

  SurrogateSet set;
  set.box = augmented_confidence_box(p.spec, p.design, p.box_beta);
  set.dims = p.spec.augmented_indices();
  const Eigen::VectorXd lo = set.sub_lower();
  const Eigen::VectorXd hi = set.sub_upper();

  RngStream doe_rng(derive_seed(p.seed, "initial-doe"));
  const Eigen::MatrixXd doe_inputs = latin_hypercube(lo, hi, p.initial_doe_size, doe_rng);
  const auto embed = [&](const Eigen::VectorXd& sub) {
    Eigen::VectorXd x = p.spec.mean_vector(p.design);
    for (size_t d = 0; d < set.dims.size(); ++d)
      x[set.dims[d]] = sub[static_cast<Eigen::Index>(d)];
    return x;
  };

  KrigingFitOptions fit_options;
  fit_options.threads = p.threads;
  for (size_t l = 0; l < p.limit_states.size(); ++l) {
    DesignOfExperiments doe;
    doe.inputs = doe_inputs;
    doe.outputs.resize(doe_inputs.rows());
    for (int i = 0; i < doe_inputs.rows(); ++i)
      doe.outputs[i] = p.limit_states[l](embed(doe_inputs.row(i).transpose()));
    fit_options.seed = derive_seed(p.seed, "initial-fit", l);
    set.models.push_back(KrigingModel::fit(doe, fit_options));
  }

  RefineOptions options;
  options.margin_k = p.margin_k;
  options.candidate_count = p.candidate_count;
  options.cluster_count = p.enrichment_batch;
  options.epsilon_pf0 = p.epsilon_pf0;
  options.budget = std::max<long long>(0, p.refine_budget - p.initial_doe_size);
  options.subset = p.subset_inner;
  options.seed = derive_seed(p.seed, "refine", 0);
  options.fit_threads = p.threads;
  options.refit = fit_options;

  const RefinementState state = enrich(set, p.limit_states, p.spec, p.design, options);

  TableWriter rounds(out_dir / "refine_rounds.tsv", hash,
                     {"round", "calls_used", "pf_plus", "pf_zero", "pf_minus",
                      "log10_spread"});
  for (const auto& r : state.rounds)
    rounds.row(std::vector<double>{static_cast<double>(r.round),
                                   static_cast<double>(r.calls_used), r.pf_plus,
                                   r.pf_zero, r.pf_minus, r.log10_spread});

  const double margin_k = p.margin_k > 0.0 ? p.margin_k : default_margin_k();
  for (size_t l = 0; l < set.models.size(); ++l) {
    set.models[l].save(out_dir / ("surrogate_g" + std::to_string(l + 1) + ".txt"), hash);
    if (set.dims.size() == 2) {
      // Contour grid of the prediction and its margin bounds.
      const int grid_n = 101;
      Eigen::MatrixXd points(grid_n * grid_n, 2);
      for (int a = 0; a < grid_n; ++a)
        for (int b = 0; b < grid_n; ++b) {
          points(a * grid_n + b, 0) = lo[0] + (hi[0] - lo[0]) * a / (grid_n - 1);
          points(a * grid_n + b, 1) = lo[1] + (hi[1] - lo[1]) * b / (grid_n - 1);
        }
      Eigen::VectorXd means, variances;
      set.models[l].predict_batch(points, means, variances);
      TableWriter grid(out_dir / ("grid_g" + std::to_string(l + 1) + ".tsv"), hash,
                       {"x1", "x2", "mean", "sd", "lower", "upper"});
      for (int i = 0; i < points.rows(); ++i) {
        const double sd = std::sqrt(std::max(variances[i], 0.0));
        grid.row(std::vector<double>{points(i, 0), points(i, 1), means[i], sd,
                                     means[i] - margin_k * sd,
                                     means[i] + margin_k * sd});
      }
    }
  }

  json j;
  j["manifest"] = hash;
  j["converged"] = state.converged;
  j["calls_used"] = state.calls_used;
  j["initial_doe"] = p.initial_doe_size;
  j["total_calls_per_limit_state"] = json::array();
  for (size_t l = 0; l < state.calls_per_model.size(); ++l)
    j["total_calls_per_limit_state"].push_back(p.initial_doe_size +
                                               state.calls_per_model[l]);
  j["pf_plus"] = state.pf_plus;
  j["pf_zero"] = state.pf_zero;
  j["pf_minus"] = state.pf_minus;
  j["log10_spread"] = state.log10_spread;
  write_text(out_dir / "refine.json", j.dump(2) + "\n");
}

namespace {

json driver_result_json(const DriverResult& result) {
  json j;
  j["converged"] = result.converged;
  j["stalled"] = result.stalled;
  j["iterations"] = result.iterations;
  j["cost"] = result.at_design.cost;
  j["design"] = std::vector<double>(result.design.data(),
                                    result.design.data() + result.design.size());
  json cons = json::array();
  for (const auto& c : result.at_design.constraints) cons.push_back(c.value);
  j["constraints"] = std::move(cons);
  return j;
}

void write_ddo_trace(const DriverResult& result, const std::filesystem::path& path,
                     const std::string& hash) {
  TableWriter trace(path, hash,
                    {"iteration", "cost", "direction_norm", "step_exponent",
                     "max_constraint"});
  for (size_t i = 0; i < result.history.size(); ++i) {
    const auto& r = result.history[i];
    double worst = -std::numeric_limits<double>::infinity();
    for (double c : r.constraints) worst = std::max(worst, c);
    trace.row(std::vector<double>{static_cast<double>(i), r.cost, r.direction_norm,
                                  static_cast<double>(r.step_exponent), worst});
  }
}

}  // namespace

void run_ddo(const RunConfig& config, const std::filesystem::path& out_dir) {
  write_manifest(config, out_dir);
  const BuiltProblem built = build_problem(config);
  const std::string hash = config.manifest_hash();

  DriverResult trace;
  const DesignVector optimum = ddo_solve(built.problem, &trace);
  json j = driver_result_json(trace);
  j["manifest"] = hash;
  write_text(out_dir / "ddo.json", j.dump(2) + "\n");
  write_ddo_trace(trace, out_dir / "ddo_trace.tsv", hash);
  (void)optimum;
}

void run_rbdo(const RunConfig& config, const std::filesystem::path& out_dir) {
  write_manifest(config, out_dir);
  BuiltProblem built = build_problem(config);
  RbdoProblem& p = built.problem;
  const std::string hash = config.manifest_hash();

  // Warm start from the deterministic optimum unless the config pins one.
  if (!config.start) {
    DriverResult ddo_trace;
    const DesignVector ddo = ddo_solve(p, &ddo_trace);
    json j = driver_result_json(ddo_trace);
    j["manifest"] = hash;
    write_text(out_dir / "ddo.json", j.dump(2) + "\n");
    write_ddo_trace(ddo_trace, out_dir / "ddo_trace.tsv", hash);
    p.design.values = ddo.values;
  }

  const RbdoHistory history = rbdo_solve(p);

  const int n_rel = p.reliability_constraint_count();
  {
    std::vector<std::string> cols{"iteration", "cost", "direction_norm",
                                  "step_exponent", "log10_spread", "refined"};
    for (int r = 0; r < n_rel; ++r) cols.push_back("beta" + std::to_string(r + 1));
    TableWriter table(out_dir / "history.tsv", hash, cols);
    for (const auto& it : history.iterations) {
      std::vector<double> row{static_cast<double>(it.iteration), it.cost,
                              it.direction_norm,
                              static_cast<double>(it.step_exponent),
                              it.log10_spread, it.refined ? 1.0 : 0.0};
      for (double b : it.beta) row.push_back(b);
      table.row(row);
    }
  }
  {
    std::vector<std::string> cols{"iteration"};
    for (const auto& name : p.design_names) cols.push_back(name + "_normalized");
    TableWriter table(out_dir / "trajectory_design.tsv", hash, cols);
    for (const auto& it : history.iterations) {
      std::vector<double> row{static_cast<double>(it.iteration)};
      for (int jx = 0; jx < it.design_normalized.size(); ++jx)
        row.push_back(it.design_normalized[jx]);
      table.row(row);
    }
  }
  {
    TableWriter table(out_dir / "trajectory_cost.tsv", hash, {"iteration", "cost"});
    for (const auto& it : history.iterations)
      table.row(std::vector<double>{static_cast<double>(it.iteration), it.cost});
  }
  {
    std::vector<std::string> cols{"iteration"};
    for (int r = 0; r < n_rel; ++r) cols.push_back("beta" + std::to_string(r + 1));
    TableWriter table(out_dir / "trajectory_beta.tsv", hash, cols);
    for (const auto& it : history.iterations) {
      std::vector<double> row{static_cast<double>(it.iteration)};
      for (double b : it.beta) row.push_back(b);
      table.row(row);
    }
  }
  {
    std::vector<std::string> cols{"iteration"};
    for (size_t l = 0; l < p.limit_states.size(); ++l)
      cols.push_back("g" + std::to_string(l + 1) + "_calls");
    TableWriter table(out_dir / "trajectory_calls.tsv", hash, cols);
    for (const auto& it : history.iterations) {
      std::vector<double> row{static_cast<double>(it.iteration)};
      for (long long c : it.true_calls) row.push_back(static_cast<double>(c));
      table.row(row);
    }
  }
  for (size_t l = 0; l < history.surrogates.models.size(); ++l)
    history.surrogates.models[l].save(
        out_dir / ("surrogate_g" + std::to_string(l + 1) + ".txt"), hash);

  json j;
  j["manifest"] = hash;
  j["converged"] = history.converged;
  j["budget_exhausted"] = history.budget_exhausted;
  j["projections"] = history.projections;
  j["final_design"] = std::vector<double>(
      history.final_design.values.data(),
      history.final_design.values.data() + history.final_design.values.size());
  j["final_cost"] = history.iterations.empty() ? 0.0 : history.iterations.back().cost;
  j["true_calls"] = history.true_calls;
  write_text(out_dir / "rbdo.json", j.dump(2) + "\n");

  // Verification on the true limit states at the verification sample size.
  json v;
  v["manifest"] = hash;
  v["results"] = json::array();
  try {
    for (const auto& r : verify_design(p, history.final_design)) {
      json e = subset_result_json(r, p.design_names);
      e["floor_reached"] = false;
      v["results"].push_back(std::move(e));
    }
  } catch (const PfFloorError& floor) {
    json e = subset_result_json(floor.partial(), p.design_names);
    e["floor_reached"] = true;
    v["results"].push_back(std::move(e));
  }
  write_text(out_dir / "verification.json", v.dump(2) + "\n");
}

void run_verify(const RunConfig& config, const std::filesystem::path& out_dir) {
  write_manifest(config, out_dir);
  const BuiltProblem built = build_problem(config);
  const RbdoProblem& p = built.problem;
  const std::string hash = config.manifest_hash();

  json v;
  v["manifest"] = hash;
  v["results"] = json::array();
  try {
    for (const auto& r : verify_design(p, p.design)) {
      json e = subset_result_json(r, p.design_names);
      e["floor_reached"] = false;
      v["results"].push_back(std::move(e));
    }
  } catch (const PfFloorError& floor) {
    json e = subset_result_json(floor.partial(), p.design_names);
    e["floor_reached"] = true;
    v["results"].push_back(std::move(e));
  }
  write_text(out_dir / "verification.json", v.dump(2) + "\n");
}

}  // namespace relopt
