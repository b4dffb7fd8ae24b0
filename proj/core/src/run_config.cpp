#include "relopt/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "relopt/output.hpp"

namespace relopt {

namespace {

using nlohmann::json;

void reject_unknown(const json& object, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (const auto& item : object.items())
    if (!allowed.count(item.key()))
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
}

template <typename T>
T get_or(const json& object, const std::string& key, T fallback) {
  if (!object.contains(key)) return fallback;
  try {
    return object.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("field '" + key + "' has the wrong type");
  }
}

void require(const json& object, const std::string& key) {
  if (!object.contains(key))
    throw ConfigError("missing required field '" + key + "'");
}

std::vector<double> as_doubles(const json& array, const std::string& key) {
  if (!array.is_array()) throw ConfigError("field '" + key + "' must be an array");
  std::vector<double> out;
  for (const auto& v : array) {
    if (!v.is_number()) throw ConfigError("field '" + key + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

MarginalSpec MarginalConfig::to_spec() const {
  MarginalSpec spec;
  spec.name = name;
  spec.family = family_from_name(family);
  spec.mean = mean;
  spec.std_dev = std_dev_is_cov ? std_dev * mean : std_dev;
  spec.design_linked = design_var;
  spec.validate();
  return spec;
}

RunConfig RunConfig::parse(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");
  reject_unknown(j, {"problem", "seed", "threads", "beta_targets", "constraint_mode",
                     "epsilon_pf0", "initial_doe", "enrichment_batch",
                     "candidate_count", "margin_k", "box_beta", "refine_budget",
                     "subset", "verification_samples_per_level", "optimizer",
                     "max_outer_iterations", "linear", "collapse_model", "bs5500",
                     "marginals", "design", "start"},
                 "config root");
  require(j, "problem");
  require(j, "seed");

  RunConfig c;
  c.problem = get_or<std::string>(j, "problem", "");
  const std::set<std::string> problems{"linear", "series-2d", "rbdo-closed-form", "hull"};
  if (!problems.count(c.problem))
    throw ConfigError("unknown problem '" + c.problem + "'");
  c.seed = get_or<uint64_t>(j, "seed", 0);
  c.threads = get_or<int>(j, "threads", 1);
  if (c.threads < 1) throw ConfigError("threads must be >= 1");

  if (j.contains("beta_targets")) c.beta_targets = as_doubles(j["beta_targets"], "beta_targets");
  c.constraint_mode = get_or<std::string>(j, "constraint_mode", "system");
  if (c.constraint_mode != "system" && c.constraint_mode != "per-component")
    throw ConfigError("constraint_mode must be 'system' or 'per-component'");
  c.epsilon_pf0 = get_or<double>(j, "epsilon_pf0", 5e-2);
  c.initial_doe = get_or<int>(j, "initial_doe", 50);
  c.enrichment_batch = get_or<int>(j, "enrichment_batch", 50);
  c.candidate_count = get_or<int>(j, "candidate_count", 10000);
  c.margin_k = get_or<double>(j, "margin_k", 0.0);
  c.box_beta = get_or<double>(j, "box_beta", 8.0);
  c.refine_budget = get_or<long long>(j, "refine_budget", 1000);

  if (j.contains("subset")) {
    const json& s = j["subset"];
    reject_unknown(s, {"samples_per_level", "level_probability", "proposal_spread",
                       "max_levels"},
                   "subset");
    c.subset.samples_per_level = get_or<int>(s, "samples_per_level", 10000);
    c.subset.level_probability = get_or<double>(s, "level_probability", 0.1);
    c.subset.proposal_spread = get_or<double>(s, "proposal_spread", 1.0);
    c.subset.max_levels = get_or<int>(s, "max_levels", 20);
  }
  c.verification_samples_per_level =
      get_or<int>(j, "verification_samples_per_level", 100000);

  if (j.contains("optimizer")) {
    const json& o = j["optimizer"];
    reject_unknown(o, {"base", "alpha", "gamma", "max_iterations",
                       "direction_tolerance", "k_max"},
                   "optimizer");
    c.optimizer.base = get_or<double>(o, "base", 0.6);
    c.optimizer.alpha = get_or<double>(o, "alpha", 0.5);
    c.optimizer.gamma = get_or<double>(o, "gamma", 1.0);
    c.optimizer.max_iterations = get_or<int>(o, "max_iterations", 200);
    c.optimizer.direction_tolerance = get_or<double>(o, "direction_tolerance", 1e-8);
    c.optimizer.k_max = get_or<int>(o, "k_max", 10);
  }
  c.max_outer_iterations = get_or<int>(j, "max_outer_iterations", 60);

  if (j.contains("linear")) {
    const json& l = j["linear"];
    reject_unknown(l, {"dimension", "beta_true"}, "linear");
    c.linear_dimension = get_or<int>(l, "dimension", 2);
    c.linear_beta_true = get_or<double>(l, "beta_true", 3.0);
  }
  c.collapse_model = get_or<std::string>(j, "collapse_model", "illustrative");
  if (j.contains("bs5500")) {
    const json& b = j["bs5500"];
    reject_unknown(b, {"c_web", "c_flange"}, "bs5500");
    c.bs5500_c_web = get_or<double>(b, "c_web", 1.1);
    c.bs5500_c_flange = get_or<double>(b, "c_flange", 0.5);
  }

  if (j.contains("marginals")) {
    if (!j["marginals"].is_array())
      throw ConfigError("field 'marginals' must be an array");
    for (const auto& m : j["marginals"]) {
      reject_unknown(m, {"name", "family", "mean", "std_dev", "cov", "design_var"},
                     "marginal entry");
      require(m, "name");
      require(m, "family");
      require(m, "mean");
      MarginalConfig mc;
      mc.name = m.at("name").get<std::string>();
      mc.family = m.at("family").get<std::string>();
      mc.mean = m.at("mean").get<double>();
      if (m.contains("std_dev") && m.contains("cov"))
        throw ConfigError("marginal '" + mc.name + "': give std_dev or cov, not both");
      if (m.contains("std_dev")) {
        mc.std_dev = m.at("std_dev").get<double>();
      } else if (m.contains("cov")) {
        mc.std_dev = m.at("cov").get<double>();
        mc.std_dev_is_cov = true;
      }
      if (m.contains("design_var")) mc.design_var = m.at("design_var").get<int>();
      c.marginals.push_back(std::move(mc));
    }
  }
  if (j.contains("design")) {
    const json& d = j["design"];
    reject_unknown(d, {"initial", "lower", "upper"}, "design");
    require(d, "initial");
    require(d, "lower");
    require(d, "upper");
    DesignConfig dc;
    dc.initial = as_doubles(d["initial"], "design.initial");
    dc.lower = as_doubles(d["lower"], "design.lower");
    dc.upper = as_doubles(d["upper"], "design.upper");
    if (dc.initial.size() != dc.lower.size() || dc.initial.size() != dc.upper.size())
      throw ConfigError("design arrays must have equal length");
    c.design = std::move(dc);
  }
  if (j.contains("start")) c.start = as_doubles(j["start"], "start");
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::string RunConfig::serialize() const {
  // The thread cap is an execution knob, not a run parameter: it is excluded
  // from the canonical form so the manifest hash is thread-count invariant.
  json j;
  j["problem"] = problem;
  j["seed"] = seed;
  j["beta_targets"] = beta_targets;
  j["constraint_mode"] = constraint_mode;
  j["epsilon_pf0"] = epsilon_pf0;
  j["initial_doe"] = initial_doe;
  j["enrichment_batch"] = enrichment_batch;
  j["candidate_count"] = candidate_count;
  j["margin_k"] = margin_k;
  j["box_beta"] = box_beta;
  j["refine_budget"] = refine_budget;
  j["subset"] = {{"samples_per_level", subset.samples_per_level},
                 {"level_probability", subset.level_probability},
                 {"proposal_spread", subset.proposal_spread},
                 {"max_levels", subset.max_levels}};
  j["verification_samples_per_level"] = verification_samples_per_level;
  j["optimizer"] = {{"base", optimizer.base},
                    {"alpha", optimizer.alpha},
                    {"gamma", optimizer.gamma},
                    {"max_iterations", optimizer.max_iterations},
                    {"direction_tolerance", optimizer.direction_tolerance},
                    {"k_max", optimizer.k_max}};
  j["max_outer_iterations"] = max_outer_iterations;
  j["linear"] = {{"dimension", linear_dimension}, {"beta_true", linear_beta_true}};
  j["collapse_model"] = collapse_model;
  j["bs5500"] = {{"c_web", bs5500_c_web}, {"c_flange", bs5500_c_flange}};
  if (!marginals.empty()) {
    json arr = json::array();
    for (const auto& m : marginals) {
      json e;
      e["name"] = m.name;
      e["family"] = m.family;
      e["mean"] = m.mean;
      if (m.std_dev_is_cov)
        e["cov"] = m.std_dev;
      else
        e["std_dev"] = m.std_dev;
      if (m.design_var) e["design_var"] = *m.design_var;
      arr.push_back(std::move(e));
    }
    j["marginals"] = std::move(arr);
  }
  if (design) {
    j["design"] = {{"initial", design->initial},
                   {"lower", design->lower},
                   {"upper", design->upper}};
  }
  if (start) j["start"] = *start;
  return j.dump(2) + "\n";
}

std::string RunConfig::manifest_hash() const { return hash_hex(fnv1a64(serialize())); }

}  // namespace relopt
