#pragma once

#include <filesystem>
#include <memory>

#include "relopt/hull.hpp"
#include "relopt/rbdo.hpp"
#include "relopt/run_config.hpp"

namespace relopt {

// RBDO problem assembled from a run configuration (benchmark catalog entry
// or the hull application, with optional overrides applied).
struct BuiltProblem {
  RbdoProblem problem;
  std::shared_ptr<CollapsePressureModel> collapse;  // hull only
};

BuiltProblem build_problem(const RunConfig& config);

// Engine drivers behind the CLI subcommands. Each writes a manifest plus its
// artifacts into `out_dir`; re-running with an identical manifest reproduces
// every file byte for byte.
void run_reliability(const RunConfig& config, const std::filesystem::path& out_dir);
void run_refine(const RunConfig& config, const std::filesystem::path& out_dir);
void run_ddo(const RunConfig& config, const std::filesystem::path& out_dir);
void run_rbdo(const RunConfig& config, const std::filesystem::path& out_dir);
void run_verify(const RunConfig& config, const std::filesystem::path& out_dir);

}  // namespace relopt
