#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "diffcontact/optimize.hpp"

namespace diffcontact {

/// Raised on malformed usage (unknown task/model/override key, bad value);
/// the CLI maps it to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Validated parameter overrides (--set key=value / config file lines).
struct Overrides {
  std::optional<double> gravity;  // y component; x stays 0
  std::optional<double> wall_x;   // task-2 wall position
  std::optional<double> k_n, k_d, k_f;
  std::optional<double> e, mu;
  std::optional<double> lr, h, r;
  std::optional<int> iters, n_steps, pbd_iterations;
  std::vector<double> kn_list;  // sweep stiffness grid

  static Overrides parse(const std::vector<std::pair<std::string, std::string>>& kv);
};

struct RunConfig {
  std::string task = "task1";  // task1 | task2 | task2-friction | task3
  std::string models = "all";
  std::filesystem::path out_dir = "out";
  Overrides overrides;
  bool check = false;
  int jobs = 0;  // 0 = hardware concurrency
};

TaskSpec build_task(const std::string& name, const Overrides& o);
std::vector<NamedModel> build_models(const std::string& list, const TaskSpec& task,
                                     const Overrides& o);

/// Gradient tables (markdown + CSV + metadata). Exit 0, or 1 when --check
/// finds a tape-vs-FD mismatch, or 2 on usage errors.
int cmd_grads(const RunConfig& cfg);

/// Gradient-descent runs: learning-curve CSVs, trajectory SVGs, control
/// profiles for task 3, and a summary with trajectory-mode classification.
int cmd_optimize(const RunConfig& cfg);

/// Compliant-model stiffness sweep on task 3.
int cmd_sweep_stiffness(const RunConfig& cfg);

}  // namespace diffcontact
