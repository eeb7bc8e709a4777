#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "diffcontact/tasks.hpp"

namespace diffcontact {

struct OptConfig {
  enum class Params { kInitialVelocity, kControlSequence };
  double learning_rate = 0.01;
  int iterations = 1000;
  Params params = Params::kInitialVelocity;
  int checkpoint_every = 100;  // control-sequence snapshot cadence
};

/// Defaults from the task family: task 2 tunes the initial velocity with
/// lr = 0.01, task 3 tunes the control sequence with lr = 10.
OptConfig default_opt_config(const TaskSpec& task);

struct CurvePoint {
  int iter = 0;
  double loss = 0.0;
  std::vector<double> params;  // optimized-parameter snapshot (v0 for task 2)
};

struct LearningCurve {
  std::vector<CurvePoint> points;  // loss before each update plus a final row
  bool unstable = false;
  int unstable_iter = -1;
  std::vector<std::pair<int, std::vector<Vec2>>> control_checkpoints;
  std::vector<Vec2> final_controls;

  double final_loss() const { return points.empty() ? 0.0 : points.back().loss; }
};

/// Plain gradient descent, fresh tape per iteration, loss recorded before
/// each update. Non-finite losses or gradients terminate the curve early
/// with the instability flag set.
LearningCurve gradient_descent(const TaskSpec& task, const ContactModel& model,
                               const OptConfig& config);

/// Central finite differences of an arbitrary scalar function.
std::vector<double> finite_difference(const std::function<double(const std::vector<double>&)>& f,
                                      const std::vector<double>& params, double h);

// ---------------------------------------------------------------------------
// Gradient reports (mirrors the benchmark tables)

/// One differentiable quantity of a task: how to read it from a tape run and
/// how to nudge the corresponding input for finite differences.
struct QuantitySpec {
  std::string name;
  std::function<double(const GradVector&, const GradientHandles&)> tape_read;
  std::function<void(TaskSpec&, double)> nudge;
  std::function<double(const TaskSpec&)> analytic;  // null when undefined
};

/// The reported partials of a task (the benchmark's table columns).
std::vector<QuantitySpec> report_quantities(const TaskSpec& task);

struct GradCell {
  double tape_grad = 0.0;
  double fd_grad = 0.0;
  bool fd_excluded = false;  // contact profile changed inside the FD stencil
};

struct GradReportRow {
  std::string model_name;
  std::vector<GradCell> cells;  // one per quantity
};

struct GradReport {
  std::vector<std::string> quantity_names;
  std::vector<std::optional<double>> analytic;  // per quantity
  std::vector<GradReportRow> rows;
};

struct NamedModel {
  std::string name;
  ContactModel model;
};

/// Tape + finite-difference gradients for every (model, quantity) pair, plus
/// the analytic row where the task defines one. FD probes whose two contact
/// profiles disagree are flagged as excluded (discontinuity stencil).
GradReport gradient_report(const TaskSpec& task, const std::vector<NamedModel>& models,
                           bool include_analytic, double fd_h);

}  // namespace diffcontact
