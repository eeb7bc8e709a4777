#include "diffcontact/optimize.hpp"

#include <cmath>

namespace diffcontact {

OptConfig default_opt_config(const TaskSpec& task) {
  OptConfig cfg;
  if (task.id == TaskId::kTask3) {
    cfg.learning_rate = 10.0;
    cfg.params = OptConfig::Params::kControlSequence;
  } else {
    cfg.learning_rate = 0.01;
    cfg.params = OptConfig::Params::kInitialVelocity;
  }
  cfg.iterations = 1000;
  return cfg;
}

namespace {

std::vector<double> snapshot_params(const TaskSpec& task, OptConfig::Params which) {
  if (which == OptConfig::Params::kInitialVelocity) {
    return {task.scene.balls[0].vel.x, task.scene.balls[0].vel.y};
  }
  return {};  // full control sequences go through checkpoints instead
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

LearningCurve gradient_descent(const TaskSpec& task, const ContactModel& model,
                               const OptConfig& config) {
  LearningCurve curve;
  TaskSpec cur = task;
  Tape tape;
  const bool on_controls = config.params == OptConfig::Params::kControlSequence;

  for (int iter = 0; iter < config.iterations; ++iter) {
    tape.clear();
    GradientHandles handles;
    double loss = 0.0;
    std::vector<double> grads;
    bool bad = false;
    try {
      SimResultT<Var> res = simulate_grad(cur, model, tape, &handles);
      loss = res.loss.value();
      if (res.diag.unstable_at_step >= 0 || !std::isfinite(loss)) {
        bad = true;
      } else {
        GradVector g = backward(tape, res.loss);
        if (on_controls) {
          grads.reserve(handles.controls.size() * 2);
          for (const std::array<int, 2>& c : handles.controls) {
            grads.push_back(g.at_node(c[0]));
            grads.push_back(g.at_node(c[1]));
          }
        } else {
          grads = {g.at_node(handles.balls[0].vx), g.at_node(handles.balls[0].vy)};
        }
        bad = !all_finite(grads);
      }
    } catch (const TapeError&) {
      bad = true;
    }

    if (bad) {
      curve.unstable = true;
      curve.unstable_iter = iter;
      if (std::isfinite(loss)) {
        curve.points.push_back({iter, loss, snapshot_params(cur, config.params)});
      }
      break;
    }

    curve.points.push_back({iter, loss, snapshot_params(cur, config.params)});
    if (on_controls && config.checkpoint_every > 0 && iter % config.checkpoint_every == 0) {
      curve.control_checkpoints.emplace_back(iter, cur.controls);
    }

    if (on_controls) {
      for (std::size_t n = 0; n < cur.controls.size(); ++n) {
        cur.controls[n].x -= config.learning_rate * grads[2 * n];
        cur.controls[n].y -= config.learning_rate * grads[2 * n + 1];
      }
    } else {
      cur.scene.balls[0].vel.x -= config.learning_rate * grads[0];
      cur.scene.balls[0].vel.y -= config.learning_rate * grads[1];
    }
  }

  if (!curve.unstable) {
    SimResultT<double> fin = simulate_value(cur, model);
    curve.points.push_back(
        {config.iterations, fin.loss, snapshot_params(cur, config.params)});
    if (on_controls) {
      curve.control_checkpoints.emplace_back(config.iterations, cur.controls);
    }
  }
  curve.final_controls = cur.controls;
  return curve;
}

std::vector<double> finite_difference(const std::function<double(const std::vector<double>&)>& f,
                                      const std::vector<double>& params, double h) {
  std::vector<double> grad(params.size(), 0.0);
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::vector<double> plus = params;
    std::vector<double> minus = params;
    plus[i] += h;
    minus[i] -= h;
    grad[i] = (f(plus) - f(minus)) / (2.0 * h);
  }
  return grad;
}

std::vector<QuantitySpec> report_quantities(const TaskSpec& task) {
  std::vector<QuantitySpec> q;
  auto ball_grad = [](int ball, int which) {
    return [ball, which](const GradVector& g, const GradientHandles& h) {
      const GradientHandles::BallHandles& b = h.balls[static_cast<std::size_t>(ball)];
      switch (which) {
        case 0: return g.at_node(b.px);
        case 1: return g.at_node(b.py);
        case 2: return g.at_node(b.vx);
        default: return g.at_node(b.vy);
      }
    };
  };
  auto u0_grad = [](int comp) {
    return [comp](const GradVector& g, const GradientHandles& h) {
      return g.at_node(h.controls[0][static_cast<std::size_t>(comp)]);
    };
  };

  if (task.id == TaskId::kTask1) {
    q.push_back({"dpyN_dpy0", ball_grad(0, 1),
                 [](TaskSpec& t, double d) { t.scene.balls[0].pos.y += d; },
                 [](const TaskSpec& t) {
                   return task1_analytic(t.scene.balls[0].pos.y, t.scene.balls[0].vel.y,
                                         t.controls[0].y, t.horizon_T, t.dt(),
                                         t.scene.balls[0].radius)
                       .grad_p;
                 }});
    q.push_back({"dpyN_dvy0", ball_grad(0, 3),
                 [](TaskSpec& t, double d) { t.scene.balls[0].vel.y += d; },
                 [](const TaskSpec& t) {
                   return task1_analytic(t.scene.balls[0].pos.y, t.scene.balls[0].vel.y,
                                         t.controls[0].y, t.horizon_T, t.dt(),
                                         t.scene.balls[0].radius)
                       .grad_v;
                 }});
    q.push_back({"dpyN_duy0", u0_grad(1),
                 [](TaskSpec& t, double d) { t.controls[0].y += d; },
                 [](const TaskSpec& t) {
                   return task1_analytic(t.scene.balls[0].pos.y, t.scene.balls[0].vel.y,
                                         t.controls[0].y, t.horizon_T, t.dt(),
                                         t.scene.balls[0].radius)
                       .grad_u;
                 }});
  } else if (task.id == TaskId::kTask2 || task.id == TaskId::kTask2Friction) {
    q.push_back({"dl_dvx0", ball_grad(0, 2),
                 [](TaskSpec& t, double d) { t.scene.balls[0].vel.x += d; }, nullptr});
    q.push_back({"dl_dvy0", ball_grad(0, 3),
                 [](TaskSpec& t, double d) { t.scene.balls[0].vel.y += d; }, nullptr});
  } else {
    q.push_back({"dl_dpx1", ball_grad(0, 0),
                 [](TaskSpec& t, double d) { t.scene.balls[0].pos.x += d; },
                 [](const TaskSpec&) { return task3_oracle().grad_p1.x; }});
    q.push_back({"dl_dpx2", ball_grad(1, 0),
                 [](TaskSpec& t, double d) { t.scene.balls[1].pos.x += d; },
                 [](const TaskSpec&) { return task3_oracle().grad_p2.x; }});
    q.push_back({"dl_dvx1", ball_grad(0, 2),
                 [](TaskSpec& t, double d) { t.scene.balls[0].vel.x += d; },
                 [](const TaskSpec&) { return task3_oracle().grad_v1.x; }});
    q.push_back({"dl_dvx2", ball_grad(1, 2),
                 [](TaskSpec& t, double d) { t.scene.balls[1].vel.x += d; },
                 [](const TaskSpec&) { return task3_oracle().grad_v2.x; }});
    q.push_back({"dl_dux1_0", u0_grad(0),
                 [](TaskSpec& t, double d) { t.controls[0].x += d; },
                 [](const TaskSpec&) { return task3_oracle().grad_u0.x; }});
  }
  return q;
}

GradReport gradient_report(const TaskSpec& task, const std::vector<NamedModel>& models,
                           bool include_analytic, double fd_h) {
  std::vector<QuantitySpec> quantities = report_quantities(task);
  GradReport report;
  for (const QuantitySpec& q : quantities) {
    report.quantity_names.push_back(q.name);
    if (include_analytic && q.analytic) {
      report.analytic.push_back(q.analytic(task));
    } else {
      report.analytic.push_back(std::nullopt);
    }
  }

  for (const NamedModel& nm : models) {
    GradReportRow row;
    row.model_name = nm.name;
    Tape tape;
    GradientHandles handles;
    SimResultT<Var> res = simulate_grad(task, nm.model, tape, &handles);
    GradVector g = backward(tape, res.loss);
    for (const QuantitySpec& q : quantities) {
      GradCell cell;
      cell.tape_grad = q.tape_read(g, handles);
      TaskSpec plus = task;
      TaskSpec minus = task;
      q.nudge(plus, fd_h);
      q.nudge(minus, -fd_h);
      SimResultT<double> rp = simulate_value(plus, nm.model);
      SimResultT<double> rm = simulate_value(minus, nm.model);
      cell.fd_grad = (rp.loss - rm.loss) / (2.0 * fd_h);
      cell.fd_excluded = rp.diag.signature() != rm.diag.signature();
      row.cells.push_back(cell);
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace diffcontact
