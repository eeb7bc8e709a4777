#include "diffcontact/cli.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <future>
#include <iostream>
#include <thread>

#include "diffcontact/report.hpp"
#include "diffcontact/svg.hpp"

namespace diffcontact {

namespace {

using nlohmann::json;

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw UsageError("override " + key + ": not a number: '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  double v = parse_double(key, value);
  if (v != std::floor(v)) throw UsageError("override " + key + ": expected an integer");
  return static_cast<int>(v);
}

const char* kModelNames[] = {"direct", "direct-no-toi", "lcp",       "lcp-no-toi",
                             "convex", "convex-no-toi", "compliant", "pbd"};

}  // namespace

Overrides Overrides::parse(const std::vector<std::pair<std::string, std::string>>& kv) {
  Overrides o;
  for (const auto& [key, value] : kv) {
    if (key == "gravity") {
      o.gravity = parse_double(key, value);
    } else if (key == "wall_x") {
      o.wall_x = parse_double(key, value);
    } else if (key == "k_n") {
      o.k_n = parse_double(key, value);
    } else if (key == "k_d") {
      o.k_d = parse_double(key, value);
    } else if (key == "k_f") {
      o.k_f = parse_double(key, value);
    } else if (key == "e") {
      o.e = parse_double(key, value);
    } else if (key == "mu") {
      o.mu = parse_double(key, value);
    } else if (key == "lr") {
      o.lr = parse_double(key, value);
    } else if (key == "h") {
      o.h = parse_double(key, value);
    } else if (key == "r") {
      o.r = parse_double(key, value);
    } else if (key == "iters") {
      o.iters = parse_int(key, value);
    } else if (key == "N") {
      o.n_steps = parse_int(key, value);
    } else if (key == "pbd_iterations") {
      o.pbd_iterations = parse_int(key, value);
    } else if (key == "kn_list") {
      std::string rest = value;
      while (!rest.empty()) {
        std::size_t colon = rest.find(':');
        std::string item = rest.substr(0, colon);
        o.kn_list.push_back(parse_double(key, item));
        if (colon == std::string::npos) break;
        rest = rest.substr(colon + 1);
      }
    } else {
      throw UsageError("unknown override key: '" + key + "'");
    }
  }
  return o;
}

TaskSpec build_task(const std::string& name, const Overrides& o) {
  TaskSpec task;
  if (name == "task1") {
    task = make_task1();
  } else if (name == "task2") {
    task = make_task2(false);
  } else if (name == "task2-friction") {
    task = make_task2(true);
  } else if (name == "task3") {
    task = make_task3();
  } else {
    throw UsageError("unknown task: '" + name + "'");
  }
  if (o.gravity) task.scene.gravity.y = *o.gravity;
  if (o.wall_x) {
    if (task.scene.planes.size() < 2) throw UsageError("wall_x only applies to task2");
    task.scene.planes[1].offset = -*o.wall_x;
  }
  if (o.e) task.scene.restitution_e = *o.e;
  if (o.mu) task.scene.friction_mu = *o.mu;
  if (o.r) {
    for (BallConfig& b : task.scene.balls) b.radius = *o.r;
  }
  if (o.n_steps) {
    task.steps_N = *o.n_steps;
    if (!task.controls.empty()) {
      Vec2 fill = task.id == TaskId::kTask3 ? Vec2{3.0, 3.0} : Vec2{0.0, 0.0};
      task.controls.assign(static_cast<std::size_t>(task.steps_N), fill);
    }
  }
  return task;
}

std::vector<NamedModel> build_models(const std::string& list, const TaskSpec& task,
                                     const Overrides& o) {
  std::vector<std::string> names;
  if (list == "all") {
    names.assign(std::begin(kModelNames), std::end(kModelNames));
  } else {
    std::string rest = list;
    while (!rest.empty()) {
      std::size_t comma = rest.find(',');
      std::string item = rest.substr(0, comma);
      if (!item.empty()) names.push_back(item);
      if (comma == std::string::npos) break;
      rest = rest.substr(comma + 1);
    }
  }
  std::vector<NamedModel> models;
  for (const std::string& n : names) {
    if (n == "direct") {
      models.push_back({n, ImpulseDirect{true}});
    } else if (n == "direct-no-toi") {
      models.push_back({n, ImpulseDirect{false}});
    } else if (n == "lcp") {
      models.push_back({n, ImpulseLCP{true}});
    } else if (n == "lcp-no-toi") {
      models.push_back({n, ImpulseLCP{false}});
    } else if (n == "convex") {
      models.push_back({n, ImpulseConvex{true}});
    } else if (n == "convex-no-toi") {
      models.push_back({n, ImpulseConvex{false}});
    } else if (n == "compliant") {
      Compliant prm = default_compliant_params(task, o.k_n.value_or(1e4));
      if (o.k_d) prm.k_d = *o.k_d;
      if (o.k_f) prm.k_f = *o.k_f;
      models.push_back({n, prm});
    } else if (n == "pbd") {
      models.push_back({n, Pbd{o.pbd_iterations.value_or(1)}});
    } else {
      throw UsageError("unknown model: '" + n + "'");
    }
  }
  return models;
}

namespace {

std::string task_file_tag(const std::string& task) {
  std::string tag = task;
  std::replace(tag.begin(), tag.end(), '-', '_');
  return tag;
}

std::string model_file_tag(const std::string& model) {
  std::string tag = model;
  std::replace(tag.begin(), tag.end(), '-', '_');
  return tag;
}

json scene_metadata(const TaskSpec& task, const RunConfig& cfg) {
  json j;
  j["task"] = cfg.task;
  j["dt"] = task.dt();
  j["steps_N"] = task.steps_N;
  j["horizon_T"] = task.horizon_T;
  j["restitution_e"] = task.scene.restitution_e;
  j["friction_mu"] = task.scene.friction_mu;
  j["gravity"] = {task.scene.gravity.x, task.scene.gravity.y};
  json balls = json::array();
  for (const BallConfig& b : task.scene.balls) {
    balls.push_back({{"pos", {b.pos.x, b.pos.y}},
                     {"vel", {b.vel.x, b.vel.y}},
                     {"radius", b.radius},
                     {"mass", b.mass}});
  }
  j["balls"] = balls;
  json planes = json::array();
  for (const HalfPlane& p : task.scene.planes) {
    planes.push_back({{"normal", {p.normal.x, p.normal.y}}, {"offset", p.offset}});
  }
  j["planes"] = planes;
  // Defaults the benchmark description leaves open; recorded so results are
  // auditable.
  j["derived_defaults"] = json::array();
  if (cfg.task == "task2" || cfg.task == "task2-friction") {
    if (!cfg.overrides.gravity) j["derived_defaults"].push_back("gravity=-9.8");
    if (!cfg.overrides.wall_x) j["derived_defaults"].push_back("wall_x=2.0");
  }
  if (cfg.task == "task1" && !cfg.overrides.r) j["derived_defaults"].push_back("r=0.1");
  return j;
}

void ensure_out_dir(const RunConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec || !std::filesystem::is_directory(cfg.out_dir)) {
    throw UsageError("cannot create output directory " + cfg.out_dir.string());
  }
}

int concurrency(const RunConfig& cfg) {
  if (cfg.jobs > 0) return cfg.jobs;
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 2 : static_cast<int>(std::min(hc, 8u));
}

/// Runs fn(i) for i in [0, n) on a bounded pool; results collected in order.
template <class Fn>
void parallel_for(int n, int jobs, Fn fn) {
  std::vector<std::future<void>> active;
  int next = 0;
  while (next < n || !active.empty()) {
    while (next < n && static_cast<int>(active.size()) < jobs) {
      active.push_back(std::async(std::launch::async, fn, next));
      ++next;
    }
    active.front().get();
    active.erase(active.begin());
  }
}

std::vector<Vec2> trajectory_points(const SimResultT<double>& res, int ball) {
  return res.trajectory[static_cast<std::size_t>(ball)];
}

void add_scene_guides(SvgPlot& plot, const TaskSpec& task) {
  for (const HalfPlane& p : task.scene.planes) {
    if (std::abs(p.normal.y) > 0.5) {
      plot.add_hline(p.offset / p.normal.y, "#888888");
    } else {
      plot.add_vline(p.offset / p.normal.x, "#888888");
    }
  }
  if (task.loss.terminal == LossSpec::Terminal::kTargetDistanceSq) {
    plot.add_marker(task.loss.target, "#d62728", "target");
  }
}

std::string classify_trajectory(const TaskSpec& task, const SimDiagnostics& diag) {
  if (task.scene.planes.size() < 2) return "n/a";
  return diag.plane_contact_steps[1] > 0 ? "Trajectory 1" : "Trajectory 2";
}

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

}  // namespace

int cmd_grads(const RunConfig& cfg) {
  TaskSpec task = build_task(cfg.task, cfg.overrides);
  std::vector<NamedModel> models = build_models(cfg.models, task, cfg.overrides);
  ensure_out_dir(cfg);
  double h = cfg.overrides.h.value_or(1e-5);

  GradReport rep = gradient_report(task, models, true, h);
  std::string tag = task_file_tag(cfg.task);

  // CSV: one row per (model, quantity).
  std::vector<std::vector<std::string>> rows;
  for (const GradReportRow& row : rep.rows) {
    for (std::size_t qi = 0; qi < rep.quantity_names.size(); ++qi) {
      const GradCell& c = row.cells[qi];
      rows.push_back({row.model_name, rep.quantity_names[qi], format_sig9(c.tape_grad),
                      format_sig9(c.fd_grad),
                      rep.analytic[qi] ? format_sig9(*rep.analytic[qi]) : std::string()});
    }
  }
  write_csv(cfg.out_dir / (tag + "_grads.csv"),
            {"model", "quantity", "tape_grad", "fd_grad", "analytic_grad"}, rows);

  // Markdown mirroring the table layout: models as rows, quantities as
  // columns, analytic row bolded on top.
  std::vector<std::string> header = {"implementation"};
  header.insert(header.end(), rep.quantity_names.begin(), rep.quantity_names.end());
  std::vector<std::vector<std::string>> md_rows;
  bool any_analytic = false;
  for (const std::optional<double>& a : rep.analytic) any_analytic |= a.has_value();
  if (any_analytic) {
    std::vector<std::string> arow = {"**analytic**"};
    for (const std::optional<double>& a : rep.analytic) {
      arow.push_back(a ? "**" + format_fixed4(*a) + "**" : "");
    }
    md_rows.push_back(arow);
  }
  for (const GradReportRow& row : rep.rows) {
    std::vector<std::string> r = {row.model_name};
    for (const GradCell& c : row.cells) r.push_back(format_fixed4(c.tape_grad));
    md_rows.push_back(r);
  }
  write_text_file(cfg.out_dir / (tag + "_grads.md"),
                  "# " + cfg.task + " gradients\n\n" + markdown_table(header, md_rows));

  json meta = scene_metadata(task, cfg);
  meta["fd_h"] = h;
  json excl = json::array();
  int mismatches = 0;
  for (const GradReportRow& row : rep.rows) {
    for (std::size_t qi = 0; qi < rep.quantity_names.size(); ++qi) {
      const GradCell& c = row.cells[qi];
      if (c.fd_excluded) {
        excl.push_back({{"model", row.model_name}, {"quantity", rep.quantity_names[qi]}});
        continue;
      }
      double tol = 1e-3 * std::max({std::abs(c.tape_grad), std::abs(c.fd_grad), 1e-4});
      if (std::abs(c.tape_grad - c.fd_grad) > tol) ++mismatches;
    }
  }
  meta["fd_excluded"] = excl;
  meta["fd_mismatches"] = mismatches;
  write_text_file(cfg.out_dir / (tag + "_grads_meta.json"), meta.dump(2) + "\n");

  if (cfg.check && mismatches > 0) {
    std::cerr << "check failed: " << mismatches << " gradient(s) outside tolerance\n";
    return 1;
  }
  return 0;
}

int cmd_optimize(const RunConfig& cfg) {
  TaskSpec task = build_task(cfg.task, cfg.overrides);
  std::vector<NamedModel> models = build_models(cfg.models, task, cfg.overrides);
  ensure_out_dir(cfg);

  OptConfig opt = default_opt_config(task);
  if (cfg.overrides.lr) opt.learning_rate = *cfg.overrides.lr;
  if (cfg.overrides.iters) opt.iterations = *cfg.overrides.iters;
  std::string tag = task_file_tag(cfg.task);
  const bool task3 = task.id == TaskId::kTask3;

  struct RunOut {
    LearningCurve curve;
    SimResultT<double> initial;
    SimResultT<double> final;
    TaskSpec final_task;
  };
  std::vector<RunOut> outs(models.size());

  parallel_for(static_cast<int>(models.size()), concurrency(cfg), [&](int mi) {
    const NamedModel& nm = models[static_cast<std::size_t>(mi)];
    RunOut out;
    out.curve = gradient_descent(task, nm.model, opt);
    out.initial = simulate_value(task, nm.model);
    out.final_task = task;
    if (!out.curve.points.empty() && opt.params == OptConfig::Params::kInitialVelocity) {
      out.final_task.scene.balls[0].vel = {out.curve.points.back().params[0],
                                           out.curve.points.back().params[1]};
    } else if (opt.params == OptConfig::Params::kControlSequence) {
      out.final_task.controls = out.curve.final_controls;
    }
    out.final = simulate_value(out.final_task, nm.model);
    outs[static_cast<std::size_t>(mi)] = std::move(out);
  });

  Task3OptimalControl opt_ctrl;
  if (task3) opt_ctrl = task3_optimal_control();

  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const NamedModel& nm = models[mi];
    const RunOut& out = outs[mi];
    std::string mtag = model_file_tag(nm.name);

    std::vector<std::string> header = {"iter", "loss"};
    if (opt.params == OptConfig::Params::kInitialVelocity) {
      header.push_back("vx0");
      header.push_back("vy0");
    }
    std::vector<std::vector<std::string>> rows;
    for (const CurvePoint& p : out.curve.points) {
      std::vector<std::string> r = {std::to_string(p.iter), format_sig9(p.loss)};
      for (double v : p.params) r.push_back(format_sig9(v));
      rows.push_back(r);
    }
    write_csv(cfg.out_dir / ("curve_" + tag + "_" + mtag + ".csv"), header, rows);

    SvgPlot traj(cfg.task + " trajectories (" + nm.name + ")", "x [m]", "y [m]");
    traj.set_equal_axes(true);
    for (std::size_t b = 0; b < task.scene.balls.size(); ++b) {
      std::string suffix = task.scene.balls.size() > 1 ? " ball " + std::to_string(b + 1) : "";
      traj.add_series(trajectory_points(out.initial, static_cast<int>(b)), kPalette[2 * b + 1],
                      "initial" + suffix, true);
      traj.add_series(trajectory_points(out.final, static_cast<int>(b)), kPalette[2 * b],
                      "optimized" + suffix, false);
    }
    add_scene_guides(traj, task);
    write_text_file(cfg.out_dir / ("traj_" + tag + "_" + mtag + ".svg"), traj.render());

    if (task3) {
      double dt = task.dt();
      std::vector<std::vector<std::string>> crows;
      std::vector<Vec2> prof_pts, ana_pts;
      for (int n = 0; n < task.steps_N; ++n) {
        double t = n * dt;
        Vec2 u = out.curve.final_controls[static_cast<std::size_t>(n)];
        double norm = std::sqrt(u.x * u.x + u.y * u.y);
        double ana = std::sqrt(2.0) * std::abs(opt_ctrl.u_component(t));
        crows.push_back({std::to_string(n), format_sig9(t), format_sig9(u.x), format_sig9(u.y),
                         format_sig9(norm), format_sig9(ana)});
        prof_pts.push_back({t, norm});
        ana_pts.push_back({t, ana});
      }
      write_csv(cfg.out_dir / ("controls_task3_" + mtag + ".csv"),
                {"step", "t", "ux", "uy", "u_norm", "u_norm_analytic"}, crows);

      std::vector<std::vector<std::string>> hrows;
      for (const auto& [iter, ctrls] : out.curve.control_checkpoints) {
        for (int n = 0; n < static_cast<int>(ctrls.size()); ++n) {
          hrows.push_back({std::to_string(iter), std::to_string(n),
                           format_sig9(ctrls[static_cast<std::size_t>(n)].x),
                           format_sig9(ctrls[static_cast<std::size_t>(n)].y)});
        }
      }
      write_csv(cfg.out_dir / ("controls_task3_" + mtag + "_history.csv"),
                {"iter", "step", "ux", "uy"}, hrows);

      SvgPlot prof("task3 control profile (" + nm.name + ")", "t [s]", "|u|");
      prof.add_series(prof_pts, "#1f77b4", "learned");
      prof.add_series(ana_pts, "#d62728", "analytic optimum", true);
      write_text_file(cfg.out_dir / ("controls_task3_" + mtag + ".svg"), prof.render());
    }
  }

  // combined learning curves
  SvgPlot curves(cfg.task + " learning curves", "iteration", "loss");
  curves.set_log_y(true);
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    std::vector<Vec2> pts;
    for (const CurvePoint& p : outs[mi].curve.points) {
      pts.push_back({static_cast<double>(p.iter), p.loss});
    }
    curves.add_series(pts, kPalette[mi % 8], models[mi].name);
  }
  if (task3) curves.add_hline(opt_ctrl.optimal_loss, "#000000");
  write_text_file(cfg.out_dir / ("curves_" + tag + ".svg"), curves.render());

  // summary
  std::vector<std::string> sh = {"model", "initial loss", "final loss", "iterations"};
  if (opt.params == OptConfig::Params::kInitialVelocity) sh.push_back("final v0");
  sh.push_back("trajectory mode");
  sh.push_back("stable");
  std::vector<std::vector<std::string>> srows;
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const RunOut& out = outs[mi];
    std::vector<std::string> r = {models[mi].name, format_sig9(out.initial.loss),
                                  format_sig9(out.curve.final_loss()),
                                  std::to_string(out.curve.points.empty()
                                                     ? 0
                                                     : out.curve.points.back().iter)};
    if (opt.params == OptConfig::Params::kInitialVelocity) {
      if (!out.curve.points.empty() && out.curve.points.back().params.size() >= 2) {
        const std::vector<double>& p = out.curve.points.back().params;
        r.push_back("(" + format_fixed4(p[0]) + ", " + format_fixed4(p[1]) + ")");
      } else {
        r.push_back("n/a");
      }
    }
    r.push_back(classify_trajectory(out.final_task, out.final.diag));
    r.push_back(out.curve.unstable ? "UNSTABLE at iter " + std::to_string(out.curve.unstable_iter)
                                   : "yes");
    srows.push_back(r);
  }
  std::string summary = "# " + cfg.task + " optimization summary\n\n";
  summary += "learning rate " + format_sig9(opt.learning_rate) + ", " +
             std::to_string(opt.iterations) + " iterations; loss recorded before each update, " +
             "final row after the last update.\n\n";
  if (task3) {
    summary += "analytic optimal loss: " + format_sig9(opt_ctrl.optimal_loss) + "\n\n";
  }
  summary += markdown_table(sh, srows);
  write_text_file(cfg.out_dir / ("summary_" + tag + ".md"), summary);

  json meta = scene_metadata(task, cfg);
  meta["learning_rate"] = opt.learning_rate;
  meta["iterations"] = opt.iterations;
  meta["loss_recording"] = "before each update; final row after the last update";
  write_text_file(cfg.out_dir / ("summary_" + tag + "_meta.json"), meta.dump(2) + "\n");
  return 0;
}

int cmd_sweep_stiffness(const RunConfig& cfg) {
  if (cfg.task != "task3") throw UsageError("sweep-stiffness runs on task3");
  TaskSpec task = build_task(cfg.task, cfg.overrides);
  ensure_out_dir(cfg);

  std::vector<double> kns = cfg.overrides.kn_list;
  if (kns.empty()) kns = {100.0, 1000.0, 1e4, 1e5};
  OptConfig opt = default_opt_config(task);
  if (cfg.overrides.lr) opt.learning_rate = *cfg.overrides.lr;
  if (cfg.overrides.iters) opt.iterations = *cfg.overrides.iters;

  struct SweepOut {
    double initial_loss = 0.0;
    LearningCurve curve;
  };
  std::vector<SweepOut> outs(kns.size());
  parallel_for(static_cast<int>(kns.size()), concurrency(cfg), [&](int i) {
    Compliant prm = default_compliant_params(task, kns[static_cast<std::size_t>(i)]);
    if (cfg.overrides.k_d) prm.k_d = *cfg.overrides.k_d;
    SimResultT<double> init = simulate_value(task, prm);
    SweepOut out;
    out.initial_loss = init.loss;
    out.curve = gradient_descent(task, prm, opt);
    outs[static_cast<std::size_t>(i)] = std::move(out);
  });

  SvgPlot plot("task3 compliant stiffness sweep", "iteration", "loss");
  plot.set_log_y(false);
  std::vector<std::vector<std::string>> srows;
  for (std::size_t i = 0; i < kns.size(); ++i) {
    char kn_tag[32];
    std::snprintf(kn_tag, sizeof(kn_tag), "%g", kns[i]);
    std::vector<std::vector<std::string>> rows;
    std::vector<Vec2> pts;
    for (const CurvePoint& p : outs[i].curve.points) {
      rows.push_back({std::to_string(p.iter), format_sig9(p.loss)});
      pts.push_back({static_cast<double>(p.iter), p.loss});
    }
    write_csv(cfg.out_dir / ("curve_task3_compliant_kn" + std::string(kn_tag) + ".csv"),
              {"iter", "loss"}, rows);
    plot.add_series(pts, kPalette[i % 8], "k_n = " + std::string(kn_tag));
    srows.push_back({kn_tag, format_sig9(outs[i].initial_loss),
                     format_sig9(outs[i].curve.final_loss()),
                     outs[i].curve.unstable
                         ? "UNSTABLE at iter " + std::to_string(outs[i].curve.unstable_iter)
                         : "yes"});
  }
  Task3OptimalControl oc = task3_optimal_control();
  plot.add_hline(oc.optimal_loss, "#000000");
  write_text_file(cfg.out_dir / "sweep_task3_compliant.svg", plot.render());

  std::string summary = "# task3 compliant stiffness sweep\n\n";
  summary += "analytic optimal loss: " + format_sig9(oc.optimal_loss) + "\n\n";
  summary += markdown_table({"k_n", "initial loss", "final loss", "stable"}, srows);
  write_text_file(cfg.out_dir / "sweep_task3_compliant.md", summary);

  json meta = scene_metadata(task, cfg);
  meta["kn_list"] = kns;
  meta["learning_rate"] = opt.learning_rate;
  meta["iterations"] = opt.iterations;
  write_text_file(cfg.out_dir / "sweep_task3_compliant_meta.json", meta.dump(2) + "\n");
  return 0;
}

}  // namespace diffcontact
