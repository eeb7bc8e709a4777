#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "diffcontact/contact.hpp"

namespace diffcontact {

enum class TaskId { kTask1, kTask2, kTask2Friction, kTask3 };

struct LossSpec {
  enum class Terminal { kFinalHeight, kTargetDistanceSq };
  Terminal terminal = Terminal::kFinalHeight;
  Vec2 target{0.0, 0.0};
  int target_ball = 0;
  double control_penalty_eps = 0.0;  // running cost eps*|u|^2*dt per step
};

/// Benchmark task: scene, horizon, controls and loss. dt*N = T.
struct TaskSpec {
  TaskId id = TaskId::kTask1;
  SceneConfig scene;
  double horizon_T = 1.0;
  int steps_N = 480;
  std::vector<Vec2> controls;  // per-step force on ball 0; empty = uncontrolled
  LossSpec loss;

  double dt() const { return horizon_T / steps_N; }
};

/// Bouncing ball, no gravity, perfectly elastic ground contact; loss is the
/// final height. The ball radius does not enter the analytic gradients.
TaskSpec make_task1();

/// Ball under gravity aimed at a target, bouncing off the ground and a wall,
/// e = 0.92; optimized over the initial velocity.
TaskSpec make_task2(bool frictional);

/// Two balls, no gravity; constant initial control (3, 3) on ball 0; loss is
/// the distance of ball 1 from the origin at T plus a quadratic control
/// penalty.
TaskSpec make_task3();

// ---------------------------------------------------------------------------
// Simulation

struct SimDiagnostics {
  int contact_steps = 0;
  int first_contact_step = -1;
  int degenerate_toi = 0;
  std::vector<int> plane_contact_steps;  // per plane: steps with contact
  int ball_ball_contact_steps = 0;
  int unstable_at_step = -1;  // -1 = finished; otherwise aborted at this step

  /// Discrete contact profile used to detect contact-topology changes
  /// between finite-difference probe points.
  std::vector<int> signature() const {
    std::vector<int> sig{contact_steps, first_contact_step, ball_ball_contact_steps};
    sig.insert(sig.end(), plane_contact_steps.begin(), plane_contact_steps.end());
    return sig;
  }
};

/// Tape node ids of the simulation inputs (gradient read-out points).
struct GradientHandles {
  struct BallHandles {
    int px = -1, py = -1, vx = -1, vy = -1;
  };
  std::vector<BallHandles> balls;
  std::vector<std::array<int, 2>> controls;  // per step: {ux, uy}
};

template <class S>
struct SimResultT {
  S loss{};
  std::vector<std::vector<Vec2>> trajectory;  // [ball][step 0..N] position values
  SimDiagnostics diag;
};

namespace detail {

template <class S>
void check_finite(const std::vector<BallStateT<S>>& balls, int step, SimDiagnostics& diag) {
  if (diag.unstable_at_step >= 0) return;
  for (const BallStateT<S>& b : balls) {
    if (!std::isfinite(value_of(b.pos.x)) || !std::isfinite(value_of(b.pos.y)) ||
        !std::isfinite(value_of(b.vel.x)) || !std::isfinite(value_of(b.vel.y))) {
      diag.unstable_at_step = step;
      return;
    }
  }
}

template <class S>
void record_trajectory(SimResultT<S>& res, const std::vector<BallStateT<S>>& balls) {
  for (std::size_t i = 0; i < balls.size(); ++i) {
    res.trajectory[i].push_back(values_of(balls[i].pos));
  }
}

template <class S>
void note_events(const std::vector<ContactEventT<S>>& events, int step, SimDiagnostics& diag) {
  if (events.empty()) return;
  diag.contact_steps += 1;
  if (diag.first_contact_step < 0) diag.first_contact_step = step;
  bool bb = false;
  std::vector<bool> plane_hit(diag.plane_contact_steps.size(), false);
  for (const ContactEventT<S>& ev : events) {
    if (ev.kind == ContactKind::kBallPlane) {
      plane_hit[static_cast<std::size_t>(ev.b)] = true;
    } else {
      bb = true;
    }
  }
  for (std::size_t i = 0; i < plane_hit.size(); ++i) {
    if (plane_hit[i]) diag.plane_contact_steps[i] += 1;
  }
  if (bb) diag.ball_ball_contact_steps += 1;
}

/// Unrolls the N-step simulation. Balls and controls are already lifted to
/// the scalar type; the caller owns input registration for gradient runs.
template <class S>
SimResultT<S> simulate_core(const TaskSpec& task, const ContactModel& model,
                            std::vector<BallStateT<S>> balls,
                            const std::vector<Vec2T<S>>& controls) {
  const double dt = task.dt();
  const std::vector<HalfPlane>& planes = task.scene.planes;
  const double e = task.scene.restitution_e;
  const double mu = task.scene.friction_mu;
  const Vec2 g = task.scene.gravity;
  const bool has_controls = !controls.empty();
  const double eps = task.loss.control_penalty_eps;

  SimResultT<S> res;
  res.trajectory.resize(balls.size());
  res.diag.plane_contact_steps.assign(planes.size(), 0);
  record_trajectory(res, balls);

  S running(0.0);

  const Compliant* compliant = std::get_if<Compliant>(&model);
  const Pbd* pbd = std::get_if<Pbd>(&model);
  ImpulseFamily family = ImpulseFamily::kDirect;
  bool use_toi = true;
  if (const ImpulseDirect* m = std::get_if<ImpulseDirect>(&model)) {
    family = ImpulseFamily::kDirect;
    use_toi = m->use_toi;
  } else if (const ImpulseLCP* m = std::get_if<ImpulseLCP>(&model)) {
    family = ImpulseFamily::kLcp;
    use_toi = m->use_toi;
  } else if (const ImpulseConvex* m = std::get_if<ImpulseConvex>(&model)) {
    family = ImpulseFamily::kConvex;
    use_toi = m->use_toi;
  }

  for (int n = 0; n < task.steps_N; ++n) {
    Vec2T<S> u = has_controls ? controls[static_cast<std::size_t>(n)] : Vec2T<S>{};
    if (has_controls && eps > 0.0) {
      running += eps * (u.x * u.x + u.y * u.y) * dt;
    }

    if (compliant) {
      // Kick-drift-kick step: half velocity kick with forces at the current
      // state, full position drift, half kick with forces at the new state.
      // Reduces to the constant-acceleration update when forces are state
      // independent; keeps stiff spring contacts energy-neutral.
      note_events(detect_contacts(balls, planes), n, res.diag);
      std::vector<Vec2T<S>> f0 = compliant_forces(balls, planes, *compliant, mu);
      if (has_controls) f0[0] += u;
      for (std::size_t i = 0; i < balls.size(); ++i) {
        Vec2T<S> a0{f0[i].x * (1.0 / balls[i].mass) + g.x, f0[i].y * (1.0 / balls[i].mass) + g.y};
        balls[i].vel += a0 * (0.5 * dt);
        balls[i].pos += balls[i].vel * dt;
      }
      std::vector<Vec2T<S>> f1 = compliant_forces(balls, planes, *compliant, mu);
      if (has_controls) f1[0] += u;
      for (std::size_t i = 0; i < balls.size(); ++i) {
        Vec2T<S> a1{f1[i].x * (1.0 / balls[i].mass) + g.x, f1[i].y * (1.0 / balls[i].mass) + g.y};
        balls[i].vel += a1 * (0.5 * dt);
      }
    } else {
      std::vector<BallStateT<S>> tentative = balls;
      for (std::size_t i = 0; i < balls.size(); ++i) {
        Vec2T<S> force = (has_controls && i == 0) ? u : Vec2T<S>{};
        tentative[i] = integrate_free(balls[i], force, g, dt);
      }
      std::vector<ContactEventT<S>> events = detect_contacts(tentative, planes);
      note_events(events, n, res.diag);
      if (events.empty()) {
        balls = std::move(tentative);
      } else if (pbd) {
        std::vector<Vec2T<S>> prev_pos(balls.size());
        for (std::size_t i = 0; i < balls.size(); ++i) prev_pos[i] = balls[i].pos;
        pbd_resolve(tentative, prev_pos, events, planes, e, mu, pbd->iterations, dt);
        balls = std::move(tentative);
      } else if (!use_toi) {
        balls = std::move(tentative);
        for (const ContactEventT<S>& ev : events) {
          apply_impulse_no_toi(balls, ev, family, e, mu);
        }
      } else {
        // TOI path: involved balls restart from the step-start position with
        // the post-force velocity; everyone else keeps the free-flight step.
        std::vector<bool> involved(balls.size(), false);
        for (const ContactEventT<S>& ev : events) {
          involved[static_cast<std::size_t>(ev.a)] = true;
          if (ev.kind == ContactKind::kBallBall) involved[static_cast<std::size_t>(ev.b)] = true;
        }
        std::vector<BallStateT<S>> work = balls;
        for (std::size_t i = 0; i < balls.size(); ++i) {
          if (involved[i]) {
            work[i].vel = tentative[i].vel;  // post-force velocity
          } else {
            work[i] = tentative[i];
          }
        }
        for (const ContactEventT<S>& ev : events) {
          if (apply_impulse_with_toi(work, ev, planes, family, e, mu, dt)) {
            res.diag.degenerate_toi += 1;
          }
        }
        balls = std::move(work);
      }
    }

    check_finite(balls, n, res.diag);
    record_trajectory(res, balls);
    if (res.diag.unstable_at_step >= 0) break;
  }

  S terminal(0.0);
  const BallStateT<S>& tb = balls[static_cast<std::size_t>(task.loss.target_ball)];
  if (task.loss.terminal == LossSpec::Terminal::kFinalHeight) {
    terminal = tb.pos.y;
  } else {
    Vec2T<S> d{tb.pos.x - task.loss.target.x, tb.pos.y - task.loss.target.y};
    terminal = d.x * d.x + d.y * d.y;
  }
  res.loss = terminal + running;
  return res;
}

}  // namespace detail

/// Plain forward simulation (no tape); used for finite differences and
/// optimization bookkeeping.
SimResultT<double> simulate_value(const TaskSpec& task, const ContactModel& model);

/// Differentiable simulation: initial positions/velocities and every control
/// entry become tape inputs, readable through `handles` after backward().
SimResultT<Var> simulate_grad(const TaskSpec& task, const ContactModel& model, Tape& tape,
                              GradientHandles* handles = nullptr);

// ---------------------------------------------------------------------------
// Analytic oracles

struct Task1Analytic {
  double final_height;
  double grad_p;  // d p_yN / d p_y0
  double grad_v;  // d p_yN / d v_y0
  double grad_u;  // d p_yN / d u_y0
};

/// Closed form for task 1: p_yN = -p_y0 - v_y0 T - u_y0 (T dt - dt^2/2) + 2r.
/// Throws std::domain_error when the parameters do not produce exactly one
/// ground impact inside (0, T).
Task1Analytic task1_analytic(double p_y0, double v_y0, double u_y0, double T, double dt, double r);

struct Task3OracleResult {
  double loss = 0.0;
  double collision_time = 0.0;  // seconds
  // 2-D per-component gradients (x = y by symmetry).
  Vec2 grad_p1, grad_p2;
  Vec2 grad_v1, grad_v2;
  Vec2 grad_u0;
};

/// The closed-form two-ball oracle: one analytic free-flight step, collision
/// time from the quadratic, elastic equal-mass exchange, terminal coast. The
/// 1-D diagonal inputs default to the task-3 configuration; gradients are
/// computed on a local tape and converted to 2-D components.
Task3OracleResult task3_oracle(double x1_0, double x2_0, double v1_0, double v2_0, double u0,
                               double u_c, double dt, double r, double T, double epsilon);
Task3OracleResult task3_oracle();  // task-3 defaults

struct Task3OptimalControl {
  double alpha = 0.0;       // control at the collision instant (1-D)
  double beta = 0.0;        // slope coefficient: u(t) = alpha + beta (s - t)
  double collision_s = 0.0;
  double optimal_loss = 0.0;
  /// 1-D control magnitude at time t (zero after the collision).
  double u_1d(double t) const { return t <= collision_s ? alpha + beta * (collision_s - t) : 0.0; }
  /// Per-component 2-D control (x = y).
  double u_component(double t) const { return u_1d(t) / std::sqrt(2.0); }
};

/// Solves the reduced continuous-time optimal control problem for task 3
/// (linear profile up to the collision, zero after) by a 2x2 linear solve
/// nested in a bisection on the collision time.
Task3OptimalControl task3_optimal_control();

/// Default compliant parameters for a task: k_d maps the scene restitution
/// through the standard damping-ratio relation (e = 1 gives k_d = 0).
Compliant default_compliant_params(const TaskSpec& task, double k_n = 1e4);

}  // namespace diffcontact
