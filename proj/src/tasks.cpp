#include "diffcontact/tasks.hpp"

#include <cmath>
#include <stdexcept>

namespace diffcontact {

TaskSpec make_task1() {
  TaskSpec t;
  t.id = TaskId::kTask1;
  t.horizon_T = 1.0;
  t.steps_N = 480;
  BallConfig ball;
  ball.pos = {-1.0, 1.0};
  ball.vel = {2.0, -2.0};
  ball.radius = 0.1;
  ball.mass = 1.0;
  t.scene.balls = {ball};
  t.scene.planes = {HalfPlane{{0.0, 1.0}, 0.0}};  // ground y = 0
  t.scene.gravity = {0.0, 0.0};
  t.scene.restitution_e = 1.0;
  t.scene.friction_mu = 0.0;
  t.controls.assign(static_cast<std::size_t>(t.steps_N), Vec2{0.0, 0.0});
  t.loss.terminal = LossSpec::Terminal::kFinalHeight;
  t.loss.target_ball = 0;
  t.loss.control_penalty_eps = 0.0;
  return t;
}

TaskSpec make_task2(bool frictional) {
  TaskSpec t;
  t.id = frictional ? TaskId::kTask2Friction : TaskId::kTask2;
  t.horizon_T = 0.6;
  t.steps_N = 288;
  BallConfig ball;
  ball.pos = {-0.5, 1.0};
  ball.vel = {5.0, -5.0};
  ball.radius = 0.1;
  ball.mass = 1.0;
  t.scene.balls = {ball};
  // Ground plus a vertical wall at x = 2 (interior x <= 2). With these the
  // unoptimized trajectory bounces off the ground at t ~ 0.156 s and the wall
  // at t ~ 0.48 s, inside the 0.6 s horizon.
  t.scene.planes = {HalfPlane{{0.0, 1.0}, 0.0}, HalfPlane{{-1.0, 0.0}, -2.0}};
  t.scene.gravity = {0.0, -9.8};
  t.scene.restitution_e = 0.92;
  t.scene.friction_mu = frictional ? 0.1 : 0.0;
  t.loss.terminal = LossSpec::Terminal::kTargetDistanceSq;
  t.loss.target = {-2.0, 1.5};
  t.loss.target_ball = 0;
  t.loss.control_penalty_eps = 0.0;
  return t;
}

TaskSpec make_task3() {
  TaskSpec t;
  t.id = TaskId::kTask3;
  t.horizon_T = 1.0;
  t.steps_N = 480;
  BallConfig b1;
  b1.pos = {-2.0, -2.0};
  b1.vel = {0.0, 0.0};
  b1.radius = 0.2;
  b1.mass = 1.0;
  BallConfig b2 = b1;
  b2.pos = {-1.0, -1.0};
  t.scene.balls = {b1, b2};
  t.scene.gravity = {0.0, 0.0};
  t.scene.restitution_e = 1.0;  // the two-ball oracle's exchange is elastic
  t.scene.friction_mu = 0.0;
  t.controls.assign(static_cast<std::size_t>(t.steps_N), Vec2{3.0, 3.0});
  t.loss.terminal = LossSpec::Terminal::kTargetDistanceSq;
  t.loss.target = {0.0, 0.0};
  t.loss.target_ball = 1;
  t.loss.control_penalty_eps = 0.1;
  return t;
}

SimResultT<double> simulate_value(const TaskSpec& task, const ContactModel& model) {
  std::vector<BallStateT<double>> balls;
  balls.reserve(task.scene.balls.size());
  for (const BallConfig& b : task.scene.balls) {
    BallStateT<double> s;
    s.pos = b.pos;
    s.vel = b.vel;
    s.radius = b.radius;
    s.mass = b.mass;
    balls.push_back(s);
  }
  std::vector<Vec2T<double>> controls;
  controls.reserve(task.controls.size());
  for (const Vec2& u : task.controls) controls.push_back(u);
  return detail::simulate_core<double>(task, model, std::move(balls), controls);
}

SimResultT<Var> simulate_grad(const TaskSpec& task, const ContactModel& model, Tape& tape,
                              GradientHandles* handles) {
  // Rough per-step tape-node budget; growth beyond the estimate is fine.
  tape.reserve(tape.size() +
               static_cast<std::size_t>(task.steps_N + 1) * 96 * task.scene.balls.size());
  GradientHandles local;
  GradientHandles& h = handles ? *handles : local;
  h.balls.clear();
  h.controls.clear();

  std::vector<BallStateT<Var>> balls;
  balls.reserve(task.scene.balls.size());
  for (const BallConfig& b : task.scene.balls) {
    BallStateT<Var> s;
    s.pos = {Var::input(tape, b.pos.x), Var::input(tape, b.pos.y)};
    s.vel = {Var::input(tape, b.vel.x), Var::input(tape, b.vel.y)};
    s.radius = b.radius;
    s.mass = b.mass;
    h.balls.push_back({s.pos.x.node(), s.pos.y.node(), s.vel.x.node(), s.vel.y.node()});
    balls.push_back(s);
  }
  std::vector<Vec2T<Var>> controls;
  controls.reserve(task.controls.size());
  for (const Vec2& u : task.controls) {
    Vec2T<Var> uv{Var::input(tape, u.x), Var::input(tape, u.y)};
    h.controls.push_back({uv.x.node(), uv.y.node()});
    controls.push_back(uv);
  }
  return detail::simulate_core<Var>(task, model, std::move(balls), controls);
}

Task1Analytic task1_analytic(double p_y0, double v_y0, double u_y0, double T, double dt,
                             double r) {
  double v_y1 = v_y0 + u_y0 * dt;
  double p_y1 = p_y0 + v_y0 * dt + 0.5 * u_y0 * dt * dt;
  if (!(v_y1 < 0.0)) {
    throw std::domain_error("task1_analytic: ball never descends, no impact");
  }
  double t_impact = dt + (r - p_y1) / v_y1;
  if (!(t_impact > dt && t_impact < T)) {
    throw std::domain_error("task1_analytic: impact time outside (dt, T)");
  }
  Task1Analytic out;
  out.final_height = -p_y0 - v_y0 * T - u_y0 * (T * dt - 0.5 * dt * dt) + 2.0 * r;
  out.grad_p = -1.0;
  out.grad_v = -T;
  out.grad_u = -(T * dt - 0.5 * dt * dt);
  return out;
}

Task3OracleResult task3_oracle(double x1_0, double x2_0, double v1_0, double v2_0, double u0,
                               double u_c, double dt, double r, double T, double epsilon) {
  Tape tape(64);
  Var x1 = Var::input(tape, x1_0);
  Var x2 = Var::input(tape, x2_0);
  Var v1 = Var::input(tape, v1_0);
  Var v2 = Var::input(tape, v2_0);
  Var u = Var::input(tape, u0);

  // One exact free-flight step under u, then the collision-time quadratic
  // a (s-dt)^2 + b (s-dt) + c = 0 under the constant follow-on force u_c.
  Var v1_dt = v1 + u * dt;
  Var v2_dt = v2;
  Var x1_dt = x1 + v1 * dt + u * (dt * dt / 2.0);
  Var x2_dt = x2 + v2 * dt;
  Var dist_dt = x2_dt - x1_dt - 2.0 * r;
  Var qa(u_c / 2.0);
  Var qb = v1_dt - v2_dt;
  Var qc = Var(0.0) - dist_dt;
  Var disc = qb * qb - 4.0 * qa * qc;
  if (!(disc.value() > 0.0)) {
    throw std::domain_error("task3_oracle: no collision (discriminant <= 0)");
  }
  Var s = (sqrt(disc) - qb) / (2.0 * qa) + dt;
  if (!(s.value() > dt && s.value() < T)) {
    throw std::domain_error("task3_oracle: collision time outside (dt, T)");
  }
  Var v1_s = v1_dt + u_c * (s - dt);
  Var x2_s = x2_dt + v2_dt * (s - dt);
  Var x2_T = x2_s + v1_s * (T - s);
  Var loss = x2_T * x2_T + epsilon * u * dt;

  GradVector g = backward(tape, loss);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Task3OracleResult out;
  out.loss = loss.value();
  out.collision_time = s.value();
  out.grad_p1 = {g.at(x1) * inv_sqrt2, g.at(x1) * inv_sqrt2};
  out.grad_p2 = {g.at(x2) * inv_sqrt2, g.at(x2) * inv_sqrt2};
  out.grad_v1 = {g.at(v1) * inv_sqrt2, g.at(v1) * inv_sqrt2};
  out.grad_v2 = {g.at(v2) * inv_sqrt2, g.at(v2) * inv_sqrt2};
  out.grad_u0 = {g.at(u) * inv_sqrt2, g.at(u) * inv_sqrt2};
  return out;
}

Task3OracleResult task3_oracle() {
  const double s2 = std::sqrt(2.0);
  return task3_oracle(-2.0 * s2, -1.0 * s2, 0.0, 0.0, 3.0 * s2, 3.0 * s2, 1.0 / 480.0, 0.2, 1.0,
                      0.1);
}

namespace {

struct ProfileEval {
  double alpha, beta, big_a, big_v, residual;
};

// Fixed collision time s: the stationarity condition in alpha and the
// displacement constraint are linear in (alpha, beta). The outer residual is
// the free-time optimality condition; its root is bracketed by bisection.
ProfileEval eval_profile(double s, double x2_0, double gap, double T, double eps) {
  double ts = T - s;
  double a11 = eps + s * ts * ts;
  double a12 = 0.5 * s * s * ts * ts;
  double b1 = -ts * x2_0;
  double a21 = 0.5 * s * s;
  double a22 = s * s * s / 3.0;
  double b2 = gap;
  double det = a11 * a22 - a12 * a21;
  double alpha = (b1 * a22 - a12 * b2) / det;
  double beta = (a11 * b2 - b1 * a21) / det;
  double big_v = alpha * s + 0.5 * beta * s * s;
  double big_a = x2_0 + big_v * ts;
  double mu = -(eps * alpha * alpha + 2.0 * big_a * big_v) / big_v;
  double residual = beta - mu / (2.0 * eps);
  return {alpha, beta, big_a, big_v, residual};
}

}  // namespace

Task3OptimalControl task3_optimal_control() {
  const double s2 = std::sqrt(2.0);
  const double x2_0 = -s2;
  const double gap = s2 - 0.4;  // initial center distance minus 2r
  const double T = 1.0;
  const double eps = 0.1;

  double lo = 0.2, hi = 0.98;
  double flo = eval_profile(lo, x2_0, gap, T, eps).residual;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    double fm = eval_profile(mid, x2_0, gap, T, eps).residual;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double s = 0.5 * (lo + hi);
  ProfileEval pe = eval_profile(s, x2_0, gap, T, eps);
  Task3OptimalControl out;
  out.alpha = pe.alpha;
  out.beta = pe.beta;
  out.collision_s = s;
  double running = eps * (pe.alpha * pe.alpha * s + pe.alpha * pe.beta * s * s +
                          pe.beta * pe.beta * s * s * s / 3.0);
  out.optimal_loss = pe.big_a * pe.big_a + running;
  return out;
}

Compliant default_compliant_params(const TaskSpec& task, double k_n) {
  Compliant prm;
  prm.k_n = k_n;
  double e = task.scene.restitution_e;
  double m_eff = task.scene.balls.size() >= 2
                     ? effective_mass(task.scene.balls[0].mass, task.scene.balls[1].mass)
                     : effective_mass(task.scene.balls[0].mass);
  if (e < 1.0) {
    double ln_e = std::log(e);
    double zeta = -ln_e / std::sqrt(M_PI * M_PI + ln_e * ln_e);
    prm.k_d = 2.0 * zeta * std::sqrt(k_n * m_eff);
  } else {
    prm.k_d = 0.0;
  }
  return prm;
}

}  // namespace diffcontact
