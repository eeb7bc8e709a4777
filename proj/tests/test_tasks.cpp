#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "diffcontact/optimize.hpp"
#include "diffcontact/tasks.hpp"

using namespace diffcontact;

namespace {

struct TaskGrads {
  double loss;
  std::vector<double> g;  // per report quantity
  SimDiagnostics diag;
};

TaskGrads tape_gradients(const TaskSpec& task, const ContactModel& model) {
  Tape tape;
  GradientHandles handles;
  SimResultT<Var> res = simulate_grad(task, model, tape, &handles);
  GradVector g = backward(tape, res.loss);
  TaskGrads out;
  out.loss = res.loss.value();
  out.diag = res.diag;
  for (const QuantitySpec& q : report_quantities(task)) {
    out.g.push_back(q.tape_read(g, handles));
  }
  return out;
}

// Independent double-precision transcription of the two-ball closed form,
// used as the finite-difference oracle for the tape version.
double oracle_closed_form(double x1, double x2, double v1, double v2, double u0) {
  const double u_c = 3.0 * std::sqrt(2.0), dt = 1.0 / 480.0, r = 0.2, T = 1.0, eps = 0.1;
  double v1_dt = v1 + u0 * dt;
  double v2_dt = v2;
  double x1_dt = x1 + v1 * dt + u0 * dt * dt / 2.0;
  double x2_dt = x2 + v2 * dt;
  double dist = x2_dt - x1_dt - 2.0 * r;
  double a = u_c / 2.0, b = v1_dt - v2_dt, c = -dist;
  double s = (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a) + dt;
  double v1_s = v1_dt + u_c * (s - dt);
  double x2_T = x2_dt + v2_dt * (s - dt) + v1_s * (T - s);
  return x2_T * x2_T + eps * u0 * dt;
}

}  // namespace

TEST_CASE("task definitions carry the benchmark parameters") {
  TaskSpec t1 = make_task1();
  CHECK(t1.scene.restitution_e == 1.0);
  CHECK(t1.dt() == doctest::Approx(1.0 / 480.0).epsilon(1e-15));
  CHECK(std::abs(t1.dt() * t1.steps_N - t1.horizon_T) < 1e-12);
  CHECK(t1.scene.gravity.y == 0.0);
  CHECK(t1.controls.size() == 480);

  TaskSpec t2 = make_task2(false);
  CHECK(t2.loss.target.x == -2.0);
  CHECK(t2.loss.target.y == 1.5);
  CHECK(t2.steps_N == 288);
  CHECK(t2.scene.restitution_e == 0.92);
  CHECK(t2.scene.gravity.y == -9.8);
  CHECK(t2.scene.planes.size() == 2);
  CHECK(make_task2(true).scene.friction_mu == 0.1);

  TaskSpec t3 = make_task3();
  double dist0 = (t3.scene.balls[0].pos - t3.scene.balls[1].pos).norm();
  CHECK(dist0 - 0.4 == doctest::Approx(std::sqrt(2.0) - 0.4).epsilon(1e-12));
  CHECK(t3.controls[0].x == 3.0);
  CHECK(t3.loss.control_penalty_eps == 0.1);
}

TEST_CASE("task1 analytic closed form") {
  TaskSpec t = make_task1();
  double dt = t.dt();
  Task1Analytic a = task1_analytic(1.0, -2.0, 0.0, 1.0, dt, 0.1);
  CHECK(a.grad_p == -1.0);
  CHECK(a.grad_v == -1.0);
  CHECK(a.grad_u == doctest::Approx(-(dt - 0.5 * dt * dt)).epsilon(1e-15));
  CHECK(a.grad_u == doctest::Approx(-0.0020811632).epsilon(1e-6));  // rounds to -0.0021
  CHECK(a.final_height == doctest::Approx(-1.0 + 2.0 + 0.2).epsilon(1e-12));

  CHECK_THROWS_AS(task1_analytic(1.0, 2.0, 0.0, 1.0, dt, 0.1), std::domain_error);   // ascends
  CHECK_THROWS_AS(task1_analytic(5.0, -2.0, 0.0, 1.0, dt, 0.1), std::domain_error);  // too high
}

TEST_CASE("task3 oracle reproduces the published gradients") {
  Task3OracleResult o = task3_oracle();
  // Values from the reference listings (6-decimal agreement).
  CHECK(std::abs(o.grad_p1.x - (-0.39866853)) < 5e-7);
  CHECK(std::abs(o.grad_p2.x - (-0.3212531)) < 5e-7);
  CHECK(std::abs(o.grad_v1.x - (-0.49779078)) < 5e-7);
  CHECK(std::abs(o.grad_v2.x - (-0.22213092)) < 5e-7);
  CHECK(std::abs(o.grad_u0.x - (-0.0008888851)) < 5e-7);
  CHECK(o.collision_time == doctest::Approx(0.6914512697).epsilon(1e-8));
  CHECK(o.loss == doctest::Approx(0.2600273896).epsilon(1e-8));
}

TEST_CASE("task3 oracle three-way agreement: tape vs finite differences") {
  Task3OracleResult o = task3_oracle();
  const double s2 = std::sqrt(2.0);
  const double h = 1e-6;
  double x1 = -2.0 * s2, x2 = -1.0 * s2, u0 = 3.0 * s2;
  auto fd = [&](auto f) { return f; };
  (void)fd;
  double g_x1 = (oracle_closed_form(x1 + h, x2, 0, 0, u0) - oracle_closed_form(x1 - h, x2, 0, 0, u0)) /
                (2 * h) / s2;
  double g_x2 = (oracle_closed_form(x1, x2 + h, 0, 0, u0) - oracle_closed_form(x1, x2 - h, 0, 0, u0)) /
                (2 * h) / s2;
  double g_v1 = (oracle_closed_form(x1, x2, h, 0, u0) - oracle_closed_form(x1, x2, -h, 0, u0)) /
                (2 * h) / s2;
  double g_u = (oracle_closed_form(x1, x2, 0, 0, u0 + h) - oracle_closed_form(x1, x2, 0, 0, u0 - h)) /
               (2 * h) / s2;
  CHECK(o.grad_p1.x == doctest::Approx(g_x1).epsilon(1e-6));
  CHECK(o.grad_p2.x == doctest::Approx(g_x2).epsilon(1e-6));
  CHECK(o.grad_v1.x == doctest::Approx(g_v1).epsilon(1e-6));
  CHECK(o.grad_u0.x == doctest::Approx(g_u).epsilon(1e-5));
  CHECK_THROWS_AS(task3_oracle(-1.0, 10.0, 0.0, 0.0, 0.0, 1e-9, 1.0 / 480, 0.2, 1.0, 0.1),
                  std::domain_error);
}

TEST_CASE("task1 simulate: TOI impulse models reproduce the analytic gradients") {
  TaskSpec t = make_task1();
  for (ContactModel m : {ContactModel{ImpulseDirect{true}}, ContactModel{ImpulseLCP{true}},
                         ContactModel{ImpulseConvex{true}}}) {
    TaskGrads g = tape_gradients(t, m);
    CHECK(g.g[0] == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(g.g[1] == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(g.g[2] == doctest::Approx(-0.0020811632).epsilon(1e-6));
  }
}

TEST_CASE("task1 simulate: no-TOI impulse reproduces the wrong gradients") {
  TaskSpec t = make_task1();
  TaskGrads g = tape_gradients(t, ImpulseDirect{false});
  CHECK(g.g[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(g.g[1] > -0.11);
  CHECK(g.g[1] < -0.09);
}

TEST_CASE("task1 simulate: PBD projection kills the position gradient") {
  TaskSpec t = make_task1();
  TaskGrads g = tape_gradients(t, Pbd{1});
  CHECK(std::abs(g.g[0]) <= 0.01);
  CHECK(g.g[1] > -0.65);
  CHECK(g.g[1] < -0.45);
}

TEST_CASE("task1 TOI gradients are radius independent") {
  for (double r : {0.1, 0.2, 0.5}) {
    TaskSpec t = make_task1();
    t.scene.balls[0].radius = r;
    TaskGrads g = tape_gradients(t, ImpulseLCP{true});
    CHECK(g.g[0] == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(g.g[1] == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(g.g[2] == doctest::Approx(-0.0020811632).epsilon(1e-4));
  }
}

TEST_CASE("task2 initial trajectory bounces off the ground then the wall") {
  TaskSpec t = make_task2(false);
  SimResultT<double> res = simulate_value(t, ImpulseDirect{true});
  REQUIRE(res.diag.plane_contact_steps.size() == 2);
  CHECK(res.diag.plane_contact_steps[0] >= 1);  // ground
  CHECK(res.diag.plane_contact_steps[1] >= 1);  // wall
  CHECK(res.diag.first_contact_step == doctest::Approx(75).epsilon(0.05));
  CHECK(res.loss == doctest::Approx(11.3).epsilon(0.05));
}

TEST_CASE("task3 simulate: initial losses sit near the analytic value") {
  TaskSpec t = make_task3();
  for (ContactModel m : {ContactModel{ImpulseDirect{true}}, ContactModel{ImpulseLCP{true}},
                         ContactModel{ImpulseConvex{true}}, ContactModel{ImpulseDirect{false}},
                         ContactModel{Pbd{1}}}) {
    SimResultT<double> res = simulate_value(t, m);
    CHECK(std::abs(res.loss - 2.06) < 0.04);
  }
}

TEST_CASE("task3 gradients are symmetric in x and y") {
  TaskSpec t = make_task3();
  for (ContactModel m :
       {ContactModel{ImpulseDirect{true}}, ContactModel{ImpulseLCP{false}}, ContactModel{Pbd{1}},
        ContactModel{default_compliant_params(t)}}) {
    Tape tape;
    GradientHandles h;
    SimResultT<Var> res = simulate_grad(t, m, tape, &h);
    GradVector g = backward(tape, res.loss);
    for (const GradientHandles::BallHandles& b : h.balls) {
      CHECK(std::abs(g.at_node(b.px) - g.at_node(b.py)) <= 1e-10);
      CHECK(std::abs(g.at_node(b.vx) - g.at_node(b.vy)) <= 1e-10);
    }
    CHECK(std::abs(g.at_node(h.controls[0][0]) - g.at_node(h.controls[0][1])) <= 1e-10);
  }
}

TEST_CASE("simulate is deterministic bit for bit") {
  TaskSpec t = make_task2(false);
  auto run = [&]() {
    Tape tape;
    GradientHandles h;
    SimResultT<Var> res = simulate_grad(t, ImpulseDirect{true}, tape, &h);
    GradVector g = backward(tape, res.loss);
    return std::pair<double, double>(res.loss.value(), g.at_node(h.balls[0].vx));
  };
  auto [l1, g1] = run();
  auto [l2, g2] = run();
  CHECK(std::memcmp(&l1, &l2, sizeof l1) == 0);
  CHECK(std::memcmp(&g1, &g2, sizeof g1) == 0);
}

TEST_CASE("compliant blow-up is reported as instability, not a crash") {
  // A ball wedged between two planes is a confined stiff oscillator; with
  // omega*dt far beyond the stable band the state diverges to non-finite
  // values and the simulation must abort with the step index recorded.
  TaskSpec t;
  t.id = TaskId::kTask1;
  t.horizon_T = 1.0;
  t.steps_N = 480;
  BallConfig b;
  b.pos = {0.0, 0.31};  // slightly off the wedge equilibrium
  b.vel = {0.0, 0.0};
  b.radius = 0.5;
  b.mass = 1.0;
  t.scene.balls = {b};
  t.scene.planes = {HalfPlane{{0.0, 1.0}, 0.0}, HalfPlane{{0.0, -1.0}, -0.6}};
  t.scene.gravity = {0.0, 0.0};
  t.loss.terminal = LossSpec::Terminal::kFinalHeight;
  SimResultT<double> res = simulate_value(t, Compliant{1e7, 0.0, 0.0});
  CHECK(res.diag.unstable_at_step >= 0);
}

TEST_CASE("optimal control profile solves the reduced problem") {
  Task3OptimalControl oc = task3_optimal_control();
  CHECK(oc.optimal_loss == doctest::Approx(1.3965).epsilon(2e-4));
  CHECK(oc.collision_s == doctest::Approx(0.6832).epsilon(1e-3));
  // linear decrease to the collision, zero afterwards
  CHECK(oc.u_1d(0.0) > oc.u_1d(0.5 * oc.collision_s));
  CHECK(oc.u_1d(0.5 * oc.collision_s) > oc.u_1d(oc.collision_s));
  CHECK(oc.u_1d(oc.collision_s + 0.01) == 0.0);
}

TEST_CASE("compliant defaults map restitution to damping") {
  TaskSpec t3 = make_task3();
  Compliant c3 = default_compliant_params(t3);
  CHECK(c3.k_d == 0.0);  // e = 1
  TaskSpec t2 = make_task2(false);
  Compliant c2 = default_compliant_params(t2, 1e4);
  double ln_e = std::log(0.92);
  double zeta = -ln_e / std::sqrt(M_PI * M_PI + ln_e * ln_e);
  CHECK(c2.k_d == doctest::Approx(2.0 * zeta * 100.0).epsilon(1e-12));
}
