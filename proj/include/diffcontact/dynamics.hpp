#pragma once

#include <stdexcept>
#include <vector>

#include "diffcontact/vec2.hpp"

namespace diffcontact {

/// Static half-plane {q : normal·q = offset}; the interior (allowed side) is
/// normal·q >= offset. Normals are unit length.
struct HalfPlane {
  Vec2 normal;
  double offset = 0.0;
};

/// Ball parameters and initial conditions at config level (plain doubles).
struct BallConfig {
  Vec2 pos;
  Vec2 vel;
  double radius = 1.0;
  double mass = 1.0;
};

/// Scene description shared by every contact model.
struct SceneConfig {
  std::vector<BallConfig> balls;
  std::vector<HalfPlane> planes;
  Vec2 gravity{0.0, 0.0};
  double restitution_e = 1.0;  // in [0, 1]
  double friction_mu = 0.0;    // >= 0
};

/// Per-ball simulation state over scalar type S.
template <class S>
struct BallStateT {
  Vec2T<S> pos;
  Vec2T<S> vel;
  double radius = 1.0;
  double mass = 1.0;
};

enum class ContactKind { kBallPlane, kBallBall };

/// One detected contact. `a` is always a ball index; `b` is a plane index for
/// ball-plane contacts and the second ball otherwise. The normal points from
/// the surface into ball `a` and `penetration` is measured in the state the
/// detection ran on.
template <class S>
struct ContactEventT {
  ContactKind kind = ContactKind::kBallPlane;
  int a = -1;
  int b = -1;
  Vec2T<S> normal;
  S penetration{};
};

template <class S>
S plane_signed_distance(const Vec2T<S>& pos, double radius, const HalfPlane& plane) {
  return pos.x * plane.normal.x + pos.y * plane.normal.y - plane.offset - radius;
}

template <class S>
S ball_signed_distance(const BallStateT<S>& a, const BallStateT<S>& b) {
  return (a.pos - b.pos).norm() - a.radius - b.radius;
}

/// Constant-acceleration exact update: v' = v + a dt, p' = p + v dt + a dt²/2
/// with a = force/mass + gravity. Exact for force constant over the step.
template <class S>
BallStateT<S> integrate_free(const BallStateT<S>& state, const Vec2T<S>& force, const Vec2& gravity,
                             double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_free: dt must be positive");
  Vec2T<S> accel{force.x * (1.0 / state.mass) + gravity.x, force.y * (1.0 / state.mass) + gravity.y};
  BallStateT<S> next = state;
  next.vel = state.vel + accel * dt;
  next.pos = state.pos + state.vel * dt + accel * (0.5 * dt * dt);
  return next;
}

/// Every ball-plane and ball-ball pair whose signed distance in `tentative`
/// is strictly negative. Distances and normals are evaluated in `tentative`.
template <class S>
std::vector<ContactEventT<S>> detect_contacts(const std::vector<BallStateT<S>>& tentative,
                                              const std::vector<HalfPlane>& planes) {
  std::vector<ContactEventT<S>> events;
  int nb = static_cast<int>(tentative.size());
  for (int i = 0; i < nb; ++i) {
    for (int ip = 0; ip < static_cast<int>(planes.size()); ++ip) {
      S sd = plane_signed_distance(tentative[i].pos, tentative[i].radius, planes[ip]);
      if (value_of(sd) < 0.0) {
        ContactEventT<S> ev;
        ev.kind = ContactKind::kBallPlane;
        ev.a = i;
        ev.b = ip;
        ev.normal = Vec2T<S>{S(planes[ip].normal.x), S(planes[ip].normal.y)};
        ev.penetration = -sd;
        events.push_back(ev);
      }
    }
  }
  for (int i = 0; i < nb; ++i) {
    for (int j = i + 1; j < nb; ++j) {
      S sd = ball_signed_distance(tentative[i], tentative[j]);
      if (value_of(sd) < 0.0) {
        ContactEventT<S> ev;
        ev.kind = ContactKind::kBallBall;
        ev.a = i;
        ev.b = j;
        Vec2T<S> d = tentative[i].pos - tentative[j].pos;
        S dist = d.norm();
        ev.normal = Vec2T<S>{d.x / dist, d.y / dist};
        ev.penetration = -sd;
        events.push_back(ev);
      }
    }
  }
  return events;
}

/// Fraction of the step at which the contact pair first touches, assuming
/// constant (post-force) velocities within the step. `degenerate` marks the
/// grazing/no-root fallback alpha = 0, which downstream code treats as an
/// impulse applied at the step start.
template <class S>
struct ToiResult {
  S alpha{};
  bool degenerate = false;
};

template <class S>
ToiResult<S> compute_toi_ball_plane(const Vec2T<S>& pos_start, double radius,
                                    const Vec2T<S>& vel_post_force, const HalfPlane& plane,
                                    double dt) {
  S sd0 = plane_signed_distance(pos_start, radius, plane);
  S vn = vel_post_force.x * plane.normal.x + vel_post_force.y * plane.normal.y;
  if (!(value_of(vn) < 0.0) || value_of(sd0) < 0.0) {
    return {S(0.0), true};
  }
  S alpha = sd0 / ((S(0.0) - vn) * dt);
  if (value_of(alpha) > 1.0) return {S(0.0), true};
  return {alpha, false};
}

template <class S>
ToiResult<S> compute_toi_ball_ball(const BallStateT<S>& a, const Vec2T<S>& vel_a,
                                   const BallStateT<S>& b, const Vec2T<S>& vel_b, double dt) {
  using std::sqrt;
  Vec2T<S> dp = a.pos - b.pos;
  Vec2T<S> dv = (vel_a - vel_b) * dt;  // displacement over the full step
  double rsum = a.radius + b.radius;
  S qa = dv.norm_sq();
  S qb = 2.0 * dp.dot(dv);
  S qc = dp.norm_sq() - rsum * rsum;
  if (value_of(qc) < 0.0) return {S(0.0), true};  // already overlapping at step start
  S disc = qb * qb - 4.0 * qa * qc;
  if (value_of(disc) < 0.0 || value_of(qa) <= 0.0) return {S(0.0), true};
  S alpha = (S(0.0) - qb - sqrt(disc)) / (2.0 * qa);  // earlier root = first touch
  if (value_of(alpha) < 0.0 || value_of(alpha) > 1.0) return {S(0.0), true};
  return {alpha, false};
}

/// Normal relative velocity of the event pair; negative means approaching.
template <class S>
S relative_normal_velocity(const ContactEventT<S>& ev, const Vec2T<S>& vel_a,
                           const Vec2T<S>& vel_b) {
  if (ev.kind == ContactKind::kBallPlane) return ev.normal.dot(vel_a);
  return ev.normal.dot(vel_a - vel_b);
}

}  // namespace diffcontact
