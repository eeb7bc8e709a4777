#pragma once

#include <set>
#include <variant>
#include <vector>

#include "diffcontact/dynamics.hpp"

namespace diffcontact {

// ---------------------------------------------------------------------------
// Model selection

struct ImpulseDirect {
  bool use_toi = true;
};
struct ImpulseLCP {
  bool use_toi = true;
};
struct ImpulseConvex {
  bool use_toi = true;
};
struct Compliant {
  double k_n = 1e4;    // spring stiffness, N/m
  double k_d = 0.0;    // normal damping, N·s/m
  double k_f = 1000.0;  // tangential damping feeding the friction clamp
};
struct Pbd {
  int iterations = 1;
};

using ContactModel = std::variant<ImpulseDirect, ImpulseLCP, ImpulseConvex, Compliant, Pbd>;

/// Solved contact impulse; lambda_n >= 0 and |lambda_t| <= mu * lambda_n.
template <class S>
struct ContactImpulseT {
  S lambda_n{};
  S lambda_t{};
  S applied_at_alpha{};
};

inline double effective_mass(double m_a) { return m_a; }
inline double effective_mass(double m_a, double m_b) { return m_a * m_b / (m_a + m_b); }

// ---------------------------------------------------------------------------
// Normal impulse solvers. All three coincide at a single frictionless
// contact; they differ in how the zero-impulse branch enters the tape.

/// Direct velocity impulse: branch on the approach test, no impulse when
/// separating.
template <class S>
S impulse_direct(const S& v_n, double e, double m_eff) {
  if (!(value_of(v_n) < 0.0)) return S(0.0);
  return (1.0 + e) * m_eff * (S(0.0) - v_n);
}

/// Scalar LCP 0 <= lambda ⟂ (v_n+ + e v_n-) >= 0 in closed form; the max
/// gate keeps the inactive branch on the tape.
template <class S>
S impulse_lcp(const S& v_n, double e, double m_eff) {
  using diffcontact::max;
  using std::max;
  return max(S(0.0), -(1.0 + e) * m_eff * v_n);
}

/// Maximum-dissipation model with restitution injected through the target
/// velocity -e v_n; the nonnegativity constraint is handled by projecting the
/// unconstrained minimizer, which is differentiable through the projection.
template <class S>
S impulse_convex(const S& v_n, double e, double m_eff) {
  using diffcontact::max;
  using std::max;
  S target = -e * v_n;
  S unconstrained = m_eff * (target - v_n);
  return max(S(0.0), unconstrained);
}

/// Coulomb friction: stick if the stopping impulse lies inside the cone,
/// slide clamped to the cone boundary otherwise.
template <class S>
S coulomb_friction_impulse(const S& v_t, double mu, const S& lambda_n, double m_eff) {
  using diffcontact::clamp;
  S bound = mu * lambda_n;
  return clamp(-m_eff * v_t, S(0.0) - bound, bound);
}

enum class ImpulseFamily { kDirect, kLcp, kConvex };

template <class S>
S solve_normal_impulse(ImpulseFamily family, const S& v_n, double e, double m_eff) {
  switch (family) {
    case ImpulseFamily::kDirect: return impulse_direct(v_n, e, m_eff);
    case ImpulseFamily::kLcp: return impulse_lcp(v_n, e, m_eff);
    case ImpulseFamily::kConvex: return impulse_convex(v_n, e, m_eff);
  }
  return S(0.0);
}

// ---------------------------------------------------------------------------
// Impulse application

/// Post-integration impulse: positions keep the full-step update, only the
/// velocity changes. This deliberately ignores impact timing.
template <class S>
void apply_impulse_no_toi(std::vector<BallStateT<S>>& balls, const ContactEventT<S>& ev,
                          ImpulseFamily family, double e, double mu) {
  const Vec2T<S>& n = ev.normal;
  Vec2T<S> t = n.perp();
  if (ev.kind == ContactKind::kBallPlane) {
    BallStateT<S>& b = balls[ev.a];
    double m_eff = effective_mass(b.mass);
    S v_n = relative_normal_velocity(ev, b.vel, b.vel);
    S lam = solve_normal_impulse(family, v_n, e, m_eff);
    Vec2T<S> dv = n * (lam * (1.0 / b.mass));
    if (mu > 0.0) {
      S lam_t = coulomb_friction_impulse(t.dot(b.vel), mu, lam, m_eff);
      dv += t * (lam_t * (1.0 / b.mass));
    }
    b.vel += dv;
  } else {
    BallStateT<S>& b1 = balls[ev.a];
    BallStateT<S>& b2 = balls[ev.b];
    double m_eff = effective_mass(b1.mass, b2.mass);
    S v_n = relative_normal_velocity(ev, b1.vel, b2.vel);
    S lam = solve_normal_impulse(family, v_n, e, m_eff);
    Vec2T<S> imp = n * lam;
    if (mu > 0.0) {
      S lam_t = coulomb_friction_impulse(t.dot(b1.vel - b2.vel), mu, lam, m_eff);
      imp += t * lam_t;
    }
    b1.vel += imp * (1.0 / b1.mass);
    b2.vel -= imp * (1.0 / b2.mass);
  }
}

/// Time-of-impact impulse: advance the pair to the impact fraction at the
/// post-force velocity, apply the impulse there, then finish the step with
/// the post-impulse velocity. The whole composition stays on the tape, which
/// is what keeps position gradients correct across the bounce.
template <class S>
bool apply_impulse_with_toi(std::vector<BallStateT<S>>& balls_start,
                            const ContactEventT<S>& ev, const std::vector<HalfPlane>& planes,
                            ImpulseFamily family, double e, double mu, double dt) {
  bool degenerate = false;
  if (ev.kind == ContactKind::kBallPlane) {
    BallStateT<S>& b = balls_start[ev.a];
    Vec2T<S> v_post = b.vel;  // caller passes post-force velocities in vel
    ToiResult<S> toi = compute_toi_ball_plane(b.pos, b.radius, v_post, planes[ev.b], dt);
    degenerate = toi.degenerate;
    Vec2T<S> p_imp = b.pos + v_post * (toi.alpha * dt);
    const Vec2T<S>& n = ev.normal;
    Vec2T<S> t = n.perp();
    double m_eff = effective_mass(b.mass);
    S v_n = n.dot(v_post);
    S lam = solve_normal_impulse(family, v_n, e, m_eff);
    Vec2T<S> dv = n * (lam * (1.0 / b.mass));
    if (mu > 0.0) {
      S lam_t = coulomb_friction_impulse(t.dot(v_post), mu, lam, m_eff);
      dv += t * (lam_t * (1.0 / b.mass));
    }
    Vec2T<S> v_new = v_post + dv;
    b.pos = p_imp + v_new * ((S(1.0) - toi.alpha) * dt);
    b.vel = v_new;
  } else {
    BallStateT<S>& b1 = balls_start[ev.a];
    BallStateT<S>& b2 = balls_start[ev.b];
    Vec2T<S> v1 = b1.vel;
    Vec2T<S> v2 = b2.vel;
    ToiResult<S> toi = compute_toi_ball_ball(b1, v1, b2, v2, dt);
    degenerate = toi.degenerate;
    Vec2T<S> p1 = b1.pos + v1 * (toi.alpha * dt);
    Vec2T<S> p2 = b2.pos + v2 * (toi.alpha * dt);
    Vec2T<S> d = p1 - p2;
    S dist = d.norm();
    Vec2T<S> n{d.x / dist, d.y / dist};  // normal at impact positions
    Vec2T<S> t = n.perp();
    double m_eff = effective_mass(b1.mass, b2.mass);
    S v_n = n.dot(v1 - v2);
    S lam = solve_normal_impulse(family, v_n, e, m_eff);
    Vec2T<S> imp = n * lam;
    if (mu > 0.0) {
      S lam_t = coulomb_friction_impulse(t.dot(v1 - v2), mu, lam, m_eff);
      imp += t * lam_t;
    }
    Vec2T<S> v1n = v1 + imp * (1.0 / b1.mass);
    Vec2T<S> v2n = v2 - imp * (1.0 / b2.mass);
    S remain = (S(1.0) - toi.alpha) * dt;
    b1.pos = p1 + v1n * remain;
    b2.pos = p2 + v2n * remain;
    b1.vel = v1n;
    b2.vel = v2n;
  }
  return degenerate;
}

// ---------------------------------------------------------------------------
// Compliant (penalty) forces

/// Spring-damper contact forces evaluated at the given states. The normal
/// force is clamped nonnegative (no suction); friction is a damped tangential
/// force clamped to the Coulomb cone.
template <class S>
std::vector<Vec2T<S>> compliant_forces(const std::vector<BallStateT<S>>& balls,
                                       const std::vector<HalfPlane>& planes, const Compliant& prm,
                                       double mu) {
  using diffcontact::clamp;
  using diffcontact::max;
  using std::max;
  std::vector<Vec2T<S>> forces(balls.size());
  std::vector<ContactEventT<S>> events = detect_contacts(balls, planes);
  for (const ContactEventT<S>& ev : events) {
    const Vec2T<S>& n = ev.normal;
    Vec2T<S> t = n.perp();
    if (ev.kind == ContactKind::kBallPlane) {
      const BallStateT<S>& b = balls[ev.a];
      S v_n = n.dot(b.vel);
      S f_n = max(S(0.0), prm.k_n * ev.penetration - prm.k_d * v_n);
      forces[ev.a] += n * f_n;
      if (mu > 0.0) {
        S f_t = clamp(prm.k_f * t.dot(b.vel), S(0.0) - mu * f_n, mu * f_n);
        forces[ev.a] -= t * f_t;
      }
    } else {
      const BallStateT<S>& b1 = balls[ev.a];
      const BallStateT<S>& b2 = balls[ev.b];
      S v_n = n.dot(b1.vel - b2.vel);
      S f_n = max(S(0.0), prm.k_n * ev.penetration - prm.k_d * v_n);
      Vec2T<S> f = n * f_n;
      if (mu > 0.0) {
        S f_t = clamp(prm.k_f * t.dot(b1.vel - b2.vel), S(0.0) - mu * f_n, mu * f_n);
        f -= t * f_t;
      }
      forces[ev.a] += f;
      forces[ev.b] -= f;
    }
  }
  return forces;
}

// ---------------------------------------------------------------------------
// Position-based dynamics

/// Project penetrating bodies to the surface (split inversely by mass),
/// re-derive velocities of the touched bodies from positions, then run a
/// restitution pass against the pre-projection approach velocity.
template <class S>
void pbd_resolve(std::vector<BallStateT<S>>& tentative,
                 const std::vector<Vec2T<S>>& prev_positions,
                 const std::vector<ContactEventT<S>>& events, const std::vector<HalfPlane>& planes,
                 double e, double mu, int iterations, double dt) {
  using diffcontact::clamp;
  std::vector<Vec2T<S>> v_pre(tentative.size());
  for (std::size_t i = 0; i < tentative.size(); ++i) v_pre[i] = tentative[i].vel;

  std::set<int> touched;
  for (const ContactEventT<S>& ev : events) {
    touched.insert(ev.a);
    if (ev.kind == ContactKind::kBallBall) touched.insert(ev.b);
  }

  for (int it = 0; it < iterations; ++it) {
    std::vector<ContactEventT<S>> pen = detect_contacts(tentative, planes);
    if (pen.empty()) break;
    for (const ContactEventT<S>& ev : pen) {
      const Vec2T<S>& n = ev.normal;
      if (ev.kind == ContactKind::kBallPlane) {
        BallStateT<S>& b = tentative[ev.a];
        b.pos += n * ev.penetration;
        if (mu > 0.0) {
          Vec2T<S> t = n.perp();
          S slide = t.dot(b.pos - prev_positions[ev.a]);
          b.pos -= t * clamp(slide, S(0.0) - mu * ev.penetration, mu * ev.penetration);
        }
      } else {
        BallStateT<S>& b1 = tentative[ev.a];
        BallStateT<S>& b2 = tentative[ev.b];
        double w1 = b2.mass / (b1.mass + b2.mass);
        double w2 = b1.mass / (b1.mass + b2.mass);
        b1.pos += n * (ev.penetration * w1);
        b2.pos -= n * (ev.penetration * w2);
        if (mu > 0.0) {
          Vec2T<S> t = n.perp();
          S slide = t.dot((b1.pos - prev_positions[ev.a]) - (b2.pos - prev_positions[ev.b]));
          S corr = clamp(slide, S(0.0) - mu * ev.penetration, mu * ev.penetration);
          b1.pos -= t * (corr * w1);
          b2.pos += t * (corr * w2);
        }
      }
    }
  }

  for (int i : touched) {
    tentative[i].vel = (tentative[i].pos - prev_positions[i]) * (1.0 / dt);
  }

  // Restitution: replace the normal component with -e times the
  // pre-projection approach velocity, momentum split for ball-ball pairs.
  for (const ContactEventT<S>& ev : events) {
    if (ev.kind == ContactKind::kBallPlane) {
      BallStateT<S>& b = tentative[ev.a];
      const Vec2T<S>& n = ev.normal;
      S approach = n.dot(v_pre[ev.a]);
      if (!(value_of(approach) < 0.0)) continue;
      S w = n.dot(b.vel);
      b.vel += n * ((-e) * approach - w);
    } else {
      BallStateT<S>& b1 = tentative[ev.a];
      BallStateT<S>& b2 = tentative[ev.b];
      Vec2T<S> d = b1.pos - b2.pos;
      S dist = d.norm();
      Vec2T<S> n{d.x / dist, d.y / dist};
      S approach = n.dot(v_pre[ev.a] - v_pre[ev.b]);
      if (!(value_of(approach) < 0.0)) continue;
      S w = n.dot(b1.vel - b2.vel);
      S delta = (-e) * approach - w;
      double w1 = b2.mass / (b1.mass + b2.mass);
      double w2 = b1.mass / (b1.mass + b2.mass);
      b1.vel += n * (delta * w1);
      b2.vel -= n * (delta * w2);
    }
  }
}

}  // namespace diffcontact
