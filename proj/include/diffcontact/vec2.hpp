#pragma once

#include <cmath>

#include "diffcontact/autodiff.hpp"

namespace diffcontact {

/// 2D vector over a scalar type S (double for plain simulation, Var for the
/// differentiable path).
template <class S>
struct Vec2T {
  S x{};
  S y{};

  Vec2T() = default;
  Vec2T(S x_, S y_) : x(std::move(x_)), y(std::move(y_)) {}

  Vec2T operator+(const Vec2T& o) const { return {x + o.x, y + o.y}; }
  Vec2T operator-(const Vec2T& o) const { return {x - o.x, y - o.y}; }
  Vec2T operator-() const { return {-x, -y}; }
  Vec2T& operator+=(const Vec2T& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Vec2T& operator-=(const Vec2T& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }

  S dot(const Vec2T& o) const { return x * o.x + y * o.y; }
  S norm_sq() const { return x * x + y * y; }
  S norm() const {
    using std::sqrt;
    return sqrt(x * x + y * y);
  }
  /// Perpendicular (rotation by +90 degrees); used as the contact tangent.
  Vec2T perp() const { return {-y, x}; }
};

template <class S>
Vec2T<S> operator*(const S& s, const Vec2T<S>& v) {
  return {s * v.x, s * v.y};
}
template <class S>
Vec2T<S> operator*(const Vec2T<S>& v, const S& s) {
  return {v.x * s, v.y * s};
}
inline Vec2T<Var> operator*(double s, const Vec2T<Var>& v) { return {Var(s) * v.x, Var(s) * v.y}; }
inline Vec2T<Var> operator*(const Vec2T<Var>& v, double s) { return {v.x * Var(s), v.y * Var(s)}; }

using Vec2 = Vec2T<double>;

template <class S>
Vec2 values_of(const Vec2T<S>& v) {
  return {value_of(v.x), value_of(v.y)};
}

}  // namespace diffcontact
