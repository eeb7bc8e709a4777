#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace diffcontact {

/// Thrown when a primitive is fed inputs outside its admitted domain
/// (division by zero, sqrt of a negative, non-finite local partials).
class TapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OpKind : std::uint8_t {
  kInput,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kSqrt,
  kMin,
  kMax,
  kAbs,
};

const char* op_name(OpKind k);

/// Append-only record of scalar operations. Nodes reference only earlier
/// nodes, so a single reverse sweep yields all adjoints. A Tape is owned by
/// one thread at a time; distinct tapes are independent.
class Tape {
 public:
  struct Node {
    std::int32_t parent[2];  // -1 marks "no parent" (input or constant slot)
    double partial[2];
    OpKind kind;
  };

  explicit Tape(std::size_t reserve_hint = 0) { nodes_.reserve(reserve_hint); }

  int record(OpKind kind, int parent0, double partial0, int parent1, double partial1) {
    if (!std::isfinite(partial0) || !std::isfinite(partial1)) {
      throw TapeError(std::string(op_name(kind)) + ": non-finite local partial");
    }
    nodes_.push_back(Node{{parent0, parent1}, {partial0, partial1}, kind});
    return static_cast<int>(nodes_.size()) - 1;
  }

  int record_input() {
    nodes_.push_back(Node{{-1, -1}, {0.0, 0.0}, OpKind::kInput});
    return static_cast<int>(nodes_.size()) - 1;
  }

  void reserve(std::size_t n) { nodes_.reserve(n); }

  /// Drops all nodes but keeps the allocation for the next recording.
  void clear() { nodes_.clear(); }

  std::size_t size() const { return nodes_.size(); }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

 private:
  std::vector<Node> nodes_;
};

/// Scalar tracked on a Tape. A Var holding no tape reference is a constant:
/// it participates in arithmetic without growing any tape.
class Var {
 public:
  Var() = default;
  /*implicit*/ Var(double value) : value_(value) {}

  static Var input(Tape& tape, double value) {
    Var v(value);
    v.tape_ = &tape;
    v.node_ = tape.record_input();
    return v;
  }

  double value() const { return value_; }
  bool tracked() const { return tape_ != nullptr; }
  int node() const { return node_; }
  Tape* tape() const { return tape_; }

 private:
  friend Var make_tracked(Tape& tape, double value, int node);

  double value_ = 0.0;
  std::int32_t node_ = -1;
  Tape* tape_ = nullptr;
};

inline Var make_tracked(Tape& tape, double value, int node) {
  Var v(value);
  v.tape_ = &tape;
  v.node_ = node;
  return v;
}

inline double value_of(double x) { return x; }
inline double value_of(const Var& v) { return v.value(); }

namespace detail {

inline Tape* common_tape(const Var& a, const Var& b) {
  Tape* ta = a.tape();
  Tape* tb = b.tape();
  if (ta && tb && ta != tb) {
    throw TapeError("operands belong to different tapes");
  }
  return ta ? ta : tb;
}

inline Var unary(OpKind kind, const Var& a, double value, double da) {
  Tape* t = a.tape();
  if (!t) return Var(value);
  int id = t->record(kind, a.node(), da, -1, 0.0);
  return make_tracked(*t, value, id);
}

inline Var binary(OpKind kind, const Var& a, const Var& b, double value, double da, double db) {
  Tape* t = common_tape(a, b);
  if (!t) return Var(value);
  int id = t->record(kind, a.tracked() ? a.node() : -1, da, b.tracked() ? b.node() : -1, db);
  return make_tracked(*t, value, id);
}

}  // namespace detail

inline Var operator+(const Var& a, const Var& b) {
  return detail::binary(OpKind::kAdd, a, b, a.value() + b.value(), 1.0, 1.0);
}
inline Var operator-(const Var& a, const Var& b) {
  return detail::binary(OpKind::kSub, a, b, a.value() - b.value(), 1.0, -1.0);
}
inline Var operator*(const Var& a, const Var& b) {
  return detail::binary(OpKind::kMul, a, b, a.value() * b.value(), b.value(), a.value());
}
inline Var operator/(const Var& a, const Var& b) {
  if (b.value() == 0.0) throw TapeError("div: division by zero");
  double inv = 1.0 / b.value();
  return detail::binary(OpKind::kDiv, a, b, a.value() * inv, inv, -a.value() * inv * inv);
}
inline Var operator-(const Var& a) { return detail::unary(OpKind::kNeg, a, -a.value(), -1.0); }

inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }
inline Var& operator/=(Var& a, const Var& b) { return a = a / b; }

inline bool operator<(const Var& a, const Var& b) { return a.value() < b.value(); }
inline bool operator<=(const Var& a, const Var& b) { return a.value() <= b.value(); }
inline bool operator>(const Var& a, const Var& b) { return a.value() > b.value(); }
inline bool operator>=(const Var& a, const Var& b) { return a.value() >= b.value(); }

inline Var sqrt(const Var& a) {
  if (a.value() < 0.0) throw TapeError("sqrt: negative argument");
  double root = std::sqrt(a.value());
  return detail::unary(OpKind::kSqrt, a, root, 0.5 / root);
}

// Ties on min/max/abs take the second-argument subgradient (for abs, the
// negated branch), so gating expressions written max(0, x) keep the gradient
// attached to x when x sits exactly on the boundary.
inline Var min(const Var& a, const Var& b) {
  bool first = a.value() < b.value();
  return detail::binary(OpKind::kMin, a, b, first ? a.value() : b.value(), first ? 1.0 : 0.0,
                        first ? 0.0 : 1.0);
}
inline Var max(const Var& a, const Var& b) {
  bool first = a.value() > b.value();
  return detail::binary(OpKind::kMax, a, b, first ? a.value() : b.value(), first ? 1.0 : 0.0,
                        first ? 0.0 : 1.0);
}
inline Var abs(const Var& a) {
  bool positive = a.value() > 0.0;
  return detail::unary(OpKind::kAbs, a, positive ? a.value() : -a.value(), positive ? 1.0 : -1.0);
}
inline Var clamp(const Var& x, const Var& lo, const Var& hi) { return min(max(x, lo), hi); }

/// Branch gate: the result is exactly the taken operand, so the gradient of
/// the untaken branch is zero and the tape does not grow.
inline Var select(bool take_first, const Var& a, const Var& b) { return take_first ? a : b; }

inline double select(bool take_first, double a, double b) { return take_first ? a : b; }
inline double clamp(double x, double lo, double hi) { return x < lo ? lo : (x > hi ? hi : x); }

/// Adjoints of every tape node after a backward sweep; the seeded output node
/// has adjoint 1.
class GradVector {
 public:
  explicit GradVector(std::vector<double> adjoints) : adjoints_(std::move(adjoints)) {}

  double at_node(int id) const {
    return id >= 0 && static_cast<std::size_t>(id) < adjoints_.size()
               ? adjoints_[static_cast<std::size_t>(id)]
               : 0.0;
  }
  /// Gradient of the seeded output w.r.t. `v`; zero for constants.
  double at(const Var& v) const { return v.tracked() ? at_node(v.node()) : 0.0; }

  std::size_t size() const { return adjoints_.size(); }

 private:
  std::vector<double> adjoints_;
};

/// Single reverse sweep over the tape from `output`.
inline GradVector backward(const Tape& tape, const Var& output) {
  if (!output.tracked() || output.tape() != &tape) {
    throw TapeError("backward: output does not belong to this tape");
  }
  std::vector<double> adj(tape.size(), 0.0);
  adj[static_cast<std::size_t>(output.node())] = 1.0;
  for (int id = static_cast<int>(tape.size()) - 1; id >= 0; --id) {
    double a = adj[static_cast<std::size_t>(id)];
    if (a == 0.0) continue;
    const Tape::Node& n = tape.node(id);
    if (n.parent[0] >= 0) adj[static_cast<std::size_t>(n.parent[0])] += n.partial[0] * a;
    if (n.parent[1] >= 0) adj[static_cast<std::size_t>(n.parent[1])] += n.partial[1] * a;
  }
  return GradVector(std::move(adj));
}

}  // namespace diffcontact
