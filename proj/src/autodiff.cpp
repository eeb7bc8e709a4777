#include "diffcontact/autodiff.hpp"

namespace diffcontact {

const char* op_name(OpKind k) {
  switch (k) {
    case OpKind::kInput: return "input";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kDiv: return "div";
    case OpKind::kNeg: return "neg";
    case OpKind::kSqrt: return "sqrt";
    case OpKind::kMin: return "min";
    case OpKind::kMax: return "max";
    case OpKind::kAbs: return "abs";
  }
  return "?";
}

}  // namespace diffcontact
