#include "atomkit/atoms.hpp"

#include <sstream>

namespace atomkit {

std::string AtomTag::label() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::signed_basis:
      os << (sign >= 0 ? "+e" : "-e") << index;
      break;
    case Kind::rank_one:
      os << "uv" << (index >= 0 ? std::to_string(index) : "");
      break;
    case Kind::sym_rank_one:
      os << "uu" << (index >= 0 ? std::to_string(index) : "");
      break;
    case Kind::group:
      os << "g" << index;
      break;
    case Kind::tv_column:
      os << (sign >= 0 ? "+b" : "-b") << index;
      break;
    case Kind::recession:
      os << "rec";
      break;
    case Kind::subspace:
      os << "sub" << (index >= 0 ? std::to_string(index) : "");
      break;
    case Kind::composite: {
      os << "(";
      for (size_t i = 0; i < children.size(); ++i) {
        if (i) os << "+";
        os << children[i].tag.label();
      }
      os << ")";
      break;
    }
    case Kind::generic:
      os << "atom";
      break;
  }
  return os.str();
}

Atom make_signed_basis_atom(Shape shape, int index, int sign) {
  Atom a;
  a.element = Dense(shape);
  a.element[index] = sign >= 0 ? 1.0 : -1.0;
  a.tag.kind = AtomTag::Kind::signed_basis;
  a.tag.index = index;
  a.tag.sign = sign >= 0 ? 1 : -1;
  return a;
}

Atom make_zero_atom(Shape shape) {
  Atom a;
  a.element = Dense(shape);
  a.tag.kind = AtomTag::Kind::generic;
  a.tag.index = -1;
  return a;
}

Dense AtomicDecomposition::synthesize(Shape shape) const {
  Dense x(shape);
  for (const auto& t : terms) axpy(t.coeff, t.atom.element, x);
  if (recession_part) axpy(recession_part->coeff, recession_part->atom.element, x);
  return x;
}

double AtomicDecomposition::coefficient_sum() const {
  double s = 0.0;
  for (const auto& t : terms) s += t.coeff;
  return s;
}

}  // namespace atomkit
