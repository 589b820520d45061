#pragma once

#include <set>
#include <string>
#include <variant>
#include <vector>

#include "dlpcf/index.hpp"

namespace dlpcf {

// lhs <= rhs
struct Constraint {
  Index lhs;
  Index rhs;

  friend bool operator==(const Constraint& a, const Constraint& b) {
    return a.lhs == b.lhs && a.rhs == b.rhs;
  }
};

using ConstraintSet = std::vector<Constraint>;
using VarSet = std::set<std::string>;

std::string to_string(const Constraint& c);

inline constexpr Nat kDefaultBound = 32;

struct EntailConfig {
  Nat bound = kDefaultBound;
  Nat fuel = kDefaultFuel;
};

// Default bound, overridden by the DLPCF_BOUND environment variable.
EntailConfig default_entail_config();

struct Valid {
  Nat bound = 0;
  // True when no variable had to be enumerated, so the verdict is not
  // relative to the bound.
  bool exact = false;
};

struct Invalid {
  Assignment counterexample;
};

struct Unknown {
  std::string reason;
};

using EntailmentVerdict = std::variant<Valid, Invalid, Unknown>;

inline bool is_valid(const EntailmentVerdict& v) { return std::holds_alternative<Valid>(v); }
inline bool is_invalid(const EntailmentVerdict& v) { return std::holds_alternative<Invalid>(v); }
inline bool is_unknown(const EntailmentVerdict& v) { return std::holds_alternative<Unknown>(v); }

std::string to_string(const EntailmentVerdict& v);

// Decides phi; Phi |= goal by enumerating assignments phi -> {0..bound}.
// Throws IndexError when a free variable of Phi or goal is not in phi.
EntailmentVerdict entails(const VarSet& phi, const ConstraintSet& hyps, const Constraint& goal,
                          const EquationalProgram& ep, const EntailConfig& config);

// phi; Phi |= I defined, i.e. I <= I.
EntailmentVerdict defined(const VarSet& phi, const ConstraintSet& hyps, const Index& i,
                          const EquationalProgram& ep, const EntailConfig& config);

}  // namespace dlpcf
