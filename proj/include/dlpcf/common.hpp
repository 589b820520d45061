#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dlpcf {

using Nat = std::uint64_t;

struct SourcePos {
  int line = 1;
  int column = 1;

  std::string str() const {
    return std::to_string(line) + ":" + std::to_string(column);
  }
};

// Malformed concrete syntax. Carries the position of the offending token.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, SourcePos pos)
      : std::runtime_error(pos.str() + ": " + msg), pos_(pos) {}

  SourcePos pos() const { return pos_; }

 private:
  SourcePos pos_;
};

// A malformed index term or equational program (unknown symbol, arity
// mismatch, unbound variable). Distinct from semantic undefinedness, which
// is reported as an absent value.
class IndexError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ill-typed PCF term (unification clash, occurs check, unbound variable).
class TypeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A derivation script that cannot be turned into a derivation tree.
class ScriptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dlpcf
