#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dlpcf/common.hpp"

namespace dlpcf {

struct SExpr {
  enum class Kind { Atom, String, List };

  Kind kind = Kind::List;
  std::string text;
  std::vector<SExpr> items;
  SourcePos pos;

  bool is_atom() const { return kind == Kind::Atom; }
  bool is_string() const { return kind == Kind::String; }
  bool is_list() const { return kind == Kind::List; }
  bool is_atom(std::string_view s) const { return is_atom() && text == s; }

  // Head symbol of a list, or "" when there is none.
  std::string head() const;

  static SExpr atom(std::string s) { return {Kind::Atom, std::move(s), {}, {}}; }
  static SExpr string(std::string s) { return {Kind::String, std::move(s), {}, {}}; }
  static SExpr list(std::vector<SExpr> xs) { return {Kind::List, "", std::move(xs), {}}; }
};

// Reads every top-level form. ';' starts a comment; strings use "..." with
// backslash escapes. Throws ParseError.
std::vector<SExpr> read_sexprs(std::string_view text);

std::string to_string(const SExpr& e);

}  // namespace dlpcf
