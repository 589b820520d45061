#pragma once

// Shared tokenizer for the index, type and term grammars.

#include <string>
#include <string_view>
#include <vector>

#include "dlpcf/common.hpp"

namespace dlpcf::detail {

enum class TokKind { Ident, Number, Sym, End };

struct Token {
  TokKind kind = TokKind::End;
  std::string text;
  Nat number = 0;
  SourcePos pos;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src);

  const Token& peek(std::size_t ahead = 0) const;
  Token next();

  bool at_sym(std::string_view s) const;
  bool at_ident(std::string_view s) const;
  bool at_end() const { return peek().kind == TokKind::End; }

  bool accept_sym(std::string_view s);
  bool accept_ident(std::string_view s);
  void expect_sym(std::string_view s);
  void expect_ident(std::string_view s);
  std::string expect_name();
  void expect_end();

  [[noreturn]] void fail(const std::string& msg) const;

  std::size_t mark() const { return cursor_; }
  void reset(std::size_t m) { cursor_ = m; }

 private:
  std::vector<Token> tokens_;
  std::size_t cursor_ = 0;
};

}  // namespace dlpcf::detail
