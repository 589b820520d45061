#include "lexer.hpp"

#include <array>
#include <cctype>
#include <limits>

namespace dlpcf::detail {

namespace {

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

constexpr std::array<std::string_view, 6> kLongSyms = {"-.", "-o", "=>", "->", "<=", ">="};
constexpr std::string_view kShortSyms = "()[],;<>+*\\.=";

}  // namespace

Lexer::Lexer(std::string_view src) {
  SourcePos pos;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++pos.line;
        pos.column = 1;
      } else {
        ++pos.column;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token tok;
    tok.pos = pos;
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      tok.kind = TokKind::Ident;
      tok.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      Nat value = 0;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
        Nat digit = static_cast<Nat>(src[j] - '0');
        if (value > (std::numeric_limits<Nat>::max() - digit) / 10) {
          throw ParseError("numeral too large", pos);
        }
        value = value * 10 + digit;
        ++j;
      }
      tok.kind = TokKind::Number;
      tok.number = value;
      tok.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else {
      bool matched = false;
      for (auto s : kLongSyms) {
        if (src.substr(i, s.size()) == s) {
          tok.kind = TokKind::Sym;
          tok.text = std::string(s);
          advance(s.size());
          matched = true;
          break;
        }
      }
      if (!matched) {
        if (kShortSyms.find(c) == std::string_view::npos) {
          throw ParseError(std::string("unexpected character '") + c + "'", pos);
        }
        tok.kind = TokKind::Sym;
        tok.text = std::string(1, c);
        advance(1);
      }
    }
    tokens_.push_back(std::move(tok));
  }
  Token end;
  end.kind = TokKind::End;
  end.pos = pos;
  tokens_.push_back(end);
}

const Token& Lexer::peek(std::size_t ahead) const {
  std::size_t k = cursor_ + ahead;
  if (k >= tokens_.size()) return tokens_.back();
  return tokens_[k];
}

Token Lexer::next() {
  Token t = peek();
  if (cursor_ + 1 < tokens_.size()) ++cursor_;
  return t;
}

bool Lexer::at_sym(std::string_view s) const {
  const Token& t = peek();
  return t.kind == TokKind::Sym && t.text == s;
}

bool Lexer::at_ident(std::string_view s) const {
  const Token& t = peek();
  return t.kind == TokKind::Ident && t.text == s;
}

bool Lexer::accept_sym(std::string_view s) {
  if (!at_sym(s)) return false;
  next();
  return true;
}

bool Lexer::accept_ident(std::string_view s) {
  if (!at_ident(s)) return false;
  next();
  return true;
}

void Lexer::expect_sym(std::string_view s) {
  if (!accept_sym(s)) fail("expected '" + std::string(s) + "'");
}

void Lexer::expect_ident(std::string_view s) {
  if (!accept_ident(s)) fail("expected '" + std::string(s) + "'");
}

std::string Lexer::expect_name() {
  if (peek().kind != TokKind::Ident) fail("expected a name");
  return next().text;
}

void Lexer::expect_end() {
  if (!at_end()) fail("unexpected trailing input");
}

void Lexer::fail(const std::string& msg) const {
  const Token& t = peek();
  std::string found = t.kind == TokKind::End ? "end of input" : "'" + t.text + "'";
  throw ParseError(msg + ", found " + found, t.pos);
}

}  // namespace dlpcf::detail
