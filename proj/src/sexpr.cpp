#include "dlpcf/sexpr.hpp"

#include <cctype>

namespace dlpcf {

std::string SExpr::head() const {
  if (is_list() && !items.empty() && items[0].is_atom()) return items[0].text;
  return "";
}

namespace {

class Reader {
 public:
  explicit Reader(std::string_view s) : src_(s) {}

  std::vector<SExpr> all() {
    std::vector<SExpr> out;
    while (true) {
      skip();
      if (i_ >= src_.size()) return out;
      out.push_back(one());
    }
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void advance() {
    if (src_[i_] == '\n') {
      ++pos_.line;
      pos_.column = 1;
    } else {
      ++pos_.column;
    }
    ++i_;
  }

  void skip() {
    while (i_ < src_.size()) {
      char c = src_[i_];
      if (c == ';') {
        while (i_ < src_.size() && src_[i_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  SExpr one() {
    skip();
    if (i_ >= src_.size()) fail("unexpected end of input");
    SourcePos at = pos_;
    char c = src_[i_];
    if (c == '(') {
      advance();
      SExpr e = SExpr::list({});
      e.pos = at;
      while (true) {
        skip();
        if (i_ >= src_.size()) throw ParseError("unclosed '('", at);
        if (src_[i_] == ')') {
          advance();
          return e;
        }
        e.items.push_back(one());
      }
    }
    if (c == ')') fail("unexpected ')'");
    if (c == '"') {
      advance();
      std::string s;
      while (true) {
        if (i_ >= src_.size()) throw ParseError("unterminated string", at);
        char d = src_[i_];
        if (d == '"') {
          advance();
          break;
        }
        if (d == '\\' && i_ + 1 < src_.size()) {
          advance();
          d = src_[i_];
          if (d == 'n') d = '\n';
        }
        s += d;
        advance();
      }
      SExpr e = SExpr::string(std::move(s));
      e.pos = at;
      return e;
    }
    std::string s;
    while (i_ < src_.size()) {
      char d = src_[i_];
      if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == '"' ||
          d == ';')
        break;
      s += d;
      advance();
    }
    SExpr e = SExpr::atom(std::move(s));
    e.pos = at;
    return e;
  }

  std::string_view src_;
  std::size_t i_ = 0;
  SourcePos pos_;
};

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<SExpr> read_sexprs(std::string_view text) { return Reader(text).all(); }

std::string to_string(const SExpr& e) {
  switch (e.kind) {
    case SExpr::Kind::Atom:
      return e.text;
    case SExpr::Kind::String:
      return quote(e.text);
    case SExpr::Kind::List: {
      std::string out = "(";
      for (std::size_t k = 0; k < e.items.size(); ++k) {
        if (k) out += ' ';
        out += to_string(e.items[k]);
      }
      return out + ")";
    }
  }
  return "";
}

}  // namespace dlpcf
