#include "dlpcf/pcf.hpp"

#include <functional>

#include "lexer.hpp"

namespace dlpcf {

Term Term::make(TermNode n) { return Term(std::make_shared<const TermNode>(std::move(n))); }

Term Term::var(std::string name) { return make({TermKind::Var, 0, std::move(name), {}}); }
Term Term::num(Nat n) { return make({TermKind::Num, n, {}, {}}); }
Term Term::lam(std::string x, Term body) {
  return make({TermKind::Lam, 0, std::move(x), {std::move(body)}});
}
Term Term::fix(std::string x, Term body) {
  return make({TermKind::Fix, 0, std::move(x), {std::move(body)}});
}
Term Term::app(Term f, Term a) { return make({TermKind::App, 0, {}, {std::move(f), std::move(a)}}); }
Term Term::succ(Term t) { return make({TermKind::Succ, 0, {}, {std::move(t)}}); }
Term Term::pred(Term t) { return make({TermKind::Pred, 0, {}, {std::move(t)}}); }
Term Term::ifz(Term t, Term zero, Term succ) {
  return make({TermKind::Ifz, 0, {}, {std::move(t), std::move(zero), std::move(succ)}});
}

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind() || a.numeral() != b.numeral() || a.name() != b.name()) return false;
  return a.kids() == b.kids();
}

Term apply(Term f, const std::vector<Term>& args) {
  for (const auto& a : args) f = Term::app(std::move(f), a);
  return f;
}

bool is_term_keyword(std::string_view name) {
  return name == "fix" || name == "ifz" || name == "then" || name == "else" || name == "s" ||
         name == "p";
}

// ---------------------------------------------------------------------------
// Printing

namespace {

enum class Ctx { Top, AppFun, AppArg };

void print(const Term& t, Ctx ctx, std::string& out) {
  switch (t.kind()) {
    case TermKind::Var:
      out += t.name();
      return;
    case TermKind::Num:
      out += std::to_string(t.numeral());
      return;
    case TermKind::Succ:
    case TermKind::Pred:
      out += t.kind() == TermKind::Succ ? "s(" : "p(";
      print(t.kid(0), Ctx::Top, out);
      out += ')';
      return;
    case TermKind::App: {
      bool paren = ctx == Ctx::AppArg;
      if (paren) out += '(';
      print(t.kid(0), Ctx::AppFun, out);
      out += ' ';
      print(t.kid(1), Ctx::AppArg, out);
      if (paren) out += ')';
      return;
    }
    case TermKind::Lam:
    case TermKind::Fix:
    case TermKind::Ifz: {
      bool paren = ctx != Ctx::Top;
      if (paren) out += '(';
      if (t.kind() == TermKind::Lam) {
        out += "\\" + t.name() + ". ";
        print(t.body(), Ctx::Top, out);
      } else if (t.kind() == TermKind::Fix) {
        out += "fix " + t.name() + ". ";
        print(t.body(), Ctx::Top, out);
      } else {
        out += "ifz ";
        print(t.kid(0), Ctx::Top, out);
        out += " then ";
        print(t.kid(1), Ctx::Top, out);
        out += " else ";
        print(t.kid(2), Ctx::Top, out);
      }
      if (paren) out += ')';
      return;
    }
  }
}

}  // namespace

std::string to_string(const Term& t) {
  std::string out;
  print(t, Ctx::Top, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

using detail::Lexer;
using detail::TokKind;

Term parse_top(Lexer& lx);

bool starts_atom(const Lexer& lx) {
  const auto& t = lx.peek();
  if (t.kind == TokKind::Number) return true;
  if (t.kind == TokKind::Sym) return t.text == "(";
  if (t.kind == TokKind::Ident) {
    return t.text == "s" || t.text == "p" || !is_term_keyword(t.text);
  }
  return false;
}

std::string binder_name(Lexer& lx) {
  if (lx.peek().kind != TokKind::Ident || is_term_keyword(lx.peek().text)) {
    lx.fail("expected a variable name");
  }
  return lx.next().text;
}

Term parse_atom(Lexer& lx) {
  const auto& t = lx.peek();
  if (t.kind == TokKind::Number) return Term::num(lx.next().number);
  if (lx.accept_sym("(")) {
    Term inner = parse_top(lx);
    lx.expect_sym(")");
    return inner;
  }
  if (lx.accept_ident("s")) return Term::succ(parse_atom(lx));
  if (lx.accept_ident("p")) return Term::pred(parse_atom(lx));
  return Term::var(binder_name(lx));
}

Term parse_top(Lexer& lx) {
  if (lx.accept_sym("\\")) {
    std::string x = binder_name(lx);
    lx.expect_sym(".");
    return Term::lam(x, parse_top(lx));
  }
  if (lx.accept_ident("fix")) {
    std::string x = binder_name(lx);
    lx.expect_sym(".");
    return Term::fix(x, parse_top(lx));
  }
  if (lx.accept_ident("ifz")) {
    Term c = parse_top(lx);
    lx.expect_ident("then");
    Term z = parse_top(lx);
    lx.expect_ident("else");
    Term s = parse_top(lx);
    return Term::ifz(c, z, s);
  }
  if (!starts_atom(lx)) lx.fail("expected a term");
  Term t = parse_atom(lx);
  while (true) {
    if (starts_atom(lx)) {
      t = Term::app(t, parse_atom(lx));
    } else if (lx.at_sym("\\") || lx.at_ident("fix") || lx.at_ident("ifz")) {
      // A trailing abstraction or conditional is the last argument.
      t = Term::app(t, parse_top(lx));
    } else {
      return t;
    }
  }
}

}  // namespace

Term parse_term(std::string_view text) {
  Lexer lx(text);
  Term t = parse_top(lx);
  lx.expect_end();
  return t;
}

// ---------------------------------------------------------------------------
// Variables and substitution

namespace {

void collect(const Term& t, std::set<std::string>& bound_stack_free, std::multiset<std::string>& bound) {
  switch (t.kind()) {
    case TermKind::Var:
      if (!bound.count(t.name())) bound_stack_free.insert(t.name());
      return;
    case TermKind::Lam:
    case TermKind::Fix: {
      auto it = bound.insert(t.name());
      collect(t.body(), bound_stack_free, bound);
      bound.erase(it);
      return;
    }
    default:
      for (const auto& k : t.kids()) collect(k, bound_stack_free, bound);
  }
}

bool occurs_free(const Term& t, const std::string& x) {
  switch (t.kind()) {
    case TermKind::Var:
      return t.name() == x;
    case TermKind::Num:
      return false;
    case TermKind::Lam:
    case TermKind::Fix:
      return t.name() != x && occurs_free(t.body(), x);
    default:
      for (const auto& k : t.kids()) {
        if (occurs_free(k, x)) return true;
      }
      return false;
  }
}

Term rebuild(const Term& t, std::vector<Term> kids) {
  switch (t.kind()) {
    case TermKind::App:
      return Term::app(kids[0], kids[1]);
    case TermKind::Succ:
      return Term::succ(kids[0]);
    case TermKind::Pred:
      return Term::pred(kids[0]);
    case TermKind::Ifz:
      return Term::ifz(kids[0], kids[1], kids[2]);
    case TermKind::Lam:
      return Term::lam(t.name(), kids[0]);
    case TermKind::Fix:
      return Term::fix(t.name(), kids[0]);
    default:
      return t;
  }
}

Term subst_rec(const Term& t, const std::string& x, const Term& v, const std::set<std::string>& fv) {
  switch (t.kind()) {
    case TermKind::Var:
      return t.name() == x ? v : t;
    case TermKind::Num:
      return t;
    case TermKind::Lam:
    case TermKind::Fix: {
      if (t.name() == x) return t;
      std::string y = t.name();
      Term body = t.body();
      if (fv.count(y)) {
        if (!occurs_free(body, x)) return t;
        std::set<std::string> avoid = fv;
        for (const auto& n : free_vars(body)) avoid.insert(n);
        avoid.insert(x);
        while (avoid.count(y)) y += '\'';
        body = subst_rec(body, t.name(), Term::var(y), {y});
      }
      Term out = subst_rec(body, x, v, fv);
      if (out.node() == t.body().node()) return t;
      return t.kind() == TermKind::Lam ? Term::lam(y, out) : Term::fix(y, out);
    }
    default: {
      std::vector<Term> kids;
      bool changed = false;
      for (const auto& k : t.kids()) {
        kids.push_back(subst_rec(k, x, v, fv));
        changed = changed || kids.back().node() != k.node();
      }
      return changed ? rebuild(t, std::move(kids)) : t;
    }
  }
}

}  // namespace

std::set<std::string> free_vars(const Term& t) {
  std::set<std::string> out;
  std::multiset<std::string> bound;
  collect(t, out, bound);
  return out;
}

bool is_closed(const Term& t) { return free_vars(t).empty(); }

Term subst_term(const Term& t, const std::string& x, const Term& v) {
  return subst_rec(t, x, v, free_vars(v));
}

// ---------------------------------------------------------------------------
// Sizes

Nat msize(const Term& t) {
  switch (t.kind()) {
    case TermKind::Num:
    case TermKind::Lam:
    case TermKind::Fix:
      return 0;
    case TermKind::Var:
      return 2;
    default: {
      Nat total = 2;
      for (const auto& k : t.kids()) total += msize(k);
      return total;
    }
  }
}

Nat tsize(const Term& t) {
  switch (t.kind()) {
    case TermKind::Num:
    case TermKind::Var:
      return 2;
    default: {
      Nat total = 2;
      for (const auto& k : t.kids()) total += tsize(k);
      return total;
    }
  }
}

// ---------------------------------------------------------------------------
// Call-by-value reduction

std::optional<Term> step_cbv(const Term& t) {
  switch (t.kind()) {
    case TermKind::Var:
    case TermKind::Num:
    case TermKind::Lam:
    case TermKind::Fix:
      return std::nullopt;
    case TermKind::App: {
      const Term& f = t.kid(0);
      const Term& a = t.kid(1);
      if (!f.is_value()) {
        auto f2 = step_cbv(f);
        if (!f2) return std::nullopt;
        return Term::app(*f2, a);
      }
      if (!a.is_value()) {
        auto a2 = step_cbv(a);
        if (!a2) return std::nullopt;
        return Term::app(f, *a2);
      }
      if (f.kind() == TermKind::Lam) return subst_term(f.body(), f.name(), a);
      if (f.kind() == TermKind::Fix) return Term::app(subst_term(f.body(), f.name(), f), a);
      return std::nullopt;
    }
    case TermKind::Succ:
    case TermKind::Pred: {
      const Term& u = t.kid(0);
      if (!u.is_value()) {
        auto u2 = step_cbv(u);
        if (!u2) return std::nullopt;
        return t.kind() == TermKind::Succ ? Term::succ(*u2) : Term::pred(*u2);
      }
      if (u.kind() != TermKind::Num) return std::nullopt;
      if (t.kind() == TermKind::Succ) return Term::num(u.numeral() + 1);
      return Term::num(u.numeral() == 0 ? 0 : u.numeral() - 1);
    }
    case TermKind::Ifz: {
      const Term& c = t.kid(0);
      if (!c.is_value()) {
        auto c2 = step_cbv(c);
        if (!c2) return std::nullopt;
        return Term::ifz(*c2, t.kid(1), t.kid(2));
      }
      if (c.kind() != TermKind::Num) return std::nullopt;
      return c.numeral() == 0 ? t.kid(1) : t.kid(2);
    }
  }
  return std::nullopt;
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Value:
      return "value";
    case RunStatus::Stuck:
      return "stuck";
    case RunStatus::Budget:
      return "diverged (budget)";
  }
  return "?";
}

CbvResult eval_cbv(const Term& t, Nat max_steps) {
  CbvResult r;
  r.last = t;
  while (true) {
    if (r.last.is_value()) {
      r.value = r.last;
      r.status = RunStatus::Value;
      return r;
    }
    if (r.steps >= max_steps) {
      r.status = RunStatus::Budget;
      return r;
    }
    auto next = step_cbv(r.last);
    if (!next) {
      r.status = RunStatus::Stuck;
      return r;
    }
    r.last = std::move(*next);
    ++r.steps;
  }
}

// ---------------------------------------------------------------------------
// Simple types

SimpleType SimpleType::nat() {
  static const SimpleType n(std::make_shared<const Node>(Node{Kind::Nat, 0, {}}));
  return n;
}

SimpleType SimpleType::arrow(SimpleType dom, SimpleType cod) {
  return SimpleType(
      std::make_shared<const Node>(Node{Kind::Arrow, 0, {std::move(dom), std::move(cod)}}));
}

SimpleType SimpleType::var(int id) {
  return SimpleType(std::make_shared<const Node>(Node{Kind::Var, id, {}}));
}

bool operator==(const SimpleType& a, const SimpleType& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case SimpleType::Kind::Nat:
      return true;
    case SimpleType::Kind::Var:
      return a.var_id() == b.var_id();
    case SimpleType::Kind::Arrow:
      return a.dom() == b.dom() && a.cod() == b.cod();
  }
  return false;
}

namespace {

void print_type(const SimpleType& t, bool left, std::map<int, std::string>& names,
                std::string& out) {
  switch (t.kind()) {
    case SimpleType::Kind::Nat:
      out += "Nat";
      return;
    case SimpleType::Kind::Var: {
      auto it = names.find(t.var_id());
      if (it == names.end()) {
        std::size_t k = names.size();
        std::string n = "'";
        n += static_cast<char>('a' + k % 26);
        if (k >= 26) n += std::to_string(k / 26);
        it = names.emplace(t.var_id(), n).first;
      }
      out += it->second;
      return;
    }
    case SimpleType::Kind::Arrow:
      if (left) out += '(';
      print_type(t.dom(), true, names, out);
      out += " => ";
      print_type(t.cod(), false, names, out);
      if (left) out += ')';
      return;
  }
}

class Unifier {
 public:
  SimpleType fresh() {
    bindings_.emplace_back();
    return SimpleType::var(static_cast<int>(bindings_.size() - 1));
  }

  SimpleType resolve(const SimpleType& t) {
    if (t.kind() == SimpleType::Kind::Var && bindings_[t.var_id()]) {
      return resolve(*bindings_[t.var_id()]);
    }
    return t;
  }

  SimpleType zonk(const SimpleType& t) {
    SimpleType r = resolve(t);
    if (r.kind() == SimpleType::Kind::Arrow) return SimpleType::arrow(zonk(r.dom()), zonk(r.cod()));
    return r;
  }

  void unify(const SimpleType& a0, const SimpleType& b0, const Term& at) {
    SimpleType a = resolve(a0);
    SimpleType b = resolve(b0);
    if (a.kind() == SimpleType::Kind::Var) {
      if (b.kind() == SimpleType::Kind::Var && b.var_id() == a.var_id()) return;
      if (occurs(a.var_id(), b)) {
        throw TypeError("occurs check failed in " + to_string(at));
      }
      bindings_[a.var_id()] = b;
      return;
    }
    if (b.kind() == SimpleType::Kind::Var) return unify(b, a, at);
    if (a.kind() != b.kind()) {
      throw TypeError("cannot match " + to_string(zonk(a)) + " with " + to_string(zonk(b)) +
                      " in " + to_string(at));
    }
    if (a.kind() == SimpleType::Kind::Arrow) {
      unify(a.dom(), b.dom(), at);
      unify(a.cod(), b.cod(), at);
    }
  }

  // Imports a type whose variables belong to the caller's numbering.
  SimpleType import(const SimpleType& t, std::map<int, SimpleType>& seen) {
    switch (t.kind()) {
      case SimpleType::Kind::Nat:
        return t;
      case SimpleType::Kind::Var: {
        auto it = seen.find(t.var_id());
        if (it == seen.end()) it = seen.emplace(t.var_id(), fresh()).first;
        return it->second;
      }
      case SimpleType::Kind::Arrow:
        return SimpleType::arrow(import(t.dom(), seen), import(t.cod(), seen));
    }
    return t;
  }

 private:
  bool occurs(int id, const SimpleType& t) {
    SimpleType r = resolve(t);
    if (r.kind() == SimpleType::Kind::Var) return r.var_id() == id;
    if (r.kind() == SimpleType::Kind::Arrow) return occurs(id, r.dom()) || occurs(id, r.cod());
    return false;
  }

  std::vector<std::optional<SimpleType>> bindings_;
};

SimpleType infer_rec(const Term& t, std::map<std::string, SimpleType>& env, Unifier& u) {
  switch (t.kind()) {
    case TermKind::Var: {
      auto it = env.find(t.name());
      if (it == env.end()) throw TypeError("unbound variable '" + t.name() + "'");
      return it->second;
    }
    case TermKind::Num:
      return SimpleType::nat();
    case TermKind::Lam:
    case TermKind::Fix: {
      SimpleType a = u.fresh();
      auto saved = env.find(t.name()) != env.end() ? std::optional(env.at(t.name())) : std::nullopt;
      env.insert_or_assign(t.name(), a);
      SimpleType body = infer_rec(t.body(), env, u);
      if (saved) {
        env.insert_or_assign(t.name(), *saved);
      } else {
        env.erase(t.name());
      }
      if (t.kind() == TermKind::Lam) return SimpleType::arrow(a, body);
      u.unify(a, body, t);
      return a;
    }
    case TermKind::App: {
      SimpleType f = infer_rec(t.kid(0), env, u);
      SimpleType a = infer_rec(t.kid(1), env, u);
      SimpleType r = u.fresh();
      u.unify(f, SimpleType::arrow(a, r), t);
      return r;
    }
    case TermKind::Succ:
    case TermKind::Pred:
      u.unify(infer_rec(t.kid(0), env, u), SimpleType::nat(), t);
      return SimpleType::nat();
    case TermKind::Ifz: {
      u.unify(infer_rec(t.kid(0), env, u), SimpleType::nat(), t);
      SimpleType z = infer_rec(t.kid(1), env, u);
      SimpleType s = infer_rec(t.kid(2), env, u);
      u.unify(z, s, t);
      return z;
    }
  }
  return SimpleType::nat();
}

// Renumbers variables from 0 in order of first occurrence.
SimpleType canonical(const SimpleType& t, std::map<int, int>& ids) {
  switch (t.kind()) {
    case SimpleType::Kind::Nat:
      return t;
    case SimpleType::Kind::Var: {
      auto it = ids.find(t.var_id());
      if (it == ids.end()) it = ids.emplace(t.var_id(), static_cast<int>(ids.size())).first;
      return SimpleType::var(it->second);
    }
    case SimpleType::Kind::Arrow: {
      SimpleType d = canonical(t.dom(), ids);
      return SimpleType::arrow(d, canonical(t.cod(), ids));
    }
  }
  return t;
}

}  // namespace

std::string to_string(const SimpleType& t) {
  std::map<int, std::string> names;
  std::string out;
  print_type(t, false, names, out);
  return out;
}

SimpleType infer_pcf(const Term& t, const SimpleContext& ctx) {
  Unifier u;
  std::map<int, SimpleType> seen;
  std::map<std::string, SimpleType> env;
  for (const auto& [x, ty] : ctx) env.emplace(x, u.import(ty, seen));
  SimpleType r = u.zonk(infer_rec(t, env, u));
  std::map<int, int> ids;
  return canonical(r, ids);
}

bool has_pcf_type(const Term& t, const SimpleType& expected, const SimpleContext& ctx) {
  Unifier u;
  std::map<int, SimpleType> seen;
  std::map<std::string, SimpleType> env;
  for (const auto& [x, ty] : ctx) env.emplace(x, u.import(ty, seen));
  try {
    SimpleType r = infer_rec(t, env, u);
    u.unify(r, u.import(expected, seen), t);
  } catch (const TypeError&) {
    return false;
  }
  return true;
}

}  // namespace dlpcf
