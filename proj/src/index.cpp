#include "dlpcf/index.hpp"

#include <algorithm>
#include <limits>

#include "parse_internal.hpp"

namespace dlpcf {

namespace {

constexpr int kMaxCallDepth = 2000;

bool add_overflows(Nat a, Nat b) { return a > std::numeric_limits<Nat>::max() - b; }

bool mul_overflows(Nat a, Nat b) {
  return a != 0 && b > std::numeric_limits<Nat>::max() / a;
}

}  // namespace

Index Index::make(IndexNode n) {
  return Index(std::make_shared<const IndexNode>(std::move(n)));
}

Index Index::var(std::string name) {
  return make(IndexNode{IndexKind::Var, 0, std::move(name), {}});
}

Index Index::lit(Nat n) {
  static const Index zero = make(IndexNode{IndexKind::Lit, 0, {}, {}});
  static const Index one = make(IndexNode{IndexKind::Lit, 1, {}, {}});
  if (n == 0) return zero;
  if (n == 1) return one;
  return make(IndexNode{IndexKind::Lit, n, {}, {}});
}

Index Index::add(Index l, Index r) {
  return make(IndexNode{IndexKind::Add, 0, {}, {std::move(l), std::move(r)}});
}

Index Index::monus(Index l, Index r) {
  return make(IndexNode{IndexKind::Monus, 0, {}, {std::move(l), std::move(r)}});
}

Index Index::mul(Index l, Index r) {
  return make(IndexNode{IndexKind::Mul, 0, {}, {std::move(l), std::move(r)}});
}

Index Index::ifle(Index i, Index j, Index then, Index otherwise) {
  return make(IndexNode{IndexKind::IfLe, 0, {},
                        {std::move(i), std::move(j), std::move(then), std::move(otherwise)}});
}

Index Index::call(std::string symbol, std::vector<Index> args) {
  return make(IndexNode{IndexKind::Call, 0, std::move(symbol), std::move(args)});
}

Index Index::sum(std::string binder, Index bound, Index body) {
  return make(IndexNode{IndexKind::Sum, 0, std::move(binder), {std::move(bound), std::move(body)}});
}

Index Index::forest(std::string binder, Index start, Index count, Index body) {
  return make(IndexNode{IndexKind::Forest, 0, std::move(binder),
                        {std::move(start), std::move(count), std::move(body)}});
}

bool operator==(const Index& a, const Index& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind() || a.literal() != b.literal() || a.name() != b.name()) return false;
  return a.kids() == b.kids();
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// 0: anywhere, 1: left of + or -., 2: right of + / left of *, 3: right of *.
void print(const Index& i, int level, std::string& out) {
  auto open = [&](bool paren) {
    if (paren) out += '(';
  };
  auto close = [&](bool paren) {
    if (paren) out += ')';
  };
  switch (i.kind()) {
    case IndexKind::Var:
      out += i.name();
      break;
    case IndexKind::Lit:
      out += std::to_string(i.literal());
      break;
    case IndexKind::Add:
    case IndexKind::Monus: {
      bool paren = level >= 2;
      open(paren);
      print(i.kid(0), 1, out);
      out += i.kind() == IndexKind::Add ? " + " : " -. ";
      print(i.kid(1), 2, out);
      close(paren);
      break;
    }
    case IndexKind::Mul: {
      bool paren = level >= 3;
      open(paren);
      print(i.kid(0), 2, out);
      out += " * ";
      print(i.kid(1), 3, out);
      close(paren);
      break;
    }
    case IndexKind::IfLe:
    case IndexKind::Call: {
      out += i.kind() == IndexKind::IfLe ? std::string("ifle") : i.name();
      out += '(';
      for (std::size_t k = 0; k < i.kids().size(); ++k) {
        if (k) out += ", ";
        print(i.kid(k), 0, out);
      }
      out += ')';
      break;
    }
    case IndexKind::Sum: {
      bool paren = level >= 1;
      open(paren);
      out += "sum(" + i.name() + " < ";
      print(i.kid(0), 0, out);
      out += ") ";
      print(i.kid(1), 0, out);
      close(paren);
      break;
    }
    case IndexKind::Forest:
      out += "forest(" + i.name() + "; ";
      print(i.kid(0), 0, out);
      out += ", ";
      print(i.kid(1), 0, out);
      out += "; ";
      print(i.kid(2), 0, out);
      out += ')';
      break;
  }
}

}  // namespace

std::string to_string(const Index& i) {
  std::string out;
  print(i, 0, out);
  return out;
}

std::string to_string(const EquationalProgram& ep) {
  std::string out;
  for (const auto& d : ep.definitions()) {
    out += "def " + d.symbol + "(";
    for (std::size_t k = 0; k < d.params.size(); ++k) {
      if (k) out += ", ";
      out += d.params[k];
    }
    out += ") = " + to_string(d.body) + ";\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Free variables and substitution

void collect_free_vars(const Index& i, std::set<std::string>& out) {
  switch (i.kind()) {
    case IndexKind::Var:
      out.insert(i.name());
      return;
    case IndexKind::Sum:
    case IndexKind::Forest: {
      std::size_t n = i.kids().size();
      for (std::size_t k = 0; k + 1 < n; ++k) collect_free_vars(i.kid(k), out);
      std::set<std::string> inner;
      collect_free_vars(i.kid(n - 1), inner);
      inner.erase(i.name());
      out.insert(inner.begin(), inner.end());
      return;
    }
    default:
      for (const auto& k : i.kids()) collect_free_vars(k, out);
  }
}

std::set<std::string> free_vars(const Index& i) {
  std::set<std::string> out;
  collect_free_vars(i, out);
  return out;
}

bool occurs_free(const Index& i, std::string_view a) {
  switch (i.kind()) {
    case IndexKind::Var:
      return i.name() == a;
    case IndexKind::Sum:
    case IndexKind::Forest: {
      std::size_t n = i.kids().size();
      for (std::size_t k = 0; k + 1 < n; ++k) {
        if (occurs_free(i.kid(k), a)) return true;
      }
      return i.name() != a && occurs_free(i.kid(n - 1), a);
    }
    default:
      return std::any_of(i.kids().begin(), i.kids().end(),
                         [&](const Index& k) { return occurs_free(k, a); });
  }
}

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  std::string name = base;
  while (avoid.count(name)) name += '\'';
  return name;
}

namespace {

Index subst_rec(const Index& i, const std::map<std::string, Index>& sigma,
                const std::set<std::string>& image_fv) {
  switch (i.kind()) {
    case IndexKind::Var: {
      auto it = sigma.find(i.name());
      return it == sigma.end() ? i : it->second;
    }
    case IndexKind::Lit:
      return i;
    case IndexKind::Sum:
    case IndexKind::Forest: {
      std::size_t n = i.kids().size();
      std::vector<Index> outer;
      for (std::size_t k = 0; k + 1 < n; ++k) outer.push_back(subst_rec(i.kid(k), sigma, image_fv));
      const Index& body = i.kid(n - 1);
      std::map<std::string, Index> inner = sigma;
      inner.erase(i.name());
      std::string binder = i.name();
      Index new_body = body;
      // The binder is renamed whenever it clashes with a substituted term,
      // even if the body happens not to need it.
      bool clash = image_fv.count(binder) > 0;
      bool touches = std::any_of(inner.begin(), inner.end(),
                                 [&](const auto& kv) { return occurs_free(body, kv.first); });
      if (touches || clash) {
        if (clash) {
          std::set<std::string> avoid = image_fv;
          collect_free_vars(body, avoid);
          for (const auto& kv : inner) avoid.insert(kv.first);
          binder = fresh_name(binder, avoid);
          inner[i.name()] = Index::var(binder);
        }
        std::set<std::string> fv = image_fv;
        fv.insert(binder);
        new_body = subst_rec(body, inner, fv);
      }
      if (i.kind() == IndexKind::Sum) return Index::sum(binder, outer[0], new_body);
      return Index::forest(binder, outer[0], outer[1], new_body);
    }
    default: {
      std::vector<Index> kids;
      kids.reserve(i.kids().size());
      for (const auto& k : i.kids()) kids.push_back(subst_rec(k, sigma, image_fv));
      switch (i.kind()) {
        case IndexKind::Add:
          return Index::add(kids[0], kids[1]);
        case IndexKind::Monus:
          return Index::monus(kids[0], kids[1]);
        case IndexKind::Mul:
          return Index::mul(kids[0], kids[1]);
        case IndexKind::IfLe:
          return Index::ifle(kids[0], kids[1], kids[2], kids[3]);
        default:
          return Index::call(i.name(), std::move(kids));
      }
    }
  }
}

}  // namespace

Index subst_index(const Index& i, const std::map<std::string, Index>& sigma) {
  if (sigma.empty()) return i;
  std::set<std::string> image_fv;
  for (const auto& kv : sigma) collect_free_vars(kv.second, image_fv);
  return subst_rec(i, sigma, image_fv);
}

Index subst_index(const Index& i, const std::string& a, const Index& j) {
  return subst_index(i, std::map<std::string, Index>{{a, j}});
}

// ---------------------------------------------------------------------------
// Equational programs

bool is_reserved_index_name(std::string_view name) {
  return name == "sum" || name == "forest" || name == "ifle" || name == "def";
}

EquationalProgram::EquationalProgram(std::vector<Definition> defs) : defs_(std::move(defs)) {
  for (std::size_t k = 0; k < defs_.size(); ++k) by_name_.emplace(defs_[k].symbol, k);
}

const Definition* EquationalProgram::find(std::string_view symbol) const {
  auto it = by_name_.find(std::string(symbol));
  return it == by_name_.end() ? nullptr : &defs_[it->second];
}

void EquationalProgram::check_calls(const Index& i) const {
  if (i.kind() == IndexKind::Call) {
    const Definition* d = find(i.name());
    if (!d) throw IndexError("undefined symbol '" + i.name() + "'");
    if (d->params.size() != i.kids().size()) {
      throw IndexError("symbol '" + i.name() + "' expects " + std::to_string(d->params.size()) +
                       " arguments, got " + std::to_string(i.kids().size()));
    }
  }
  for (const auto& k : i.kids()) check_calls(k);
}

void EquationalProgram::validate() const {
  std::set<std::string> seen;
  for (const auto& d : defs_) {
    if (is_reserved_index_name(d.symbol)) {
      throw IndexError("cannot redefine built-in '" + d.symbol + "'");
    }
    if (!seen.insert(d.symbol).second) {
      throw IndexError("symbol '" + d.symbol + "' defined twice");
    }
    std::set<std::string> params(d.params.begin(), d.params.end());
    if (params.size() != d.params.size()) {
      throw IndexError("repeated parameter in definition of '" + d.symbol + "'");
    }
    for (const auto& v : free_vars(d.body)) {
      if (!params.count(v)) {
        throw IndexError("variable '" + v + "' is not a parameter of '" + d.symbol + "'");
      }
    }
  }
  for (const auto& d : defs_) check_calls(d.body);
}

// ---------------------------------------------------------------------------
// Evaluation

bool Evaluator::tick() {
  if (exhausted_) return false;
  if (fuel_ == 0) {
    exhausted_ = true;
    return false;
  }
  --fuel_;
  return true;
}

std::optional<Nat> Evaluator::lookup(const std::string& name, const std::vector<Binding>& scope,
                                     std::size_t base) const {
  for (std::size_t k = scope.size(); k > base; --k) {
    if (scope[k - 1].name == name) return scope[k - 1].value;
  }
  return std::nullopt;
}

EvalResult Evaluator::eval(const Index& i, std::vector<Binding>& scope) {
  fuel_ = fuel_limit_;
  depth_ = 0;
  exhausted_ = false;
  std::size_t size = scope.size();
  std::optional<Nat> v;
  try {
    v = go(*i.node(), scope, 0);
  } catch (...) {
    scope.resize(size);
    throw;
  }
  scope.resize(size);
  return {v, exhausted_};
}

EvalResult Evaluator::eval(const Index& i, const Assignment& rho) {
  std::vector<Binding> scope;
  scope.reserve(rho.size() + 8);
  for (const auto& [name, value] : rho) scope.push_back({name, value});
  return eval(i, scope);
}

std::optional<Nat> Evaluator::go(const IndexNode& n, std::vector<Binding>& scope,
                                 std::size_t base) {
  if (!tick()) return std::nullopt;
  switch (n.kind) {
    case IndexKind::Lit:
      return n.lit;
    case IndexKind::Var: {
      auto v = lookup(n.name, scope, base);
      if (!v) throw IndexError("unbound index variable '" + n.name + "'");
      return v;
    }
    case IndexKind::Add:
    case IndexKind::Monus:
    case IndexKind::Mul: {
      auto l = go(*n.kids[0].node(), scope, base);
      if (!l) return std::nullopt;
      auto r = go(*n.kids[1].node(), scope, base);
      if (!r) return std::nullopt;
      if (n.kind == IndexKind::Monus) return *l > *r ? *l - *r : 0;
      bool overflow = n.kind == IndexKind::Add ? add_overflows(*l, *r) : mul_overflows(*l, *r);
      if (overflow) {
        exhausted_ = true;
        return std::nullopt;
      }
      return n.kind == IndexKind::Add ? *l + *r : *l * *r;
    }
    case IndexKind::IfLe: {
      auto i = go(*n.kids[0].node(), scope, base);
      if (!i) return std::nullopt;
      auto j = go(*n.kids[1].node(), scope, base);
      if (!j) return std::nullopt;
      return go(*n.kids[*i <= *j ? 2 : 3].node(), scope, base);
    }
    case IndexKind::Call: {
      const Definition* d = ep_.find(n.name);
      if (!d) throw IndexError("undefined symbol '" + n.name + "'");
      if (d->params.size() != n.kids.size()) {
        throw IndexError("symbol '" + n.name + "' expects " + std::to_string(d->params.size()) +
                         " arguments, got " + std::to_string(n.kids.size()));
      }
      // Arguments are evaluated before any parameter is bound.
      Nat small[8];
      std::vector<Nat> large;
      Nat* args = small;
      if (n.kids.size() > 8) {
        large.resize(n.kids.size());
        args = large.data();
      }
      for (std::size_t k = 0; k < n.kids.size(); ++k) {
        auto v = go(*n.kids[k].node(), scope, base);
        if (!v) return std::nullopt;
        args[k] = *v;
      }
      std::size_t frame = scope.size();
      for (std::size_t k = 0; k < n.kids.size(); ++k) scope.push_back({d->params[k], args[k]});
      if (++depth_ > kMaxCallDepth) {
        exhausted_ = true;
        scope.resize(frame);
        --depth_;
        return std::nullopt;
      }
      auto v = go(*d->body.node(), scope, frame);
      --depth_;
      scope.resize(frame);
      return v;
    }
    case IndexKind::Sum: {
      auto bound = go(*n.kids[0].node(), scope, base);
      if (!bound) return std::nullopt;
      std::size_t slot = scope.size();
      scope.push_back({n.name, 0});
      Nat total = 0;
      for (Nat a = 0; a < *bound; ++a) {
        scope[slot].value = a;
        auto v = go(*n.kids[1].node(), scope, base);
        if (!v || add_overflows(total, *v)) {
          if (v) exhausted_ = true;
          scope.resize(slot);
          return std::nullopt;
        }
        total += *v;
      }
      scope.resize(slot);
      return total;
    }
    case IndexKind::Forest:
      return forest(n, scope, base);
  }
  return std::nullopt;
}

std::size_t Evaluator::ForestKeyHash::operator()(const ForestKey& k) const {
  std::size_t h = std::hash<const void*>{}(k.node);
  for (Nat v : k.env) h = h * 1000003u ^ std::hash<Nat>{}(v);
  return h;
}

std::optional<Nat> Evaluator::forest(const IndexNode& n, std::vector<Binding>& scope,
                                     std::size_t base) {
  auto fv = forest_vars_.find(&n);
  if (fv == forest_vars_.end()) {
    std::set<std::string> vs = free_vars(n.kids[0]);
    collect_free_vars(n.kids[1], vs);
    std::set<std::string> body = free_vars(n.kids[2]);
    body.erase(n.name);
    vs.insert(body.begin(), body.end());
    fv = forest_vars_.emplace(&n, std::vector<std::string>(vs.begin(), vs.end())).first;
  }
  ForestKey key{&n, {}};
  key.env.reserve(fv->second.size());
  for (const auto& x : fv->second) {
    auto v = lookup(x, scope, base);
    if (!v) throw IndexError("unbound index variable '" + x + "'");
    key.env.push_back(*v);
  }
  if (auto hit = forest_memo_.find(key); hit != forest_memo_.end()) return hit->second;

  auto start = go(*n.kids[0].node(), scope, base);
  if (!start) return std::nullopt;
  auto count = go(*n.kids[1].node(), scope, base);
  if (!count) return std::nullopt;
  // Pre-order walk: each stack entry is the number of siblings still to
  // visit at that depth, and nodes are numbered in visiting order from
  // `start`, so the children of node r are numbered from r+1.
  std::vector<Nat> pending{*count};
  Nat next = *start;
  std::size_t slot = scope.size();
  scope.push_back({n.name, 0});
  while (!pending.empty()) {
    if (pending.back() == 0) {
      pending.pop_back();
      continue;
    }
    if (!tick() || next == std::numeric_limits<Nat>::max()) {
      exhausted_ = true;
      scope.resize(slot);
      return std::nullopt;
    }
    --pending.back();
    Nat root = next++;
    scope[slot].value = root;
    auto k = go(*n.kids[2].node(), scope, base);
    if (!k) {
      scope.resize(slot);
      return std::nullopt;
    }
    pending.push_back(*k);
  }
  scope.resize(slot);
  if (forest_memo_.size() > (1u << 20)) forest_memo_.clear();
  forest_memo_.emplace(std::move(key), next - *start);
  return next - *start;
}

std::optional<Nat> eval_index(const Index& i, const Assignment& rho, const EquationalProgram& ep,
                              Nat fuel) {
  return Evaluator(ep, fuel).eval(i, rho).value;
}

std::optional<Nat> eval_sum(const std::string& a, const Index& bound, const Index& body,
                            const Assignment& rho, const EquationalProgram& ep, Nat fuel) {
  return eval_index(Index::sum(a, bound, body), rho, ep, fuel);
}

std::optional<Nat> eval_forest(const std::string& a, const Index& start, const Index& count,
                               const Index& body, const Assignment& rho,
                               const EquationalProgram& ep, Nat fuel) {
  return eval_index(Index::forest(a, start, count, body), rho, ep, fuel);
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

namespace {

Index parse_mul(Lexer& lx);
Index parse_atom(Lexer& lx);

std::vector<Index> parse_args(Lexer& lx) {
  std::vector<Index> args;
  lx.expect_sym("(");
  if (lx.accept_sym(")")) return args;
  do {
    args.push_back(parse_index_expr(lx));
  } while (lx.accept_sym(","));
  lx.expect_sym(")");
  return args;
}

Index parse_atom(Lexer& lx) {
  const Token& t = lx.peek();
  if (t.kind == TokKind::Number) return Index::lit(lx.next().number);
  if (lx.accept_sym("(")) {
    Index e = parse_index_expr(lx);
    lx.expect_sym(")");
    return e;
  }
  if (t.kind != TokKind::Ident) lx.fail("expected an index term");
  std::string name = lx.next().text;
  if (name == "sum") {
    lx.expect_sym("(");
    std::string binder = lx.expect_name();
    lx.expect_sym("<");
    Index bound = parse_index_expr(lx);
    lx.expect_sym(")");
    Index body = parse_index_expr(lx);
    return Index::sum(binder, bound, body);
  }
  if (name == "forest") {
    lx.expect_sym("(");
    std::string binder = lx.expect_name();
    lx.expect_sym(";");
    Index start = parse_index_expr(lx);
    lx.expect_sym(",");
    Index count = parse_index_expr(lx);
    lx.expect_sym(";");
    Index body = parse_index_expr(lx);
    lx.expect_sym(")");
    return Index::forest(binder, start, count, body);
  }
  if (name == "ifle") {
    auto args = parse_args(lx);
    if (args.size() != 4) lx.fail("ifle takes four arguments");
    return Index::ifle(args[0], args[1], args[2], args[3]);
  }
  if (name == "def") lx.fail("'def' is reserved");
  if (lx.at_sym("(")) return Index::call(name, parse_args(lx));
  return Index::var(name);
}

Index parse_mul(Lexer& lx) {
  Index e = parse_atom(lx);
  while (lx.accept_sym("*")) e = Index::mul(e, parse_atom(lx));
  return e;
}

}  // namespace

Index parse_index_expr(Lexer& lx) {
  // A sum body extends as far as possible, so a sum is only ever the last
  // operand of the expression it appears in.
  Index e = parse_mul(lx);
  while (true) {
    if (lx.accept_sym("+")) {
      e = Index::add(e, parse_mul(lx));
    } else if (lx.accept_sym("-.")) {
      e = Index::monus(e, parse_mul(lx));
    } else {
      return e;
    }
  }
}

}  // namespace detail

Index parse_index(std::string_view text) {
  detail::Lexer lx(text);
  Index e = detail::parse_index_expr(lx);
  lx.expect_end();
  return e;
}

EquationalProgram parse_ep(std::string_view text) {
  detail::Lexer lx(text);
  std::vector<Definition> defs;
  while (!lx.at_end()) {
    lx.expect_ident("def");
    Definition d;
    auto pos = lx.peek().pos;
    d.symbol = lx.expect_name();
    if (is_reserved_index_name(d.symbol)) {
      throw ParseError("cannot define reserved name '" + d.symbol + "'", pos);
    }
    if (lx.accept_sym("(")) {
      if (!lx.accept_sym(")")) {
        do {
          d.params.push_back(lx.expect_name());
        } while (lx.accept_sym(","));
        lx.expect_sym(")");
      }
    }
    lx.expect_sym("=");
    d.body = detail::parse_index_expr(lx);
    lx.expect_sym(";");
    defs.push_back(std::move(d));
  }
  return EquationalProgram(std::move(defs));
}

}  // namespace dlpcf
