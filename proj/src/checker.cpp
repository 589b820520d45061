#include "dlpcf/checker.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "dlpcf/machine_typing.hpp"

namespace dlpcf {

namespace {

enum class Sort { Term, Closure, Stack, Process };

Sort sort_of(Rule r) {
  if (is_term_rule(r)) return Sort::Term;
  if (r == Rule::Closure) return Sort::Closure;
  if (r == Rule::Process) return Sort::Process;
  return Sort::Stack;
}

const char* sort_name(Sort s) {
  switch (s) {
    case Sort::Term:
      return "term";
    case Sort::Closure:
      return "closure";
    case Sort::Stack:
      return "stack";
    case Sort::Process:
      return "process";
  }
  return "?";
}

std::vector<Sort> premise_sorts(Rule r) {
  switch (r) {
    case Rule::Ax:
    case Rule::Const:
    case Rule::StackEmpty:
      return {};
    case Rule::Subs:
    case Rule::Lam:
    case Rule::Succ:
    case Rule::Pred:
    case Rule::Fix:
    case Rule::FixGen:
      return {Sort::Term};
    case Rule::App:
      return {Sort::Term, Sort::Term};
    case Rule::If:
      return {Sort::Term, Sort::Term, Sort::Term};
    case Rule::Closure:
      return {Sort::Term};
    case Rule::Process:
      return {Sort::Stack, Sort::Closure};
    case Rule::StackSubs:
    case Rule::StackS:
    case Rule::StackP:
      return {Sort::Stack};
    case Rule::StackArg:
    case Rule::StackFun:
      return {Sort::Closure, Sort::Stack};
    case Rule::StackFork:
      return {Sort::Closure, Sort::Closure, Sort::Stack};
  }
  return {};
}

std::optional<TermKind> term_kind_of(Rule r) {
  switch (r) {
    case Rule::Ax:
      return TermKind::Var;
    case Rule::Lam:
      return TermKind::Lam;
    case Rule::App:
      return TermKind::App;
    case Rule::If:
      return TermKind::Ifz;
    case Rule::Const:
      return TermKind::Num;
    case Rule::Succ:
      return TermKind::Succ;
    case Rule::Pred:
      return TermKind::Pred;
    case Rule::Fix:
    case Rule::FixGen:
      return TermKind::Fix;
    default:
      return std::nullopt;
  }
}

struct Scope {
  VarSet vars;
  ConstraintSet hyps;

  Scope with(const std::string& a, Constraint c) const {
    Scope s = *this;
    s.vars.insert(a);
    s.hyps.push_back(std::move(c));
    return s;
  }
  Scope assuming(Constraint c) const {
    Scope s = *this;
    s.hyps.push_back(std::move(c));
    return s;
  }
};

// What a parent needs to know about a checked premise.
struct Concl {
  Context ctx;
  Index weight;
  std::optional<ModalType> type;
  std::optional<ModalType> input;
  std::optional<Term> term;
};

struct NodeRecord {
  std::string location;
  Rule rule;
  std::size_t post = 0;
  Goals goals;
};

std::string names(const std::set<std::string>& xs) {
  std::string out = "{";
  for (const auto& x : xs) {
    if (out.size() > 1) out += ", ";
    out += x;
  }
  return out + "}";
}

std::set<std::string> domain(const Context& c) {
  std::set<std::string> out;
  for (const auto& [x, t] : c) out.insert(x);
  return out;
}

void tag(Goals& more, const std::string& note) {
  for (auto& o : more.obligations) o.note = o.note.empty() ? note : note + " / " + o.note;
  for (auto& f : more.failures) f = note + ": " + f;
}

class Checker {
 public:
  explicit Checker(const CheckConfig& cfg) : cfg_(cfg) {}

  std::vector<NodeRecord> nodes;
  bool general_fix = false;

  std::optional<Concl> visit(const Derivation& d, const Scope* schema, const std::string& loc) {
    std::size_t idx = nodes.size();
    nodes.push_back({loc, d.rule, 0, {}});
    Goals g;
    Scope s = enter(d, schema, g);
    std::optional<Concl> c = dispatch(d, s, loc, g);
    nodes[idx].goals = std::move(g);
    nodes[idx].post = post_++;
    return c;
  }

 private:
  Scope enter(const Derivation& d, const Scope* schema, Goals& g) {
    Scope s;
    if (!schema) {
      if (d.vars) s.vars = *d.vars;
      if (d.hyps) s.hyps = *d.hyps;
    } else {
      s = *schema;
      if (d.vars && *d.vars != schema->vars)
        g.fail("index variables " + names(*d.vars) + " differ from the rule's " +
               names(schema->vars));
      if (d.hyps) {
        for (const auto& h : *d.hyps)
          g.add(schema->vars, schema->hyps, h, "stated constraint " + to_string(h));
        s.hyps = *d.hyps;
      }
    }
    std::set<std::string> fv;
    for (const auto& h : s.hyps) {
      collect_free_vars(h.lhs, fv);
      collect_free_vars(h.rhs, fv);
    }
    in_scope(g, s, fv, "constraints");
    return s;
  }

  static void in_scope(Goals& g, const Scope& s, const std::set<std::string>& fv,
                       const std::string& what) {
    for (const auto& v : fv) {
      if (!s.vars.count(v)) g.fail(what + " mention unbound index variable " + v);
    }
  }

  static void eq_index(Goals& g, const Scope& s, const Index& i, const Index& j,
                       const std::string& note) {
    g.append(index_eq_goals(s.vars, s.hyps, i, j, note));
  }
  static void le_index(Goals& g, const Scope& s, const Index& i, const Index& j,
                       const std::string& note) {
    g.append(index_le_goals(s.vars, s.hyps, i, j, note));
  }
  static void eq_type(Goals& g, const Scope& s, const ModalType& a, const ModalType& b,
                      const std::string& note) {
    Goals more = equiv_goals(s.vars, s.hyps, a, b);
    tag(more, note);
    g.append(std::move(more));
  }
  static void sub_type(Goals& g, const Scope& s, const ModalType& a, const ModalType& b,
                       const std::string& note) {
    Goals more = subtype_goals(s.vars, s.hyps, a, b);
    tag(more, note);
    g.append(std::move(more));
  }
  static void add(Goals& g, Goals more, const std::string& note) {
    tag(more, note);
    g.append(std::move(more));
  }
  static bool same_domain(Goals& g, const Context& expected, const Context& actual,
                          const std::string& note) {
    if (domain(expected) == domain(actual)) return true;
    g.fail(note + ": context domain " + names(domain(actual)) + " should be " +
           names(domain(expected)));
    return false;
  }
  static void eq_ctx(Goals& g, const Scope& s, const Context& expected, const Context& actual,
                     const std::string& note) {
    if (!same_domain(g, expected, actual, note)) return;
    for (const auto& [x, t] : expected) eq_type(g, s, actual.at(x), t, note + " " + x);
  }

  std::optional<Concl> dispatch(const Derivation& d, const Scope& s, const std::string& loc,
                                Goals& g) {
    std::vector<Sort> sorts = premise_sorts(d.rule);
    if (d.premises.size() != sorts.size()) {
      g.fail(to_string(d.rule) + " takes " + std::to_string(sorts.size()) + " premises, found " +
             std::to_string(d.premises.size()));
      return std::nullopt;
    }
    for (std::size_t k = 0; k < sorts.size(); ++k) {
      if (sort_of(d.premises[k].rule) != sorts[k]) {
        g.fail("premise " + std::to_string(k) + " should be a " + sort_name(sorts[k]) +
               " derivation");
        return std::nullopt;
      }
    }
    switch (sort_of(d.rule)) {
      case Sort::Term:
        return term(d, s, loc, g);
      case Sort::Closure:
        return closure(d, s, loc, g);
      case Sort::Process:
        return process(d, s, loc, g);
      case Sort::Stack:
        return stack(d, s, loc, g);
    }
    return std::nullopt;
  }

  std::optional<Concl> premise(const Derivation& d, std::size_t k, const Scope& s,
                               const std::string& loc) {
    return visit(d.premises[k], &s, loc + "." + std::to_string(k));
  }

  static bool premise_term(Goals& g, const Concl& p, const Term& expected, std::size_t k) {
    if (p.term && *p.term == expected) return true;
    g.fail("premise " + std::to_string(k) + " derives " + (p.term ? to_string(*p.term) : "?") +
           " instead of " + to_string(expected));
    return false;
  }

  // ---------------------------------------------------------------------
  // Term rules

  std::optional<Concl> term(const Derivation& d, const Scope& s, const std::string& loc,
                            Goals& g) {
    if (!d.term || !d.weight || !d.type) {
      g.fail("a term node needs a term, a weight and a type");
      return std::nullopt;
    }
    const Term& t = *d.term;
    const Index& w = *d.weight;
    const ModalType& tau = *d.type;
    if (auto k = term_kind_of(d.rule); k && t.kind() != *k) {
      g.fail("rule " + to_string(d.rule) + " does not apply to " + to_string(t));
      return std::nullopt;
    }
    std::set<std::string> fv = free_vars(w);
    collect_free_vars(tau, fv);
    for (const auto& [x, sigma] : d.ctx) collect_free_vars(sigma, fv);
    in_scope(g, s, fv, "judgement indices");
    for (const auto& x : free_vars(t)) {
      if (!d.ctx.count(x)) g.fail("free variable " + x + " is not in the context");
    }
    Concl out{d.ctx, w, tau, std::nullopt, t};

    switch (d.rule) {
      case Rule::Ax: {
        auto it = d.ctx.find(t.name());
        if (it == d.ctx.end()) break;
        eq_type(g, s, it->second, tau, "variable type");
        eq_index(g, s, w, Index::lit(0), "variable weight");
        break;
      }
      case Rule::Const:
        eq_type(g, s, tau, ModalType::nat(Index::lit(t.numeral())), "numeral type");
        eq_index(g, s, w, Index::lit(0), "numeral weight");
        break;
      case Rule::Subs:
        subs(d, s, loc, g);
        break;
      case Rule::Lam:
        lam(d, s, loc, g);
        break;
      case Rule::App:
        app(d, s, loc, g);
        break;
      case Rule::If:
        ifz(d, s, loc, g);
        break;
      case Rule::Succ:
      case Rule::Pred:
        succ_pred(d, s, loc, g);
        break;
      case Rule::Fix:
      case Rule::FixGen:
        fix(d, s, loc, g);
        break;
      default:
        break;
    }
    return out;
  }

  void subs(const Derivation& d, const Scope& s, const std::string& loc, Goals& g) {
    auto p = premise(d, 0, s, loc);
    if (!p || !premise_term(g, *p, *d.term, 0)) return;
    for (const auto& [x, sigma] : p->ctx) {
      auto it = d.ctx.find(x);
      if (it == d.ctx.end()) {
        g.fail("context drops " + x);
        continue;
      }
      if (cfg_.strict) {
        eq_type(g, s, it->second, sigma, "context " + x);
      } else {
        sub_type(g, s, it->second, sigma, "context " + x);
      }
    }
    if (cfg_.strict) {
      eq_type(g, s, *p->type, *d.type, "type");
      eq_index(g, s, p->weight, *d.weight, "weight");
    } else {
      sub_type(g, s, *p->type, *d.type, "type");
      le_index(g, s, p->weight, *d.weight, "weight");
    }
  }

  // Witnesses for sums, read from the explicit sums or the conclusion.
  template <class W, class F>
  static std::map<std::string, W> witnesses(const Derivation& d, const Context& parts, F make) {
    std::map<std::string, W> out;
    for (const auto& [x, sigma] : parts) {
      if (sigma.is_nat()) continue;
      const ModalType* result = nullptr;
      if (auto it = d.sums.find(x); it != d.sums.end()) {
        result = &it->second;
      } else if (auto jt = d.ctx.find(x); jt != d.ctx.end()) {
        result = &jt->second;
      }
      if (result && !result->is_nat()) out.emplace(x, make(*result, x));
    }
    return out;
  }

  void lam(const Derivation& d, const Scope& s, const std::string& loc, Goals& g) {
    const ModalType& tau = *d.type;
    if (tau.is_nat()) {
      g.fail("an abstraction needs a banged arrow type");
      return;
    }
    const std::string& a = tau.binder();
    if (s.vars.count(a)) {
      g.fail("binder " + a + " is already an index variable");
      return;
    }
    const Index& bound = tau.bound();
    Scope inner = s.with(a, less_than(a, bound));
    auto p = premise(d, 0, inner, loc);
    if (!p || !premise_term(g, *p, d.term->body(), 0)) return;
    const std::string& x = d.term->name();
    Context rest = p->ctx;
    auto it = rest.find(x);
    if (it == rest.end()) {
      g.fail("premise context lacks the bound variable " + x);
      return;
    }
    eq_type(g, inner, it->second, tau.dom(), "bound variable");
    eq_type(g, inner, *p->type, tau.cod(), "body type");
    rest.erase(it);
    auto ws = witnesses<BoundedSumWitness>(d, rest, [&](const ModalType& r, const std::string& y) {
      return bounded_sum_witness_for(r, rest.at(y));
    });
    ContextResult cr = bounded_sum_context(a, bound, rest, ws, s.vars, s.hyps);
    add(g, std::move(cr.goals), "context sum");
    eq_ctx(g, s, cr.ctx, d.ctx, "context");
    eq_index(g, s, *d.weight, bound + Index::sum(a, bound, p->weight), "abstraction weight");
  }

  void app(const Derivation& d, const Scope& s, const std::string& loc, Goals& g) {
    auto f = premise(d, 0, s, loc);
    auto u = premise(d, 1, s, loc);
    if (!f || !u) return;
    if (!premise_term(g, *f, d.term->kid(0), 0) || !premise_term(g, *u, d.term->kid(1), 1))
      return;
    const ModalType& ft = *f->type;
    if (ft.is_nat()) {
      g.fail("applied term has type " + to_string(ft));
      return;
    }
    const std::string& a = ft.binder();
    eq_index(g, s, ft.bound(), Index::lit(1), "applied function has one copy");
    eq_type(g, s, *u->type, subst_type(ft.dom(), a, Index::lit(0)), "argument type");
    eq_type(g, s, *d.type, subst_type(ft.cod(), a, Index::lit(0)), "result type");
    eq_index(g, s, *d.weight, f->weight + u->weight, "application weight");
    context_sum(d, s, f->ctx, u->ctx, g);
  }

  void context_sum(const Derivation& d, const Scope& s, const Context& left,
                   const Context& right, Goals& g) {
    std::map<std::string, SumWitness> ws;
    for (const auto& [x, sigma] : left) {
      auto other = right.find(x);
      if (other == right.end() || sigma.is_nat() || other->second.is_nat()) continue;
      auto found = witnesses<SumWitness>(d, Context{{x, sigma}}, [&](const ModalType& r, const std::string&) {
        return sum_witness_for(r, sigma, other->second);
      });
      ws.insert(found.begin(), found.end());
    }
    ContextResult cr = sum_context(left, right, ws, s.vars, s.hyps);
    add(g, std::move(cr.goals), "context sum");
    eq_ctx(g, s, cr.ctx, d.ctx, "context");
  }

  void ifz(const Derivation& d, const Scope& s, const std::string& loc, Goals& g) {
    auto c = premise(d, 0, s, loc);
    if (!c) return;
    if (!c->type->is_nat()) {
      g.fail("tested term has type " + to_string(*c->type));
      return;
    }
    auto z = premise(d, 1, s.assuming({c->type->lo(), Index::lit(0)}), loc);
    auto u = premise(d, 2, s.assuming({Index::lit(1), c->type->hi()}), loc);
    if (!z || !u) return;
    if (!premise_term(g, *c, d.term->kid(0), 0) || !premise_term(g, *z, d.term->kid(1), 1) ||
        !premise_term(g, *u, d.term->kid(2), 2))
      return;
    eq_ctx(g, s, z->ctx, u->ctx, "branch context");
    eq_index(g, s, z->weight, u->weight, "branch weights");
    eq_type(g, s, *z->type, *u->type, "branch types");
    eq_type(g, s, *d.type, *z->type, "conditional type");
    eq_index(g, s, *d.weight, c->weight + z->weight, "conditional weight");
    context_sum(d, s, c->ctx, z->ctx, g);
  }

  void succ_pred(const Derivation& d, const Scope& s, const std::string& loc, Goals& g) {
    auto p = premise(d, 0, s, loc);
    if (!p || !premise_term(g, *p, d.term->kid(0), 0)) return;
    const ModalType& pt = *p->type;
    if (!pt.is_nat()) {
      g.fail("operand has type " + to_string(pt));
      return;
    }
    Index one = Index::lit(1);
    ModalType expected = d.rule == Rule::Succ
                             ? ModalType::nat(pt.lo() + one, pt.hi() + one)
                             : ModalType::nat(Index::monus(pt.lo(), one), Index::monus(pt.hi(), one));
    eq_type(g, s, *d.type, expected, d.rule == Rule::Succ ? "successor type" : "predecessor type");
    eq_index(g, s, *d.weight, p->weight, "weight");
    eq_ctx(g, s, p->ctx, d.ctx, "context");
  }

  void fix(const Derivation& d, const Scope& s, const std::string& loc, Goals& g) {
    const bool general = d.rule == Rule::FixGen;
    if (general) general_fix = true;
    const ModalType& tau = *d.type;
    if (tau.is_nat()) {
      g.fail("a fixpoint needs a banged arrow type");
      return;
    }
    std::string b = d.binder.value_or("b");
    if (s.vars.count(b)) {
      g.fail("recursion variable " + b + " is already an index variable");
      return;
    }
    const std::string& x = d.term->name();
    // H depends on I, which is read off the premise context before the
    // premise itself is checked under b < H.
    const Derivation& pd = d.premises[0];
    auto xt = pd.ctx.find(x);
    if (xt == pd.ctx.end() || xt->second.is_nat()) {
      g.fail("premise context needs a banged type for " + x);
      return;
    }
    const ModalType& xtype = xt->second;
    const Index& children = xtype.bound();
    const Index& k = tau.bound();
    Index forest = Index::forest(b, Index::lit(0), k, children);
    if (occurs_free(k, b)) g.fail("the number of copies mentions " + b);
    Index h = forest;
    if (general) {
      if (!d.bound) {
        g.fail("the general fixpoint rule needs an explicit bound");
        return;
      }
      h = *d.bound;
      le_index(g, s, forest, h, "recursion tree fits the bound");
    } else {
      if (d.bound) {
        h = *d.bound;
        eq_index(g, s, h, forest, "recursion tree size");
      }
      le_index(g, s, forest, forest, "recursion tree is finite");
    }
    in_scope(g, s, free_vars(h), "tree size");
    Scope inner = s.with(b, less_than(b, h));
    auto p = premise(d, 0, inner, loc);
    if (!p || !premise_term(g, *p, d.term->body(), 0)) return;
    const ModalType& pt = *p->type;
    if (pt.is_nat()) {
      g.fail("the fixpoint body needs a banged arrow type");
      return;
    }
    eq_index(g, inner, pt.bound(), Index::lit(1), "body has one copy");

    std::set<std::string> avoid = s.vars;
    avoid.insert(b);
    collect_free_vars(pt, avoid);
    collect_free_vars(xtype, avoid);
    collect_free_vars(tau, avoid);
    avoid.insert(pt.binder());
    avoid.insert(xtype.binder());
    std::string a = fresh_name("a", avoid);
    avoid.insert(a);

    LinearType body = subst_linear(body_of(pt), pt.binder(), Index::lit(0));
    Index next = Index::forest(b, Index::var(b) + Index::lit(1), Index::var(a), children) +
                 Index::var(b) + Index::lit(1);
    LinearType call = subst_linear(body, b, next);
    LinearType expected_call = subst_linear(body_of(xtype), xtype.binder(), Index::var(a));
    Scope side = inner.with(a, less_than(a, children));
    sub_type(g, side, expected_call.dom, call.dom, "recursive call argument");
    sub_type(g, side, call.cod, expected_call.cod, "recursive call result");

    std::string c = fresh_name("a", avoid);
    ModalType expected = bang(
        c, k, subst_linear(body, b, Index::forest(b, Index::lit(0), Index::var(c), children)));
    if (general) {
      sub_type(g, s, expected, tau, "fixpoint type");
    } else {
      eq_type(g, s, expected, tau, "fixpoint type");
    }
    eq_index(g, s, *d.weight, h + Index::sum(b, h, p->weight), "fixpoint weight");

    Context rest = p->ctx;
    rest.erase(x);
    auto ws = witnesses<BoundedSumWitness>(d, rest, [&](const ModalType& r, const std::string& y) {
      return bounded_sum_witness_for(r, rest.at(y));
    });
    ContextResult cr = bounded_sum_context(b, h, rest, ws, s.vars, s.hyps);
    add(g, std::move(cr.goals), "context sum");
    if (general) {
      if (!same_domain(g, cr.ctx, d.ctx, "context")) return;
      for (const auto& [y, sigma] : cr.ctx) sub_type(g, s, d.ctx.at(y), sigma, "context " + y);
    } else {
      eq_ctx(g, s, cr.ctx, d.ctx, "context");
    }
  }

  // ---------------------------------------------------------------------
  // Closures, stacks and processes

  void scoped_annotations(const Derivation& d, const Scope& s, Goals& g) {
    std::set<std::string> fv;
    if (d.weight) collect_free_vars(*d.weight, fv);
    if (d.type) collect_free_vars(*d.type, fv);
    if (d.input) collect_free_vars(*d.input, fv);
    in_scope(g, s, fv, "annotations");
  }

  std::optional<Concl> closure(const Derivation& d, const Scope& s, const std::string& loc,
                               Goals& g) {
    scoped_annotations(d, s, g);
    auto t = premise(d, 0, s, loc);
    std::set<std::string> seen;
    for (const auto& x : d.env_names) {
      if (!seen.insert(x).second) g.fail("environment binds " + x + " twice");
    }
    std::vector<std::optional<Concl>> env;
    for (std::size_t k = 0; k < d.env.size(); ++k) {
      const Derivation& e = d.env[k];
      if (e.rule != Rule::Closure) {
        g.fail("environment entry " + d.env_names[k] + " must be a closure derivation");
        env.emplace_back();
        continue;
      }
      env.push_back(visit(e, &s, loc + ".env." + d.env_names[k]));
    }
    if (!t) return std::nullopt;
    if (seen != domain(t->ctx)) {
      g.fail("environment " + names(seen) + " does not match the context " +
             names(domain(t->ctx)));
      return std::nullopt;
    }
    Index w = t->weight;
    bool complete = true;
    for (std::size_t k = 0; k < env.size(); ++k) {
      if (!env[k]) {
        complete = false;
        continue;
      }
      const std::string& x = d.env_names[k];
      if (env[k]->term && !env[k]->term->is_value())
        g.fail("environment entry " + x + " is not a value closure");
      eq_type(g, s, *env[k]->type, t->ctx.at(x), "environment entry " + x);
      w = w + env[k]->weight;
    }
    Concl out{{}, d.weight.value_or(w), d.type.value_or(*t->type), std::nullopt, t->term};
    if (d.weight && complete) eq_index(g, s, *d.weight, w, "closure weight");
    if (d.type) eq_type(g, s, *d.type, *t->type, "closure type");
    return out;
  }

  std::optional<Concl> process(const Derivation& d, const Scope& s, const std::string& loc,
                               Goals& g) {
    scoped_annotations(d, s, g);
    auto st = premise(d, 0, s, loc);
    auto c = premise(d, 1, s, loc);
    if (!st || !c) return std::nullopt;
    eq_type(g, s, *st->input, *c->type, "stack input against closure type");
    Index w = st->weight + c->weight;
    if (d.weight) eq_index(g, s, *d.weight, w, "process weight");
    if (d.type) eq_type(g, s, *d.type, *st->type, "process type");
    return Concl{{}, d.weight.value_or(w), d.type.value_or(*st->type), std::nullopt, c->term};
  }

  // Fills in the conclusion of a stack node whose input, output and weight
  // follow from the premises, checking any that are stated.
  static Concl stack_result(const Derivation& d, const Scope& s, Goals& g, Index w,
                            ModalType input, ModalType output) {
    if (d.weight) eq_index(g, s, *d.weight, w, "stack weight");
    if (d.input) eq_type(g, s, *d.input, input, "stack input");
    if (d.type) eq_type(g, s, *d.type, output, "stack output");
    return Concl{{}, d.weight.value_or(w), d.type.value_or(output), d.input.value_or(input), {}};
  }

  std::optional<Concl> stack(const Derivation& d, const Scope& s, const std::string& loc,
                             Goals& g) {
    scoped_annotations(d, s, g);
    switch (d.rule) {
      case Rule::StackEmpty: {
        if (!d.input && !d.type) {
          g.fail("the empty stack needs a type");
          return std::nullopt;
        }
        ModalType t = d.input ? *d.input : *d.type;
        return stack_result(d, s, g, Index::lit(0), t, t);
      }
      case Rule::StackSubs: {
        auto p = premise(d, 0, s, loc);
        if (!d.input || !d.type || !d.weight) {
          g.fail("stack subsumption needs its input, output and weight");
          return std::nullopt;
        }
        if (!p) return std::nullopt;
        sub_type(g, s, *d.input, *p->input, "stack input");
        sub_type(g, s, *p->type, *d.type, "stack output");
        le_index(g, s, p->weight, *d.weight, "stack weight");
        return Concl{{}, *d.weight, d.type, d.input, {}};
      }
      case Rule::StackArg:
      case Rule::StackFun: {
        auto c = premise(d, 0, s, loc);
        auto rest = premise(d, 1, s, loc);
        if (!c || !rest) return std::nullopt;
        const bool arg = d.rule == Rule::StackArg;
        if (arg && !d.input) {
          g.fail("an argument frame needs its input type");
          return std::nullopt;
        }
        const ModalType& fun = arg ? *d.input : *c->type;
        if (fun.is_nat()) {
          g.fail("the function type is " + to_string(fun));
          return std::nullopt;
        }
        if (!arg && c->term && !c->term->is_value()) g.fail("a function frame holds a value");
        Index zero = Index::lit(0);
        ModalType sigma = subst_type(fun.dom(), fun.binder(), zero);
        ModalType tau = subst_type(fun.cod(), fun.binder(), zero);
        eq_index(g, s, fun.bound(), Index::lit(1), "function has one copy");
        if (arg) eq_type(g, s, *c->type, sigma, "argument closure");
        eq_type(g, s, *rest->input, tau, "continuation input");
        return stack_result(d, s, g, c->weight + rest->weight, arg ? fun : sigma, *rest->type);
      }
      case Rule::StackFork: {
        if (!d.input || !d.input->is_nat()) {
          g.fail("a fork frame needs an input type Nat[M, N]");
          return std::nullopt;
        }
        Scope zs = s.assuming({d.input->lo(), Index::lit(0)});
        Scope us = s.assuming({Index::lit(1), d.input->hi()});
        auto z = premise(d, 0, zs, loc);
        auto u = premise(d, 1, us, loc);
        auto rest = premise(d, 2, s, loc);
        if (!z || !u || !rest) return std::nullopt;
        try {
          if (closure_of(d.premises[0]).env != closure_of(d.premises[1]).env)
            g.fail("fork branches must share an environment");
        } catch (const ScriptError& e) {
          g.fail(e.what());
        }
        eq_index(g, s, z->weight, u->weight, "branch weights");
        eq_type(g, zs, *z->type, *rest->input, "zero branch type");
        eq_type(g, us, *u->type, *rest->input, "successor branch type");
        return stack_result(d, s, g, z->weight + rest->weight, *d.input, *rest->type);
      }
      case Rule::StackS:
      case Rule::StackP: {
        auto p = premise(d, 0, s, loc);
        if (!d.input || !d.input->is_nat()) {
          g.fail("a successor or predecessor frame needs an input type Nat[M, N]");
          return std::nullopt;
        }
        if (!p) return std::nullopt;
        Index one = Index::lit(1);
        const Index& m = d.input->lo();
        const Index& n = d.input->hi();
        ModalType shifted = d.rule == Rule::StackS
                                ? ModalType::nat(m + one, n + one)
                                : ModalType::nat(Index::monus(m, one), Index::monus(n, one));
        eq_type(g, s, *p->input, shifted, "continuation input");
        return stack_result(d, s, g, p->weight, *d.input, *p->type);
      }
      default:
        return std::nullopt;
    }
  }

  const CheckConfig& cfg_;
  std::size_t post_ = 0;
};

std::string obligation_key(const Obligation& o) {
  std::string k;
  for (const auto& v : o.vars) k += v + ",";
  k += "|";
  for (const auto& h : o.hyps) k += to_string(h) + ",";
  k += "|" + to_string(o.goal);
  return k;
}

std::vector<EntailmentVerdict> discharge_all(const std::vector<const Obligation*>& obs,
                                             const EquationalProgram& ep,
                                             const CheckConfig& cfg) {
  std::vector<EntailmentVerdict> out(obs.size());
  auto one = [&](std::size_t k) {
    try {
      out[k] = entails(obs[k]->vars, obs[k]->hyps, obs[k]->goal, ep, cfg.entail);
    } catch (const IndexError& e) {
      out[k] = Unknown{std::string("malformed: ") + e.what()};
    }
  };
  unsigned n = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  n = static_cast<unsigned>(std::min<std::size_t>(n, obs.size()));
  if (n <= 1) {
    for (std::size_t k = 0; k < obs.size(); ++k) one(k);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n; ++t) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < obs.size(); k = next++) one(k);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

Status status_of(const EntailmentVerdict& v) {
  if (is_valid(v)) return Status::Valid;
  if (is_invalid(v)) return Status::Invalid;
  return Status::Unknown;
}

}  // namespace

std::string to_string(Overall o) {
  switch (o) {
    case Overall::Certified:
      return "Certified";
    case Overall::CertifiedBounded:
      return "CertifiedBounded";
    case Overall::Refuted:
      return "Refuted";
    case Overall::Unknown:
      return "Unknown";
  }
  return "?";
}

std::size_t CheckReport::obligation_count() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.obligation.has_value();
  return n;
}

CheckReport check(const Derivation& d, const EquationalProgram& ep, const CheckConfig& config) {
  Checker ck(config);
  std::optional<Concl> root = ck.visit(d, nullptr, "root");
  CheckReport r;
  r.general_fix = ck.general_fix;
  if (root) {
    r.weight = root->weight;
    r.type = root->type;
    r.input = root->input;
  }
  r.bound = config.entail.bound;

  const NodeRecord* worst = nullptr;
  auto blame = [&](const NodeRecord& n, const std::string& why) {
    if (!worst || n.post < worst->post) {
      worst = &n;
      r.reason = why;
    }
  };

  bool structural = false;
  for (const auto& n : ck.nodes) {
    for (const auto& f : n.goals.failures) {
      r.entries.push_back({n.location, n.rule, f, std::nullopt, Status::Invalid, "structural"});
      blame(n, f);
      structural = true;
    }
  }
  if (structural) {
    r.overall = Overall::Refuted;
    r.location = worst->location;
    return r;
  }

  std::unordered_map<std::string, std::size_t> index;
  std::vector<const Obligation*> unique;
  std::vector<std::size_t> slot;
  for (const auto& n : ck.nodes) {
    for (const auto& o : n.goals.obligations) {
      auto [it, fresh] = index.emplace(obligation_key(o), unique.size());
      if (fresh) unique.push_back(&o);
      slot.push_back(it->second);
    }
  }
  std::vector<EntailmentVerdict> verdicts = discharge_all(unique, ep, config);

  bool exact = true;
  const NodeRecord* unknown = nullptr;
  std::string unknown_reason;
  std::size_t k = 0;
  for (const auto& n : ck.nodes) {
    for (const auto& o : n.goals.obligations) {
      const EntailmentVerdict& v = verdicts[slot[k++]];
      Status st = status_of(v);
      r.entries.push_back({n.location, n.rule, o.note, o, st, to_string(v)});
      std::string why = o.note + ": " + to_string(o.goal) + " " + to_string(v);
      if (st == Status::Invalid) {
        blame(n, why);
      } else if (st == Status::Unknown) {
        if (!unknown || n.post < unknown->post) {
          unknown = &n;
          unknown_reason = why;
        }
      } else if (!std::get<Valid>(v).exact) {
        exact = false;
      }
    }
  }
  if (worst) {
    r.overall = Overall::Refuted;
    r.location = worst->location;
  } else if (unknown) {
    r.overall = Overall::Unknown;
    r.location = unknown->location;
    r.reason = unknown_reason;
  } else {
    r.overall = exact ? Overall::Certified : Overall::CertifiedBounded;
  }
  return r;
}

std::string format_report(const CheckReport& r, bool verbose) {
  std::ostringstream out;
  out << "status=" << to_string(r.overall);
  if (r.overall == Overall::CertifiedBounded) out << "(" << r.bound << ")";
  out << "\n";
  if (!r.location.empty()) out << "location=" << r.location << "\n";
  if (!r.reason.empty()) out << "reason=" << r.reason << "\n";
  if (r.weight) out << "weight=" << to_string(*r.weight) << "\n";
  if (r.input) out << "input=" << to_string(*r.input) << "\n";
  if (r.type) out << "type=" << to_string(*r.type) << "\n";
  out << "obligations=" << r.obligation_count() << "\n";
  out << "general_fix=" << (r.general_fix ? 1 : 0) << "\n";
  for (const auto& e : r.entries) {
    if (!verbose && e.status == Status::Valid) continue;
    out << e.location << " [" << to_string(e.rule) << "] " << to_string(e.status) << ": "
        << e.description;
    if (e.obligation) {
      out << ": ";
      for (std::size_t k = 0; k < e.obligation->hyps.size(); ++k)
        out << (k ? ", " : "") << to_string(e.obligation->hyps[k]);
      out << (e.obligation->hyps.empty() ? "|= " : " |= ") << to_string(e.obligation->goal);
    }
    out << " -> " << e.verdict << "\n";
  }
  return out.str();
}

Index weight_of(const Derivation& d) {
  if (d.weight) return *d.weight;
  auto need = [&](std::size_t k) -> const Derivation& {
    if (k >= d.premises.size()) throw ScriptError(d.pos.str() + ": missing premise");
    return d.premises[k];
  };
  switch (d.rule) {
    case Rule::Closure: {
      Index w = weight_of(need(0));
      for (const auto& e : d.env) w = w + weight_of(e);
      return w;
    }
    case Rule::Process:
      return weight_of(need(0)) + weight_of(need(1));
    case Rule::StackEmpty:
      return Index::lit(0);
    case Rule::StackArg:
    case Rule::StackFun:
      return weight_of(need(0)) + weight_of(need(1));
    case Rule::StackFork:
      return weight_of(need(0)) + weight_of(need(2));
    case Rule::StackS:
    case Rule::StackP:
      return weight_of(need(0));
    default:
      throw ScriptError(d.pos.str() + ": " + to_string(d.rule) + " node has no weight");
  }
}

namespace {

void instantiate_rec(Derivation& d, const std::map<std::string, Index>& sigma) {
  if (d.vars) {
    for (const auto& [x, i] : sigma) d.vars->erase(x);
  }
  if (d.hyps) {
    for (auto& h : *d.hyps) h = {subst_index(h.lhs, sigma), subst_index(h.rhs, sigma)};
  }
  for (auto& [x, t] : d.ctx) t = subst_type(t, sigma);
  if (d.weight) d.weight = subst_index(*d.weight, sigma);
  if (d.type) d.type = subst_type(*d.type, sigma);
  if (d.input) d.input = subst_type(*d.input, sigma);
  if (d.bound) d.bound = subst_index(*d.bound, sigma);
  for (auto& [x, t] : d.sums) t = subst_type(t, sigma);
  for (auto& e : d.env) instantiate_rec(e, sigma);
  for (auto& p : d.premises) instantiate_rec(p, sigma);
}

void term_binders(const Term& t, std::set<std::string>& out) {
  if (t.kind() == TermKind::Lam || t.kind() == TermKind::Fix) out.insert(t.name());
  for (const auto& k : t.kids()) term_binders(k, out);
}

void check_unbound(const Derivation& d, const std::string& x) {
  if (!is_term_rule(d.rule)) return;
  if (d.ctx.count(x)) throw ScriptError(d.pos.str() + ": " + x + " is already in the context");
  for (const auto& p : d.premises) check_unbound(p, x);
}

// A Nat variable can sit in every context since Nat types sum to
// themselves. Other types follow one premise; above an abstraction or a
// fixpoint, whose context is a sum of copies, a subsumption adds them.
void weaken_rec(Derivation& d, const std::string& x, const ModalType& type) {
  if (!is_term_rule(d.rule)) return;
  if (!type.is_nat() && (d.rule == Rule::Lam || d.rule == Rule::Fix || d.rule == Rule::FixGen)) {
    Derivation wrap;
    wrap.rule = Rule::Subs;
    wrap.vars = std::move(d.vars);
    wrap.hyps = std::move(d.hyps);
    d.vars.reset();
    d.hyps.reset();
    wrap.ctx = d.ctx;
    wrap.ctx.emplace(x, type);
    wrap.weight = d.weight;
    wrap.term = d.term;
    wrap.type = d.type;
    wrap.pos = d.pos;
    wrap.premises.push_back(std::move(d));
    d = std::move(wrap);
    return;
  }
  d.ctx.emplace(x, type);
  if (type.is_nat()) {
    for (auto& p : d.premises) weaken_rec(p, x, type);
  } else if (!d.premises.empty() && d.rule != Rule::Subs) {
    weaken_rec(d.premises[0], x, type);
  }
}

}  // namespace

Derivation instantiate(const Derivation& d, const std::map<std::string, Nat>& values) {
  std::map<std::string, Index> sigma;
  for (const auto& [x, n] : values) {
    if (!d.vars || !d.vars->count(x))
      throw ScriptError("cannot instantiate " + x + ": not an index variable of the derivation");
    sigma.emplace(x, Index::lit(n));
  }
  Derivation out = d;
  instantiate_rec(out, sigma);
  return out;
}

Derivation strengthen(const Derivation& d, const ConstraintSet& extra) {
  Derivation out = d;
  VarSet vars = d.vars.value_or(VarSet{});
  for (const auto& c : extra) {
    std::set<std::string> fv = free_vars(c.lhs);
    collect_free_vars(c.rhs, fv);
    for (const auto& v : fv) {
      if (!vars.count(v)) throw ScriptError("constraint mentions unknown variable " + v);
    }
  }
  if (!out.hyps) out.hyps = ConstraintSet{};
  out.hyps->insert(out.hyps->end(), extra.begin(), extra.end());
  return out;
}

Derivation weaken(const Derivation& d, const std::string& x, const ModalType& type) {
  if (!is_term_rule(d.rule)) throw ScriptError("weakening applies to term derivations");
  if (d.term) {
    std::set<std::string> bound;
    term_binders(*d.term, bound);
    if (bound.count(x)) throw ScriptError(x + " is bound in the term");
  }
  check_unbound(d, x);
  Derivation out = d;
  weaken_rec(out, x, type);
  return out;
}

PcfDerivation erase(const Derivation& d) {
  if (!is_term_rule(d.rule)) throw ScriptError("only term derivations erase to PCF");
  if (d.rule == Rule::Subs && d.premises.size() == 1) return erase(d.premises[0]);
  if (!d.term || !d.type) throw ScriptError(d.pos.str() + ": incomplete term node");
  PcfDerivation out;
  out.rule = d.rule;
  for (const auto& [x, t] : d.ctx) out.ctx.emplace(x, erase_type(t));
  out.term = *d.term;
  out.type = erase_type(*d.type);
  for (const auto& p : d.premises) out.premises.push_back(erase(p));
  return out;
}

std::optional<std::string> validate_pcf_derivation(const PcfDerivation& d) {
  const std::string at = to_string(d.term) + ": ";
  bool typed = false;
  try {
    typed = has_pcf_type(d.term, d.type, d.ctx);
  } catch (const TypeError&) {
  }
  if (!typed) return at + "not of type " + to_string(d.type);
  auto arity = [&](std::size_t n) { return d.premises.size() == n; };
  auto subterm = [&](std::size_t k, const Term& t) { return d.premises[k].term == t; };
  const SimpleType nat = SimpleType::nat();
  switch (d.rule) {
    case Rule::Ax: {
      auto it = d.ctx.find(d.term.name());
      if (!arity(0) || d.term.kind() != TermKind::Var || it == d.ctx.end() || it->second != d.type)
        return at + "bad axiom";
      break;
    }
    case Rule::Const:
      if (!arity(0) || d.term.kind() != TermKind::Num || d.type != nat) return at + "bad numeral";
      break;
    case Rule::Lam: {
      if (!arity(1) || d.term.kind() != TermKind::Lam || d.type.kind() != SimpleType::Kind::Arrow)
        return at + "bad abstraction";
      SimpleContext inner = d.ctx;
      inner.insert_or_assign(d.term.name(), d.type.dom());
      const PcfDerivation& p = d.premises[0];
      if (!subterm(0, d.term.body()) || p.ctx != inner || p.type != d.type.cod())
        return at + "abstraction premise does not match";
      break;
    }
    case Rule::Fix: {
      if (!arity(1) || d.term.kind() != TermKind::Fix) return at + "bad fixpoint";
      SimpleContext inner = d.ctx;
      inner.insert_or_assign(d.term.name(), d.type);
      const PcfDerivation& p = d.premises[0];
      if (!subterm(0, d.term.body()) || p.ctx != inner || p.type != d.type)
        return at + "fixpoint premise does not match";
      break;
    }
    case Rule::App: {
      if (!arity(2) || d.term.kind() != TermKind::App || !subterm(0, d.term.kid(0)) ||
          !subterm(1, d.term.kid(1)))
        return at + "bad application";
      if (d.premises[0].type != SimpleType::arrow(d.premises[1].type, d.type))
        return at + "application types do not match";
      break;
    }
    case Rule::If: {
      if (!arity(3) || d.term.kind() != TermKind::Ifz) return at + "bad conditional";
      for (std::size_t k = 0; k < 3; ++k) {
        if (!subterm(k, d.term.kid(k))) return at + "bad conditional";
      }
      if (d.premises[0].type != nat || d.premises[1].type != d.type ||
          d.premises[2].type != d.type)
        return at + "conditional types do not match";
      break;
    }
    case Rule::Succ:
    case Rule::Pred:
      if (!arity(1) || !subterm(0, d.term.kid(0)) || d.premises[0].type != nat || d.type != nat)
        return at + "bad successor or predecessor";
      break;
    default:
      return at + "unexpected rule " + to_string(d.rule);
  }
  for (const auto& p : d.premises) {
    // Premise contexts may only extend the conclusion's with the bound variable.
    for (const auto& [x, t] : p.ctx) {
      bool binder = (d.rule == Rule::Lam || d.rule == Rule::Fix) && x == d.term.name();
      auto it = d.ctx.find(x);
      if (!binder && (it == d.ctx.end() || it->second != t))
        return at + "premise context disagrees on " + x;
    }
    if (auto problem = validate_pcf_derivation(p)) return problem;
  }
  return std::nullopt;
}

}  // namespace dlpcf
