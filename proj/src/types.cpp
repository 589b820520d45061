#include "dlpcf/types.hpp"

#include <unordered_map>

#include "parse_internal.hpp"

namespace dlpcf {

using detail::Lexer;

ModalType ModalType::nat(Index lo, Index hi) {
  return ModalType(std::make_shared<const ModalNode>(
      ModalNode{TypeKind::Nat, "", {std::move(lo), std::move(hi)}, {}}));
}

ModalType ModalType::banged(std::string binder, Index bound, ModalType dom, ModalType cod) {
  return ModalType(std::make_shared<const ModalNode>(ModalNode{
      TypeKind::Banged, std::move(binder), {std::move(bound)}, {std::move(dom), std::move(cod)}}));
}

bool operator==(const ModalType& a, const ModalType& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  if (a.is_nat()) return a.lo() == b.lo() && a.hi() == b.hi();
  return a.binder() == b.binder() && a.bound() == b.bound() && a.dom() == b.dom() &&
         a.cod() == b.cod();
}

std::string to_string(const ModalType& t) {
  if (t.is_nat()) {
    if (t.lo() == t.hi()) return "Nat[" + to_string(t.lo()) + "]";
    return "Nat[" + to_string(t.lo()) + ", " + to_string(t.hi()) + "]";
  }
  return "[" + t.binder() + " < " + to_string(t.bound()) + "] (" + to_string(t.dom()) +
         " -o " + to_string(t.cod()) + ")";
}

namespace {

// A parenthesized group may hold a modal type or a bare linear type, so the
// parser works on either.
struct Item {
  std::optional<ModalType> modal;
  std::optional<LinearType> linear;
};

Item parse_item(Lexer& lx);

ModalType parse_modal(Lexer& lx) {
  Item it = parse_item(lx);
  if (!it.modal) lx.fail("expected a modal type, found a linear type");
  return *it.modal;
}

LinearType to_linear(Lexer& lx, Item it) {
  if (it.linear) return *it.linear;
  lx.expect_sym("-o");
  return {*it.modal, parse_modal(lx)};
}

Item parse_item(Lexer& lx) {
  if (lx.accept_ident("Nat")) {
    lx.expect_sym("[");
    Index lo = detail::parse_index_expr(lx);
    Index hi = lo;
    if (lx.accept_sym(",")) hi = detail::parse_index_expr(lx);
    lx.expect_sym("]");
    return {ModalType::nat(lo, hi), std::nullopt};
  }
  if (lx.accept_sym("[")) {
    std::string a = lx.expect_name();
    lx.expect_sym("<");
    Index bound = detail::parse_index_expr(lx);
    lx.expect_sym("]");
    return {bang(a, bound, to_linear(lx, parse_item(lx))), std::nullopt};
  }
  if (lx.accept_sym("(")) {
    Item it = parse_item(lx);
    if (it.modal && lx.at_sym("-o")) it = {std::nullopt, to_linear(lx, it)};
    lx.expect_sym(")");
    return it;
  }
  lx.fail("expected a type");
}

}  // namespace

ModalType parse_type(std::string_view text) {
  Lexer lx(text);
  ModalType t = parse_modal(lx);
  lx.expect_end();
  return t;
}

void collect_free_vars(const ModalType& t, std::set<std::string>& out) {
  if (t.is_nat()) {
    collect_free_vars(t.lo(), out);
    collect_free_vars(t.hi(), out);
    return;
  }
  collect_free_vars(t.bound(), out);
  std::set<std::string> inner;
  collect_free_vars(t.dom(), inner);
  collect_free_vars(t.cod(), inner);
  inner.erase(t.binder());
  out.insert(inner.begin(), inner.end());
}

std::set<std::string> free_vars(const ModalType& t) {
  std::set<std::string> out;
  collect_free_vars(t, out);
  return out;
}

ModalType subst_type(const ModalType& t, const std::map<std::string, Index>& sigma) {
  if (sigma.empty()) return t;
  if (t.is_nat()) return ModalType::nat(subst_index(t.lo(), sigma), subst_index(t.hi(), sigma));
  Index bound = subst_index(t.bound(), sigma);
  std::map<std::string, Index> inner = sigma;
  inner.erase(t.binder());
  std::set<std::string> image_fv;
  for (const auto& [x, img] : inner) collect_free_vars(img, image_fv);
  std::string a = t.binder();
  if (image_fv.count(a)) {
    std::set<std::string> avoid = image_fv;
    collect_free_vars(t.dom(), avoid);
    collect_free_vars(t.cod(), avoid);
    for (const auto& [x, img] : inner) avoid.insert(x);
    a = fresh_name(a, avoid);
    inner[t.binder()] = Index::var(a);
  }
  return ModalType::banged(a, bound, subst_type(t.dom(), inner), subst_type(t.cod(), inner));
}

ModalType subst_type(const ModalType& t, const std::string& a, const Index& i) {
  return subst_type(t, std::map<std::string, Index>{{a, i}});
}

LinearType subst_linear(const LinearType& l, const std::string& a, const Index& i) {
  return {subst_type(l.dom, a, i), subst_type(l.cod, a, i)};
}

SimpleType erase_type(const ModalType& t) {
  if (t.is_nat()) return SimpleType::nat();
  return SimpleType::arrow(erase_type(t.dom()), erase_type(t.cod()));
}

bool same_skeleton(const ModalType& a, const ModalType& b) {
  if (a.kind() != b.kind()) return false;
  if (a.is_nat()) return true;
  return same_skeleton(a.dom(), b.dom()) && same_skeleton(a.cod(), b.cod());
}

std::string to_string(const Context& ctx) {
  std::string out = "{";
  for (const auto& [x, t] : ctx) {
    if (out.size() > 1) out += ", ";
    out += x + " : " + to_string(t);
  }
  return out + "}";
}

void Goals::add(VarSet vars, ConstraintSet hyps, Constraint goal, std::string note) {
  obligations.push_back({std::move(vars), std::move(hyps), std::move(goal), std::move(note)});
}

void Goals::append(Goals other) {
  for (auto& o : other.obligations) obligations.push_back(std::move(o));
  for (auto& f : other.failures) failures.push_back(std::move(f));
}

Constraint less_than(const std::string& a, const Index& bound) {
  return {Index::var(a) + Index::lit(1), bound};
}

Goals index_le_goals(const VarSet& vars, const ConstraintSet& hyps, const Index& i,
                     const Index& j, const std::string& note) {
  Goals g;
  g.add(vars, hyps, {i, j}, note);
  return g;
}

Goals index_eq_goals(const VarSet& vars, const ConstraintSet& hyps, const Index& i,
                     const Index& j, const std::string& note) {
  Goals g;
  g.add(vars, hyps, {i, j}, note);
  g.add(vars, hyps, {j, i}, note);
  return g;
}

namespace {

void subtype_into(Goals& g, const VarSet& vars, const ConstraintSet& hyps,
                  const ModalType& sigma, const ModalType& tau) {
  if (sigma.kind() != tau.kind()) {
    g.fail("skeleton mismatch: " + to_string(sigma) + " vs " + to_string(tau));
    return;
  }
  std::string what = to_string(sigma) + " <: " + to_string(tau);
  if (sigma.is_nat()) {
    g.add(vars, hyps, {tau.lo(), sigma.lo()}, "lower bound of " + what);
    g.add(vars, hyps, {sigma.hi(), tau.hi()}, "upper bound of " + what);
    return;
  }
  g.add(vars, hyps, {tau.bound(), sigma.bound()}, "copies of " + what);
  // Both binders are renamed to one variable that is fresh for the judgement.
  std::set<std::string> avoid(vars.begin(), vars.end());
  for (const auto& h : hyps) {
    collect_free_vars(h.lhs, avoid);
    collect_free_vars(h.rhs, avoid);
  }
  collect_free_vars(sigma, avoid);
  collect_free_vars(tau, avoid);
  std::string a = fresh_name(sigma.binder(), avoid);
  Index va = Index::var(a);
  LinearType l = subst_linear(body_of(sigma), sigma.binder(), va);
  LinearType r = subst_linear(body_of(tau), tau.binder(), va);
  VarSet inner_vars = vars;
  inner_vars.insert(a);
  ConstraintSet inner_hyps = hyps;
  inner_hyps.push_back(less_than(a, tau.bound()));
  subtype_into(g, inner_vars, inner_hyps, r.dom, l.dom);
  subtype_into(g, inner_vars, inner_hyps, l.cod, r.cod);
}

}  // namespace

Goals subtype_goals(const VarSet& vars, const ConstraintSet& hyps, const ModalType& sigma,
                    const ModalType& tau) {
  Goals g;
  subtype_into(g, vars, hyps, sigma, tau);
  return g;
}

Goals equiv_goals(const VarSet& vars, const ConstraintSet& hyps, const ModalType& sigma,
                  const ModalType& tau) {
  Goals g = subtype_goals(vars, hyps, sigma, tau);
  if (!g.structural_ok()) return g;
  g.append(subtype_goals(vars, hyps, tau, sigma));
  return g;
}

std::string to_string(Status s) {
  switch (s) {
    case Status::Valid:
      return "valid";
    case Status::Invalid:
      return "invalid";
    case Status::Unknown:
      return "unknown";
  }
  return "?";
}

TypeVerdict discharge(const Goals& goals, const EquationalProgram& ep,
                      const EntailConfig& config) {
  TypeVerdict v;
  if (!goals.structural_ok()) {
    v.status = Status::Invalid;
    v.reason = goals.failures.front();
    return v;
  }
  for (const auto& o : goals.obligations) {
    EntailmentVerdict e = entails(o.vars, o.hyps, o.goal, ep, config);
    if (is_invalid(e) && v.status != Status::Invalid) {
      v.status = Status::Invalid;
      v.reason = o.note + ": " + to_string(o.goal) + " " + to_string(e);
    } else if (is_unknown(e) && v.status == Status::Valid) {
      v.status = Status::Unknown;
      v.reason = o.note + ": " + to_string(e);
    }
    v.discharged.push_back({o, std::move(e)});
  }
  return v;
}

TypeVerdict subtype(const VarSet& vars, const ConstraintSet& hyps, const ModalType& sigma,
                    const ModalType& tau, const EquationalProgram& ep,
                    const EntailConfig& config) {
  return discharge(subtype_goals(vars, hyps, sigma, tau), ep, config);
}

TypeVerdict type_equiv(const VarSet& vars, const ConstraintSet& hyps, const ModalType& sigma,
                       const ModalType& tau, const EquationalProgram& ep,
                       const EntailConfig& config) {
  return discharge(equiv_goals(vars, hyps, sigma, tau), ep, config);
}

SumWitness sum_witness_for(const ModalType& result, const ModalType& left,
                           const ModalType& right) {
  return {result.binder(), body_of(result), left.bound(), right.bound()};
}

BoundedSumWitness bounded_sum_witness_for(const ModalType& result, const ModalType& sigma) {
  return {result.binder(), body_of(result), sigma.bound()};
}

namespace {

std::set<std::string> linear_fv_except(const LinearType& l, const std::string& c) {
  std::set<std::string> out;
  collect_free_vars(l.dom, out);
  collect_free_vars(l.cod, out);
  out.erase(c);
  return out;
}

}  // namespace

SumResult sum_modal(const ModalType& sigma, const ModalType& tau,
                    const std::optional<SumWitness>& w, const VarSet& vars,
                    const ConstraintSet& hyps) {
  SumResult r;
  if (sigma.kind() != tau.kind()) {
    r.goals.fail("cannot sum " + to_string(sigma) + " and " + to_string(tau));
    return r;
  }
  if (sigma.is_nat()) {
    r.goals = equiv_goals(vars, hyps, sigma, tau);
    for (auto& o : r.goals.obligations) o.note = "sum of equal intervals: " + o.note;
    r.type = sigma;
    return r;
  }
  if (!w) {
    r.goals.fail("sum of " + to_string(sigma) + " and " + to_string(tau) + " needs a witness");
    return r;
  }
  const std::string& c = w->binder;
  ModalType first = bang(c, w->left, w->generic);
  std::set<std::string> avoid = linear_fv_except(w->generic, c);
  collect_free_vars(w->left, avoid);
  std::string b = fresh_name(c, avoid);
  ModalType second =
      bang(b, w->right, subst_linear(w->generic, c, w->left + Index::var(b)));
  r.goals = equiv_goals(vars, hyps, sigma, first);
  r.goals.append(equiv_goals(vars, hyps, tau, second));
  for (auto& o : r.goals.obligations) o.note = "sum witness: " + o.note;
  r.type = bang(c, w->left + w->right, w->generic);
  return r;
}

SumResult bounded_sum_modal(const std::string& a, const Index& bound, const ModalType& sigma,
                            const std::optional<BoundedSumWitness>& w, const VarSet& vars,
                            const ConstraintSet& hyps) {
  SumResult r;
  if (sigma.is_nat()) {
    if (occurs_free(sigma.lo(), a) || occurs_free(sigma.hi(), a)) {
      r.goals.fail("bounded sum over " + a + " of " + to_string(sigma) + " mentions " + a);
      return r;
    }
    r.type = sigma;
    return r;
  }
  if (!w) {
    r.goals.fail("bounded sum of " + to_string(sigma) + " needs a witness");
    return r;
  }
  const std::string& c = w->binder;
  const Index& j = w->bound;
  std::set<std::string> jfv = free_vars(j);
  jfv.insert(a);
  std::string d = fresh_name("d", jfv);
  Index before = Index::sum(d, Index::var(a), subst_index(j, a, Index::var(d)));
  std::set<std::string> avoid = linear_fv_except(w->generic, c);
  avoid.insert(jfv.begin(), jfv.end());
  std::string b = fresh_name(c, avoid);
  ModalType instance = bang(b, j, subst_linear(w->generic, c, Index::var(b) + before));
  VarSet inner_vars = vars;
  inner_vars.insert(a);
  ConstraintSet inner_hyps = hyps;
  inner_hyps.push_back(less_than(a, bound));
  r.goals = equiv_goals(inner_vars, inner_hyps, sigma, instance);
  for (auto& o : r.goals.obligations) o.note = "bounded sum witness: " + o.note;
  r.type = bang(c, Index::sum(a, bound, j), w->generic);
  return r;
}

ContextResult sum_context(const Context& gamma, const Context& delta,
                          const std::map<std::string, SumWitness>& witnesses,
                          const VarSet& vars, const ConstraintSet& hyps) {
  ContextResult r;
  for (const auto& [x, t] : gamma) {
    auto other = delta.find(x);
    if (other == delta.end()) {
      r.ctx.emplace(x, t);
      continue;
    }
    std::optional<SumWitness> w;
    if (auto it = witnesses.find(x); it != witnesses.end()) w = it->second;
    SumResult s = sum_modal(t, other->second, w, vars, hyps);
    for (auto& f : s.goals.failures) f = x + ": " + f;
    r.goals.append(std::move(s.goals));
    if (s.type) r.ctx.emplace(x, *s.type);
  }
  for (const auto& [x, t] : delta) {
    if (!gamma.count(x)) r.ctx.emplace(x, t);
  }
  return r;
}

ContextResult bounded_sum_context(const std::string& a, const Index& bound,
                                  const Context& gamma,
                                  const std::map<std::string, BoundedSumWitness>& witnesses,
                                  const VarSet& vars, const ConstraintSet& hyps) {
  ContextResult r;
  for (const auto& [x, t] : gamma) {
    std::optional<BoundedSumWitness> w;
    if (auto it = witnesses.find(x); it != witnesses.end()) w = it->second;
    SumResult s = bounded_sum_modal(a, bound, t, w, vars, hyps);
    for (auto& f : s.goals.failures) f = x + ": " + f;
    r.goals.append(std::move(s.goals));
    if (s.type) r.ctx.emplace(x, *s.type);
  }
  return r;
}

}  // namespace dlpcf
