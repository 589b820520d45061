#include "dlpcf/entail.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <set>

namespace dlpcf {

std::string to_string(const Constraint& c) {
  return to_string(c.lhs) + " <= " + to_string(c.rhs);
}

std::string to_string(const EntailmentVerdict& v) {
  if (auto* ok = std::get_if<Valid>(&v)) {
    return ok->exact ? "valid (exact)" : "valid (bound " + std::to_string(ok->bound) + ")";
  }
  if (auto* bad = std::get_if<Invalid>(&v)) {
    if (bad->counterexample.empty()) return "invalid";
    std::string out = "invalid:";
    for (const auto& [name, value] : bad->counterexample) {
      out += " " + name + "=" + std::to_string(value);
    }
    return out;
  }
  return "unknown: " + std::get<Unknown>(v).reason;
}

EntailConfig default_entail_config() {
  EntailConfig config;
  if (const char* env = std::getenv("DLPCF_BOUND")) {
    char* end = nullptr;
    unsigned long long b = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0') config.bound = b;
  }
  return config;
}

namespace {

struct Hyp {
  const Constraint* c;
  VarSet vars;
};

enum class Truth { True, False, GaveUp };

class Search {
 public:
  Search(const EquationalProgram& ep, const EntailConfig& config)
      : ev_(ep, config.fuel), bound_(config.bound) {}

  Truth holds(const Constraint& c, std::vector<Binding>& scope) {
    auto l = ev_.eval(c.lhs, scope);
    if (l.exhausted) return Truth::GaveUp;
    auto r = ev_.eval(c.rhs, scope);
    if (r.exhausted) return Truth::GaveUp;
    if (!l.value || !r.value) return Truth::False;
    return *l.value <= *r.value ? Truth::True : Truth::False;
  }

  // Enumerates every assignment of `order` (checking each hypothesis as soon
  // as its last variable is set) and calls `leaf` on survivors. `leaf`
  // returns false to stop the search.
  // `fixed` bindings are visible to every hypothesis but not enumerated.
  template <class Leaf>
  void enumerate(const std::vector<std::string>& order, const std::vector<Hyp>& hyps, Leaf&& leaf,
                 const std::vector<Binding>& fixed = {}) {
    std::vector<std::vector<const Constraint*>> at_depth(order.size() + 1);
    for (const auto& h : hyps) {
      std::size_t depth = 0;
      for (std::size_t k = 0; k < order.size(); ++k) {
        if (h.vars.count(order[k])) depth = k + 1;
      }
      at_depth[depth].push_back(h.c);
    }
    std::vector<Binding> scope;
    scope.reserve(order.size() + 16);
    for (const auto& v : order) scope.push_back({v, 0});
    scope.insert(scope.end(), fixed.begin(), fixed.end());
    for (const Constraint* c : at_depth[0]) {
      Truth t = holds(*c, scope);
      if (t == Truth::GaveUp) gave_up_ = true;
      if (t != Truth::True) return;
    }
    stop_ = false;
    descend(0, order, at_depth, scope, leaf);
  }

  bool gave_up() const { return gave_up_; }
  void note_gave_up() { gave_up_ = true; }

 private:
  template <class Leaf>
  void descend(std::size_t d, const std::vector<std::string>& order,
               const std::vector<std::vector<const Constraint*>>& at_depth,
               std::vector<Binding>& scope, Leaf& leaf) {
    if (d == order.size()) {
      if (!leaf(scope)) stop_ = true;
      return;
    }
    for (Nat v = 0; v <= bound_ && !stop_; ++v) {
      scope[d].value = v;
      bool ok = true;
      for (const Constraint* c : at_depth[d + 1]) {
        Truth t = holds(*c, scope);
        if (t == Truth::GaveUp) gave_up_ = true;
        if (t != Truth::True) {
          ok = false;
          break;
        }
      }
      if (ok) descend(d + 1, order, at_depth, scope, leaf);
    }
  }

  Evaluator ev_;
  Nat bound_;
  bool gave_up_ = false;
  bool stop_ = false;
};

// Variable order that lets hypotheses be checked as early as possible.
std::vector<std::string> search_order(const VarSet& vars, const std::vector<Hyp>& hyps) {
  std::vector<std::string> order;
  VarSet placed;
  while (order.size() < vars.size()) {
    const std::string* best = nullptr;
    int best_score = -1;
    for (const auto& v : vars) {
      if (placed.count(v)) continue;
      int score = 0;
      for (const auto& h : hyps) {
        if (!h.vars.count(v)) continue;
        bool completes = std::all_of(h.vars.begin(), h.vars.end(), [&](const std::string& w) {
          return w == v || placed.count(w);
        });
        if (completes) ++score;
      }
      if (score > best_score) {
        best = &v;
        best_score = score;
      }
    }
    placed.insert(*best);
    order.push_back(*best);
  }
  return order;
}

std::string describe(const std::vector<Binding>& scope) {
  std::vector<std::pair<std::string, Nat>> sorted;
  for (const auto& b : scope) sorted.emplace_back(std::string(b.name), b.value);
  std::sort(sorted.begin(), sorted.end());
  std::string out;
  for (const auto& [n, v] : sorted) {
    if (!out.empty()) out += ", ";
    out += n + "=" + std::to_string(v);
  }
  return out.empty() ? "the empty assignment" : out;
}

// True when `i` is defined under every assignment: no forests, and calls
// only to symbols whose definitions are total and do not recurse.
bool total(const Index& i, const EquationalProgram& ep, std::set<std::string>& open) {
  switch (i.kind()) {
    case IndexKind::Forest:
      return false;
    case IndexKind::Call: {
      const Definition* d = ep.find(i.node()->name);
      if (!d || d->params.size() != i.node()->kids.size()) return false;
      if (!open.insert(d->symbol).second) return false;
      bool ok = total(d->body, ep, open);
      open.erase(d->symbol);
      if (!ok) return false;
      break;
    }
    default:
      break;
  }
  for (const auto& k : i.node()->kids) {
    if (!total(k, ep, open)) return false;
  }
  return true;
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

EntailmentVerdict entails(const VarSet& phi, const ConstraintSet& hyps, const Constraint& goal,
                          const EquationalProgram& ep, const EntailConfig& config) {
  std::vector<Hyp> all;
  all.reserve(hyps.size());
  for (const auto& c : hyps) {
    VarSet vs = free_vars(c.lhs);
    collect_free_vars(c.rhs, vs);
    all.push_back({&c, std::move(vs)});
  }
  VarSet goal_vars = free_vars(goal.lhs);
  collect_free_vars(goal.rhs, goal_vars);

  auto check_scope = [&](const VarSet& vs) {
    for (const auto& v : vs) {
      if (!phi.count(v)) throw IndexError("index variable '" + v + "' is not in scope");
    }
  };
  check_scope(goal_vars);
  for (const auto& h : all) check_scope(h.vars);

  if (goal.lhs == goal.rhs) {
    std::set<std::string> open;
    if (total(goal.lhs, ep, open)) return Valid{config.bound, true};
  }

  Search search(ep, config);
  std::string unknown_reason;

  // Closed hypotheses.
  std::vector<Hyp> open;
  {
    std::vector<Binding> empty;
    for (auto& h : all) {
      if (!h.vars.empty()) {
        open.push_back(std::move(h));
        continue;
      }
      Truth t = search.holds(*h.c, empty);
      if (t == Truth::False) return Valid{config.bound, true};
      if (t == Truth::GaveUp) {
        return Unknown{"evaluation gave up on hypothesis " + to_string(*h.c)};
      }
    }
  }

  // Split variables into independent components.
  std::vector<std::string> vars;
  {
    VarSet used = goal_vars;
    for (const auto& h : open) used.insert(h.vars.begin(), h.vars.end());
    vars.assign(used.begin(), used.end());
  }
  auto index_of = [&](const std::string& v) {
    return static_cast<std::size_t>(std::lower_bound(vars.begin(), vars.end(), v) - vars.begin());
  };
  UnionFind uf(vars.size());
  auto link = [&](const VarSet& vs) {
    if (vs.empty()) return;
    std::size_t first = index_of(*vs.begin());
    for (const auto& v : vs) uf.unite(first, index_of(v));
  };
  link(goal_vars);
  for (const auto& h : open) link(h.vars);

  std::optional<std::size_t> goal_root;
  if (!goal_vars.empty()) goal_root = uf.find(index_of(*goal_vars.begin()));

  VarSet goal_component;
  std::vector<Hyp> goal_hyps;
  std::map<std::size_t, std::pair<VarSet, std::vector<Hyp>>> others;
  for (const auto& v : vars) {
    std::size_t r = uf.find(index_of(v));
    if (goal_root && r == *goal_root) {
      goal_component.insert(v);
    } else {
      others[r].first.insert(v);
    }
  }
  for (auto& h : open) {
    std::size_t r = uf.find(index_of(*h.vars.begin()));
    if (goal_root && r == *goal_root) {
      goal_hyps.push_back(std::move(h));
    } else {
      others[r].second.push_back(std::move(h));
    }
  }

  // The goal only reads its own variables, so the search runs over those
  // and the hypotheses they alone decide. The rest of the component is
  // searched for a witness only where the goal fails.
  std::vector<Hyp> goal_only;
  std::vector<Hyp> linked;
  for (auto& h : goal_hyps) {
    bool inside = std::all_of(h.vars.begin(), h.vars.end(),
                              [&](const std::string& v) { return goal_vars.count(v) > 0; });
    (inside ? goal_only : linked).push_back(std::move(h));
  }
  VarSet rest;
  for (const auto& v : goal_component) {
    if (!goal_vars.count(v)) rest.insert(v);
  }
  std::vector<std::string> rest_order(rest.begin(), rest.end());

  // Least counterexample over the goal variables, compared in sorted-name
  // order so the result does not depend on the search order.
  std::vector<std::string> order = search_order(goal_vars, goal_only);
  std::vector<std::size_t> sorted_pos(order.size());
  std::iota(sorted_pos.begin(), sorted_pos.end(), 0);
  std::sort(sorted_pos.begin(), sorted_pos.end(),
            [&](std::size_t a, std::size_t b) { return order[a] < order[b]; });
  std::optional<std::vector<Nat>> best;
  std::vector<Binding> best_rest;
  search.enumerate(order, goal_only, [&](std::vector<Binding>& scope) {
    Truth t = search.holds(goal, scope);
    if (t == Truth::True) return true;
    std::vector<Nat> cand;
    cand.reserve(order.size());
    for (std::size_t p : sorted_pos) cand.push_back(scope[p].value);
    if (t == Truth::False && best && !(cand < *best)) return true;

    std::vector<Binding> fixed(scope.begin(), scope.begin() + static_cast<long>(order.size()));
    std::optional<std::vector<Binding>> witness;
    Search ext(ep, config);
    ext.enumerate(rest_order, linked, [&](std::vector<Binding>& s) {
      witness.emplace(s.begin(), s.begin() + static_cast<long>(rest_order.size()));
      return false;
    }, fixed);
    if (!witness) {
      if (ext.gave_up()) {
        search.note_gave_up();
        if (unknown_reason.empty()) {
          unknown_reason = "evaluation gave up on a hypothesis at " + describe(fixed);
        }
      }
      return true;
    }
    if (t == Truth::GaveUp) {
      search.note_gave_up();
      if (unknown_reason.empty()) {
        unknown_reason = "evaluation gave up on goal at " + describe(scope);
      }
      return true;
    }
    best = std::move(cand);
    best_rest = std::move(*witness);
    return true;
  });
  if (search.gave_up() && unknown_reason.empty()) {
    unknown_reason = "evaluation gave up on a hypothesis";
  }

  if (!best) {
    if (search.gave_up()) return Unknown{unknown_reason};
    return Valid{config.bound, goal_component.empty()};
  }

  Assignment cex;
  for (const auto& v : phi) cex[v] = 0;
  for (std::size_t k = 0; k < sorted_pos.size(); ++k) cex[order[sorted_pos[k]]] = (*best)[k];
  for (const auto& b : best_rest) cex[std::string(b.name)] = b.value;

  // Every other component only needs its least satisfying assignment.
  for (auto& [root, comp] : others) {
    std::vector<std::string> sorted(comp.first.begin(), comp.first.end());
    bool found = false;
    Search sat(ep, config);
    sat.enumerate(sorted, comp.second, [&](std::vector<Binding>& scope) {
      for (const auto& b : scope) cex[std::string(b.name)] = b.value;
      found = true;
      return false;
    });
    if (!found) {
      if (sat.gave_up() || search.gave_up()) {
        return Unknown{"could not establish satisfiability of the hypotheses"};
      }
      return Valid{config.bound, false};
    }
  }
  return Invalid{std::move(cex)};
}

EntailmentVerdict defined(const VarSet& phi, const ConstraintSet& hyps, const Index& i,
                          const EquationalProgram& ep, const EntailConfig& config) {
  return entails(phi, hyps, Constraint{i, i}, ep, config);
}

}  // namespace dlpcf
