#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dlpcf/common.hpp"

namespace dlpcf {

enum class IndexKind { Var, Lit, Add, Monus, Mul, IfLe, Call, Sum, Forest };

class Index;

struct IndexNode {
  IndexKind kind;
  Nat lit = 0;
  // Variable name, called symbol, or the binder of Sum / Forest.
  std::string name;
  // Add/Monus/Mul: {lhs, rhs}; IfLe: {i, j, then, else}; Call: arguments;
  // Sum: {bound, body}; Forest: {start, count, body}.
  std::vector<Index> kids;
};

// Immutable, cheaply copyable handle on an index term.
class Index {
 public:
  Index() : Index(lit(0)) {}

  static Index var(std::string name);
  static Index lit(Nat n);
  static Index add(Index l, Index r);
  static Index monus(Index l, Index r);
  static Index mul(Index l, Index r);
  static Index ifle(Index i, Index j, Index then, Index otherwise);
  static Index call(std::string symbol, std::vector<Index> args);
  static Index sum(std::string binder, Index bound, Index body);
  static Index forest(std::string binder, Index start, Index count, Index body);

  IndexKind kind() const { return node_->kind; }
  Nat literal() const { return node_->lit; }
  const std::string& name() const { return node_->name; }
  const std::vector<Index>& kids() const { return node_->kids; }
  const Index& kid(std::size_t i) const { return node_->kids[i]; }
  const IndexNode* node() const { return node_.get(); }

  bool is_lit(Nat n) const { return kind() == IndexKind::Lit && literal() == n; }

  friend bool operator==(const Index& a, const Index& b);
  friend bool operator!=(const Index& a, const Index& b) { return !(a == b); }

 private:
  explicit Index(std::shared_ptr<const IndexNode> n) : node_(std::move(n)) {}
  static Index make(IndexNode n);

  std::shared_ptr<const IndexNode> node_;
};

inline Index operator+(Index l, Index r) { return Index::add(std::move(l), std::move(r)); }
inline Index operator*(Index l, Index r) { return Index::mul(std::move(l), std::move(r)); }

std::string to_string(const Index& i);
std::set<std::string> free_vars(const Index& i);
void collect_free_vars(const Index& i, std::set<std::string>& out);
bool occurs_free(const Index& i, std::string_view a);

// Capture-avoiding I{J/a}. Binders are renamed by appending primes.
Index subst_index(const Index& i, const std::string& a, const Index& j);
Index subst_index(const Index& i, const std::map<std::string, Index>& sigma);

// A name not in `avoid`, obtained from `base` by appending primes.
std::string fresh_name(const std::string& base, const std::set<std::string>& avoid);

struct Definition {
  std::string symbol;
  std::vector<std::string> params;
  Index body;
};

class EquationalProgram {
 public:
  EquationalProgram() = default;
  explicit EquationalProgram(std::vector<Definition> defs);

  const std::vector<Definition>& definitions() const { return defs_; }
  const Definition* find(std::string_view symbol) const;

  // Throws IndexError on duplicate or reserved symbols, arity mismatches,
  // calls to undefined symbols and body variables that are not parameters.
  void validate() const;

  // Checks that every call in `i` targets a defined symbol with the right arity.
  void check_calls(const Index& i) const;

 private:
  std::vector<Definition> defs_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

std::string to_string(const EquationalProgram& ep);

using Assignment = std::map<std::string, Nat>;

inline constexpr Nat kDefaultFuel = 1'000'000;

struct EvalResult {
  std::optional<Nat> value;
  // Set when evaluation gave up (fuel, recursion depth or overflow) rather
  // than completing.
  bool exhausted = false;
};

struct Binding {
  std::string_view name;
  Nat value;
};

// Evaluator with a per-call fuel budget. Scopes are passed as binding stacks
// so that enumeration loops can mutate values in place. Forest values are
// cached by node address, so evaluated indices must outlive the evaluator.
class Evaluator {
 public:
  Evaluator(const EquationalProgram& ep, Nat fuel) : ep_(ep), fuel_limit_(fuel) {}

  EvalResult eval(const Index& i, std::vector<Binding>& scope);
  EvalResult eval(const Index& i, const Assignment& rho);

 private:
  std::optional<Nat> go(const IndexNode& n, std::vector<Binding>& scope, std::size_t base);
  std::optional<Nat> lookup(const std::string& name, const std::vector<Binding>& scope,
                            std::size_t base) const;
  bool tick();
  std::optional<Nat> forest(const IndexNode& n, std::vector<Binding>& scope, std::size_t base);

  struct ForestKey {
    const IndexNode* node;
    std::vector<Nat> env;
    bool operator==(const ForestKey&) const = default;
  };
  struct ForestKeyHash {
    std::size_t operator()(const ForestKey& k) const;
  };

  const EquationalProgram& ep_;
  // Forest values are memoized on the values of their free variables.
  std::unordered_map<const IndexNode*, std::vector<std::string>> forest_vars_;
  std::unordered_map<ForestKey, Nat, ForestKeyHash> forest_memo_;
  Nat fuel_limit_;
  Nat fuel_ = 0;
  int depth_ = 0;
  bool exhausted_ = false;
};

std::optional<Nat> eval_index(const Index& i, const Assignment& rho,
                              const EquationalProgram& ep, Nat fuel = kDefaultFuel);
std::optional<Nat> eval_sum(const std::string& a, const Index& bound, const Index& body,
                            const Assignment& rho, const EquationalProgram& ep,
                            Nat fuel = kDefaultFuel);
std::optional<Nat> eval_forest(const std::string& a, const Index& start, const Index& count,
                               const Index& body, const Assignment& rho,
                               const EquationalProgram& ep, Nat fuel = kDefaultFuel);

Index parse_index(std::string_view text);
EquationalProgram parse_ep(std::string_view text);

bool is_reserved_index_name(std::string_view name);

}  // namespace dlpcf
