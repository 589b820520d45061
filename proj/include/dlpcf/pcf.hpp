#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dlpcf/common.hpp"

namespace dlpcf {

enum class TermKind { Var, Num, Lam, Fix, App, Succ, Pred, Ifz };

class Term;

struct TermNode {
  TermKind kind;
  Nat num = 0;
  // Variable name, or the binder of Lam / Fix.
  std::string name;
  // Lam/Fix: {body}; App: {fun, arg}; Succ/Pred: {t}; Ifz: {t, zero, succ}.
  std::vector<Term> kids;
};

class Term {
 public:
  Term() : Term(num(0)) {}

  static Term var(std::string name);
  static Term num(Nat n);
  static Term lam(std::string x, Term body);
  static Term fix(std::string x, Term body);
  static Term app(Term f, Term a);
  static Term succ(Term t);
  static Term pred(Term t);
  static Term ifz(Term t, Term zero, Term succ);

  TermKind kind() const { return node_->kind; }
  Nat numeral() const { return node_->num; }
  const std::string& name() const { return node_->name; }
  const std::vector<Term>& kids() const { return node_->kids; }
  const Term& kid(std::size_t i) const { return node_->kids[i]; }
  const Term& body() const { return node_->kids[0]; }

  bool is_value() const {
    return kind() == TermKind::Num || kind() == TermKind::Lam || kind() == TermKind::Fix;
  }

  // Identity of the shared node; equal nodes are always equal terms.
  const TermNode* node() const { return node_.get(); }

  friend bool operator==(const Term& a, const Term& b);
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

 private:
  explicit Term(std::shared_ptr<const TermNode> n) : node_(std::move(n)) {}
  static Term make(TermNode n);

  std::shared_ptr<const TermNode> node_;
};

// Applies f to each argument in turn: f a1 a2 ...
Term apply(Term f, const std::vector<Term>& args);

std::string to_string(const Term& t);
Term parse_term(std::string_view text);

std::set<std::string> free_vars(const Term& t);
bool is_closed(const Term& t);

// Capture-avoiding t{v/x}.
Term subst_term(const Term& t, const std::string& x, const Term& v);

Nat msize(const Term& t);
Nat tsize(const Term& t);

// One call-by-value step, function position first; absent on values and
// stuck terms.
std::optional<Term> step_cbv(const Term& t);

enum class RunStatus { Value, Stuck, Budget };

std::string to_string(RunStatus s);

struct CbvResult {
  std::optional<Term> value;
  Nat steps = 0;
  RunStatus status = RunStatus::Value;
  // The term reached when evaluation stopped.
  Term last;
};

CbvResult eval_cbv(const Term& t, Nat max_steps);

// Simple types. Variables only appear in inferred types.
class SimpleType {
 public:
  enum class Kind { Nat, Arrow, Var };

  static SimpleType nat();
  static SimpleType arrow(SimpleType dom, SimpleType cod);
  static SimpleType var(int id);

  Kind kind() const { return node_->kind; }
  int var_id() const { return node_->id; }
  const SimpleType& dom() const { return node_->kids[0]; }
  const SimpleType& cod() const { return node_->kids[1]; }

  friend bool operator==(const SimpleType& a, const SimpleType& b);
  friend bool operator!=(const SimpleType& a, const SimpleType& b) { return !(a == b); }

 private:
  struct Node {
    Kind kind;
    int id = 0;
    std::vector<SimpleType> kids;
  };
  explicit SimpleType(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// Variables are printed 'a, 'b, ... in order of first occurrence.
std::string to_string(const SimpleType& t);

using SimpleContext = std::map<std::string, SimpleType>;

// Most general type; throws TypeError.
SimpleType infer_pcf(const Term& t, const SimpleContext& ctx = {});

// Checks t : expected under ctx (instantiating inferred variables).
bool has_pcf_type(const Term& t, const SimpleType& expected, const SimpleContext& ctx = {});

bool is_term_keyword(std::string_view name);

}  // namespace dlpcf
