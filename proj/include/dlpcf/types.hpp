#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dlpcf/entail.hpp"
#include "dlpcf/pcf.hpp"

namespace dlpcf {

enum class TypeKind { Nat, Banged };

class ModalType;

struct ModalNode {
  TypeKind kind;
  // Nat: interval bounds. Banged: kids {bound}, binder, domain, codomain.
  std::string binder;
  std::vector<Index> indices;
  std::vector<ModalType> parts;
};

// Nat[I,J] or [a<I](sigma -o tau).
class ModalType {
 public:
  static ModalType nat(Index lo, Index hi);
  static ModalType nat(Index n) { return nat(n, n); }
  static ModalType banged(std::string binder, Index bound, ModalType dom, ModalType cod);

  TypeKind kind() const { return node_->kind; }
  bool is_nat() const { return kind() == TypeKind::Nat; }

  const Index& lo() const { return node_->indices[0]; }
  const Index& hi() const { return node_->indices[1]; }

  const std::string& binder() const { return node_->binder; }
  const Index& bound() const { return node_->indices[0]; }
  const ModalType& dom() const { return node_->parts[0]; }
  const ModalType& cod() const { return node_->parts[1]; }

  friend bool operator==(const ModalType& a, const ModalType& b);
  friend bool operator!=(const ModalType& a, const ModalType& b) { return !(a == b); }

 private:
  explicit ModalType(std::shared_ptr<const ModalNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const ModalNode> node_;
};

// The linear body sigma -o tau of a banged type.
struct LinearType {
  ModalType dom;
  ModalType cod;
};

inline LinearType body_of(const ModalType& t) { return {t.dom(), t.cod()}; }
inline ModalType bang(std::string a, Index bound, const LinearType& l) {
  return ModalType::banged(std::move(a), std::move(bound), l.dom, l.cod);
}

std::string to_string(const ModalType& t);
ModalType parse_type(std::string_view text);

std::set<std::string> free_vars(const ModalType& t);
void collect_free_vars(const ModalType& t, std::set<std::string>& out);

ModalType subst_type(const ModalType& t, const std::string& a, const Index& i);
ModalType subst_type(const ModalType& t, const std::map<std::string, Index>& sigma);
LinearType subst_linear(const LinearType& l, const std::string& a, const Index& i);

SimpleType erase_type(const ModalType& t);
bool same_skeleton(const ModalType& a, const ModalType& b);

using Context = std::map<std::string, ModalType>;
std::string to_string(const Context& ctx);

// An index inequality to be discharged under its own variables and
// hypotheses.
struct Obligation {
  VarSet vars;
  ConstraintSet hyps;
  Constraint goal;
  std::string note;
};

// Obligations produced by a syntax-directed check, plus structural failures
// that need no entailment to reject.
struct Goals {
  std::vector<Obligation> obligations;
  std::vector<std::string> failures;

  bool structural_ok() const { return failures.empty(); }
  void fail(std::string why) { failures.push_back(std::move(why)); }
  void add(VarSet vars, ConstraintSet hyps, Constraint goal, std::string note);
  void append(Goals other);
};

// a < I as a constraint.
Constraint less_than(const std::string& a, const Index& bound);

Goals index_le_goals(const VarSet& vars, const ConstraintSet& hyps, const Index& i,
                     const Index& j, const std::string& note);
Goals index_eq_goals(const VarSet& vars, const ConstraintSet& hyps, const Index& i,
                     const Index& j, const std::string& note);

// Decomposes sigma <= tau into index obligations.
Goals subtype_goals(const VarSet& vars, const ConstraintSet& hyps, const ModalType& sigma,
                    const ModalType& tau);
Goals equiv_goals(const VarSet& vars, const ConstraintSet& hyps, const ModalType& sigma,
                  const ModalType& tau);

enum class Status { Valid, Invalid, Unknown };
std::string to_string(Status s);

struct Discharged {
  Obligation obligation;
  EntailmentVerdict verdict;
};

struct TypeVerdict {
  Status status = Status::Valid;
  std::string reason;
  std::vector<Discharged> discharged;
};

TypeVerdict discharge(const Goals& goals, const EquationalProgram& ep,
                      const EntailConfig& config);

TypeVerdict subtype(const VarSet& vars, const ConstraintSet& hyps, const ModalType& sigma,
                    const ModalType& tau, const EquationalProgram& ep,
                    const EntailConfig& config);
TypeVerdict type_equiv(const VarSet& vars, const ConstraintSet& hyps, const ModalType& sigma,
                       const ModalType& tau, const EquationalProgram& ep,
                       const EntailConfig& config);

// sigma (+) tau = [c < I+J] A.
struct SumWitness {
  std::string binder;
  LinearType generic;
  Index left;
  Index right;
};

// sum_{a<I} sigma = [c < sum_{a<I} J] A.
struct BoundedSumWitness {
  std::string binder;
  LinearType generic;
  Index bound;
};

// Witnesses read off an expected result type.
SumWitness sum_witness_for(const ModalType& result, const ModalType& left,
                           const ModalType& right);
BoundedSumWitness bounded_sum_witness_for(const ModalType& result, const ModalType& sigma);

struct SumResult {
  std::optional<ModalType> type;
  Goals goals;
};

SumResult sum_modal(const ModalType& sigma, const ModalType& tau,
                    const std::optional<SumWitness>& w, const VarSet& vars,
                    const ConstraintSet& hyps);
SumResult bounded_sum_modal(const std::string& a, const Index& bound, const ModalType& sigma,
                            const std::optional<BoundedSumWitness>& w, const VarSet& vars,
                            const ConstraintSet& hyps);

struct ContextResult {
  Context ctx;
  Goals goals;
};

ContextResult sum_context(const Context& gamma, const Context& delta,
                          const std::map<std::string, SumWitness>& witnesses,
                          const VarSet& vars, const ConstraintSet& hyps);
ContextResult bounded_sum_context(const std::string& a, const Index& bound,
                                  const Context& gamma,
                                  const std::map<std::string, BoundedSumWitness>& witnesses,
                                  const VarSet& vars, const ConstraintSet& hyps);

}  // namespace dlpcf
