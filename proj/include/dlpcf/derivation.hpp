#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dlpcf/sexpr.hpp"
#include "dlpcf/types.hpp"

namespace dlpcf {

enum class Rule {
  Ax,
  Subs,
  Lam,
  App,
  If,
  Const,
  Succ,
  Pred,
  Fix,
  FixGen,
  Closure,
  Process,
  StackEmpty,
  StackSubs,
  StackArg,
  StackFun,
  StackFork,
  StackS,
  StackP
};

std::string to_string(Rule r);
std::optional<Rule> rule_from_name(std::string_view name);
bool is_term_rule(Rule r);
bool is_stack_rule(Rule r);

// One node of an annotated derivation. Variables and constraints are
// inherited from the rule schema of the parent when absent.
struct Derivation {
  Rule rule = Rule::Ax;
  std::optional<VarSet> vars;
  std::optional<ConstraintSet> hyps;
  Context ctx;
  std::optional<Index> weight;
  std::optional<Term> term;
  // Term, closure and process type; output type of a stack.
  std::optional<ModalType> type;
  // Input type of a stack.
  std::optional<ModalType> input;

  // Fix: recursion variable and tree size H.
  std::optional<std::string> binder;
  std::optional<Index> bound;
  // Explicit sum results, per context variable, used as witnesses.
  std::map<std::string, ModalType> sums;

  // Closure: environment, most recent binding first. env[k] is a closure
  // derivation for env_names[k].
  std::vector<std::string> env_names;
  std::vector<Derivation> env;

  std::vector<Derivation> premises;
  SourcePos pos;
};

struct Driver {
  // Root index variables whose values are passed as numeral arguments.
  std::vector<std::string> args;
};

struct NamedDerivation {
  std::string name;
  Derivation root;
};

struct Sequence {
  std::string name;
  std::vector<Derivation> processes;
};

struct Script {
  EquationalProgram ep;
  std::vector<NamedDerivation> derivations;
  std::vector<Sequence> sequences;
  std::optional<Driver> driver;
};

// Throws ScriptError, with a position, on malformed scripts and embedded
// syntax. (include "file") is resolved against base_dir.
Script load_script(std::string_view text, const std::string& base_dir = "");
Script load_script_file(const std::string& path);

Derivation derivation_from_sexpr(const SExpr& e);
SExpr to_sexpr(const Derivation& d);
std::string format_script(const Script& s);

}  // namespace dlpcf
