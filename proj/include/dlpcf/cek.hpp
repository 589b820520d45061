#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dlpcf/pcf.hpp"

namespace dlpcf {

struct EnvNode;
struct Closure;

// Persistent environment; lookup finds the most recent binding.
class Env {
 public:
  Env() = default;

  Env bind(std::string x, Closure v) const;
  const Closure* lookup(const std::string& x) const;
  bool empty() const { return !head_; }
  const EnvNode* head() const { return head_.get(); }
  std::size_t length() const;

  friend bool operator==(const Env& a, const Env& b);
  friend bool operator!=(const Env& a, const Env& b) { return !(a == b); }

 private:
  std::shared_ptr<const EnvNode> head_;
};

struct Closure {
  Term term;
  Env env;

  bool is_value() const { return term.is_value(); }

  friend bool operator==(const Closure& a, const Closure& b) {
    return a.term == b.term && a.env == b.env;
  }
  friend bool operator!=(const Closure& a, const Closure& b) { return !(a == b); }
};

struct EnvNode {
  std::string name;
  Closure value;
  Env next;
};

enum class FrameKind { Fun, Arg, Fork, Succ, Pred };

struct Frame {
  FrameKind kind = FrameKind::Succ;
  // Fun: the value closure; Arg: the pending argument.
  Closure closure;
  // Fork: the two branches and their shared environment.
  Term zero;
  Term succ;
  Env env;

  static Frame fun(Closure v) { return {FrameKind::Fun, std::move(v), {}, {}, {}}; }
  static Frame arg(Closure c) { return {FrameKind::Arg, std::move(c), {}, {}, {}}; }
  static Frame fork(Term t, Term u, Env e) {
    return {FrameKind::Fork, {}, std::move(t), std::move(u), std::move(e)};
  }
  static Frame s() { return {FrameKind::Succ, {}, {}, {}, {}}; }
  static Frame p() { return {FrameKind::Pred, {}, {}, {}, {}}; }

  friend bool operator==(const Frame& a, const Frame& b);
};

struct StackNode;

// Persistent stack whose size is cached at every node.
class Stack {
 public:
  Stack() = default;

  Stack push(Frame f) const;
  bool empty() const { return !head_; }
  const Frame& top() const;
  Stack pop() const;
  Nat size() const;
  std::size_t depth() const;
  std::vector<Frame> frames() const;

  friend bool operator==(const Stack& a, const Stack& b);
  friend bool operator!=(const Stack& a, const Stack& b) { return !(a == b); }

 private:
  std::shared_ptr<const StackNode> head_;
};

struct StackNode {
  Frame frame;
  Stack next;
  Nat size = 0;
  std::size_t depth = 0;
};

struct Process {
  Closure closure;
  Stack stack;

  friend bool operator==(const Process& a, const Process& b) {
    return a.closure == b.closure && a.stack == b.stack;
  }
  friend bool operator!=(const Process& a, const Process& b) { return !(a == b); }
};

enum class StepKind { Substitution, Other };

enum class MachineRule {
  Var,
  App,
  Succ,
  Pred,
  Ifz,
  ArgToFun,
  FunLam,
  FunFix,
  ForkZero,
  ForkSucc,
  SuccFrame,
  PredFrame
};

std::string to_string(StepKind k);
std::string to_string(MachineRule r);

struct Step {
  Process next;
  MachineRule rule;
  StepKind kind;
};

// (<t | empty>, empty). Throws std::invalid_argument on open terms.
Process inject(const Term& t);

// Absent when no rule applies (halted or stuck).
std::optional<Step> step(const Process& p);

// A value closure in front of the empty stack.
bool is_halted(const Process& p);

Nat csize(const Closure& c);
Nat ssize(const Stack& s);
Nat psize(const Process& p);

struct RunReport {
  std::optional<Nat> result;
  Nat steps = 0;
  Nat substitution_steps = 0;
  Nat max_process_size = 0;
  RunStatus status = RunStatus::Value;
};

RunReport run(const Term& t, Nat max_steps);

struct TraceEntry {
  Process process;
  Nat psize = 0;
  // The step taken from this state; absent for the last state.
  std::optional<MachineRule> rule;
  std::optional<StepKind> kind;
};

struct Trace {
  std::vector<TraceEntry> entries;
  bool truncated = false;
};

Trace trace(const Term& t, Nat max_steps);

std::string to_string(const Closure& c);
std::string to_string(const Stack& s);
std::string to_string(const Process& p);

// One line per state: step#  kind  psize  <term>  @  <stack>
std::string format_trace(const Trace& t);

}  // namespace dlpcf
