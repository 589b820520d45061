#include "dlpcf/cek.hpp"

#include <algorithm>
#include <stdexcept>

namespace dlpcf {

Env Env::bind(std::string x, Closure v) const {
  Env e;
  e.head_ = std::make_shared<const EnvNode>(EnvNode{std::move(x), std::move(v), *this});
  return e;
}

const Closure* Env::lookup(const std::string& x) const {
  for (const EnvNode* n = head_.get(); n; n = n->next.head_.get()) {
    if (n->name == x) return &n->value;
  }
  return nullptr;
}

std::size_t Env::length() const {
  std::size_t k = 0;
  for (const EnvNode* n = head_.get(); n; n = n->next.head_.get()) ++k;
  return k;
}

bool operator==(const Env& a, const Env& b) {
  const EnvNode* x = a.head_.get();
  const EnvNode* y = b.head_.get();
  while (x && y) {
    if (x == y) return true;
    if (x->name != y->name || x->value != y->value) return false;
    x = x->next.head_.get();
    y = y->next.head_.get();
  }
  return x == y;
}

bool operator==(const Frame& a, const Frame& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case FrameKind::Fun:
    case FrameKind::Arg:
      return a.closure == b.closure;
    case FrameKind::Fork:
      return a.zero == b.zero && a.succ == b.succ && a.env == b.env;
    default:
      return true;
  }
}

namespace {

Nat frame_size(const Frame& f) {
  switch (f.kind) {
    case FrameKind::Fun:
      return csize(f.closure);
    case FrameKind::Arg:
      return csize(f.closure) + 1;
    case FrameKind::Fork:
      return msize(f.zero) + msize(f.succ) + 1;
    default:
      return 1;
  }
}

}  // namespace

Stack Stack::push(Frame f) const {
  Nat sz = frame_size(f) + size();
  Stack s;
  s.head_ = std::make_shared<const StackNode>(StackNode{std::move(f), *this, sz, depth() + 1});
  return s;
}

const Frame& Stack::top() const {
  if (!head_) throw std::logic_error("top of empty stack");
  return head_->frame;
}

Stack Stack::pop() const { return head_ ? head_->next : Stack{}; }
Nat Stack::size() const { return head_ ? head_->size : 0; }
std::size_t Stack::depth() const { return head_ ? head_->depth : 0; }

std::vector<Frame> Stack::frames() const {
  std::vector<Frame> out;
  for (Stack s = *this; !s.empty(); s = s.pop()) out.push_back(s.top());
  return out;
}

bool operator==(const Stack& a, const Stack& b) {
  if (a.depth() != b.depth()) return false;
  Stack x = a;
  Stack y = b;
  while (!x.empty()) {
    if (x.head_ == y.head_) return true;
    if (!(x.top() == y.top())) return false;
    x = x.pop();
    y = y.pop();
  }
  return true;
}

std::string to_string(StepKind k) { return k == StepKind::Substitution ? "subst" : "other"; }

std::string to_string(MachineRule r) {
  switch (r) {
    case MachineRule::Var:
      return "var";
    case MachineRule::App:
      return "app";
    case MachineRule::Succ:
      return "succ";
    case MachineRule::Pred:
      return "pred";
    case MachineRule::Ifz:
      return "ifz";
    case MachineRule::ArgToFun:
      return "arg-fun";
    case MachineRule::FunLam:
      return "fun-lam";
    case MachineRule::FunFix:
      return "fun-fix";
    case MachineRule::ForkZero:
      return "fork-zero";
    case MachineRule::ForkSucc:
      return "fork-succ";
    case MachineRule::SuccFrame:
      return "s-frame";
    case MachineRule::PredFrame:
      return "p-frame";
  }
  return "?";
}

Process inject(const Term& t) {
  if (!is_closed(t)) throw std::invalid_argument("cannot run an open term: " + to_string(t));
  return Process{Closure{t, Env{}}, Stack{}};
}

bool is_halted(const Process& p) { return p.closure.is_value() && p.stack.empty(); }

std::optional<Step> step(const Process& p) {
  const Term& t = p.closure.term;
  const Env& env = p.closure.env;
  const Stack& pi = p.stack;
  auto other = [](Process next, MachineRule r) { return Step{std::move(next), r, StepKind::Other}; };

  switch (t.kind()) {
    case TermKind::Var: {
      const Closure* v = env.lookup(t.name());
      if (!v) return std::nullopt;
      return other({*v, pi}, MachineRule::Var);
    }
    case TermKind::App:
      return other({{t.kid(0), env}, pi.push(Frame::arg({t.kid(1), env}))}, MachineRule::App);
    case TermKind::Succ:
      return other({{t.kid(0), env}, pi.push(Frame::s())}, MachineRule::Succ);
    case TermKind::Pred:
      return other({{t.kid(0), env}, pi.push(Frame::p())}, MachineRule::Pred);
    case TermKind::Ifz:
      return other({{t.kid(0), env}, pi.push(Frame::fork(t.kid(1), t.kid(2), env))},
                   MachineRule::Ifz);
    default:
      break;
  }

  // Value closures.
  if (pi.empty()) return std::nullopt;
  const Frame& f = pi.top();
  Stack rest = pi.pop();
  switch (f.kind) {
    case FrameKind::Arg:
      return other({f.closure, rest.push(Frame::fun(p.closure))}, MachineRule::ArgToFun);
    case FrameKind::Fun: {
      const Term& g = f.closure.term;
      if (g.kind() == TermKind::Lam) {
        Closure body{g.body(), f.closure.env.bind(g.name(), p.closure)};
        return Step{{body, rest}, MachineRule::FunLam, StepKind::Substitution};
      }
      if (g.kind() == TermKind::Fix) {
        Closure body{g.body(), f.closure.env.bind(g.name(), f.closure)};
        return Step{{body, rest.push(Frame::arg(p.closure))}, MachineRule::FunFix,
                    StepKind::Substitution};
      }
      return std::nullopt;
    }
    case FrameKind::Fork:
      if (t.kind() != TermKind::Num) return std::nullopt;
      if (t.numeral() == 0) return other({{f.zero, f.env}, rest}, MachineRule::ForkZero);
      return other({{f.succ, f.env}, rest}, MachineRule::ForkSucc);
    case FrameKind::Succ:
      if (t.kind() != TermKind::Num) return std::nullopt;
      return other({{Term::num(t.numeral() + 1), Env{}}, rest}, MachineRule::SuccFrame);
    case FrameKind::Pred:
      if (t.kind() != TermKind::Num) return std::nullopt;
      return other({{Term::num(t.numeral() == 0 ? 0 : t.numeral() - 1), Env{}}, rest},
                   MachineRule::PredFrame);
  }
  return std::nullopt;
}

Nat csize(const Closure& c) { return msize(c.term); }
Nat ssize(const Stack& s) { return s.size(); }
Nat psize(const Process& p) { return csize(p.closure) + ssize(p.stack); }

RunReport run(const Term& t, Nat max_steps) {
  RunReport r;
  Process p = inject(t);
  r.max_process_size = psize(p);
  while (true) {
    if (is_halted(p)) {
      if (p.closure.term.kind() == TermKind::Num) {
        r.result = p.closure.term.numeral();
        r.status = RunStatus::Value;
      } else {
        r.status = RunStatus::Stuck;
      }
      return r;
    }
    if (r.steps >= max_steps) {
      r.status = RunStatus::Budget;
      return r;
    }
    auto s = step(p);
    if (!s) {
      r.status = RunStatus::Stuck;
      return r;
    }
    ++r.steps;
    if (s->kind == StepKind::Substitution) ++r.substitution_steps;
    p = std::move(s->next);
    r.max_process_size = std::max(r.max_process_size, psize(p));
  }
}

Trace trace(const Term& t, Nat max_steps) {
  Trace tr;
  Process p = inject(t);
  Nat steps = 0;
  while (true) {
    TraceEntry e{p, psize(p), std::nullopt, std::nullopt};
    auto s = step(p);
    if (!s) {
      tr.entries.push_back(std::move(e));
      return tr;
    }
    if (steps >= max_steps) {
      tr.entries.push_back(std::move(e));
      tr.truncated = true;
      return tr;
    }
    e.rule = s->rule;
    e.kind = s->kind;
    tr.entries.push_back(std::move(e));
    p = std::move(s->next);
    ++steps;
  }
}

namespace {

std::string env_string(const Env& e) {
  std::string out;
  for (const EnvNode* n = e.head(); n; n = n->next.head()) {
    if (!out.empty()) out += ", ";
    out += n->name + ":=" + to_string(n->value);
  }
  return out;
}

}  // namespace

std::string to_string(const Closure& c) {
  if (c.env.empty()) return "<" + to_string(c.term) + ">";
  return "<" + to_string(c.term) + " | " + env_string(c.env) + ">";
}

std::string to_string(const Stack& s) {
  std::string out;
  for (const auto& f : s.frames()) {
    switch (f.kind) {
      case FrameKind::Fun:
        out += "fun(" + to_string(f.closure.term) + ")";
        break;
      case FrameKind::Arg:
        out += "arg(" + to_string(f.closure.term) + ")";
        break;
      case FrameKind::Fork:
        out += "fork(" + to_string(f.zero) + ", " + to_string(f.succ) + ")";
        break;
      case FrameKind::Succ:
        out += "s";
        break;
      case FrameKind::Pred:
        out += "p";
        break;
    }
    out += " . ";
  }
  return out + "<>";
}

std::string to_string(const Process& p) {
  return "(" + to_string(p.closure) + ", " + to_string(p.stack) + ")";
}

std::string format_trace(const Trace& t) {
  std::string out;
  for (std::size_t k = 0; k < t.entries.size(); ++k) {
    const auto& e = t.entries[k];
    std::string kind;
    if (e.kind) {
      kind = to_string(*e.kind);
    } else if (t.truncated) {
      kind = "budget";
    } else {
      kind = is_halted(e.process) ? "halt" : "stuck";
    }
    out += std::to_string(k) + "  " + kind + "  " + std::to_string(e.psize) + "  " +
           to_string(e.process.closure.term) + "  @  " + to_string(e.process.stack) + "\n";
  }
  return out;
}

}  // namespace dlpcf
