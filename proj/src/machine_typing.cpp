#include "dlpcf/machine_typing.hpp"

#include <sstream>

namespace dlpcf {

namespace {

const Derivation& premise(const Derivation& d, std::size_t k) {
  if (k >= d.premises.size())
    throw ScriptError(d.pos.str() + ": " + to_string(d.rule) + " node is missing a premise");
  return d.premises[k];
}

void expect_rule(const Derivation& d, bool ok, const char* what) {
  if (!ok) throw ScriptError(d.pos.str() + ": expected a " + std::string(what) + " derivation");
}

}  // namespace

Closure closure_of(const Derivation& d) {
  expect_rule(d, d.rule == Rule::Closure, "closure");
  const Derivation& t = premise(d, 0);
  if (!t.term) throw ScriptError(t.pos.str() + ": closure term is missing");
  Env env;
  for (std::size_t k = d.env.size(); k-- > 0;) env = env.bind(d.env_names[k], closure_of(d.env[k]));
  return {*t.term, env};
}

Stack stack_of(const Derivation& d) {
  switch (d.rule) {
    case Rule::StackEmpty:
      return {};
    case Rule::StackSubs:
      return stack_of(premise(d, 0));
    case Rule::StackArg:
      return stack_of(premise(d, 1)).push(Frame::arg(closure_of(premise(d, 0))));
    case Rule::StackFun:
      return stack_of(premise(d, 1)).push(Frame::fun(closure_of(premise(d, 0))));
    case Rule::StackFork: {
      Closure z = closure_of(premise(d, 0));
      Closure u = closure_of(premise(d, 1));
      return stack_of(premise(d, 2)).push(Frame::fork(z.term, u.term, z.env));
    }
    case Rule::StackS:
      return stack_of(premise(d, 0)).push(Frame::s());
    case Rule::StackP:
      return stack_of(premise(d, 0)).push(Frame::p());
    default:
      expect_rule(d, false, "stack");
      return {};
  }
}

Process process_of(const Derivation& d) {
  expect_rule(d, d.rule == Rule::Process, "process");
  return {closure_of(premise(d, 1)), stack_of(premise(d, 0))};
}

CheckReport check_closure(const Derivation& d, const EquationalProgram& ep,
                          const CheckConfig& config) {
  expect_rule(d, d.rule == Rule::Closure, "closure");
  return check(d, ep, config);
}

CheckReport check_stack(const Derivation& d, const EquationalProgram& ep,
                        const CheckConfig& config) {
  expect_rule(d, is_stack_rule(d.rule), "stack");
  return check(d, ep, config);
}

CheckReport check_process(const Derivation& d, const EquationalProgram& ep,
                          const CheckConfig& config) {
  expect_rule(d, d.rule == Rule::Process, "process");
  return check(d, ep, config);
}

SequenceReport check_sequence(const Sequence& s, const EquationalProgram& ep,
                              const CheckConfig& config) {
  SequenceReport r;
  auto fail = [&](const std::string& why) {
    if (r.ok) r.problem = why;
    r.ok = false;
  };
  std::vector<Process> runtime;
  for (std::size_t k = 0; k < s.processes.size(); ++k) {
    const Derivation& d = s.processes[k];
    r.processes.push_back(check_process(d, ep, config));
    const CheckReport& c = r.processes.back();
    if (!c.certified())
      fail("process " + std::to_string(k) + " is " + to_string(c.overall) + " at " + c.location +
           ": " + c.reason);
    runtime.push_back(process_of(d));
  }
  for (std::size_t k = 0; k + 1 < runtime.size(); ++k) {
    TransitionCheck t;
    auto next = step(runtime[k]);
    const std::string at = "transition " + std::to_string(k) + ": ";
    if (!next) {
      t.status = Status::Invalid;
      t.problem = "the machine is stuck";
    } else {
      t.rule = next->rule;
      t.kind = next->kind;
      if (next->next != runtime[k + 1]) {
        t.status = Status::Invalid;
        t.problem = "process " + std::to_string(k + 1) + " is not the successor; expected " +
                    to_string(next->next);
      }
    }
    const CheckReport& before = r.processes[k];
    const CheckReport& after = r.processes[k + 1];
    if (t.status == Status::Valid && before.weight && after.weight && before.type &&
        after.type) {
      const Derivation& d = s.processes[k];
      VarSet vars = d.vars.value_or(VarSet{});
      ConstraintSet hyps = d.hyps.value_or(ConstraintSet{});
      Goals g;
      if (t.kind == StepKind::Substitution) {
        g.append(index_le_goals(vars, hyps, *after.weight + Index::lit(1), *before.weight,
                                "weight drops at a substitution"));
      } else {
        g.append(index_eq_goals(vars, hyps, *after.weight, *before.weight,
                                "weight is kept"));
      }
      g.append(equiv_goals(vars, hyps, *after.type, *before.type));
      TypeVerdict v = discharge(g, ep, config.entail);
      t.status = v.status;
      t.problem = v.reason;
    } else if (t.status == Status::Valid) {
      t.status = Status::Unknown;
      t.problem = "missing weight or type";
    }
    if (t.status != Status::Valid) fail(at + t.problem);
    r.transitions.push_back(std::move(t));
  }
  return r;
}

std::string format_sequence_report(const SequenceReport& r) {
  std::ostringstream out;
  out << "status=" << (r.ok ? "ok" : "failed") << "\n";
  if (!r.problem.empty()) out << "problem=" << r.problem << "\n";
  for (std::size_t k = 0; k < r.processes.size(); ++k) {
    const CheckReport& c = r.processes[k];
    out << "process " << k << " " << to_string(c.overall)
        << " weight=" << (c.weight ? to_string(*c.weight) : "?");
    if (k < r.transitions.size()) {
      const TransitionCheck& t = r.transitions[k];
      out << " then " << (t.rule ? to_string(*t.rule) : "-") << " ("
          << (t.kind ? to_string(*t.kind) : "-") << ") " << to_string(t.status);
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace dlpcf
