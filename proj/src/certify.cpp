#include "dlpcf/certify.hpp"

#include <sstream>

#include "dlpcf/cek.hpp"

namespace dlpcf {

Derivation compose(const Derivation& d, const std::vector<Nat>& args) {
  if (!is_term_rule(d.rule) || !d.term || !d.type || !d.weight)
    throw ScriptError("only complete term derivations can be applied");
  if (!d.ctx.empty()) throw ScriptError("the derivation is not closed");
  Derivation cur = d;
  for (Nat n : args) {
    const ModalType& ft = *cur.type;
    if (ft.is_nat()) throw ScriptError("too many arguments for " + to_string(*d.type));
    Derivation num;
    num.rule = Rule::Const;
    num.term = Term::num(n);
    num.type = ModalType::nat(Index::lit(n));
    num.weight = Index::lit(0);
    num.pos = d.pos;

    Derivation app;
    app.rule = Rule::App;
    app.vars = cur.vars;
    app.hyps = cur.hyps;
    app.pos = d.pos;
    app.term = Term::app(*cur.term, *num.term);
    app.type = subst_type(ft.cod(), ft.binder(), Index::lit(0));
    app.weight = *cur.weight + *num.weight;
    app.premises.push_back(std::move(cur));
    app.premises.push_back(std::move(num));
    cur = std::move(app);
  }
  return cur;
}

namespace {

const NamedDerivation& find(const Script& s, const std::string& name) {
  if (s.derivations.empty()) throw ScriptError("the script has no derivation");
  if (name.empty()) return s.derivations.front();
  for (const auto& d : s.derivations) {
    if (d.name == name) return d;
  }
  throw ScriptError("no derivation named '" + name + "'");
}

}  // namespace

CertificationResult certify(const Script& s, const std::string& name, const CertifyOptions& opt) {
  const NamedDerivation& nd = find(s, name);
  CertificationResult r;
  r.program = nd.name;
  r.inst = opt.inst;

  std::vector<Nat> args;
  if (s.driver) {
    for (const auto& sym : s.driver->args) {
      auto it = opt.inst.find(sym);
      if (it == opt.inst.end()) throw ScriptError("no value given for " + sym);
      args.push_back(it->second);
    }
  }
  Derivation closed = compose(instantiate(nd.root, opt.inst), args);

  CheckReport report = check(closed, s.ep, opt.check);
  r.status = report.overall;
  r.status_detail = report.certified() ? "" : report.location + ": " + report.reason;
  r.derivation_ok = report.certified();
  auto fail = [&](const std::string& why) {
    if (r.failure.empty()) r.failure = why;
  };
  if (!r.derivation_ok) fail("derivation " + to_string(report.overall) + " " + r.status_detail);

  const Term& t = *closed.term;
  r.tsize = tsize(t);
  r.weight = eval_index(*closed.weight, {}, s.ep, opt.check.entail.fuel);
  if (!r.weight) fail("weight " + to_string(*closed.weight) + " is undefined");
  const ModalType& type = *closed.type;
  if (type.is_nat()) {
    r.lo = eval_index(type.lo(), {}, s.ep, opt.check.entail.fuel);
    r.hi = eval_index(type.hi(), {}, s.ep, opt.check.entail.fuel);
  }
  if (!r.lo || !r.hi) fail("the result type " + to_string(type) + " is not a defined interval");

  RunReport run_report = run(t, opt.max_steps);
  if (run_report.status == RunStatus::Value) {
    r.steps = run_report.steps;
    r.result = run_report.result;
  } else {
    fail("the machine did not reach a value (" + to_string(run_report.status) + ")");
  }
  if (r.weight && r.steps) {
    unsigned __int128 limit = static_cast<unsigned __int128>(r.tsize) * (*r.weight + 1);
    if (limit <= static_cast<unsigned __int128>(~Nat{0})) r.bound = static_cast<Nat>(limit);
    r.steps_ok = *r.steps <= limit;
    if (!r.steps_ok)
      fail("steps " + std::to_string(*r.steps) + " exceed " + std::to_string(r.tsize) + "*(" +
           std::to_string(*r.weight) + "+1)");
  }
  if (r.result && r.lo && r.hi) {
    r.result_ok = *r.lo <= *r.result && *r.result <= *r.hi;
    if (!r.result_ok)
      fail("result " + std::to_string(*r.result) + " outside [" + std::to_string(*r.lo) + ", " +
           std::to_string(*r.hi) + "]");
  }
  return r;
}

std::string format_certification(const CertificationResult& r) {
  std::ostringstream out;
  auto opt = [](const std::optional<Nat>& v) { return v ? std::to_string(*v) : std::string("-"); };
  out << "program=" << (r.program.empty() ? "-" : r.program) << "\n";
  out << "inst=";
  bool first = true;
  for (const auto& [x, n] : r.inst) {
    out << (first ? "" : ",") << x << "=" << n;
    first = false;
  }
  out << "\n";
  out << "derivation=" << to_string(r.status) << "\n";
  out << "weight=" << opt(r.weight) << "\n";
  out << "tsize=" << r.tsize << "\n";
  out << "bound=" << opt(r.bound) << "\n";
  out << "steps=" << opt(r.steps) << "\n";
  out << "result=" << opt(r.result) << "\n";
  out << "interval=[" << opt(r.lo) << "," << opt(r.hi) << "]\n";
  out << "clause_derivation=" << (r.derivation_ok ? "pass" : "fail") << "\n";
  out << "clause_steps=" << (r.steps_ok ? "pass" : "fail") << "\n";
  out << "clause_result=" << (r.result_ok ? "pass" : "fail") << "\n";
  out << "verdict=" << (r.pass() ? "pass" : "fail") << "\n";
  if (!r.failure.empty()) out << "failure=" << r.failure << "\n";
  return out.str();
}

}  // namespace dlpcf
