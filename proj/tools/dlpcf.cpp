#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "dlpcf/cek.hpp"
#include "dlpcf/certify.hpp"
#include "dlpcf/checker.hpp"
#include "dlpcf/machine_typing.hpp"
#include "dlpcf/pcf.hpp"

namespace {

using namespace dlpcf;

enum Exit : int {
  kOk = 0,
  kFailed = 1,
  kParse = 2,
  kType = 3,
  kBudget = 4,
  kUnknown = 5,
};

struct Options {
  std::string file;
  Nat max_steps = 10'000'000;
  std::optional<Nat> fuel;
  std::optional<Nat> bound;
  std::vector<std::string> inst;
  std::string name;
  bool strict = false;
  bool verbose = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CheckConfig check_config(const Options& o) {
  CheckConfig c;
  if (o.bound) c.entail.bound = *o.bound;
  if (o.fuel) c.entail.fuel = *o.fuel;
  c.strict = o.strict;
  return c;
}

std::string show(const Term& t) {
  return t.kind() == TermKind::Num ? std::to_string(t.numeral()) : to_string(t);
}

// Parses and simply types a program; returns an exit code on failure.
int load_program(const Options& o, Term& out) {
  try {
    out = parse_term(read_file(o.file));
  } catch (const ParseError& e) {
    std::cerr << o.file << ":" << e.what() << "\n";
    return kParse;
  }
  if (!free_vars(out).empty()) {
    std::cerr << o.file << ": the program is not closed\n";
    return kType;
  }
  try {
    infer_pcf(out);
  } catch (const TypeError& e) {
    std::cerr << o.file << ": " << e.what() << "\n";
    return kType;
  }
  return kOk;
}

int cmd_eval(const Options& o) {
  Term t;
  if (int rc = load_program(o, t)) return rc;
  CbvResult ref = eval_cbv(t, o.max_steps);
  RunReport m = run(t, o.max_steps);
  if (ref.status == RunStatus::Budget || m.status == RunStatus::Budget) {
    std::cout << "diverged (budget)\n";
    return kBudget;
  }
  std::cout << "cbv=" << (ref.value ? show(*ref.value) : "stuck") << " steps=" << ref.steps
            << "\n";
  std::cout << "cek=" << (m.result ? std::to_string(*m.result) : to_string(m.status))
            << " steps=" << m.steps << " substitutions=" << m.substitution_steps << "\n";
  bool agree = ref.value && ref.value->kind() == TermKind::Num
                   ? m.result && *m.result == ref.value->numeral()
                   : ref.status == m.status;
  if (!agree) {
    std::cout << "adequacy violation: the evaluators disagree\n";
    return kFailed;
  }
  return kOk;
}

int cmd_trace(const Options& o) {
  Term t;
  if (int rc = load_program(o, t)) return rc;
  Trace tr = trace(t, o.max_steps);
  std::cout << format_trace(tr);
  return tr.truncated ? kBudget : kOk;
}

int load(const Options& o, Script& s) {
  try {
    s = load_script_file(o.file);
  } catch (const ScriptError& e) {
    std::cerr << e.what() << "\n";
    return kParse;
  }
  return kOk;
}

int cmd_check(const Options& o) {
  Script s;
  if (int rc = load(o, s)) return rc;
  CheckConfig cfg = check_config(o);
  bool refuted = false;
  bool unknown = false;
  for (const auto& nd : s.derivations) {
    CheckReport r = check(nd.root, s.ep, cfg);
    std::cout << "derivation=" << (nd.name.empty() ? "-" : nd.name) << "\n"
              << format_report(r, o.verbose);
    refuted |= r.overall == Overall::Refuted;
    unknown |= r.overall == Overall::Unknown;
  }
  for (const auto& seq : s.sequences) {
    SequenceReport r;
    try {
      r = check_sequence(seq, s.ep, cfg);
    } catch (const ScriptError& e) {
      std::cerr << e.what() << "\n";
      return kParse;
    }
    std::cout << "sequence=" << (seq.name.empty() ? "-" : seq.name) << "\n"
              << format_sequence_report(r);
    if (!r.ok) {
      bool undecided = true;
      for (const auto& p : r.processes) undecided &= p.overall != Overall::Refuted;
      for (const auto& t : r.transitions) undecided &= t.status != Status::Invalid;
      (undecided ? unknown : refuted) = true;
    }
  }
  if (refuted) return kFailed;
  return unknown ? kUnknown : kOk;
}

int cmd_certify(const Options& o) {
  Script s;
  if (int rc = load(o, s)) return rc;
  CertifyOptions opt;
  opt.check = check_config(o);
  opt.max_steps = o.max_steps;
  for (const auto& kv : o.inst) {
    auto eq = kv.find('=');
    Nat n = 0;
    try {
      if (eq == std::string::npos) throw std::invalid_argument(kv);
      std::size_t used = 0;
      n = std::stoull(kv.substr(eq + 1), &used);
      if (used != kv.size() - eq - 1) throw std::invalid_argument(kv);
    } catch (const std::exception&) {
      std::cerr << "bad --inst value '" << kv << "', expected sym=nat\n";
      return kParse;
    }
    opt.inst[kv.substr(0, eq)] = n;
  }
  try {
    CertificationResult r = certify(s, o.name, opt);
    std::cout << format_certification(r);
    return r.pass() ? kOk : kFailed;
  } catch (const ScriptError& e) {
    std::cerr << e.what() << "\n";
    return kParse;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evaluate PCF programs and check weighted typing derivations"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("file", o.file, "Program or script")->required();
    sub->add_option("--max-steps", o.max_steps, "Step budget for the evaluators");
  };
  auto checking = [&](CLI::App* sub) {
    sub->add_option("--fuel", o.fuel, "Fuel for index evaluation");
    sub->add_option("--bound", o.bound, "Enumeration bound for entailment (default DLPCF_BOUND or 32)");
    sub->add_flag("--strict", o.strict, "Require equalities in subsumption nodes");
  };

  auto* eval = app.add_subcommand("eval", "Run both evaluators on a program");
  common(eval);
  auto* tr = app.add_subcommand("trace", "Print the machine trace of a program");
  common(tr);
  auto* chk = app.add_subcommand("check", "Check the derivations and sequences of a script");
  common(chk);
  checking(chk);
  chk->add_flag("-v,--verbose", o.verbose, "List every obligation");
  auto* cert = app.add_subcommand("certify", "Certify the step bound of a closed instance");
  common(cert);
  checking(cert);
  cert->add_option("--inst", o.inst, "Index symbol values, sym=nat")->expected(1, -1);
  cert->add_option("--name", o.name, "Derivation to certify (default: the first)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*eval) return cmd_eval(o);
    if (*tr) return cmd_trace(o);
    if (*chk) return cmd_check(o);
    if (*cert) return cmd_certify(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParse;
  }
  return kFailed;
}
