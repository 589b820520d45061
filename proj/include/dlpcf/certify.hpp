#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dlpcf/checker.hpp"

namespace dlpcf {

// Applies the derivation's term to numerals, adding one App node and one
// numeral node per argument.
Derivation compose(const Derivation& d, const std::vector<Nat>& args);

struct CertifyOptions {
  std::map<std::string, Nat> inst;
  CheckConfig check;
  Nat max_steps = 50'000'000;
};

struct CertificationResult {
  std::string program;
  std::map<std::string, Nat> inst;
  Overall status = Overall::Refuted;
  std::string status_detail;
  std::optional<Nat> weight;
  Nat tsize = 0;
  std::optional<Nat> bound;
  std::optional<Nat> steps;
  std::optional<Nat> result;
  std::optional<Nat> lo;
  std::optional<Nat> hi;

  bool derivation_ok = false;
  bool steps_ok = false;
  bool result_ok = false;
  // First violated clause, if any.
  std::string failure;

  bool pass() const { return derivation_ok && steps_ok && result_ok; }
};

// Instantiates the named derivation (the first one when `name` is empty),
// closes it per the script's driver, checks it and runs the machine.
// Throws ScriptError for scripts that cannot be closed this way.
CertificationResult certify(const Script& s, const std::string& name, const CertifyOptions& opt);

// Line-oriented key=value rendering.
std::string format_certification(const CertificationResult& r);

}  // namespace dlpcf
