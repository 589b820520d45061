#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dlpcf/derivation.hpp"

namespace dlpcf {

struct CheckConfig {
  EntailConfig entail = default_entail_config();
  // Subs nodes must be equalities.
  bool strict = false;
  // Worker threads for discharging obligations; 0 picks the hardware count.
  unsigned threads = 0;
};

enum class Overall { Certified, CertifiedBounded, Refuted, Unknown };
std::string to_string(Overall o);

struct ReportEntry {
  std::string location;
  Rule rule = Rule::Ax;
  std::string description;
  // Absent for structural failures.
  std::optional<Obligation> obligation;
  Status status = Status::Valid;
  std::string verdict;
};

struct CheckReport {
  // Pre-order over the derivation.
  std::vector<ReportEntry> entries;
  Overall overall = Overall::Certified;
  Nat bound = 0;
  // Refuted / Unknown: the deepest failing node, leftmost first.
  std::string location;
  std::string reason;
  // Some Fix node used the general premise set.
  bool general_fix = false;
  std::optional<Index> weight;
  std::optional<ModalType> type;
  std::optional<ModalType> input;

  bool certified() const {
    return overall == Overall::Certified || overall == Overall::CertifiedBounded;
  }
  std::size_t obligation_count() const;
};

std::string format_report(const CheckReport& r, bool verbose = false);

CheckReport check(const Derivation& d, const EquationalProgram& ep,
                  const CheckConfig& config = {});

// The declared weight of a term node; computed for closures, stacks and
// processes that leave it implicit.
Index weight_of(const Derivation& d);

// Replaces root index variables by numerals throughout. Throws ScriptError
// for symbols that are not root variables.
Derivation instantiate(const Derivation& d, const std::map<std::string, Nat>& values);

// Adds constraints at the root.
Derivation strengthen(const Derivation& d, const ConstraintSet& extra);

// Adds x : type to the context of the root, threading it through the
// premises that need it. Throws ScriptError when x is already bound
// somewhere in the derivation.
Derivation weaken(const Derivation& d, const std::string& x, const ModalType& type);

// A PCF typing derivation with all index information dropped.
struct PcfDerivation {
  Rule rule = Rule::Ax;
  SimpleContext ctx;
  Term term;
  SimpleType type = SimpleType::nat();
  std::vector<PcfDerivation> premises;
};

// Term derivations only; Subs nodes collapse into their premise.
PcfDerivation erase(const Derivation& d);

// Checks every node against the simply typed rules. Returns the first
// problem, or nothing.
std::optional<std::string> validate_pcf_derivation(const PcfDerivation& d);

}  // namespace dlpcf
