#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dlpcf/cek.hpp"
#include "dlpcf/checker.hpp"

namespace dlpcf {

// Runtime objects described by closure, stack and process derivations.
// Throw ScriptError when the derivation has the wrong shape.
Closure closure_of(const Derivation& d);
Stack stack_of(const Derivation& d);
Process process_of(const Derivation& d);

// check() for derivations rooted at the matching node kind; other roots
// throw ScriptError.
CheckReport check_closure(const Derivation& d, const EquationalProgram& ep,
                          const CheckConfig& config = {});
CheckReport check_stack(const Derivation& d, const EquationalProgram& ep,
                        const CheckConfig& config = {});
CheckReport check_process(const Derivation& d, const EquationalProgram& ep,
                          const CheckConfig& config = {});

struct TransitionCheck {
  std::optional<MachineRule> rule;
  std::optional<StepKind> kind;
  // Status of the weight and type comparison between the two processes.
  Status status = Status::Valid;
  std::string problem;
};

struct SequenceReport {
  std::vector<CheckReport> processes;
  // transitions[k] relates processes k and k+1.
  std::vector<TransitionCheck> transitions;
  bool ok = true;
  std::string problem;
};

// Every process must be certified, each must be the machine successor of the
// one before, the type must be preserved, and the weight must drop by at
// least one at substitution steps and stay equal at the others.
SequenceReport check_sequence(const Sequence& s, const EquationalProgram& ep,
                              const CheckConfig& config = {});

std::string format_sequence_report(const SequenceReport& r);

}  // namespace dlpcf
