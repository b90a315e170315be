#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Oracle-equivalence suites runnable in any deployment (the CLI `selftest`
// subcommand). Each suite diffs a fast path against its reference
// implementation on seeded random instances.

namespace dpyr::selftest {

struct SuiteResult {
  std::string name;
  int cases = 0;
  int failures = 0;
  std::vector<std::string> messages;  // first few failure descriptions

  bool ok() const { return failures == 0; }
};

struct Options {
  std::uint64_t seed = 20140612;
  int cases = 0;  // > 0: run exactly this many instances per suite
  // Deliberately wrong implementation to swap in, to prove the suites
  // detect faults. Known: "dt-intersection" (sign error in the envelope
  // intersection formula). Empty: test the real code.
  std::string inject_fault;
};

/// Runs every suite and returns per-suite results. Throws ParamError on an
/// unknown fault name.
std::vector<SuiteResult> run_all(const Options& opts);

}  // namespace dpyr::selftest
