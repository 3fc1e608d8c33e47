#pragma once

#include <stdexcept>
#include <string>

namespace mll {

enum class errc {
  positivity_violation,
  shape_mismatch,
  not_a_subset,
  overlapping_sets,
  not_nested,
  not_strictly_nested,
  not_binary,
  missing_subset,
  effect_absent,
  equivalence_breach,
  query_too_large,
  bad_partition,
  not_covered,
  parse_error,
  spec_invalid,
  margin_not_in_universe,
  usage,
};

const char* errc_name(errc c);

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  errc code() const { return code_; }

 private:
  errc code_;
};

/// Raised when two routes that are provably equivalent disagree beyond
/// tolerance. Always indicates an engine bug, never bad input; mapped to its
/// own process exit code by the CLI.
class EquivalenceBreach : public Error {
 public:
  explicit EquivalenceBreach(const std::string& what) : Error(errc::equivalence_breach, what) {}
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

}  // namespace mll
