#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>

#include "satlab/cnf.hpp"

namespace satlab {

enum class SatStatus { Sat, Unsat };

std::string_view to_string(SatStatus status);
SatStatus sat_status_from_string(std::string_view text);

struct SatResult {
  SatStatus status = SatStatus::Unsat;
  std::optional<Assignment> model;  // present iff status == Sat

  bool is_sat() const { return status == SatStatus::Sat; }
};

/// Raised when a solver hits its resource limit. A solver never answers
/// wrongly to save time; it throws this instead.
class ResourceExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kDefaultBruteForceLimit = 24;

/// Exhaustive search. Assignments are enumerated in lexicographic order with
/// x1 the most significant position and false < true, so the returned model
/// is the lexicographically smallest one. Throws std::invalid_argument when
/// num_vars exceeds `max_vars`.
SatResult brute_force_sat(const CnfFormula& formula, int max_vars = kDefaultBruteForceLimit);

struct DpllStats {
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
  std::uint64_t conflicts = 0;
};

struct DpllLimits {
  std::uint64_t max_decisions = 50'000'000;
};

/// Backtracking search with unit propagation and pure-literal elimination.
/// Branches on the unassigned variable with the most occurrences in
/// unsatisfied clauses (ties: lowest index), trying true first. Unassigned
/// variables in a returned model are set to false.
SatResult dpll_sat(const CnfFormula& formula, DpllLimits limits = {},
                   DpllStats* stats = nullptr);

}  // namespace satlab
