#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace satlab {

/// A variable or its negation. Variables are 1-indexed.
struct Literal {
  int var = 0;
  bool negated = false;

  /// Signed DIMACS form: +v or -v.
  int dimacs() const { return negated ? -var : var; }
  static Literal from_dimacs(int lit) { return Literal{lit < 0 ? -lit : lit, lit < 0}; }

  bool operator==(const Literal&) const = default;
};

struct Clause {
  std::vector<Literal> literals;

  bool operator==(const Clause&) const = default;
};

/// Truth values of variables 1..n, stored 0-indexed.
struct Assignment {
  std::vector<bool> values;

  std::size_t size() const { return values.size(); }
  bool value(int var) const { return values[static_cast<std::size_t>(var - 1)]; }
  bool satisfies(Literal lit) const { return value(lit.var) != lit.negated; }

  bool operator==(const Assignment&) const = default;
};

/// Conjunction of clauses over variables 1..num_vars.
///
/// Construction validates that every literal refers to a declared variable;
/// the object is immutable afterwards.
class CnfFormula {
 public:
  CnfFormula() = default;
  CnfFormula(int num_vars, std::vector<Clause> clauses);

  int num_vars() const { return num_vars_; }
  int num_clauses() const { return static_cast<int>(clauses_.size()); }
  const std::vector<Clause>& clauses() const { return clauses_; }
  const Clause& clause(int i) const { return clauses_[static_cast<std::size_t>(i)]; }

  /// Builds a formula from signed DIMACS literal lists.
  static CnfFormula from_dimacs_lists(int num_vars,
                                      const std::vector<std::vector<int>>& clauses);

  bool operator==(const CnfFormula&) const = default;

 private:
  int num_vars_ = 0;
  std::vector<Clause> clauses_;
};

/// True iff every clause has a literal made true by `assignment`. An empty
/// formula is true, an empty clause is false. Throws std::invalid_argument on
/// a length mismatch.
bool evaluate(const CnfFormula& formula, const Assignment& assignment);

/// Uniform random 3-SAT: each clause draws 3 distinct variables uniformly
/// without replacement and negates each with probability 1/2. Pure function
/// of its arguments. Throws std::invalid_argument if num_vars < 3.
CnfFormula generate_random_3sat(int num_vars, int num_clauses, std::uint64_t seed);

/// Clause count used for a given clause-to-atom ratio: round(ratio * n).
int clauses_for_ratio(double ratio, int num_vars);

}  // namespace satlab
