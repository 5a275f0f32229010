#include "satlab/cnf.hpp"

#include <cmath>
#include <string>

#include "satlab/rng.hpp"

namespace satlab {

CnfFormula::CnfFormula(int num_vars, std::vector<Clause> clauses)
    : num_vars_(num_vars), clauses_(std::move(clauses)) {
  if (num_vars_ < 0) throw std::invalid_argument("negative variable count");
  for (const auto& clause : clauses_) {
    for (const auto& lit : clause.literals) {
      if (lit.var < 1 || lit.var > num_vars_) {
        throw std::invalid_argument("literal variable " + std::to_string(lit.var) +
                                    " outside [1, " + std::to_string(num_vars_) + "]");
      }
    }
  }
}

CnfFormula CnfFormula::from_dimacs_lists(int num_vars,
                                         const std::vector<std::vector<int>>& clauses) {
  std::vector<Clause> out;
  out.reserve(clauses.size());
  for (const auto& lits : clauses) {
    Clause c;
    c.literals.reserve(lits.size());
    for (int lit : lits) c.literals.push_back(Literal::from_dimacs(lit));
    out.push_back(std::move(c));
  }
  return CnfFormula(num_vars, std::move(out));
}

bool evaluate(const CnfFormula& formula, const Assignment& assignment) {
  if (assignment.size() != static_cast<std::size_t>(formula.num_vars())) {
    throw std::invalid_argument("assignment length " + std::to_string(assignment.size()) +
                                " does not match " + std::to_string(formula.num_vars()) +
                                " variables");
  }
  for (const auto& clause : formula.clauses()) {
    bool satisfied = false;
    for (const auto& lit : clause.literals) {
      if (assignment.satisfies(lit)) {
        satisfied = true;
        break;
      }
    }
    if (!satisfied) return false;
  }
  return true;
}

CnfFormula generate_random_3sat(int num_vars, int num_clauses, std::uint64_t seed) {
  if (num_vars < 3) throw std::invalid_argument("random 3-SAT needs at least 3 variables");
  if (num_clauses < 0) throw std::invalid_argument("negative clause count");
  Rng rng(seed);
  const auto n = static_cast<std::uint64_t>(num_vars);
  std::vector<Clause> clauses(static_cast<std::size_t>(num_clauses));
  for (auto& clause : clauses) {
    clause.literals.reserve(3);
    while (clause.literals.size() < 3) {
      const int var = static_cast<int>(rng.uniform_index(n)) + 1;
      bool seen = false;
      for (const auto& lit : clause.literals) seen = seen || lit.var == var;
      if (!seen) clause.literals.push_back(Literal{var, false});
    }
    for (auto& lit : clause.literals) lit.negated = rng.coin();
  }
  return CnfFormula(num_vars, std::move(clauses));
}

int clauses_for_ratio(double ratio, int num_vars) {
  return static_cast<int>(std::lround(ratio * num_vars));
}

}  // namespace satlab
