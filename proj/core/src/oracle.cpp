#include "satlab/oracle.hpp"

#include <algorithm>
#include <string>

namespace satlab {

std::string_view to_string(SatStatus status) {
  return status == SatStatus::Sat ? "SAT" : "UNSAT";
}

SatStatus sat_status_from_string(std::string_view text) {
  if (text == "SAT") return SatStatus::Sat;
  if (text == "UNSAT") return SatStatus::Unsat;
  throw std::invalid_argument("unknown SAT status '" + std::string(text) + "'");
}

SatResult brute_force_sat(const CnfFormula& formula, int max_vars) {
  const int n = formula.num_vars();
  if (n > max_vars || n > 62) {
    throw std::invalid_argument("brute force limited to " + std::to_string(max_vars) +
                                " variables, formula has " + std::to_string(n));
  }
  // Bit (n - v) of the enumeration counter holds x_v, so counting upwards
  // walks assignments in lexicographic order with x1 most significant.
  std::vector<std::uint64_t> pos(formula.clauses().size(), 0);
  std::vector<std::uint64_t> neg(formula.clauses().size(), 0);
  for (std::size_t c = 0; c < formula.clauses().size(); ++c) {
    for (const auto& lit : formula.clauses()[c].literals) {
      const std::uint64_t bit = std::uint64_t{1} << (n - lit.var);
      (lit.negated ? neg[c] : pos[c]) |= bit;
    }
  }
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    bool ok = true;
    for (std::size_t c = 0; c < pos.size() && ok; ++c) {
      ok = (mask & pos[c]) != 0 || (~mask & neg[c]) != 0;
    }
    if (ok) {
      Assignment model;
      model.values.resize(static_cast<std::size_t>(n));
      for (int v = 1; v <= n; ++v) model.values[v - 1] = ((mask >> (n - v)) & 1) != 0;
      return {SatStatus::Sat, std::move(model)};
    }
  }
  return {SatStatus::Unsat, std::nullopt};
}

namespace {

// Literal code: 2*(var-1) for x_var, 2*(var-1)+1 for its negation.
constexpr int code(Literal lit) { return 2 * (lit.var - 1) + (lit.negated ? 1 : 0); }
constexpr int negate(int lit) { return lit ^ 1; }
constexpr int var_of(int lit) { return lit >> 1; }

class Dpll {
 public:
  Dpll(const CnfFormula& formula, DpllLimits limits) : limits_(limits) {
    num_vars_ = formula.num_vars();
    occurrences_.resize(2 * static_cast<std::size_t>(num_vars_));
    active_occurrences_.assign(2 * static_cast<std::size_t>(num_vars_), 0);
    value_.assign(static_cast<std::size_t>(num_vars_), kUnassigned);
    for (const auto& clause : formula.clauses()) {
      std::vector<int> lits;
      for (const auto& lit : clause.literals) lits.push_back(code(lit));
      std::sort(lits.begin(), lits.end());
      lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
      bool tautology = false;
      for (std::size_t i = 1; i < lits.size(); ++i) {
        tautology = tautology || lits[i] == negate(lits[i - 1]);
      }
      if (tautology) continue;
      if (lits.empty()) has_empty_clause_ = true;
      const int id = static_cast<int>(clauses_.size());
      for (int lit : lits) {
        occurrences_[lit].push_back(id);
        ++active_occurrences_[lit];
      }
      clauses_.push_back(std::move(lits));
    }
    satisfied_count_.assign(clauses_.size(), 0);
    false_count_.assign(clauses_.size(), 0);
    unsatisfied_clauses_ = static_cast<int>(clauses_.size());
  }

  SatResult solve(DpllStats* stats) {
    SatResult result;
    if (!has_empty_clause_) {
      for (std::size_t c = 0; c < clauses_.size(); ++c) {
        if (clauses_[c].size() == 1) pending_units_.push_back(static_cast<int>(c));
      }
      if (search()) {
        result.status = SatStatus::Sat;
        Assignment model;
        model.values.resize(static_cast<std::size_t>(num_vars_));
        for (int v = 0; v < num_vars_; ++v) model.values[v] = value_[v] == kTrue;
        result.model = std::move(model);
      }
    }
    if (stats != nullptr) *stats = stats_;
    return result;
  }

 private:
  static constexpr signed char kUnassigned = -1;
  static constexpr signed char kFalse = 0;
  static constexpr signed char kTrue = 1;

  bool literal_true(int lit) const {
    const signed char v = value_[var_of(lit)];
    return v != kUnassigned && (v == kTrue) == ((lit & 1) == 0);
  }

  // Makes `lit` true and updates clause counters. Returns false on conflict.
  bool assign(int lit) {
    value_[var_of(lit)] = (lit & 1) == 0 ? kTrue : kFalse;
    trail_.push_back(lit);
    for (int c : occurrences_[lit]) {
      if (satisfied_count_[c]++ == 0) {
        --unsatisfied_clauses_;
        for (int other : clauses_[c]) --active_occurrences_[other];
      }
    }
    bool ok = true;
    for (int c : occurrences_[negate(lit)]) {
      const int falses = ++false_count_[c];
      if (satisfied_count_[c] != 0) continue;
      const int size = static_cast<int>(clauses_[c].size());
      if (falses == size) {
        ok = false;
      } else if (falses == size - 1) {
        pending_units_.push_back(c);
      }
    }
    return ok;
  }

  void undo_to(std::size_t trail_size) {
    while (trail_.size() > trail_size) {
      const int lit = trail_.back();
      trail_.pop_back();
      for (int c : occurrences_[negate(lit)]) --false_count_[c];
      for (int c : occurrences_[lit]) {
        if (--satisfied_count_[c] == 0) {
          ++unsatisfied_clauses_;
          for (int other : clauses_[c]) ++active_occurrences_[other];
        }
      }
      value_[var_of(lit)] = kUnassigned;
    }
    pending_units_.clear();
  }

  bool propagate() {
    while (!pending_units_.empty()) {
      const int c = pending_units_.back();
      pending_units_.pop_back();
      if (satisfied_count_[c] != 0) continue;
      int unit = -1;
      for (int lit : clauses_[c]) {
        if (value_[var_of(lit)] == kUnassigned) {
          unit = lit;
          break;
        }
      }
      if (unit < 0) {
        pending_units_.clear();
        return false;
      }
      ++stats_.propagations;
      if (!assign(unit)) {
        pending_units_.clear();
        return false;
      }
    }
    return true;
  }

  // Assigns every pure literal. Pure assignments satisfy clauses only, so
  // they never conflict, but they may expose further pure literals.
  void eliminate_pure_literals() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (int v = 0; v < num_vars_; ++v) {
        if (value_[v] != kUnassigned) continue;
        const int pos = 2 * v;
        const int neg = pos + 1;
        if (active_occurrences_[pos] > 0 && active_occurrences_[neg] == 0) {
          assign(pos);
          changed = true;
        } else if (active_occurrences_[neg] > 0 && active_occurrences_[pos] == 0) {
          assign(neg);
          changed = true;
        }
      }
    }
  }

  int pick_branch_variable() const {
    int best = -1;
    int best_count = 0;
    for (int v = 0; v < num_vars_; ++v) {
      if (value_[v] != kUnassigned) continue;
      const int count = active_occurrences_[2 * v] + active_occurrences_[2 * v + 1];
      if (count > best_count) {
        best = v;
        best_count = count;
      }
    }
    return best;
  }

  bool search() {
    if (!propagate()) {
      ++stats_.conflicts;
      return false;
    }
    eliminate_pure_literals();
    if (unsatisfied_clauses_ == 0) return true;
    const int var = pick_branch_variable();
    if (var < 0) return unsatisfied_clauses_ == 0;

    if (++stats_.decisions > limits_.max_decisions) {
      throw ResourceExhausted("DPLL decision limit of " +
                              std::to_string(limits_.max_decisions) + " reached");
    }
    const std::size_t mark = trail_.size();
    for (int lit : {2 * var, 2 * var + 1}) {
      if (assign(lit) && search()) return true;
      undo_to(mark);
    }
    return false;
  }

  DpllLimits limits_;
  DpllStats stats_;
  int num_vars_ = 0;
  bool has_empty_clause_ = false;
  std::vector<std::vector<int>> clauses_;
  std::vector<std::vector<int>> occurrences_;
  std::vector<int> active_occurrences_;
  std::vector<int> satisfied_count_;
  std::vector<int> false_count_;
  std::vector<signed char> value_;
  std::vector<int> trail_;
  std::vector<int> pending_units_;
  int unsatisfied_clauses_ = 0;
};

}  // namespace

SatResult dpll_sat(const CnfFormula& formula, DpllLimits limits, DpllStats* stats) {
  Dpll solver(formula, limits);
  SatResult result = solver.solve(stats);
  if (result.is_sat() && !evaluate(formula, *result.model)) {
    throw std::logic_error("DPLL produced a model that does not satisfy the formula");
  }
  return result;
}

}  // namespace satlab
