#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "satlab/cnf.hpp"

namespace satlab::circuit {

/// Clause x variable sign matrix: +1 where x_j appears in clause i, -1 where
/// its negation does, 0 otherwise. Rows are stored sparsely.
class WMatrix {
 public:
  struct Entry {
    int col = 0;  // 0-indexed variable
    int sign = 0;  // +1 or -1

    bool operator==(const Entry&) const = default;
  };

  WMatrix() = default;
  WMatrix(int num_vars, std::vector<std::vector<Entry>> rows);

  int rows() const { return static_cast<int>(rows_.size()); }
  int cols() const { return num_vars_; }
  std::span<const Entry> row(int i) const { return rows_[static_cast<std::size_t>(i)]; }
  int at(int i, int j) const;
  std::vector<std::vector<int>> dense() const;

  bool operator==(const WMatrix&) const = default;

 private:
  int num_vars_ = 0;
  std::vector<std::vector<Entry>> rows_;  // sorted by column
};

/// Throws std::invalid_argument for a clause holding both x and not-x.
/// Repeated same-sign literals collapse into one entry.
WMatrix encode_w(const CnfFormula& formula);

/// Entries exactly +1 or -1.
using SignVector = std::vector<int>;

SignVector to_signs(const Assignment& assignment);
Assignment to_assignment(std::span<const int> signs);

/// theta(sum_i theta(W_i x + W_i^2 x^2 - 0.5) - M + 0.5) with theta the unit
/// step. Throws std::invalid_argument on a dimension mismatch or a non +-1
/// entry.
int sat_step(const WMatrix& w, std::span<const int> x);

struct RelaxedPoint {
  std::vector<double> xhat;
  double beta = 1.0;
};

struct ApproxSat {
  double value = 0.0;  // in (0, 1)
  double outer = 0.0;  // argument of the outer sigmoid
};

/// sigma(beta (sum_i sigma(beta (W_i t + W_i^2 t^2 - 0.5)) - M + 0.5)) with
/// t = tanh(xhat). outer > 0 implies sat_step(round_assignment(xhat)) = 1.
ApproxSat approx_sat(const WMatrix& w, const RelaxedPoint& point);

/// d approx_sat / d xhat.
std::vector<double> approx_sat_grad(const WMatrix& w, const RelaxedPoint& point);

/// d log(approx_sat) / d xhat. Same direction as approx_sat_grad.
std::vector<double> log_approx_sat_grad(const WMatrix& w, const RelaxedPoint& point);

/// Componentwise sign, 0 -> +1.
SignVector round_assignment(std::span<const double> xhat);

enum class Objective { ApproxSat, LogApproxSat };

std::string_view to_string(Objective objective);
Objective objective_from_string(std::string_view text);

struct AnnealConfig {
  int restarts = 20;
  int steps = 500;
  double step_size = 0.1;
  double beta0 = 0.5;
  double beta_max = 5.0;
  /// Standard deviation of Gaussian noise added to xhat each step, decayed
  /// linearly to 0 over the steps. 0 gives plain gradient ascent.
  double noise = 1.5;
  /// xhat is kept in [-clip, clip] after each step; <= 0 disables.
  double clip = 2.0;
  Objective objective = Objective::LogApproxSat;
  std::uint64_t seed = 0;
};

enum class SolveStatus { Solved, Unknown };

std::string_view to_string(SolveStatus status);

struct SolveOutcome {
  SolveStatus status = SolveStatus::Unknown;
  std::optional<SignVector> model;  // verified by sat_step when Solved
  int restarts_used = 0;
  long long steps_used = 0;  // gradient steps over all restarts
  std::vector<double> trace;  // best approx_sat value per restart
};

/// beta at step k of T, linear from beta0 to beta_max.
double beta_at(const AnnealConfig& config, int step);
/// Noise level at step k of T, linear from `noise` to 0.
double noise_at(const AnnealConfig& config, int step);

/// Annealed gradient ascent with restarts. Each restart draws xhat uniformly
/// in [-1, 1]^N from its own sub-seed, then takes `steps` steps of
/// xhat += step_size * grad + noise_k * N(0, I) with beta and noise_k
/// following their schedules. The rounded point is checked with
/// sat_step before the first step and after every step, and the first
/// verified point ends the search.
SolveOutcome anneal_solve(const WMatrix& w, const AnnealConfig& config);

}  // namespace satlab::circuit
