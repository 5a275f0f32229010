#include "satlab/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "satlab/rng.hpp"

namespace satlab::circuit {
namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_dims(const WMatrix& w, std::size_t n) {
  if (n != static_cast<std::size_t>(w.cols())) {
    throw std::invalid_argument("vector has " + std::to_string(n) + " entries, W has " +
                                std::to_string(w.cols()) + " columns");
  }
}

// Clause terms at t = tanh(xhat): s_i = sigma(beta * inner_i).
struct Forward {
  std::vector<double> t;
  std::vector<double> s;
  ApproxSat result;
};

Forward forward(const WMatrix& w, const RelaxedPoint& p) {
  check_dims(w, p.xhat.size());
  Forward f;
  f.t.resize(p.xhat.size());
  std::transform(p.xhat.begin(), p.xhat.end(), f.t.begin(), [](double x) { return std::tanh(x); });
  f.s.resize(static_cast<std::size_t>(w.rows()));
  double sum = 0.0;
  for (int i = 0; i < w.rows(); ++i) {
    double inner = -0.5;
    for (const auto& e : w.row(i)) {
      const double tj = f.t[e.col];
      inner += e.sign * tj + tj * tj;
    }
    f.s[i] = sigmoid(p.beta * inner);
    sum += f.s[i];
  }
  f.result.outer = p.beta * (sum - w.rows() + 0.5);
  f.result.value = sigmoid(f.result.outer);
  return f;
}

// d outer / d xhat
std::vector<double> outer_grad(const WMatrix& w, const RelaxedPoint& p, const Forward& f) {
  std::vector<double> g(p.xhat.size(), 0.0);
  const double b2 = p.beta * p.beta;
  for (int i = 0; i < w.rows(); ++i) {
    const double ds = b2 * f.s[i] * (1.0 - f.s[i]);
    for (const auto& e : w.row(i)) {
      const double tj = f.t[e.col];
      g[e.col] += ds * (e.sign + 2.0 * tj);
    }
  }
  for (std::size_t j = 0; j < g.size(); ++j) g[j] *= 1.0 - f.t[j] * f.t[j];
  return g;
}

}  // namespace

WMatrix::WMatrix(int num_vars, std::vector<std::vector<Entry>> rows)
    : num_vars_(num_vars), rows_(std::move(rows)) {
  if (num_vars < 0) throw std::invalid_argument("negative column count");
  for (auto& r : rows_) {
    std::sort(r.begin(), r.end(), [](const Entry& a, const Entry& b) { return a.col < b.col; });
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (r[k].col < 0 || r[k].col >= num_vars || (r[k].sign != 1 && r[k].sign != -1)) {
        throw std::invalid_argument("invalid W entry");
      }
      if (k > 0 && r[k].col == r[k - 1].col) throw std::invalid_argument("repeated W column");
    }
  }
}

int WMatrix::at(int i, int j) const {
  for (const auto& e : row(i)) {
    if (e.col == j) return e.sign;
  }
  return 0;
}

std::vector<std::vector<int>> WMatrix::dense() const {
  std::vector<std::vector<int>> out(rows_.size(), std::vector<int>(num_vars_, 0));
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    for (const auto& e : rows_[i]) out[i][e.col] = e.sign;
  }
  return out;
}

WMatrix encode_w(const CnfFormula& formula) {
  std::vector<std::vector<WMatrix::Entry>> rows;
  rows.reserve(formula.clauses().size());
  for (int c = 0; c < formula.num_clauses(); ++c) {
    std::vector<WMatrix::Entry> row;
    for (const auto& lit : formula.clause(c).literals) {
      const int sign = lit.negated ? -1 : 1;
      auto it = std::find_if(row.begin(), row.end(),
                             [&](const WMatrix::Entry& e) { return e.col == lit.var - 1; });
      if (it == row.end()) {
        row.push_back({lit.var - 1, sign});
      } else if (it->sign != sign) {
        throw std::invalid_argument("clause " + std::to_string(c + 1) + " contains x" +
                                    std::to_string(lit.var) + " in both polarities");
      }
    }
    rows.push_back(std::move(row));
  }
  return WMatrix(formula.num_vars(), std::move(rows));
}

SignVector to_signs(const Assignment& assignment) {
  SignVector x(assignment.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = assignment.values[j] ? 1 : -1;
  return x;
}

Assignment to_assignment(std::span<const int> signs) {
  Assignment a;
  a.values.resize(signs.size());
  for (std::size_t j = 0; j < signs.size(); ++j) a.values[j] = signs[j] > 0;
  return a;
}

int sat_step(const WMatrix& w, std::span<const int> x) {
  check_dims(w, x.size());
  for (int v : x) {
    if (v != 1 && v != -1) throw std::invalid_argument("sign vector entry is not +1 or -1");
  }
  double clause_sum = 0.0;
  for (int i = 0; i < w.rows(); ++i) {
    double inner = -0.5;
    for (const auto& e : w.row(i)) inner += e.sign * x[e.col] + x[e.col] * x[e.col];
    clause_sum += inner > 0.0 ? 1.0 : 0.0;
  }
  return clause_sum - w.rows() + 0.5 > 0.0 ? 1 : 0;
}

ApproxSat approx_sat(const WMatrix& w, const RelaxedPoint& point) {
  return forward(w, point).result;
}

std::vector<double> approx_sat_grad(const WMatrix& w, const RelaxedPoint& point) {
  const Forward f = forward(w, point);
  auto g = outer_grad(w, point, f);
  const double scale = f.result.value * (1.0 - f.result.value);
  for (double& v : g) v *= scale;
  return g;
}

std::vector<double> log_approx_sat_grad(const WMatrix& w, const RelaxedPoint& point) {
  const Forward f = forward(w, point);
  auto g = outer_grad(w, point, f);
  const double scale = sigmoid(-f.result.outer);
  for (double& v : g) v *= scale;
  return g;
}

SignVector round_assignment(std::span<const double> xhat) {
  SignVector x(xhat.size());
  std::transform(xhat.begin(), xhat.end(), x.begin(), [](double v) { return v < 0.0 ? -1 : 1; });
  return x;
}

std::string_view to_string(Objective objective) {
  return objective == Objective::ApproxSat ? "approx_sat" : "log_approx_sat";
}

Objective objective_from_string(std::string_view text) {
  if (text == "approx_sat") return Objective::ApproxSat;
  if (text == "log_approx_sat") return Objective::LogApproxSat;
  throw std::invalid_argument("unknown objective '" + std::string(text) + "'");
}

std::string_view to_string(SolveStatus status) {
  return status == SolveStatus::Solved ? "SOLVED" : "UNKNOWN";
}

double beta_at(const AnnealConfig& config, int step) {
  if (config.steps <= 1) return config.beta0;
  return config.beta0 +
         (config.beta_max - config.beta0) * step / static_cast<double>(config.steps - 1);
}

double noise_at(const AnnealConfig& config, int step) {
  if (config.steps <= 1) return config.noise;
  return config.noise * (1.0 - step / static_cast<double>(config.steps - 1));
}

SolveOutcome anneal_solve(const WMatrix& w, const AnnealConfig& config) {
  if (config.restarts < 1 || config.steps < 0 || config.noise < 0) {
    throw std::invalid_argument("anneal_solve needs restarts >= 1, steps >= 0 and noise >= 0");
  }
  SolveOutcome out;
  const std::size_t n = static_cast<std::size_t>(w.cols());
  for (int r = 0; r < config.restarts; ++r) {
    out.restarts_used = r + 1;
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(r)));
    RelaxedPoint p;
    p.xhat.resize(n);
    for (double& v : p.xhat) v = rng.uniform_real(-1.0, 1.0);
    p.beta = beta_at(config, 0);
    double best = approx_sat(w, p).value;

    auto verified = [&] {
      SignVector x = round_assignment(p.xhat);
      if (sat_step(w, x) != 1) return false;
      out.status = SolveStatus::Solved;
      out.model = std::move(x);
      return true;
    };

    bool solved = verified();
    for (int k = 0; k < config.steps && !solved; ++k) {
      p.beta = beta_at(config, k);
      const auto g = config.objective == Objective::ApproxSat ? approx_sat_grad(w, p)
                                                              : log_approx_sat_grad(w, p);
      const double sigma = noise_at(config, k);
      for (std::size_t j = 0; j < n; ++j) {
        double v = p.xhat[j] + config.step_size * g[j];
        if (sigma > 0.0) v += sigma * rng.normal();
        if (config.clip > 0.0) v = std::clamp(v, -config.clip, config.clip);
        p.xhat[j] = v;
      }
      ++out.steps_used;
      best = std::max(best, approx_sat(w, p).value);
      solved = verified();
    }
    out.trace.push_back(best);
    if (solved) break;
  }
  return out;
}

}  // namespace satlab::circuit
