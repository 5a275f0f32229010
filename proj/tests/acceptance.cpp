// Runs every acceptance criterion and prints one PASS/FAIL line per
// criterion. Exit status is nonzero if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "gnn_support.hpp"
#include "satlab/circuit.hpp"
#include "satlab/experiment.hpp"
#include "satlab/oracle.hpp"
#include "support.hpp"

namespace {

using namespace satlab;
namespace fs = std::filesystem;
using satlab::testing::assignment_from_bits;
using satlab::testing::central_differences;
using satlab::testing::five_point_differences;
using satlab::testing::random_labeled_graph;
using satlab::testing::relative_error;

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Options {
  fs::path work_dir = "acceptance_work";
  bool full = false;
  int threads = 0;
};

Verdict oracle_exactness(const Options&) {
  Rng rng(101);
  const double ratios[] = {3.0, 4.4, 6.6, 10.0};
  int disagreements = 0, sat = 0;
  for (int i = 0; i < 1000; ++i) {
    const int n = 3 + static_cast<int>(rng.uniform_index(10));
    const auto f = generate_random_3sat(n, clauses_for_ratio(ratios[i % 4], n), derive_seed(101, i));
    const auto d = dpll_sat(f);
    const auto b = brute_force_sat(f);
    if (d.status != b.status || (d.is_sat() && !evaluate(f, *d.model))) ++disagreements;
    sat += b.is_sat();
  }
  return {disagreements == 0,
          fmt::format("1000 instances ({} SAT), {} disagreements", sat, disagreements)};
}

Verdict circuit_exactness(const Options&) {
  int disagreements = 0;
  long long checked = 0;
  Rng rng(102);
  for (int i = 0; i < 100; ++i) {
    const int n = 1 + static_cast<int>(rng.uniform_index(10));
    const int m = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(5 * n + 1)));
    const auto f = satlab::testing::random_formula(rng, n, m, 3);
    const auto w = circuit::encode_w(f);
    for (std::uint64_t bits = 0; bits < (1ULL << n); ++bits) {
      const auto a = assignment_from_bits(n, bits);
      disagreements += (circuit::sat_step(w, circuit::to_signs(a)) == 1) != evaluate(f, a);
      ++checked;
    }
  }
  return {disagreements == 0,
          fmt::format("100 instances, {} assignments, {} disagreements", checked, disagreements)};
}

Verdict relaxation_soundness(const Options&) {
  Rng rng(103);
  int positives = 0, violations = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform_index(10));
    const auto f = generate_random_3sat(n, 1 + static_cast<int>(rng.uniform_index(5 * n)),
                                        derive_seed(103, trial));
    const auto w = circuit::encode_w(f);
    // Half the points are biased toward a model so the implication is exercised.
    const auto model = trial % 2 == 0 ? dpll_sat(f).model : std::nullopt;
    circuit::RelaxedPoint p;
    p.xhat.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      const double sign = model && rng.uniform_real() < 0.9 ? (model->values[j] ? 1.0 : -1.0)
                                                              : (rng.coin() ? 1.0 : -1.0);
      p.xhat[j] = sign * rng.uniform_real(0.0, 4.0);
    }
    p.beta = rng.uniform_real(0.05, 20.0);
    if (circuit::approx_sat(w, p).value > 0.5) {
      ++positives;
      violations += circuit::sat_step(w, circuit::round_assignment(p.xhat)) != 1;
    }
  }
  return {violations == 0 && positives > 0,
          fmt::format("10000 triples, {} with approx_sat > 0.5, {} violations", positives,
                      violations)};
}

Verdict gradient_correctness(const Options&) {
  Rng rng(104);
  double worst_circuit = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform_index(8));
    const auto w = circuit::encode_w(generate_random_3sat(
        n, 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(4 * n))),
        derive_seed(104, trial)));
    circuit::RelaxedPoint p;
    p.xhat.resize(static_cast<std::size_t>(n));
    for (double& v : p.xhat) v = rng.uniform_real(-1.5, 1.5);
    p.beta = rng.uniform_real(0.5, 5.0);
    const auto g = circuit::approx_sat_grad(w, p);
    const auto fd = five_point_differences(p.xhat, [&] { return circuit::approx_sat(w, p).value; });
    for (std::size_t j = 0; j < g.size(); ++j) {
      worst_circuit = std::max(worst_circuit, relative_error(g[j], fd[j]));
    }
  }

  const gnn::FixedPointConfig tight{5000, 1e-14};
  double worst_gnn = 0.0;
  int unconverged = 0;
  for (int trial = 0; trial < 50; ++trial) {
    gnn::ModelShape shape;
    shape.variant = trial % 2 ? gnn::Variant::Nonlinear : gnn::Variant::Linear;
    shape.state_dim = 1 + static_cast<int>(rng.uniform_index(4));
    shape.hidden = 5;
    shape.edge_label_dim = 3;
    const auto graph = random_labeled_graph(rng, 2 + static_cast<int>(rng.uniform_index(9)), 3, 4);
    auto model = gnn::GnnModel::random(shape, 500 + trial,
                                       shape.variant == gnn::Variant::Linear ? 0.8 : 0.15);
    const SatStatus target = trial % 4 < 2 ? SatStatus::Sat : SatStatus::Unsat;
    const auto r = gnn::evaluate_example(model, graph, target, tight, {}, true);
    unconverged += !r.states.converged || !r.backward.converged;
    const auto fd = central_differences(model.params(), [&] {
      return gnn::evaluate_example(model, graph, target, tight, {}, false).loss;
    });
    for (std::size_t k = 0; k < fd.size(); ++k) {
      worst_gnn = std::max(worst_gnn, relative_error(r.backward.gradient[k], fd[k]));
    }
  }
  return {worst_circuit <= 1e-6 && worst_gnn <= 1e-4 && unconverged == 0,
          fmt::format("worst relative error: approx_sat_grad {:.2e} (50 cases), GNN {:.2e} "
                      "(50 cases)",
                      worst_circuit, worst_gnn)};
}

Verdict contraction(const Options&) {
  Rng rng(105);
  const gnn::FixedPointConfig config{1000, 1e-8};
  int slow = 0, mismatched = 0, worst_iterations = 0;
  double worst_gap = 0.0;
  int bound = 0;
  for (int trial = 0; trial < 100; ++trial) {
    gnn::ModelShape shape;
    shape.variant = gnn::Variant::Linear;
    shape.state_dim = 1 + static_cast<int>(rng.uniform_index(6));
    shape.edge_label_dim = 4;
    shape.mu = rng.uniform_real(0.3, 0.95);
    const auto graph = random_labeled_graph(rng, 2 + static_cast<int>(rng.uniform_index(30)), 4,
                                            static_cast<int>(rng.uniform_index(40)));
    const auto model = gnn::GnnModel::random(shape, 700 + trial, 1.0);
    bound = static_cast<int>(std::ceil(std::log(config.tolerance) / std::log(shape.mu))) + 5;
    const auto from_zero = gnn::forward_fixed_point(model, graph, config);
    std::vector<double> init(from_zero.values.size());
    for (double& v : init) v = rng.uniform_real(-1.0, 1.0);
    const auto from_random = gnn::forward_fixed_point(model, graph, config, init);
    worst_iterations = std::max(worst_iterations, from_zero.iterations);
    if (!from_zero.converged || from_zero.iterations > bound || !from_random.converged) ++slow;
    for (std::size_t k = 0; k < init.size(); ++k) {
      const double gap = std::abs(from_zero.values[k] - from_random.values[k]);
      worst_gap = std::max(worst_gap, gap);
      if (gap > 10 * config.tolerance) ++mismatched;
    }
  }
  return {slow == 0 && mismatched == 0,
          fmt::format("100 graphs, {} over the iteration bound, worst {} iterations, max "
                      "init gap {:.2e}",
                      slow, worst_iterations, worst_gap)};
}

Verdict annealing_scaling(const Options& o) {
  experiment::ExperimentConfig c;
  c.out = o.work_dir / "anneal";
  const auto points = experiment::cmd_anneal_sweep(c, &std::cerr);
  bool ok = !points.empty() && points.front().num_vars == 10 && points.front().miss_rate() == 0.0;
  std::string rates;
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (k > 0 && points[k].miss_rate() < points[k - 1].miss_rate()) ok = false;
    rates += fmt::format("{}n={}: {:.2f}", k ? ", " : "", points[k].num_vars, points[k].miss_rate());
  }
  return {ok, "miss rate " + rates};
}

Verdict gnn_learning(const Options& o) {
  struct Target {
    double ratio;
    double threshold;
  };
  std::vector<Target> targets;
  experiment::ExperimentConfig base;
  base.train.threads = o.threads;
  if (o.full) {
    targets = {{4.4, 0.60}, {6.6, 0.58}, {10.0, 0.58}};
  } else {
    targets = {{4.4, 0.55}};
    base.dataset.train_count = 200;
    base.dataset.val_count = 50;
    base.dataset.test_count = 50;
  }
  bool ok = true;
  std::string detail;
  for (const auto& t : targets) {
    auto c = base;
    c.dataset.ratio = t.ratio;
    c.out = o.work_dir / fmt::format("learning_{}", t.ratio);
    try {
      experiment::cmd_gen(c, &std::cerr);
      const auto r = experiment::cmd_train(c, &std::cerr);
      ok = ok && r.test.accuracy >= t.threshold;
      detail += fmt::format("{}ratio {}: test {:.3f} (need {:.2f}, best epoch {})",
                            detail.empty() ? "" : "; ", t.ratio, r.test.accuracy, t.threshold,
                            r.best_epoch);
    } catch (const std::exception& e) {
      ok = false;
      detail += fmt::format("{}ratio {}: {}", detail.empty() ? "" : "; ", t.ratio, e.what());
    }
  }
  return {ok, (o.full ? "full: " : "reduced 200/50/50: ") + detail};
}

Verdict phase_sweep(const Options& o) {
  experiment::ExperimentConfig c;
  c.out = o.work_dir / "phase";
  const auto points = experiment::cmd_phase_sweep(c, &std::cerr);
  auto sigma = [](const experiment::PhasePoint& p) {
    // Binomial standard error, with p kept away from 0 and 1 so that empty
    // or full cells still carry some uncertainty.
    const double f = std::clamp(p.sat_fraction(), 0.5 / p.samples, 1.0 - 0.5 / p.samples);
    return std::sqrt(f * (1 - f) / p.samples);
  };
  int rises = 0;
  for (std::size_t k = 1; k < points.size(); ++k) {
    const double tol = 3 * std::hypot(sigma(points[k]), sigma(points[k - 1]));
    rises += points[k].sat_fraction() > points[k - 1].sat_fraction() + tol;
  }
  double crossing = NAN;
  for (std::size_t k = 1; k < points.size() && std::isnan(crossing); ++k) {
    const double a = points[k - 1].sat_fraction(), b = points[k].sat_fraction();
    if (a >= 0.5 && b < 0.5) {
      crossing = points[k - 1].ratio + (a - 0.5) / (a - b) * (points[k].ratio - points[k - 1].ratio);
    }
  }
  const bool ok = rises == 0 && crossing >= 3.5 && crossing <= 7.0;
  return {ok, fmt::format("{} ratios, {} significant increases, 0.5 crossed at ratio {:.2f}",
                          points.size(), rises, crossing)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Every regular file under `dir`, by relative path.
std::map<std::string, std::string> snapshot(const fs::path& dir, const std::set<std::string>& skip) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), dir).generic_string();
    if (!skip.count(rel)) out[rel] = slurp(e.path());
  }
  return out;
}

Verdict determinism(const Options& o) {
  auto run_all = [&](const fs::path& out) {
    fs::remove_all(out);
    experiment::ExperimentConfig c;
    c.out = out;
    c.seed = 11;
    c.dataset = {12, 4.4, 30, 10, 10};
    c.model.state_dim = 5;
    c.model.hidden = 8;
    c.train.epochs = 15;
    c.train.threads = o.threads;
    c.checkpoint_every = 4;
    c.phase_sweep = {12, {2.0, 4.4, 8.0}, 30};
    c.anneal_sweep.num_vars = {8, 12};
    c.anneal_sweep.satisfiable_per_point = 10;
    c.anneal_sweep.solver.steps = 200;
    experiment::cmd_gen(c);
    experiment::cmd_train(c);
    experiment::cmd_eval(c, out / "checkpoint.json", out / "test.json");
    experiment::cmd_phase_sweep(c);
    experiment::cmd_anneal_sweep(c);
    // run.json carries the wall-clock time and its own output paths.
    auto run = nlohmann::json::parse(slurp(out / "run.json"));
    for (const char* key : {"wall_clock_seconds", "curve_path", "checkpoint_path"}) run.erase(key);
    run["config"].erase("out");
    auto eval = nlohmann::json::parse(slurp(out / "eval.json"));
    eval.erase("checkpoint");
    eval.erase("manifest");
    auto files = snapshot(out, {"run.json", "eval.json"});
    files["run.json (normalized)"] = run.dump();
    files["eval.json (normalized)"] = eval.dump();
    return files;
  };
  const auto a = run_all(o.work_dir / "determinism_a");
  const auto b = run_all(o.work_dir / "determinism_b");
  int differing = 0;
  std::string first;
  for (const auto& [name, content] : a) {
    const auto it = b.find(name);
    if (it == b.end() || it->second != content) {
      if (differing++ == 0) first = name;
    }
  }
  if (a.size() != b.size()) ++differing;
  return {differing == 0 && !a.empty(),
          fmt::format("{} files compared, {} differ{}", a.size(), differing,
                      first.empty() ? "" : " (first: " + first + ")")};
}

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;  // 0: no limit
  std::function<Verdict(const Options&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  Options options;
  std::vector<int> only;
  CLI::App app{"satlab acceptance criteria"};
  app.add_option("--work-dir", options.work_dir, "Scratch directory for generated artifacts");
  app.add_flag("--full", options.full, "Run the full-size learning criterion");
  app.add_option("--only", only, "Run only these criteria");
  app.add_option("--threads", options.threads, "Training threads (0 = all cores)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {1, "oracle exactness", 60, oracle_exactness},
      {2, "circuit-formula exactness", 60, circuit_exactness},
      {3, "relaxation soundness", 60, relaxation_soundness},
      {4, "gradient correctness", 300, gradient_correctness},
      {5, "contraction and fixed point", 60, contraction},
      {6, "annealing scaling", 1800, annealing_scaling},
      {7, "GNN learning", 0, gnn_learning},
      {8, "phase sweep sanity", 600, phase_sweep},
      {9, "determinism", 0, determinism},
  };

  fs::create_directories(options.work_dir);
  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    double limit = c.limit_seconds;
    if (c.id == 7 && !options.full) limit = 1200;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run(options);
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limit > 0 && seconds > limit) {
      v.pass = false;
      v.detail += fmt::format("; exceeded {:.0f} s limit", limit);
    }
    failures += !v.pass;
    std::cout << fmt::format("[{}] {}. {}: {} ({:.1f} s)", v.pass ? "PASS" : "FAIL", c.id,
                             c.name, v.detail, seconds)
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
