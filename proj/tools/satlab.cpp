// satlab: dataset generation, GNN training/evaluation and the two sweeps.
//
//   satlab gen          --config c.json --seed 1 --out data
//   satlab train        --config c.json --out run --data-dir data
//   satlab eval         --checkpoint run/checkpoint.json --manifest data/test.json
//   satlab phase-sweep  --out sweeps
//   satlab anneal-sweep --out sweeps
//   satlab solve        --cnf f.cnf [--method anneal|dpll]
//
// Results are printed to stdout as JSON, progress to stderr. On failure a
// JSON object {"error": {...}} goes to stderr and the exit status is nonzero.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "satlab/dimacs.hpp"
#include "satlab/experiment.hpp"
#include "satlab/oracle.hpp"

namespace {

using namespace satlab;
using nlohmann::json;
namespace fs = std::filesystem;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Master seed (overrides the config)");
  cmd->add_option("--out", f.out, "Output directory (overrides the config)");
  cmd->add_flag("-q,--quiet", f.quiet, "No progress output");
}

experiment::ExperimentConfig resolve(const CommonFlags& f) {
  experiment::ExperimentConfig c = f.config.empty() ? experiment::ExperimentConfig{}
                                                    : experiment::read_config(f.config);
  if (f.seed) {
    c.seed = *f.seed;
    c.train.seed = *f.seed;
  }
  if (f.out) c.out = *f.out;
  return c;
}

int fail(const std::string& type, const std::string& message, int code) {
  std::cerr << json{{"error", {{"type", type}, {"message", message}}}}.dump() << std::endl;
  return code;
}

json metrics_json(const gnn::Metrics& m) { return gnn::metrics_to_json(m); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Satisfiability experiments: random 3-SAT data, GNN classifier, circuit relaxation"};
  app.require_subcommand(1);

  CommonFlags common;

  auto* gen = app.add_subcommand("gen", "Build balanced train/val/test manifests");
  add_common(gen, common);
  std::optional<int> num_vars, train_count, val_count, test_count;
  std::optional<double> ratio;
  gen->add_option("--num-vars", num_vars, "Variables per formula");
  gen->add_option("--ratio", ratio, "Clause/variable ratio");
  gen->add_option("--train-count", train_count);
  gen->add_option("--val-count", val_count);
  gen->add_option("--test-count", test_count);

  auto* train = app.add_subcommand("train", "Train the GNN on a generated dataset");
  add_common(train, common);
  std::optional<std::string> data_dir, variant;
  std::optional<int> epochs, threads, state_dim;
  bool resume = false;
  train->add_option("--data-dir", data_dir, "Directory holding train/val/test.json");
  train->add_option("--epochs", epochs);
  train->add_option("--threads", threads, "Worker threads (0 = all cores)");
  train->add_option("--variant", variant, "linear or nonlinear");
  train->add_option("--state-dim", state_dim);
  train->add_flag("--resume", resume, "Continue from <out>/checkpoint.json if present");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest");
  add_common(eval, common);
  std::string checkpoint, manifest;
  eval->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  eval->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);

  auto* phase = app.add_subcommand("phase-sweep", "SAT fraction against clause/variable ratio");
  add_common(phase, common);
  std::optional<int> samples;
  phase->add_option("--samples", samples, "Formulas per ratio");

  auto* anneal = app.add_subcommand("anneal-sweep", "Annealed relaxation solver against n");
  add_common(anneal, common);
  std::optional<int> per_point;
  anneal->add_option("--per-point", per_point, "Satisfiable instances per n");

  auto* solve = app.add_subcommand("solve", "Solve one DIMACS file");
  add_common(solve, common);
  std::string cnf_path;
  std::string method = "anneal";
  solve->add_option("--cnf", cnf_path)->required()->check(CLI::ExistingFile);
  solve->add_option("--method", method, "anneal or dpll")
      ->check(CLI::IsMember({"anneal", "dpll"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    auto c = resolve(common);
    std::ostream* log = common.quiet ? nullptr : &std::cerr;
    json result;
    if (gen->parsed()) {
      if (num_vars) c.dataset.num_vars = *num_vars;
      if (ratio) c.dataset.ratio = *ratio;
      if (train_count) c.dataset.train_count = *train_count;
      if (val_count) c.dataset.val_count = *val_count;
      if (test_count) c.dataset.test_count = *test_count;
      result = experiment::cmd_gen(c, log);
    } else if (train->parsed()) {
      if (data_dir) c.data_dir = *data_dir;
      if (epochs) c.train.epochs = *epochs;
      if (threads) c.train.threads = *threads;
      if (variant) c.model.variant = gnn::variant_from_string(*variant);
      if (state_dim) c.model.state_dim = *state_dim;
      if (resume) c.resume = true;
      result = experiment::run_record_to_json(experiment::cmd_train(c, log));
    } else if (eval->parsed()) {
      result = metrics_json(experiment::cmd_eval(c, checkpoint, manifest));
    } else if (phase->parsed()) {
      if (samples) c.phase_sweep.samples = *samples;
      result = json::array();
      for (const auto& p : experiment::cmd_phase_sweep(c, log)) {
        result.push_back({{"ratio", p.ratio},
                          {"samples", p.samples},
                          {"satisfiable", p.satisfiable},
                          {"sat_fraction", p.sat_fraction()}});
      }
    } else if (anneal->parsed()) {
      if (per_point) c.anneal_sweep.satisfiable_per_point = *per_point;
      result = json::array();
      for (const auto& p : experiment::cmd_anneal_sweep(c, log)) {
        result.push_back({{"n", p.num_vars},
                          {"instances", p.instances},
                          {"satisfiable", p.satisfiable},
                          {"solved", p.solved},
                          {"miss_rate", p.miss_rate()}});
      }
    } else if (solve->parsed()) {
      const CnfFormula f = read_dimacs_file(cnf_path);
      if (method == "dpll") {
        const SatResult r = dpll_sat(f);
        result = {{"status", std::string(to_string(r.status))}};
        if (r.model) result["model"] = circuit::to_signs(*r.model);
      } else {
        circuit::AnnealConfig solver = c.anneal_sweep.solver;
        solver.seed = c.seed;
        const auto r = circuit::anneal_solve(circuit::encode_w(f), solver);
        result = {{"status", std::string(circuit::to_string(r.status))},
                  {"restarts_used", r.restarts_used},
                  {"steps_used", r.steps_used}};
        if (r.model) result["model"] = *r.model;
      }
    }
    std::cout << result.dump(2) << std::endl;
    return 0;
  } catch (const std::invalid_argument& e) {
    return fail("invalid_argument", e.what(), 2);
  } catch (const satlab::BudgetExhausted& e) {
    std::cerr << json{{"error",
                       {{"type", "budget_exhausted"},
                        {"message", e.what()},
                        {"attempts", e.attempts},
                        {"sat_found", e.sat_found},
                        {"unsat_found", e.unsat_found}}}}
                     .dump()
              << std::endl;
    return 3;
  } catch (const gnn::NumericalError& e) {
    return fail("numerical_error", e.what(), 4);
  } catch (const std::exception& e) {
    return fail("runtime_error", e.what(), 1);
  }
}
