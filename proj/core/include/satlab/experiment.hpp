#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "satlab/circuit.hpp"
#include "satlab/dataset.hpp"
#include "satlab/gnn_train.hpp"

namespace satlab::experiment {

struct DatasetConfig {
  int num_vars = 20;
  double ratio = 4.4;
  int train_count = 1000;
  int val_count = 200;
  int test_count = 200;
};

struct ModelConfig {
  gnn::Variant variant = gnn::Variant::Nonlinear;
  int state_dim = 10;
  int hidden = 32;
  double mu = 0.9;
  double init_scale = 0.1;
  bool compress_edge_labels = false;
};

struct PhaseSweepConfig {
  int num_vars = 20;
  std::vector<double> ratios = {1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0,
                                5.5, 6.0, 6.5, 7.0, 7.5, 8.0, 8.5, 9.0, 9.5, 10.0};
  int samples = 500;
};

struct AnnealSweepConfig {
  std::vector<int> num_vars = {10, 20, 40, 80};
  double ratio = 4.3;
  int satisfiable_per_point = 100;
  circuit::AnnealConfig solver;
};

/// Resolved configuration of one command invocation. JSON sections mirror
/// the members; missing keys keep their defaults, unknown keys are errors.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::filesystem::path out = "out";
  std::filesystem::path data_dir;  // train/eval input; defaults to `out`
  DatasetConfig dataset;
  ModelConfig model;
  gnn::TrainConfig train;
  int checkpoint_every = 10;  // epochs between checkpoint writes
  bool resume = false;
  PhaseSweepConfig phase_sweep;
  AnnealSweepConfig anneal_sweep;

  std::filesystem::path dataset_dir() const { return data_dir.empty() ? out : data_dir; }
};

nlohmann::json config_to_json(const ExperimentConfig& config);
/// Overlays `json` on `base`.
ExperimentConfig config_from_json(const nlohmann::json& json, ExperimentConfig base = {});
ExperimentConfig read_config(const std::filesystem::path& path);
/// Throws std::invalid_argument for out-of-range values.
void validate(const ExperimentConfig& config);

inline constexpr const char* kSplitNames[] = {"train", "val", "test"};

/// Builds the train/val/test manifests under `out` (`<split>.json` plus
/// `<split>/NNNNNN.cnf`). Split k uses dataset seed derive_seed(seed, k+1).
/// Returns a summary of the three splits.
nlohmann::json cmd_gen(const ExperimentConfig& config, std::ostream* log = nullptr);

struct SplitData {
  DatasetManifest manifest;
  std::vector<gnn::TrainingExample> examples;
};

/// Reads `<dir>/<split>.json` and encodes every formula with the manifest's
/// m_max.
SplitData load_split(const std::filesystem::path& dir, const std::string& split,
                     const ModelConfig& model);

struct RunRecord {
  nlohmann::json config;
  gnn::Metrics train;
  gnn::Metrics val;
  gnn::Metrics test;
  int epochs_run = 0;
  int best_epoch = 0;
  std::filesystem::path curve_path;
  std::filesystem::path checkpoint_path;
  double wall_clock_seconds = 0.0;
};

nlohmann::json run_record_to_json(const RunRecord& record);

/// Trains on the dataset in config.dataset_dir() and writes curves.csv,
/// checkpoint.json and run.json to config.out. With config.resume and an
/// existing checkpoint, training continues from its saved state.
RunRecord cmd_train(const ExperimentConfig& config, std::ostream* log = nullptr);

/// Metrics of the best parameters in `checkpoint` on one manifest; also
/// written to `<out>/eval.json`.
gnn::Metrics cmd_eval(const ExperimentConfig& config, const std::filesystem::path& checkpoint,
                      const std::filesystem::path& manifest);

struct PhasePoint {
  double ratio = 0.0;
  int samples = 0;
  int satisfiable = 0;
  double sat_fraction() const { return samples > 0 ? double(satisfiable) / samples : 0.0; }
};

/// Writes `<out>/phase_sweep.csv` with header `ratio,samples,satisfiable,sat_fraction`.
std::vector<PhasePoint> cmd_phase_sweep(const ExperimentConfig& config,
                                        std::ostream* log = nullptr);

struct AnnealPoint {
  int num_vars = 0;
  int instances = 0;  // generated, satisfiable or not
  int satisfiable = 0;
  int solved = 0;
  double miss_rate() const { return satisfiable > 0 ? 1.0 - double(solved) / satisfiable : 0.0; }
};

/// For each n, draws instances at the configured ratio until
/// satisfiable_per_point of them are SAT, runs anneal_solve on those and
/// writes `<out>/anneal_sweep.csv` with header
/// `n,instances,satisfiable,solved,miss_rate`.
std::vector<AnnealPoint> cmd_anneal_sweep(const ExperimentConfig& config,
                                          std::ostream* log = nullptr);

void write_phase_csv(std::ostream& out, const std::vector<PhasePoint>& points);
std::vector<PhasePoint> read_phase_csv(std::istream& in);
void write_anneal_csv(std::ostream& out, const std::vector<AnnealPoint>& points);
std::vector<AnnealPoint> read_anneal_csv(std::istream& in);

}  // namespace satlab::experiment
