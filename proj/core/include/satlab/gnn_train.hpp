#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "satlab/gnn.hpp"

namespace satlab::gnn {

/// One labeled graph of the learning set; the target is the one-hot pair
/// (1,0) for SAT and (0,1) for UNSAT, carried here as the label.
struct TrainingExample {
  LabeledGraph graph;
  SatStatus target = SatStatus::Unsat;
};

/// Sign-based adaptive step sizes (iRprop-).
struct RpropConfig {
  double initial_step = 0.01;
  double increase = 1.2;
  double decrease = 0.5;
  double min_step = 1e-6;
  double max_step = 1.0;
};

struct TrainConfig {
  FixedPointConfig fixed_point;
  int epochs = 200;
  RpropConfig rprop;
  double penalty_weight = 10.0;
  int power_iterations = 5;
  std::uint64_t seed = 1;
  /// Worker threads for per-graph passes; 0 = hardware concurrency. The
  /// result does not depend on this value.
  int threads = 0;
};

struct CurveRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;

  bool operator==(const CurveRecord&) const = default;
};

struct RpropState {
  std::vector<double> step;
  std::vector<double> previous_gradient;
};

/// Everything needed to continue training bit-identically.
struct TrainingState {
  GnnModel current;
  GnnModel best;
  int epoch = 0;
  int best_epoch = 0;
  double best_val_acc = -1.0;
  RpropState rprop;
  std::vector<CurveRecord> curve;

  static TrainingState fresh(const GnnModel& initial, const RpropConfig& rprop);
};

/// Applies one iRprop- update to `params` in place.
void rprop_step(std::span<double> params, std::span<const double> gradient, RpropState& state,
                const RpropConfig& config);

struct BatchResult {
  double mean_loss = 0.0;
  double accuracy = 0.0;
  std::vector<double> gradient;  // mean over examples; empty unless requested
  std::vector<Probabilities> probabilities;
  int unconverged_forward = 0;
  int unconverged_adjoint = 0;
};

/// Mean loss (and gradient) over a set of examples. Per-example work may run
/// on several threads; results are combined in a fixed order.
BatchResult evaluate_batch(const GnnModel& model, std::span<const TrainingExample> examples,
                           const TrainConfig& config, bool with_gradient);

using EpochCallback = std::function<void(const CurveRecord&, const BatchResult& train)>;

/// Full-batch training from `state` until `config.epochs` epochs have been
/// run. Each epoch evaluates loss and gradient on the training set and the
/// loss on the validation set with the current parameters, appends a curve
/// record, keeps the parameters with the best validation accuracy (earliest
/// on ties), then takes one Rprop step. Throws NumericalError on a
/// non-finite loss.
TrainingState train(TrainingState state, std::span<const TrainingExample> train_set,
                    std::span<const TrainingExample> validation_set,
                    const TrainConfig& config, const EpochCallback& on_epoch = {});

struct Metrics {
  int total = 0;
  int correct = 0;
  double accuracy = 0.0;
  double sat_accuracy = 0.0;
  double unsat_accuracy = 0.0;
  double mean_loss = 0.0;
  /// confusion[actual][predicted], index 0 = SAT, 1 = UNSAT
  std::array<std::array<int, 2>, 2> confusion{};
};

Metrics metrics_from_predictions(std::span<const Probabilities> predictions,
                                 std::span<const TrainingExample> examples);

/// Argmax classification of every example. Throws std::invalid_argument on an
/// empty dataset.
Metrics evaluate_accuracy(const GnnModel& model, std::span<const TrainingExample> examples,
                          const TrainConfig& config);

nlohmann::json metrics_to_json(const Metrics& metrics);

/// Checkpoint JSON: format tag, version, variant, dimensions, mu, the best
/// parameters by tensor name, and the training state needed to resume.
nlohmann::json checkpoint_to_json(const TrainingState& state);
TrainingState checkpoint_from_json(const nlohmann::json& json);
nlohmann::json model_to_json(const GnnModel& model);
GnnModel model_from_json(const nlohmann::json& json);

void write_checkpoint(const std::filesystem::path& path, const TrainingState& state);
TrainingState read_checkpoint(const std::filesystem::path& path);

/// CSV with header `epoch,train_loss,train_acc,val_loss,val_acc`.
void write_curve_csv(std::ostream& out, std::span<const CurveRecord> curve);
std::vector<CurveRecord> read_curve_csv(std::istream& in);

}  // namespace satlab::gnn
