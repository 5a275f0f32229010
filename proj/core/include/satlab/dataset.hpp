#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "satlab/cnf.hpp"
#include "satlab/oracle.hpp"

namespace satlab {

struct DatasetSpec {
  int num_vars = 20;
  double ratio = 4.4;
  int count = 0;
  std::uint64_t seed = 0;

  int num_clauses() const { return clauses_for_ratio(ratio, num_vars); }
};

struct DatasetRecord {
  std::string path;  // DIMACS file, relative to the manifest's directory
  SatStatus label = SatStatus::Unsat;
  std::uint64_t seed = 0;  // generate_random_3sat seed that recreates the formula
  std::uint64_t attempts = 0;  // candidates drawn up to and including this one
  CnfFormula formula;  // in memory only, not part of the manifest JSON
};

/// Labeled, balanced problem set. Exactly count/2 records are SAT.
struct DatasetManifest {
  DatasetSpec spec;
  std::uint64_t total_attempts = 0;
  std::vector<DatasetRecord> records;

  int m_max() const { return spec.num_clauses(); }
};

class BudgetExhausted : public std::runtime_error {
 public:
  BudgetExhausted(const std::string& what, std::uint64_t attempts, int sat_found,
                  int unsat_found)
      : std::runtime_error(what), attempts(attempts), sat_found(sat_found),
        unsat_found(unsat_found) {}
  std::uint64_t attempts;
  int sat_found;
  int unsat_found;
};

inline constexpr std::uint64_t kAttemptsPerRecord = 1000;

/// Seed of the k-th candidate instance drawn for a dataset built from `seed`.
std::uint64_t candidate_seed(std::uint64_t dataset_seed, std::uint64_t attempt);

/// Rejection-samples random 3-SAT instances with round(ratio * n) clauses,
/// labels each with dpll_sat, and keeps them until count/2 of each class are
/// collected. Records appear in acceptance order and get paths
/// `<path_prefix><index>.cnf`. Throws BudgetExhausted after
/// kAttemptsPerRecord * count candidates.
DatasetManifest build_balanced_dataset(int num_vars, double ratio, int count,
                                       std::uint64_t seed,
                                       const std::string& path_prefix = "");

nlohmann::json manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const nlohmann::json& json);

/// Writes `<dir>/<name>.json` plus each record's DIMACS file under `dir`.
void write_dataset(const std::filesystem::path& dir, const std::string& name,
                   const DatasetManifest& manifest);

/// Reads a manifest and loads every referenced DIMACS file.
DatasetManifest read_dataset(const std::filesystem::path& manifest_path);

}  // namespace satlab
