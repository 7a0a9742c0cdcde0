#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "backsolve/solver.hpp"

namespace backsolve {

enum class ExperimentKind {
  kConvergence,
  kIntervalLength,
  kPerturbRandom,
  kPerturbMode,
  kInfSup,
  kStabilityOracle,
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::kConvergence;
  int d = 2;
  double T = 1.0;
  std::optional<double> L;  // defaults to T
  std::vector<int> k_range;
  int l = 0;
  // The time mesh has 2^(k + offset) elements on (0, T), restricted to
  // (T - L, T).
  int time_level_offset = 0;
  EpsilonStrategy epsilon_strategy = EpsilonStrategy::kPlain;
  std::vector<double> epsilon_values;  // one per k for kExplicit
  std::string solution = "polynomial";
  uint64_t seed = 1;
  double target_norm = 0.01;  // perturb-random
  int mode_n = 1;             // perturb-mode
  double amplitude = 0.05;    // perturb-mode
  std::vector<double> slice_times;  // defaults to T/4, T/2, 3T/4, T
  StoppingRule stopping_rule = StoppingRule::kConsistent;
  std::optional<double> threshold;  // fixed PCG threshold, overrides the rule
  std::vector<double> betas{0.0, 0.5};  // stability-oracle
  std::string output_path;

  double interval_length() const { return L.value_or(T); }
};

/// `key = value` lines; `#` starts a comment; lists are comma-separated.
/// Unknown keys, malformed values and inconsistent settings throw
/// std::invalid_argument naming the line and key.
ExperimentConfig ParseConfig(const std::string& text);

std::string ExperimentName(ExperimentKind kind);

using CellValue = std::variant<long long, double, std::string>;

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<CellValue>> rows;

  /// Index of a column; throws if absent.
  size_t Column(const std::string& name) const;
  double Number(size_t row, const std::string& name) const;
  std::string Text(size_t row, const std::string& name) const;
};

/// Runs the experiment; rows are ordered by k (and strategy). Rows for
/// different k run on up to `threads` threads. Warnings go to `log` if set.
ResultTable RunExperiment(const ExperimentConfig& config, int threads = 1,
                          std::ostream* log = nullptr);

/// Name of the slice error column for time t.
std::string SliceColumn(double t);

void WriteCsv(const ResultTable& table, std::ostream& out);
ResultTable ReadCsv(std::istream& in);

}  // namespace backsolve
