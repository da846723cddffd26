#pragma once

// Single experiment runs: configuration, initialization, solve, recovery and
// output files.

#include "fbmfg/baselines.hpp"
#include "fbmfg/recovery.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fbmfg {

enum class ProblemKind { GomesLog, PowerEntropy };
enum class TolKind { ExactError, RelativeSuccessive };

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::GomesLog;
  int n = 60;
  double nu = 0.0;
  double epsilon = 0.0;
  double alpha = 1.5;
  Algorithm algorithm = Algorithm::DFB1;
  std::optional<double> gamma;
  bool gamma_auto = false;  // optimal step from the local constants
  double tol = 1e-8;
  TolKind tol_kind = TolKind::RelativeSuccessive;
  int max_iter = 10000;
  std::uint64_t seed = 1;
  std::optional<double> init_radius;  // start at this distance from x*
  std::string output_dir = "out";

  /// Every problem with the configuration, one message each.
  std::vector<std::string> problems() const;
  /// Throws ContractError listing all problems.
  void validate() const;

  /// Sets one key. Keys match the CLI flags without the leading dashes
  /// ("tol-kind" and "tol_kind" are both accepted). gamma accepts "auto".
  void set(const std::string& key, const std::string& value);
};

/// Parses "key = value" lines; '#' starts a comment.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

std::string to_string(ProblemKind p);
std::string to_string(TolKind t);

/// x* + radius u / |u| with u standard Gaussian from the seed.
Vector random_init(const Vector& x_star, double radius, std::uint64_t seed);
DualPoint random_init(const DualPoint& x_star, double radius, std::uint64_t seed);

using ConvergenceRow = HistoryEntry;

/// CSV with header iteration,exact_error,relative_change,bound,elapsed_s;
/// absent values are left empty, numbers use 17 significant digits.
void emit_history(const std::vector<ConvergenceRow>& rows, const std::string& path);
void write_history(std::ostream& os, const std::vector<ConvergenceRow>& rows);

struct ExperimentResult {
  SolveReport report;
  PrimalPoint primal;
  std::optional<HjbSolution> hjb;
  std::optional<double> lambda;
  double gamma = 0.0;
  std::optional<double> rho;
  bool converged = false;
  std::vector<std::string> files;
};

/// Builds the problem, solves it, recovers (m, w) and, for nu > 0, (u, lambda).
/// With write_files the outputs go to cfg.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_files = true);

/// Step chosen for cfg: the explicit gamma, or optimal_step of the local
/// constants when gamma_auto is set.
double resolve_gamma(const ExperimentConfig& cfg);

}  // namespace fbmfg
