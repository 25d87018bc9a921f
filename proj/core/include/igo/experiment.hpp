#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "igo/harness.hpp"

namespace igo {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key=value experiment description ('#' starts a comment, unknown or
// duplicate keys are errors). Worker thread count deliberately stays out of
// the file: it comes from --threads or IGO_THREADS and never changes any
// computed value.
struct ExperimentConfig {
  int dimension = 2;                                  // dimension
  int lambda = 8;                                     // lambda
  std::string weights = "truncation";                 // weights: preset or comma list
  std::vector<double> objective_eigenvalues = {1.0};  // objective.eigenvalues (single value broadcasts)
  bool objective_rotate = false;                      // objective.rotate
  std::vector<double> objective_optimum;              // objective.optimum (empty: origin)
  std::vector<double> init_mean;                      // init.mean (empty: all twos)
  double init_cov_scale = 1.0;                        // init.cov_scale
  std::string surrogate = "exact";                    // surrogate: exact|negated|noise:<s>|hessian|blockswap[:mu]
  std::string gate_kind = "kendall";                  // gate.kind
  std::string gate_threshold = "auto";                // gate.threshold: auto|<real in [-1,1]>
  std::string gate_source = "sample";                 // gate.source: sample|population|ema
  double ema_decay = 0.5;                             // ema.decay
  std::string alpha = "optimal";                      // alpha: optimal|max|<real>
  int iterations = 100;                               // iterations
  int replicates = 1000;                              // replicates
  std::uint64_t seed = 1;                             // seed
  std::int64_t mc_samples = 10000;                    // mc.samples
  std::int64_t mc_reference = 100000;                 // mc.reference
  std::int64_t mc_pairs = 10000;                      // mc.pairs
  std::int64_t mc_gate_pairs = 100000;                // mc.gate_pairs
  std::int64_t mc_gate_samples = 30000;               // mc.gate_samples
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config_file(const std::string& path);

WeightScheme scheme_from_config(const ExperimentConfig& cfg);
QuadraticObjective objective_from_config(const ExperimentConfig& cfg);
GaussianParams initial_params_from_config(const ExperimentConfig& cfg);
Surrogate surrogate_from_config(const ExperimentConfig& cfg, const QuadraticObjective& obj,
                                const GaussianParams& theta_ref);

// "auto" resolves to admissible + 1e-4 * (1 - admissible).
double resolve_threshold(const ExperimentConfig& cfg, const WeightScheme& scheme);
// "optimal" is beta (1-gamma); "max" is 0.99 * 2 beta (1-gamma).
double resolve_alpha(const ExperimentConfig& cfg, const WeightScheme& scheme, int dimension,
                     double threshold);

MonotoneRunSpec run_spec_from_config(const ExperimentConfig& cfg, int threads);

// 17-significant-digit shortest-faithful formatting used by every CSV field.
std::string format_real(double v);

// RFC-4180 quoting, LF line endings, header row first.
std::string to_csv(const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows);

std::string reports_to_csv(const std::vector<BoundCheckReport>& reports);
std::string trajectory_to_csv(const std::vector<DriftRecord>& records);

// Glob with '*' and '?'.
bool glob_match(std::string_view pattern, std::string_view text);

// The full bound-check suite: update-energy and descent bounds, moment
// bounds, the Pearson and variance identities, conditional-weight probes and
// the gated-drift runs. filter selects checks by name before they run.
std::vector<BoundCheckReport> run_verify_suite(const ExperimentConfig& cfg,
                                               const std::string& filter, int threads);

std::vector<DriftRecord> run_optimize(const ExperimentConfig& cfg, int threads);

// Scheme constants and decrease rates for the configured scheme/kind.
std::vector<std::pair<std::string, double>> constants_table(const ExperimentConfig& cfg);

struct CorrelateResult {
  double tau = 0.0;
  double rho = 0.0;
  std::int64_t n = 0;
};
CorrelateResult correlate_files(const std::string& path_f, const std::string& path_g,
                                const std::optional<WeightScheme>& scheme);

}  // namespace igo
