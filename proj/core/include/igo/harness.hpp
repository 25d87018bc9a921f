#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "igo/common.hpp"
#include "igo/correlation.hpp"
#include "igo/gaussian.hpp"
#include "igo/rng.hpp"
#include "igo/surrogate.hpp"
#include "igo/utility_poly.hpp"
#include "igo/weights.hpp"

namespace igo {

enum class Verdict { holds, violated_within_noise, violated };
const char* to_string(Verdict);

// One Monte-Carlo bound check. The verdict is one-sided with a four-sigma
// noise allowance: holds iff lhs <= rhs + 4 se, violated iff lhs - 4 se >
// rhs. Identity checks are folded into the same rule by reporting
// lhs = |estimate - target| against rhs = 0 with the combined std error.
struct BoundCheckReport {
  std::string name;
  double lhs_estimate = 0.0;
  double lhs_std_error = 0.0;
  double rhs_bound = 0.0;
  double slack = 0.0;  // rhs - lhs
  std::int64_t n_replicates = 0;
  Verdict verdict = Verdict::holds;
};

BoundCheckReport one_sided_report(std::string name, double lhs, double std_error, double rhs,
                                  std::int64_t n);
BoundCheckReport identity_report(std::string name, double estimate, double target,
                                 double combined_std_error, std::int64_t n);

struct McBudgets {
  std::int64_t samples = 10000;       // per-estimate sample budget
  std::int64_t reference = 100000;    // empirical reference size
  std::int64_t pairs = 10000;         // Kendall pair budget inside bound checks
  std::int64_t gate_pairs = 100000;   // gate Kendall measurement
  std::int64_t gate_samples = 30000;  // gate Pearson measurement
};

// E[step_mean^T A step_mean] <= N_w Tr(C A), for any ranking source.
BoundCheckReport check_quadratic_term(std::string name, const GaussianParams& theta,
                                      const QuadraticObjective& obj, const Surrogate& surrogate,
                                      const WeightScheme& scheme, std::int64_t replicates,
                                      RngStream stream, int threads = 0);

// E[sum_i W_i (f(x_i) - J)] <= -(sqrt(2)/6) M_w sqrt(M_f) for non-increasing
// weights ranked by f itself (the left side equals grad J paired with the
// expected update).
BoundCheckReport check_descent(std::string name, const GaussianParams& theta,
                               const QuadraticObjective& obj, const WeightScheme& scheme,
                               std::int64_t replicates, RngStream stream, int threads = 0);

// E[|u(P_g(g)) - u(P_f(f))|^s]^{1/s} <= L_u ((1 - tau)/2)^{1/s} for s >= 1,
// with tau estimated from independent pairs; noise from both sides combined.
BoundCheckReport check_kendall_bound(std::string name, const GaussianParams& theta,
                                     const QuadraticObjective& obj, const Surrogate& surrogate,
                                     const WeightScheme& scheme, double s,
                                     const McBudgets& budgets, RngStream stream, int threads = 0);

// K_w == 2 U_u (1 - rho), estimated through two independent sub-streams.
BoundCheckReport check_pearson_identity(std::string name, const GaussianParams& theta,
                                        const QuadraticObjective& obj, const Surrogate& surrogate,
                                        const WeightScheme& scheme, const McBudgets& budgets,
                                        RngStream stream, int threads = 0);

// Var[f(X)] == M_f(theta) on a quadratic.
BoundCheckReport check_variance_identity(std::string name, const GaussianParams& theta,
                                         const QuadraticObjective& obj, std::int64_t samples,
                                         RngStream stream, int threads = 0);

// E[W_1 | f(x_1) = y] == u(P_f(y))/lambda, probed at reference quantiles.
std::vector<BoundCheckReport> check_conditional_weight(const std::string& name_prefix,
                                                       const GaussianParams& theta,
                                                       const QuadraticObjective& obj,
                                                       const WeightScheme& scheme,
                                                       const std::vector<double>& probe_quantiles,
                                                       std::int64_t replicates,
                                                       std::int64_t reference_size,
                                                       RngStream stream, int threads = 0);

// Where the gate's correlation measurement comes from: the current
// population's sample statistic, a fresh population-level MC estimate, or an
// exponential moving average of the sample statistic.
enum class GateSource { sample, population, ema };

struct DriftRecord {
  int iteration = 0;
  double j_before = 0.0;
  double j_mean_after = 0.0;
  double j_std_error = 0.0;
  double alpha_used = 0.0;  // realized step's learning rate after any halving
  double bound_rhs = 0.0;   // (-alpha beta (1-gamma) + alpha^2/2) N_w Tr(C A)
  GateDecision gate;
  int spd_rejections = 0;  // halvings forced by non-positive-definite candidates
};

struct MonotoneRunSpec {
  GaussianParams theta0;
  QuadraticObjective objective;
  Surrogate surrogate;
  WeightScheme scheme;
  CorrelationKind kind = CorrelationKind::kendall;
  double threshold = 1.0;
  double alpha = 0.0;
  int iterations = 100;
  std::int64_t drift_replicates = 1000;
  GateSource gate_source = GateSource::sample;
  double ema_decay = 0.5;
  McBudgets budgets;
  RngStream stream{0, 0};
  int threads = 0;
};

// One gated optimization run. Per iteration: measure the gate correlation,
// estimate the one-step drift E[J(theta + alpha Delta)] - J(theta) over
// fresh replicate populations under the gated ranking, then advance theta
// along one realized gated step (halving alpha on covariance rejection).
std::vector<DriftRecord> run_monotone_experiment(const MonotoneRunSpec& spec);

// Theorem-mode wrapper: requires an admissible threshold, alpha inside
// (0, 2 beta (1-gamma)), and a population-level gate; returns the trajectory
// plus two reports, one for the per-iteration drift bound and one for the
// monotone decrease of the replicated mean.
struct DriftCheckResult {
  std::vector<DriftRecord> records;
  std::vector<BoundCheckReport> reports;
};
DriftCheckResult check_drift_theorem(const std::string& name, MonotoneRunSpec spec);

}  // namespace igo
