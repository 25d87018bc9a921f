#include "igo/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "igo/utility_poly.hpp"

namespace igo {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_real(const std::string& key, std::string_view value) {
  const std::string text(value);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || text.empty() || errno == ERANGE || !std::isfinite(v)) {
    throw ConfigError(key + ": expected a finite real, got '" + text + "'");
  }
  return v;
}

bool looks_numeric(std::string_view value) {
  const std::string text(value);
  char* end = nullptr;
  std::strtod(text.c_str(), &end);
  return !text.empty() && end == text.c_str() + text.size();
}

template <class Int>
Int parse_integer(const std::string& key, std::string_view value, Int min_value) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError(key + ": expected an integer, got '" + std::string(value) + "'");
  }
  if (v < min_value) {
    throw ConfigError(key + ": must be at least " + std::to_string(min_value) + ", got " +
                      std::to_string(v));
  }
  return v;
}

bool parse_bool(const std::string& key, std::string_view value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError(key + ": expected true or false, got '" + std::string(value) + "'");
}

std::vector<double> parse_real_list(const std::string& key, std::string_view value) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const std::size_t comma = value.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? value.size() : comma;
    out.push_back(parse_real(key, trim(value.substr(start, end - start))));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw ConfigError(key + ": expected a comma-separated list of reals");
  return out;
}

struct SurrogateSpecName {
  std::string name;    // exact | negated | noise | hessian | blockswap
  double noise_sigma = 0.0;
  int blockswap_mu = 0;  // 0 means "lambda/2"
};

SurrogateSpecName parse_surrogate_spec(std::string_view value) {
  SurrogateSpecName out;
  const std::size_t colon = value.find(':');
  const std::string_view head = colon == std::string_view::npos ? value : value.substr(0, colon);
  const std::string_view param =
      colon == std::string_view::npos ? std::string_view{} : trim(value.substr(colon + 1));
  out.name = std::string(trim(head));
  const bool has_param = colon != std::string_view::npos;
  if (out.name == "exact" || out.name == "negated" || out.name == "hessian") {
    if (has_param) throw ConfigError("surrogate: '" + out.name + "' takes no parameter");
  } else if (out.name == "noise") {
    if (!has_param) throw ConfigError("surrogate: noise requires a scale, e.g. noise:0.5");
    out.noise_sigma = parse_real("surrogate noise scale", param);
    if (!(out.noise_sigma > 0.0)) throw ConfigError("surrogate: noise scale must be positive");
  } else if (out.name == "blockswap") {
    if (has_param) out.blockswap_mu = parse_integer<int>("surrogate blockswap cut", param, 1);
  } else {
    throw ConfigError("surrogate: unknown variant '" + out.name +
                      "' (expected exact, negated, noise:<scale>, hessian or blockswap[:mu])");
  }
  return out;
}

void validate_threshold_text(std::string_view value) {
  if (value == "auto") return;
  const double t = parse_real("gate.threshold", value);
  if (!(t >= -1.0 && t <= 1.0)) {
    throw ConfigError("gate.threshold: must lie in [-1, 1], got " + std::string(value));
  }
}

void validate_alpha_text(std::string_view value) {
  if (value == "optimal" || value == "max") return;
  const double a = parse_real("alpha", value);
  if (!(a > 0.0)) throw ConfigError("alpha: must be positive, got " + std::string(value));
}

void validate_gate_source(std::string_view value) {
  if (value != "sample" && value != "population" && value != "ema") {
    throw ConfigError("gate.source: expected sample, population or ema, got '" +
                      std::string(value) + "'");
  }
}

GateSource parse_gate_source(std::string_view value) {
  if (value == "sample") return GateSource::sample;
  if (value == "population") return GateSource::population;
  return GateSource::ema;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::unordered_set<std::string> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                          : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value, got '" +
                        std::string(line) + "'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!seen.insert(key).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }

    if (key == "dimension") {
      cfg.dimension = parse_integer<int>(key, value, 1);
    } else if (key == "lambda") {
      cfg.lambda = parse_integer<int>(key, value, 1);
    } else if (key == "weights") {
      cfg.weights = std::string(value);
      if (cfg.weights != "truncation" && cfg.weights != "equal") {
        parse_real_list(key, value);  // must at least be a list of reals
      }
    } else if (key == "objective.eigenvalues") {
      cfg.objective_eigenvalues = parse_real_list(key, value);
      for (double e : cfg.objective_eigenvalues) {
        if (!(e > 0.0)) throw ConfigError("objective.eigenvalues: entries must be positive");
      }
    } else if (key == "objective.rotate") {
      cfg.objective_rotate = parse_bool(key, value);
    } else if (key == "objective.optimum") {
      cfg.objective_optimum = parse_real_list(key, value);
    } else if (key == "init.mean") {
      cfg.init_mean = parse_real_list(key, value);
    } else if (key == "init.cov_scale") {
      cfg.init_cov_scale = parse_real(key, value);
      if (!(cfg.init_cov_scale > 0.0)) throw ConfigError("init.cov_scale: must be positive");
    } else if (key == "surrogate") {
      cfg.surrogate = std::string(value);
      parse_surrogate_spec(cfg.surrogate);
    } else if (key == "gate.kind") {
      if (value != "kendall" && value != "pearson") {
        throw ConfigError("gate.kind: expected kendall or pearson, got '" + std::string(value) +
                          "'");
      }
      cfg.gate_kind = std::string(value);
    } else if (key == "gate.threshold") {
      validate_threshold_text(value);
      cfg.gate_threshold = std::string(value);
    } else if (key == "gate.source") {
      validate_gate_source(value);
      cfg.gate_source = std::string(value);
    } else if (key == "ema.decay") {
      cfg.ema_decay = parse_real(key, value);
      if (!(cfg.ema_decay > 0.0 && cfg.ema_decay <= 1.0)) {
        throw ConfigError("ema.decay: must lie in (0, 1]");
      }
    } else if (key == "alpha") {
      validate_alpha_text(value);
      cfg.alpha = std::string(value);
    } else if (key == "iterations") {
      cfg.iterations = parse_integer<int>(key, value, 0);
    } else if (key == "replicates") {
      cfg.replicates = parse_integer<int>(key, value, 1);
    } else if (key == "seed") {
      cfg.seed = parse_integer<std::uint64_t>(key, value, 0);
    } else if (key == "mc.samples") {
      cfg.mc_samples = parse_integer<std::int64_t>(key, value, 1);
    } else if (key == "mc.reference") {
      cfg.mc_reference = parse_integer<std::int64_t>(key, value, 1);
    } else if (key == "mc.pairs") {
      cfg.mc_pairs = parse_integer<std::int64_t>(key, value, 1);
    } else if (key == "mc.gate_pairs") {
      cfg.mc_gate_pairs = parse_integer<std::int64_t>(key, value, 1);
    } else if (key == "mc.gate_samples") {
      cfg.mc_gate_samples = parse_integer<std::int64_t>(key, value, 1);
    } else {
      throw ConfigError("unknown config key: '" + key + "'");
    }
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

WeightScheme scheme_from_config(const ExperimentConfig& cfg) {
  if (cfg.weights == "truncation") return WeightScheme::truncation(cfg.lambda);
  if (cfg.weights == "equal") return WeightScheme::equal(cfg.lambda);
  std::vector<double> w = parse_real_list("weights", cfg.weights);
  if (static_cast<int>(w.size()) != cfg.lambda) {
    throw ConfigError("weights: list has " + std::to_string(w.size()) +
                      " entries but lambda = " + std::to_string(cfg.lambda));
  }
  return WeightScheme(std::move(w));
}

QuadraticObjective objective_from_config(const ExperimentConfig& cfg) {
  const int d = cfg.dimension;
  std::vector<double> spectrum = cfg.objective_eigenvalues;
  if (spectrum.size() == 1) spectrum.assign(static_cast<std::size_t>(d), spectrum[0]);
  if (static_cast<int>(spectrum.size()) != d) {
    throw ConfigError("objective.eigenvalues: expected 1 or " + std::to_string(d) +
                      " entries, got " + std::to_string(spectrum.size()));
  }
  Vector x_star = Vector::Zero(d);
  if (!cfg.objective_optimum.empty()) {
    if (static_cast<int>(cfg.objective_optimum.size()) != d) {
      throw ConfigError("objective.optimum: expected " + std::to_string(d) + " entries, got " +
                        std::to_string(cfg.objective_optimum.size()));
    }
    for (int i = 0; i < d; ++i) x_star[i] = cfg.objective_optimum[static_cast<std::size_t>(i)];
  }
  RngStream rot = RngStream::derive(cfg.seed, "objective_rotation");
  return make_quadratic(spectrum, cfg.objective_rotate, x_star, rot);
}

GaussianParams initial_params_from_config(const ExperimentConfig& cfg) {
  const int d = cfg.dimension;
  Vector mean = Vector::Constant(d, 2.0);
  if (!cfg.init_mean.empty()) {
    if (static_cast<int>(cfg.init_mean.size()) != d) {
      throw ConfigError("init.mean: expected " + std::to_string(d) + " entries, got " +
                        std::to_string(cfg.init_mean.size()));
    }
    for (int i = 0; i < d; ++i) mean[i] = cfg.init_mean[static_cast<std::size_t>(i)];
  }
  Matrix cov = cfg.init_cov_scale * Matrix::Identity(d, d);
  return GaussianParams(std::move(mean), std::move(cov));
}

namespace {

// Deterministic spectrum tilt + optimum shift for the hessian variant:
// eigenvalues scaled log-uniformly in [1/2, 2], fresh rotation, optimum moved
// by 0.3-sigma normal noise.
Surrogate make_hessian_surrogate(const QuadraticObjective& obj, std::uint64_t seed) {
  RngStream rng = RngStream::derive(seed, "hessian_tilt");
  Eigen::SelfAdjointEigenSolver<Matrix> es(obj.a());
  std::vector<double> spectrum(static_cast<std::size_t>(obj.dim()));
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const double factor = std::exp((2.0 * rng.next_double() - 1.0) * std::log(2.0));
    spectrum[i] = es.eigenvalues()[static_cast<int>(i)] * factor;
  }
  Vector x_tilde = obj.x_star();
  for (int i = 0; i < x_tilde.size(); ++i) x_tilde[i] += 0.3 * rng.next_normal();
  const QuadraticObjective tilted = make_quadratic(spectrum, true, x_tilde, rng);
  return Surrogate::hessian_perturbed(obj, tilted.a(), tilted.x_star());
}

}  // namespace

Surrogate surrogate_from_config(const ExperimentConfig& cfg, const QuadraticObjective& obj,
                                const GaussianParams& theta_ref) {
  const SurrogateSpecName spec = parse_surrogate_spec(cfg.surrogate);
  if (spec.name == "exact") return Surrogate::exact(obj);
  if (spec.name == "negated") return Surrogate::negated(obj);
  if (spec.name == "noise") {
    return Surrogate::additive_noise(obj, spec.noise_sigma,
                                     mix64(cfg.seed ^ fnv1a64("surrogate_noise")));
  }
  if (spec.name == "hessian") return make_hessian_surrogate(obj, cfg.seed);
  const int mu = spec.blockswap_mu > 0 ? spec.blockswap_mu : cfg.lambda / 2;
  RngStream ref = RngStream::derive(cfg.seed, "block_swap_reference");
  return Surrogate::block_swap(obj, cfg.lambda, mu, theta_ref, cfg.mc_reference, ref);
}

double resolve_threshold(const ExperimentConfig& cfg, const WeightScheme& scheme) {
  if (cfg.gate_threshold != "auto") return parse_real("gate.threshold", cfg.gate_threshold);
  const double adm = admissible_lower_bound(scheme, parse_correlation_kind(cfg.gate_kind));
  return adm + 1e-4 * (1.0 - adm);
}

double resolve_alpha(const ExperimentConfig& cfg, const WeightScheme& scheme, int dimension,
                     double threshold) {
  if (cfg.alpha != "optimal" && cfg.alpha != "max") return parse_real("alpha", cfg.alpha);
  const TheoryRates rates =
      theory_rates(scheme, dimension, threshold, parse_correlation_kind(cfg.gate_kind));
  return cfg.alpha == "optimal" ? rates.alpha_opt : 0.99 * rates.alpha_max;
}

MonotoneRunSpec run_spec_from_config(const ExperimentConfig& cfg, int threads) {
  WeightScheme scheme = scheme_from_config(cfg);
  QuadraticObjective obj = objective_from_config(cfg);
  GaussianParams theta0 = initial_params_from_config(cfg);
  Surrogate surrogate = surrogate_from_config(cfg, obj, theta0);
  const double threshold = resolve_threshold(cfg, scheme);
  const double alpha = resolve_alpha(cfg, scheme, cfg.dimension, threshold);
  return MonotoneRunSpec{
      .theta0 = std::move(theta0),
      .objective = std::move(obj),
      .surrogate = std::move(surrogate),
      .scheme = std::move(scheme),
      .kind = parse_correlation_kind(cfg.gate_kind),
      .threshold = threshold,
      .alpha = alpha,
      .iterations = cfg.iterations,
      .drift_replicates = cfg.replicates,
      .gate_source = parse_gate_source(cfg.gate_source),
      .ema_decay = cfg.ema_decay,
      .budgets = McBudgets{.samples = cfg.mc_samples,
                           .reference = cfg.mc_reference,
                           .pairs = cfg.mc_pairs,
                           .gate_pairs = cfg.mc_gate_pairs,
                           .gate_samples = cfg.mc_gate_samples},
      .stream = RngStream::derive(cfg.seed, "optimize"),
      .threads = threads,
  };
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void append_row(std::string& out, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out.push_back(',');
    out += csv_escape(row[i]);
  }
  out.push_back('\n');
}

}  // namespace

std::string to_csv(const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  append_row(out, header);
  for (const auto& row : rows) append_row(out, row);
  return out;
}

std::string reports_to_csv(const std::vector<BoundCheckReport>& reports) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(reports.size());
  for (const auto& r : reports) {
    rows.push_back({r.name, format_real(r.lhs_estimate), format_real(r.lhs_std_error),
                    format_real(r.rhs_bound), format_real(r.slack), std::to_string(r.n_replicates),
                    to_string(r.verdict)});
  }
  return to_csv({"name", "lhs", "std_error", "rhs", "slack", "n", "verdict"}, rows);
}

std::string trajectory_to_csv(const std::vector<DriftRecord>& records) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(records.size());
  for (const auto& r : records) {
    rows.push_back({std::to_string(r.iteration), format_real(r.j_before),
                    format_real(r.j_mean_after - r.j_before), format_real(r.j_std_error),
                    format_real(r.bound_rhs), format_real(r.gate.measured.value),
                    r.gate.use_surrogate ? "1" : "0", format_real(r.alpha_used),
                    std::to_string(r.spd_rejections)});
  }
  return to_csv({"iteration", "J", "J_drift_mean", "J_drift_stderr", "bound_rhs",
                 "tau_or_rho_measured", "gate_used", "alpha", "spd_rejections"},
                rows);
}

bool glob_match(std::string_view pattern, std::string_view text) {
  std::size_t pi = 0, ti = 0;
  std::size_t star = std::string_view::npos, mark = 0;
  while (ti < text.size()) {
    if (pi < pattern.size() && (pattern[pi] == '?' || pattern[pi] == text[ti])) {
      ++pi;
      ++ti;
    } else if (pi < pattern.size() && pattern[pi] == '*') {
      star = pi++;
      mark = ti;
    } else if (star != std::string_view::npos) {
      pi = star + 1;
      ti = ++mark;
    } else {
      return false;
    }
  }
  while (pi < pattern.size() && pattern[pi] == '*') ++pi;
  return pi == pattern.size();
}

namespace {

// Fixed, reproducible test-bed instance: separable quadratic with spectrum
// 1..d at the origin, mean offset along every coordinate, Toeplitz 0.3^|i-j|
// covariance.
GaussianParams suite_params(int d) {
  Vector m(d);
  for (int i = 0; i < d; ++i) m[i] = 0.5 + 0.2 * i;
  Matrix c(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) c(i, j) = std::pow(0.3, std::abs(i - j));
  }
  return GaussianParams(std::move(m), std::move(c));
}

QuadraticObjective suite_objective(int d) {
  std::vector<double> spectrum(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) spectrum[static_cast<std::size_t>(i)] = i + 1.0;
  RngStream unused(0, 0);
  return make_quadratic(spectrum, false, Vector::Zero(d), unused);
}

// Named surrogate battery over one instance: exact and adversarial ranking,
// three noise scales, a tilted quadratic and the quantile block swap.
std::vector<std::pair<std::string, Surrogate>> suite_surrogates(const QuadraticObjective& obj,
                                                                const GaussianParams& theta,
                                                                int lambda, std::uint64_t seed) {
  std::vector<std::pair<std::string, Surrogate>> out;
  out.emplace_back("exact", Surrogate::exact(obj));
  out.emplace_back("negated", Surrogate::negated(obj));
  const double sigmas[] = {0.1, 1.0, 10.0};
  const char* names[] = {"noise0.1", "noise1", "noise10"};
  for (int i = 0; i < 3; ++i) {
    out.emplace_back(names[i],
                     Surrogate::additive_noise(obj, sigmas[i], mix64(seed ^ fnv1a64(names[i]))));
  }
  out.emplace_back("hessian", make_hessian_surrogate(obj, seed));
  RngStream ref = RngStream::derive(seed, "block_swap_reference");
  out.emplace_back("blockswap",
                   Surrogate::block_swap(obj, lambda, lambda / 2, theta, 20000, ref));
  return out;
}

// Randomized instance with condition number up to 1e4 (log-uniform spectrum
// in [1e-2, 1e2]), rotated, random optimum and search distribution.
struct RandomInstance {
  QuadraticObjective obj;
  GaussianParams theta;
};

RandomInstance random_instance(RngStream stream) {
  RngStream obj_rng = stream.split(0);
  RngStream theta_rng = stream.split(1);
  const int d = (obj_rng.next_u64() & 1) ? 5 : 2;
  std::vector<double> spectrum(static_cast<std::size_t>(d));
  for (auto& e : spectrum) {
    e = std::exp(std::log(1e-2) + (std::log(1e2) - std::log(1e-2)) * obj_rng.next_double());
  }
  Vector x_star(d);
  for (int i = 0; i < d; ++i) x_star[i] = obj_rng.next_normal();
  QuadraticObjective obj = make_quadratic(spectrum, true, x_star, obj_rng);
  GaussianParams theta = make_random_params(d, 1.5, theta_rng);
  return RandomInstance{std::move(obj), std::move(theta)};
}

std::string two_digits(int k) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d", k);
  return buf;
}

}  // namespace

std::vector<BoundCheckReport> run_verify_suite(const ExperimentConfig& cfg,
                                               const std::string& filter, int threads) {
  const std::uint64_t seed = cfg.seed;
  const McBudgets budgets{.samples = cfg.mc_samples,
                          .reference = cfg.mc_reference,
                          .pairs = cfg.mc_pairs,
                          .gate_pairs = cfg.mc_gate_pairs,
                          .gate_samples = cfg.mc_gate_samples};

  struct SuiteCheck {
    std::string name;
    std::function<std::vector<BoundCheckReport>()> run;
  };
  std::vector<SuiteCheck> checks;

  // Update-energy bound and weight-covariance identity across the battery.
  for (int d : {2, 5}) {
    for (int lambda : {4, 8}) {
      const QuadraticObjective obj = suite_objective(d);
      const GaussianParams theta = suite_params(d);
      const WeightScheme scheme = WeightScheme::truncation(lambda);
      for (auto& [sname, surr] : suite_surrogates(obj, theta, lambda, seed)) {
        const std::string tag = "." + sname + ".d" + std::to_string(d) + ".l" +
                                std::to_string(lambda);
        checks.push_back(
            {"energy_bound" + tag, [=, surrogate = surr]() -> std::vector<BoundCheckReport> {
               return {check_quadratic_term("energy_bound" + tag, theta, obj, surrogate, scheme,
                                            std::max<std::int64_t>(cfg.replicates, 1000),
                                            RngStream::derive(seed, "energy_bound" + tag),
                                            threads)};
             }});
        checks.push_back(
            {"pearson_identity" + tag, [=, surrogate = surr]() -> std::vector<BoundCheckReport> {
               return {check_pearson_identity("pearson_identity" + tag, theta, obj, surrogate,
                                              scheme, budgets,
                                              RngStream::derive(seed, "pearson_identity" + tag),
                                              threads)};
             }});
      }
    }
  }

  // Moment bound at four orders for every surrogate on the d=2, lambda=8
  // instance.
  {
    const int d = 2, lambda = 8;
    const QuadraticObjective obj = suite_objective(d);
    const GaussianParams theta = suite_params(d);
    const WeightScheme scheme = WeightScheme::truncation(lambda);
    const double orders[] = {1.0, 1.5, 2.0, 4.0};
    const char* order_tags[] = {"s1", "s1_5", "s2", "s4"};
    for (int oi = 0; oi < 4; ++oi) {
      for (auto& [sname, surr] : suite_surrogates(obj, theta, lambda, seed)) {
        const std::string name = std::string("kendall_moment.") + order_tags[oi] + "." + sname;
        const double s = orders[oi];
        checks.push_back({name, [=, surrogate = surr]() -> std::vector<BoundCheckReport> {
                            return {check_kendall_bound(name, theta, obj, surrogate, scheme, s,
                                                        budgets, RngStream::derive(seed, name),
                                                        threads)};
                          }});
      }
    }
  }

  // Descent bound and variance identity over randomized instances.
  for (int k = 0; k < 20; ++k) {
    const std::string dname = "descent_bound.inst" + two_digits(k);
    checks.push_back({dname, [=]() -> std::vector<BoundCheckReport> {
                        RandomInstance inst = random_instance(
                            RngStream::derive(seed, "descent_instances", std::uint64_t(k)));
                        return {check_descent(dname, inst.theta, inst.obj,
                                              WeightScheme::truncation(8),
                                              std::max<std::int64_t>(cfg.replicates, 10000),
                                              RngStream::derive(seed, dname), threads)};
                      }});
    const std::string vname = "variance_identity.inst" + two_digits(k);
    checks.push_back({vname, [=]() -> std::vector<BoundCheckReport> {
                        RandomInstance inst = random_instance(
                            RngStream::derive(seed, "variance_instances", std::uint64_t(k)));
                        return {check_variance_identity(vname, inst.theta, inst.obj,
                                                        cfg.mc_samples,
                                                        RngStream::derive(seed, vname), threads)};
                      }});
  }

  // Conditional selection weight at five probe quantiles.
  for (int lambda : {2, 3, 8}) {
    const std::string base = "conditional_weight.l" + std::to_string(lambda);
    checks.push_back({base, [=]() -> std::vector<BoundCheckReport> {
                        return check_conditional_weight(
                            base, suite_params(2), suite_objective(2),
                            WeightScheme::truncation(lambda), {0.1, 0.3, 0.5, 0.7, 0.9},
                            std::max<std::int64_t>(cfg.replicates, 20000), cfg.mc_reference,
                            RngStream::derive(seed, base), threads);
                      }});
  }

  // Gated drift runs: both gate kinds on sphere and ellipsoid. The threshold
  // sits a quarter of the way into the admissible interval (gamma = 1/2), so
  // the guaranteed decrease is large enough to see against Monte-Carlo noise.
  for (CorrelationKind kind : {CorrelationKind::kendall, CorrelationKind::pearson}) {
    for (bool sphere : {true, false}) {
      for (int d : {2, 5}) {
        const std::string name = std::string("drift_bound.") + to_string(kind) + "." +
                                 (sphere ? "sphere" : "ellipsoid") + ".d" + std::to_string(d);
        checks.push_back({name, [=]() -> std::vector<BoundCheckReport> {
                            const WeightScheme scheme = WeightScheme::truncation(8);
                            std::vector<double> spectrum(static_cast<std::size_t>(d), 1.0);
                            if (!sphere) {
                              for (int i = 0; i < d; ++i) {
                                spectrum[static_cast<std::size_t>(i)] = i + 1.0;
                              }
                            }
                            RngStream unused(0, 0);
                            QuadraticObjective obj =
                                make_quadratic(spectrum, false, Vector::Zero(d), unused);
                            const double adm = admissible_lower_bound(scheme, kind);
                            const double threshold = 1.0 - 0.25 * (1.0 - adm);
                            const TheoryRates rates = theory_rates(scheme, d, threshold, kind);
                            MonotoneRunSpec spec{
                                .theta0 = GaussianParams(Vector::Constant(d, 1.5),
                                                         Matrix::Identity(d, d)),
                                .objective = obj,
                                .surrogate = Surrogate::exact(obj),
                                .scheme = scheme,
                                .kind = kind,
                                .threshold = threshold,
                                .alpha = rates.alpha_opt,
                                .iterations = cfg.iterations,
                                .drift_replicates = cfg.replicates,
                                .gate_source = GateSource::population,
                                .ema_decay = cfg.ema_decay,
                                .budgets = budgets,
                                .stream = RngStream::derive(seed, name),
                                .threads = threads,
                            };
                            return check_drift_theorem(name, std::move(spec)).reports;
                          }});
      }
    }
  }

  std::vector<BoundCheckReport> reports;
  for (const auto& check : checks) {
    if (!glob_match(filter, check.name)) continue;
    auto out = check.run();
    reports.insert(reports.end(), std::make_move_iterator(out.begin()),
                   std::make_move_iterator(out.end()));
  }
  return reports;
}

std::vector<DriftRecord> run_optimize(const ExperimentConfig& cfg, int threads) {
  return run_monotone_experiment(run_spec_from_config(cfg, threads));
}

std::vector<std::pair<std::string, double>> constants_table(const ExperimentConfig& cfg) {
  const WeightScheme scheme = scheme_from_config(cfg);
  const CorrelationKind kind = parse_correlation_kind(cfg.gate_kind);
  const UtilityPolynomial u(scheme);
  const UtilityIntegrals integrals = utility_integrals(scheme);

  std::vector<std::pair<std::string, double>> rows;
  rows.emplace_back("lambda", scheme.lambda());
  rows.emplace_back("dimension", cfg.dimension);
  rows.emplace_back("sum_w", integrals.mean);
  rows.emplace_back("n_w", n_w_constant(scheme));
  rows.emplace_back("m_w", selection_gap(scheme));
  rows.emplace_back("l_u", lipschitz_constant(u));
  rows.emplace_back("l_u_upper", lipschitz_upper_bound(scheme));
  rows.emplace_back("u_u", weight_variance(scheme));
  rows.emplace_back("int_u", integrals.mean);
  rows.emplace_back("int_u_sq", integrals.mean_square);
  rows.emplace_back("admissible_kendall",
                    admissible_lower_bound(scheme, CorrelationKind::kendall));
  rows.emplace_back("admissible_pearson",
                    admissible_lower_bound(scheme, CorrelationKind::pearson));
  const double threshold = resolve_threshold(cfg, scheme);
  rows.emplace_back("threshold", threshold);
  const TheoryRates rates = theory_rates(scheme, cfg.dimension, threshold, kind);
  rows.emplace_back("beta", rates.beta);
  rows.emplace_back("gamma", rates.gamma);
  rows.emplace_back("alpha_max", rates.alpha_max);
  rows.emplace_back("alpha_opt", rates.alpha_opt);
  return rows;
}

namespace {

std::vector<double> read_value_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open value file: " + path);
  std::vector<double> out;
  double v = 0.0;
  while (in >> v) {
    if (!std::isfinite(v)) throw ConfigError(path + ": non-finite value at entry " +
                                             std::to_string(out.size() + 1));
    out.push_back(v);
  }
  if (!in.eof()) throw ConfigError(path + ": unparseable value near entry " +
                                   std::to_string(out.size() + 1));
  if (out.size() < 2) throw ConfigError(path + ": need at least two values");
  return out;
}

}  // namespace

CorrelateResult correlate_files(const std::string& path_f, const std::string& path_g,
                                const std::optional<WeightScheme>& scheme) {
  const std::vector<double> f = read_value_file(path_f);
  const std::vector<double> g = read_value_file(path_g);
  if (f.size() != g.size()) {
    throw ConfigError("value files disagree in length: " + std::to_string(f.size()) + " vs " +
                      std::to_string(g.size()));
  }
  const int n = static_cast<int>(f.size());
  WeightScheme w = scheme.value_or(WeightScheme::truncation(n));
  if (w.lambda() != n) {
    throw ConfigError("weights: scheme has lambda = " + std::to_string(w.lambda()) + " but " +
                      std::to_string(n) + " values were read");
  }
  CorrelateResult out;
  out.n = n;
  out.tau = kendall_tau_b(f, g);
  const std::vector<double> wf = utilities(f, w);
  const std::vector<double> wg = utilities(g, w);
  out.rho = pearson_weights(wf, wg);
  return out;
}

}  // namespace igo
