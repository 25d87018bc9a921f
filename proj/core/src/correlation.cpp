#include "igo/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "igo/parallel.hpp"

namespace igo {

namespace {

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": values must be finite");
  }
}

// Strict inversions (i < j with a[i] > a[j]) counted during merge sort.
std::uint64_t merge_count(std::vector<double>& a, std::vector<double>& buf,
                          std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t inv = merge_count(a, buf, lo, mid) + merge_count(a, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (a[j] < a[i]) {
      inv += mid - i;
      buf[k++] = a[j++];
    } else {
      buf[k++] = a[i++];
    }
  }
  while (i < mid) buf[k++] = a[i++];
  while (j < hi) buf[k++] = a[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            a.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

std::int64_t tied_pairs(std::uint64_t run) {
  return static_cast<std::int64_t>(run * (run - 1) / 2);
}

struct ChunkMoments {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::int64_t n = 0;
};

// Shared empirical reference: f and g evaluated on one common sample of X,
// each column sorted.
struct UtilityReference {
  std::vector<double> f_sorted;
  std::vector<double> g_sorted;
};

constexpr std::int64_t kChunk = 4096;

UtilityReference build_reference(const ObjectiveFn& f, const ObjectiveFn& g,
                                 const GaussianParams& theta, std::int64_t size,
                                 const RngStream& stream, int threads) {
  const std::int64_t n_chunks = (size + kChunk - 1) / kChunk;
  auto parts = run_jobs<std::vector<std::pair<double, double>>>(
      n_chunks, threads, [&](std::int64_t c) {
        RngStream s = stream.split(static_cast<std::uint64_t>(c));
        const std::int64_t lo = c * kChunk;
        const std::int64_t hi = std::min(size, lo + kChunk);
        std::vector<std::pair<double, double>> vals;
        vals.reserve(static_cast<std::size_t>(hi - lo));
        for (std::int64_t i = lo; i < hi; ++i) {
          const Vector x = sample_one(theta, s);
          vals.emplace_back(f(x), g(x));
        }
        return vals;
      });
  UtilityReference ref;
  ref.f_sorted.reserve(static_cast<std::size_t>(size));
  ref.g_sorted.reserve(static_cast<std::size_t>(size));
  for (const auto& part : parts) {
    for (const auto& [fv, gv] : part) {
      ref.f_sorted.push_back(fv);
      ref.g_sorted.push_back(gv);
    }
  }
  std::sort(ref.f_sorted.begin(), ref.f_sorted.end());
  std::sort(ref.g_sorted.begin(), ref.g_sorted.end());
  return ref;
}

// Streams n transformed samples h(A_i, B_i) with A = u(P_f(f(X))),
// B = u(P_g(g(X))) and returns pooled first/second moments.
template <class Transform>
ChunkMoments utility_pair_moments(const ObjectiveFn& f, const ObjectiveFn& g,
                                  const GaussianParams& theta, const UtilityPolynomial& u,
                                  const UtilityReference& ref, std::int64_t n_samples,
                                  const RngStream& stream, int threads, Transform h) {
  const std::int64_t n_chunks = (n_samples + kChunk - 1) / kChunk;
  auto parts = run_jobs<ChunkMoments>(n_chunks, threads, [&](std::int64_t c) {
    RngStream s = stream.split(static_cast<std::uint64_t>(c));
    const std::int64_t lo = c * kChunk;
    const std::int64_t hi = std::min(n_samples, lo + kChunk);
    ChunkMoments m;
    for (std::int64_t i = lo; i < hi; ++i) {
      const Vector x = sample_one(theta, s);
      const double a = u(empirical_quantile(ref.f_sorted, f(x)));
      const double b = u(empirical_quantile(ref.g_sorted, g(x)));
      const double y = h(a, b);
      m.sum += y;
      m.sum_sq += y * y;
      m.n += 1;
    }
    return m;
  });
  ChunkMoments total;
  for (const auto& m : parts) {
    total.sum += m.sum;
    total.sum_sq += m.sum_sq;
    total.n += m.n;
  }
  return total;
}

}  // namespace

double kendall_tau_b(std::span<const double> f, std::span<const double> g) {
  const std::size_t n = f.size();
  if (n != g.size()) throw std::invalid_argument("kendall_tau_b: length mismatch");
  if (n < 2) throw std::invalid_argument("kendall_tau_b: need at least two observations");
  require_finite(f, "kendall_tau_b");
  require_finite(g, "kendall_tau_b");

  std::vector<std::pair<double, double>> fg(n);
  for (std::size_t i = 0; i < n; ++i) fg[i] = {f[i], g[i]};
  std::sort(fg.begin(), fg.end());

  std::int64_t n1 = 0, n3 = 0;
  std::size_t a = 0;
  while (a < n) {
    std::size_t b = a + 1;
    while (b < n && fg[b].first == fg[a].first) ++b;
    n1 += tied_pairs(b - a);
    std::size_t ja = a;
    while (ja < b) {
      std::size_t jb = ja + 1;
      while (jb < b && fg[jb].second == fg[ja].second) ++jb;
      n3 += tied_pairs(jb - ja);
      ja = jb;
    }
    a = b;
  }

  std::vector<double> gs(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) gs[i] = fg[i].second;
  const std::uint64_t discordant = merge_count(gs, buf, 0, n);  // gs is now sorted

  std::int64_t n2 = 0;
  a = 0;
  while (a < n) {
    std::size_t b = a + 1;
    while (b < n && gs[b] == gs[a]) ++b;
    n2 += tied_pairs(b - a);
    a = b;
  }

  const std::int64_t n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  const std::int64_t d1 = n0 - n1;
  const std::int64_t d2 = n0 - n2;
  if (d1 == 0 || d2 == 0) {
    throw std::domain_error("kendall_tau_b: undefined for a constant ranking");
  }
  const std::int64_t num = n0 - n1 - n2 + n3 - 2 * static_cast<std::int64_t>(discordant);
  return static_cast<double>(num) /
         (std::sqrt(static_cast<double>(d1)) * std::sqrt(static_cast<double>(d2)));
}

double pearson_weights(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw std::invalid_argument("pearson_weights: length mismatch");
  if (n < 2) throw std::invalid_argument("pearson_weights: need at least two observations");
  require_finite(x, "pearson_weights");
  require_finite(y, "pearson_weights");

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);

  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw std::domain_error("pearson_weights: undefined for a constant input");
  }
  return sxy / std::sqrt(sxx * syy);
}

double empirical_quantile(const std::vector<double>& sorted_reference, double s) {
  if (sorted_reference.empty()) throw std::invalid_argument("empirical_quantile: empty reference");
  const auto it = std::upper_bound(sorted_reference.begin(), sorted_reference.end(), s);
  return static_cast<double>(it - sorted_reference.begin()) /
         static_cast<double>(sorted_reference.size());
}

CorrelationEstimate population_tau(const ObjectiveFn& f, const ObjectiveFn& g,
                                   const GaussianParams& theta, std::int64_t n_pairs,
                                   RngStream stream, int threads) {
  if (n_pairs < 1000) throw std::invalid_argument("population_tau: need at least 1e3 pairs");

  struct Counts {
    std::int64_t conc = 0, disc = 0;
  };
  const std::int64_t n_chunks = (n_pairs + kChunk - 1) / kChunk;
  auto parts = run_jobs<Counts>(n_chunks, threads, [&](std::int64_t c) {
    RngStream s = stream.split(static_cast<std::uint64_t>(c));
    const std::int64_t lo = c * kChunk;
    const std::int64_t hi = std::min(n_pairs, lo + kChunk);
    Counts k;
    for (std::int64_t i = lo; i < hi; ++i) {
      const Vector x = sample_one(theta, s);
      const Vector y = sample_one(theta, s);
      const double df = f(x) - f(y);
      const double dg = g(x) - g(y);
      if ((df > 0 && dg > 0) || (df < 0 && dg < 0)) {
        ++k.conc;
      } else if ((df > 0 && dg < 0) || (df < 0 && dg > 0)) {
        ++k.disc;
      }
    }
    return k;
  });
  std::int64_t conc = 0, disc = 0;
  for (const auto& k : parts) {
    conc += k.conc;
    disc += k.disc;
  }
  const double n = static_cast<double>(n_pairs);
  const double value = static_cast<double>(conc - disc) / n;
  // concordance indicator is {-1, 0, +1}; its second moment is (conc+disc)/n
  const double second = static_cast<double>(conc + disc) / n;
  const double var = std::max(0.0, second - value * value);
  return {value, std::sqrt(var / n), n_pairs};
}

CorrelationEstimate population_rho(const ObjectiveFn& f, const ObjectiveFn& g,
                                   const GaussianParams& theta, const WeightScheme& scheme,
                                   std::int64_t n_samples, std::int64_t reference_size,
                                   RngStream stream, int threads) {
  if (n_samples < 1000) throw std::invalid_argument("population_rho: need at least 1e3 samples");
  if (reference_size < 10000) {
    throw std::invalid_argument("population_rho: need a reference of at least 1e4");
  }
  const double uu = weight_variance(scheme);
  if (uu <= 0.0) {
    throw std::domain_error("population_rho: undefined for a scheme with zero utility variance");
  }
  const UtilityPolynomial u{scheme};
  const double mean_u = utility_integrals(scheme).mean;

  const UtilityReference ref =
      build_reference(f, g, theta, reference_size, stream.split(0), threads);
  const ChunkMoments m = utility_pair_moments(
      f, g, theta, u, ref, n_samples, stream.split(1), threads,
      [mean_u](double a, double b) { return (a - mean_u) * (b - mean_u); });

  const double n = static_cast<double>(m.n);
  const double mean = m.sum / n;
  const double var = std::max(0.0, m.sum_sq / n - mean * mean);
  return {mean / uu, std::sqrt(var / n) / uu, m.n};
}

KwEstimate estimate_Kw(const ObjectiveFn& f, const ObjectiveFn& g, const GaussianParams& theta,
                       const WeightScheme& scheme, std::int64_t n_samples,
                       std::int64_t reference_size, RngStream stream, int threads) {
  if (n_samples < 1000) throw std::invalid_argument("estimate_Kw: need at least 1e3 samples");
  if (reference_size < 10000) {
    throw std::invalid_argument("estimate_Kw: need a reference of at least 1e4");
  }
  const UtilityPolynomial u{scheme};

  const UtilityReference ref =
      build_reference(f, g, theta, reference_size, stream.split(0), threads);
  const ChunkMoments m = utility_pair_moments(
      f, g, theta, u, ref, n_samples, stream.split(1), threads,
      [](double a, double b) { return (a - b) * (a - b); });

  const double n = static_cast<double>(m.n);
  const double mean = m.sum / n;
  const double var = std::max(0.0, m.sum_sq / n - mean * mean);
  const double lu = lipschitz_constant(u);
  return {mean, std::sqrt(var / n), lu * lu / static_cast<double>(reference_size), m.n};
}

MomentEstimate utility_gap_moment(const ObjectiveFn& f, const ObjectiveFn& g,
                                  const GaussianParams& theta, const WeightScheme& scheme,
                                  double s, std::int64_t n_samples, std::int64_t reference_size,
                                  RngStream stream, int threads) {
  if (!(s >= 1.0)) throw std::invalid_argument("utility_gap_moment: need s >= 1");
  if (n_samples < 1000) throw std::invalid_argument("utility_gap_moment: need at least 1e3 samples");
  if (reference_size < 10000) {
    throw std::invalid_argument("utility_gap_moment: need a reference of at least 1e4");
  }
  const UtilityPolynomial u{scheme};
  const UtilityReference ref =
      build_reference(f, g, theta, reference_size, stream.split(0), threads);
  const ChunkMoments m = utility_pair_moments(
      f, g, theta, u, ref, n_samples, stream.split(1), threads,
      [s](double a, double b) { return std::pow(std::abs(a - b), s); });
  const double n = static_cast<double>(m.n);
  const double mean = m.sum / n;
  const double var = std::max(0.0, m.sum_sq / n - mean * mean);
  return {mean, std::sqrt(var / n), m.n};
}

EmaTracker::EmaTracker(double decay) : decay_(decay) {
  if (!(decay > 0.0 && decay <= 1.0)) {
    throw std::invalid_argument("EmaTracker: decay must lie in (0, 1]");
  }
}

void EmaTracker::update(double x) {
  v_ = has_ ? decay_ * x + (1.0 - decay_) * v_ : x;
  has_ = true;
}

double EmaTracker::value() const {
  if (!has_) throw std::logic_error("EmaTracker: no observations yet");
  return v_;
}

}  // namespace igo
