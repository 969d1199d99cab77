#include "specband/band_structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "specband/errors.hpp"

namespace specband {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

BandStructure::BandStructure(std::vector<double> edges) : edges_(std::move(edges)) {
  if (edges_.size() < 3 || edges_.size() % 2 == 0) {
    throw EvenEdgeCount("band structure needs an odd number (>= 3) of edges, got " +
                        std::to_string(edges_.size()));
  }
  for (std::size_t l = 0; l + 1 < edges_.size(); ++l) {
    if (!(edges_[l] < edges_[l + 1])) {
      throw NonMonotoneEdges("edges must be strictly increasing: E_" + std::to_string(l) +
                             " >= E_" + std::to_string(l + 1));
    }
  }
  n_ = static_cast<int>((edges_.size() - 1) / 2);
}

double BandStructure::edge_sum() const {
  return std::accumulate(edges_.begin(), edges_.end(), 0.0);
}

std::pair<double, double> BandStructure::band(int j) const {
  if (j == n_) return {edges_[static_cast<std::size_t>(2 * n_)], kInf};
  return {edges_[static_cast<std::size_t>(2 * j)], edges_[static_cast<std::size_t>(2 * j + 1)]};
}

std::pair<double, double> BandStructure::gap(int j) const {
  if (j == 0) return {-kInf, edges_.front()};
  return {edges_[static_cast<std::size_t>(2 * j - 1)], edges_[static_cast<std::size_t>(2 * j)]};
}

bool BandStructure::in_band_interior(double lambda) const {
  for (int j = 0; j <= n_; ++j) {
    auto [lo, hi] = band(j);
    if (lambda > lo && lambda < hi) return true;
  }
  return false;
}

bool BandStructure::in_gap_interior(double lambda) const {
  if (lambda < edges_.front()) return true;
  for (int j = 1; j <= n_; ++j) {
    auto [lo, hi] = gap(j);
    if (lambda > lo && lambda < hi) return true;
  }
  return false;
}

bool BandStructure::in_gap_closure(int j, double lambda, double tol) const {
  auto [lo, hi] = gap(j);
  if (j == 0) return lambda <= hi + tol;
  return lambda >= lo - tol && lambda <= hi + tol;
}

int BandStructure::gap_index(double lambda, double tol) const {
  for (int j = 1; j <= n_; ++j) {
    if (in_gap_closure(j, lambda, tol)) return j;
  }
  if (lambda <= edges_.front() + tol) return 0;
  return -1;
}

double BandStructure::distance_to_edges(double lambda) const {
  double d = kInf;
  for (double e : edges_) d = std::min(d, std::abs(lambda - e));
  return d;
}

cplx BandStructure::eval_r(cplx z) const {
  cplx p(1.0, 0.0);
  for (double e : edges_) p *= (z - e);
  return p;
}

cplx BandStructure::eval_sqrt_r(cplx z) const {
  // Half of the summed arguments, each in [0, 2*pi).  For real z - E_l > 0
  // the argument is 0 (the boundary value from above).
  double mag_log = 0.0;
  double phase = 0.0;
  for (double e : edges_) {
    const cplx w = z - e;
    const double a = std::abs(w);
    if (a == 0.0) return cplx(0.0, 0.0);
    mag_log += std::log(a);
    double arg = std::atan2(w.imag(), w.real());
    if (arg < 0.0) arg += kTwoPi;
    phase += arg;
  }
  return std::polar(std::exp(0.5 * mag_log), 0.5 * phase);
}

cplx BandStructure::eval_sqrt_r_lower(double lambda) const {
  // On a band the two boundary values are negatives of each other; across
  // gaps the function is continuous.
  const cplx upper = eval_sqrt_r(cplx(lambda, 0.0));
  return in_band_interior(lambda) ? -upper : upper;
}

bool BandStructure::on_band_point(cplx z, double tol) const {
  return std::abs(z.imag()) <= tol && in_band_interior(z.real());
}

std::vector<double> BandStructure::r_coefficients() const {
  std::vector<double> coeffs{1.0};
  for (double e : edges_) {
    std::vector<double> next(coeffs.size() + 1, 0.0);
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      next[k + 1] += coeffs[k];
      next[k] -= e * coeffs[k];
    }
    coeffs.swap(next);
  }
  return coeffs;
}

namespace {

// Truncated series of (1 - E*eta)^{-1/2} (hat = true) or (1 - E*eta)^{1/2}.
std::vector<double> edge_binomial_series(double e, int K, bool hat) {
  std::vector<double> s(static_cast<std::size_t>(K) + 1, 0.0);
  s[0] = 1.0;
  for (int k = 1; k <= K; ++k) {
    const double ratio = hat ? (2.0 * k - 1.0) / (2.0 * k)   // a_k = a_{k-1} E (2k-1)/(2k)
                             : (2.0 * k - 3.0) / (2.0 * k);  // b_k = b_{k-1} E (2k-3)/(2k)
    s[static_cast<std::size_t>(k)] = s[static_cast<std::size_t>(k - 1)] * e * ratio;
  }
  return s;
}

std::vector<double> convolve_truncated(const std::vector<double>& a,
                                       const std::vector<double>& b, int K) {
  std::vector<double> r(static_cast<std::size_t>(K) + 1, 0.0);
  for (int i = 0; i <= K; ++i) {
    for (int j = 0; i + j <= K && j <= K; ++j) {
      r[static_cast<std::size_t>(i + j)] +=
          a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(j)];
    }
  }
  return r;
}

}  // namespace

EdgeSeries edge_series(const BandStructure& bs, int K) {
  EdgeSeries es;
  es.K = K;
  std::vector<double> c{1.0}, chat{1.0};
  c.resize(static_cast<std::size_t>(K) + 1, 0.0);
  chat.resize(static_cast<std::size_t>(K) + 1, 0.0);
  for (double e : bs.edges()) {
    c = convolve_truncated(c, edge_binomial_series(e, K, /*hat=*/false), K);
    chat = convolve_truncated(chat, edge_binomial_series(e, K, /*hat=*/true), K);
  }
  es.c = std::move(c);
  es.chat = std::move(chat);
  return es;
}

namespace {

// Walks all compositions j_0 + ... + j_{2n} = k and accumulates the closed
// multinomial terms.
void multinomial_walk(const std::vector<double>& edges, std::size_t idx, int remaining,
                      double term_hat, double term_c, double& sum_hat, double& sum_c) {
  if (idx + 1 == edges.size()) {
    const int j = remaining;
    double f_hat = 1.0, f_c = 1.0;
    // (2j)! / (4^j (j!)^2) and the same with the extra 1/(2j-1) factor.
    for (int i = 1; i <= j; ++i) f_hat *= (2.0 * i - 1.0) / (2.0 * i);
    f_c = (j == 0) ? -1.0 : f_hat / (2.0 * j - 1.0);
    const double p = std::pow(edges[idx], j);
    sum_hat += term_hat * f_hat * p;
    sum_c += term_c * f_c * p;
    return;
  }
  for (int j = 0; j <= remaining; ++j) {
    double f_hat = 1.0;
    for (int i = 1; i <= j; ++i) f_hat *= (2.0 * i - 1.0) / (2.0 * i);
    const double f_c = (j == 0) ? -1.0 : f_hat / (2.0 * j - 1.0);
    const double p = std::pow(edges[idx], j);
    multinomial_walk(edges, idx + 1, remaining - j, term_hat * f_hat * p, term_c * f_c * p,
                     sum_hat, sum_c);
  }
}

}  // namespace

EdgeSeries edge_series_multinomial(const BandStructure& bs, int K) {
  EdgeSeries es;
  es.K = K;
  es.c.assign(static_cast<std::size_t>(K) + 1, 0.0);
  es.chat.assign(static_cast<std::size_t>(K) + 1, 0.0);
  es.c[0] = es.chat[0] = 1.0;
  for (int k = 1; k <= K; ++k) {
    double sum_hat = 0.0, sum_c = 0.0;
    multinomial_walk(bs.edges(), 0, k, 1.0, 1.0, sum_hat, sum_c);
    es.chat[static_cast<std::size_t>(k)] = sum_hat;
    // Leading minus of the closed sum; the per-edge denominator factor
    // (2j-1) equals -1 at j = 0 and is already part of sum_c.
    es.c[static_cast<std::size_t>(k)] = -sum_c;
  }
  return es;
}

}  // namespace specband
