#include "ellfit/hermite.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace ellfit {

char to_char(StepLabel label) {
  switch (label) {
    case StepLabel::F: return 'F';
    case StepLabel::R: return 'R';
    case StepLabel::S: return 'S';
    case StepLabel::H: return 'H';
  }
  return '?';
}

}  // namespace ellfit

namespace ellfit::hermite {

namespace {

// Coefficient of y^k at index k. 128-bit so that products such as He_4^8
// and the moments (k-1)!! up to degree 32 stay exact.
using Wide = __int128;
using Poly = std::vector<Wide>;

Poly probabilists_poly(unsigned t) {
  Poly prev{1};
  if (t == 0) return prev;
  Poly cur{0, 1};
  for (unsigned k = 1; k < t; ++k) {
    Poly next(k + 2, 0);
    for (std::size_t i = 0; i < cur.size(); ++i) next[i + 1] += cur[i];
    for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= static_cast<Wide>(k) * prev[i];
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

Poly multiply(const Poly& a, const Poly& b) {
  Poly out(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

// E[y^k] for y ~ N(0,1).
Wide gaussian_moment(std::size_t k) {
  if (k % 2 == 1) return 0;
  Wide acc = 1;
  for (std::size_t j = k - 1; j >= 1 && j < k; j -= 2) acc *= static_cast<Wide>(j);
  return acc;
}

double pow_d(std::size_t d, unsigned e) {
  double acc = 1.0;
  for (unsigned i = 0; i < e; ++i) acc *= static_cast<double>(d);
  return acc;
}

}  // namespace

double hermite_eval(unsigned t, double x) {
  if (t == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (unsigned k = 1; k < t; ++k) {
    const double next = x * cur - static_cast<double>(k) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double hermite_scaled_eval(unsigned t, double x, std::size_t d) {
  if (t < 1 || t > 4) {
    throw std::invalid_argument("hermite_scaled_eval: index must be in 1..4, got " +
                                std::to_string(t));
  }
  if (d == 0) throw std::invalid_argument("hermite_scaled_eval: d must be positive");
  const double dd = static_cast<double>(d);
  const double x2 = x * x;
  switch (t) {
    case 1: return x;
    case 2: return x2 - 1.0 / dd;
    case 3: return x * (x2 - 3.0 / dd);
    default: return x2 * x2 - 6.0 * x2 / dd + 3.0 / (dd * dd);
  }
}

double ExactMoment::value(std::size_t d) const {
  if (d == 0) throw std::invalid_argument("hermite_moment: d must be positive");
  if (numerator == 0) return 0.0;
  // Odd total degree always has a zero numerator.
  return static_cast<double>(numerator) / pow_d(d, degree / 2);
}

ExactMoment hermite_moment_exact(const std::map<unsigned, unsigned>& powers) {
  unsigned degree = 0;
  for (const auto& [t, a] : powers) {
    if (t > 4) {
      throw std::invalid_argument("hermite_moment: index must be at most 4, got " +
                                  std::to_string(t));
    }
    degree += t * a;
  }
  if (degree > kMaxMomentDegree) {
    throw std::invalid_argument("hermite_moment: total degree " + std::to_string(degree) +
                                " exceeds " + std::to_string(kMaxMomentDegree));
  }
  Poly product{1};
  for (const auto& [t, a] : powers) {
    const Poly base = probabilists_poly(t);
    for (unsigned i = 0; i < a; ++i) product = multiply(product, base);
  }
  Wide total = 0;
  for (std::size_t k = 0; k < product.size(); ++k) total += product[k] * gaussian_moment(k);
  if (total > static_cast<Wide>(INT64_MAX) || total < static_cast<Wide>(INT64_MIN)) {
    throw std::invalid_argument("hermite_moment: value exceeds 64-bit range");
  }
  ExactMoment out;
  out.degree = degree;
  out.numerator = static_cast<std::int64_t>(total);
  return out;
}

double hermite_moment(const std::map<unsigned, unsigned>& powers, std::size_t d) {
  return hermite_moment_exact(powers).value(d);
}

double hermite_moment_bound(unsigned t, unsigned k, std::size_t d) {
  double fact = 1.0;
  for (unsigned i = 2; i <= t; ++i) fact *= i;
  const double kk = static_cast<double>(k);
  return std::pow(fact, kk / 2.0) *
         std::pow(kk / static_cast<double>(d), kk * static_cast<double>(t) / 2.0);
}

double EdgeFactorTable::factor(unsigned t, StepLabel label) const {
  const bool high = label == StepLabel::H;
  switch (t) {
    case 1: return high ? h1_high : h1_fresh;
    case 2: return high ? h2_high : h2_fresh;
    case 3: return std::pow(mixed_h_copy, 3);
    case 4: return std::pow(mixed_h_copy, 4);
    default:
      throw std::invalid_argument("edge factor: Hermite index must be in 1..4, got " +
                                  std::to_string(t));
  }
}

EdgeFactorTable edge_factor_table(std::size_t d, std::size_t q, std::size_t dv) {
  if (d == 0 || q == 0 || dv == 0) {
    throw std::invalid_argument("edge_factor_table: d, q and D_V must be positive");
  }
  const double dd = static_cast<double>(d);
  const double qq = static_cast<double>(q);
  const double sd = std::sqrt(dd);
  EdgeFactorTable t;
  t.d = d;
  t.q = q;
  t.dv = dv;
  t.h1_fresh = 1.0 / sd;
  t.h1_high = 2.0 * qq / sd;
  t.h2_fresh = std::sqrt(2.0) / dd;
  t.h2_high = 8.0 * qq * qq / dd;
  t.mixed_fr_copy = std::pow(2.0, 0.25) / sd;
  t.mixed_h_copy = 32.0 * qq * static_cast<double>(dv) / sd;
  t.h112_h2_copy = std::sqrt(2.0) / sd;
  return t;
}

}  // namespace ellfit::hermite
