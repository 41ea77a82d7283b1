#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string_view>

namespace ellfit {

/// Classification of one traversal of a labeled edge in a closed walk.
enum class StepLabel : std::uint8_t {
  F,  // fresh: new edge to an unseen vertex
  R,  // return: last appearance of the edge
  S,  // surprise: new edge to a previously seen vertex
  H,  // high-multiplicity: middle appearance of the edge
};

inline constexpr StepLabel kAllStepLabels[] = {StepLabel::F, StepLabel::R, StepLabel::S,
                                               StepLabel::H};

char to_char(StepLabel label);

}  // namespace ellfit

namespace ellfit::hermite {

inline constexpr unsigned kMaxMomentDegree = 32;

/// Probabilists' Hermite polynomial He_t(x): He_0 = 1, He_1 = x,
/// He_{k+1} = x He_k - k He_{k-1}.
double hermite_eval(unsigned t, double x);

/// Hermite polynomial orthogonal under N(0, 1/d), normalised so that
/// E[h_t(x)^2] = t!/d^t. Equals d^{-t/2} He_t(x sqrt(d)). Defined for t in 1..4.
double hermite_scaled_eval(unsigned t, double x, std::size_t d);

/// E[prod_t h_t(x)^{a_t}] for x ~ N(0, 1/d) is always numerator * d^{-degree/2}
/// with an integer numerator; this is that pair.
struct ExactMoment {
  std::int64_t numerator = 0;
  unsigned degree = 0;  // sum_t t * a_t

  double value(std::size_t d) const;
};

/// Symbolic mixed moment. Keys are Hermite indices in 0..4, values are
/// exponents. Throws std::invalid_argument when the total degree exceeds
/// kMaxMomentDegree or an index is out of range.
ExactMoment hermite_moment_exact(const std::map<unsigned, unsigned>& powers);

/// hermite_moment_exact(powers).value(d).
double hermite_moment(const std::map<unsigned, unsigned>& powers, std::size_t d);

/// Upper bound (t!)^{k/2} (k/d)^{kt/2} on E[h_t(x)^k] for even k.
double hermite_moment_bound(unsigned t, unsigned k, std::size_t d);

/// Analytic per-traversal edge weights for the block-value calculus.
struct EdgeFactorTable {
  std::size_t d = 0;
  std::size_t q = 0;
  std::size_t dv = 0;

  double h1_fresh = 0;   // F/S/R traversal of an h1 edge: 1/sqrt(d)
  double h1_high = 0;    // H traversal of an h1 edge: 2q/sqrt(d)
  double h2_fresh = 0;   // F/S/R traversal of an h2 edge: sqrt(2)/d
  double h2_high = 0;    // H traversal of an h2 edge: 8q^2/d
  double mixed_fr_copy = 0;   // per edge-copy, F/R of h1/h2 in mixed walks: 2^{1/4}/sqrt(d)
  double mixed_h_copy = 0;    // per edge-copy, H or any h3/h4 copy: 32 q D_V/sqrt(d)
  double h112_h2_copy = 0;    // per h2 edge-copy when the edge appears as h1,h1,h2: sqrt(2/d)

  /// Factor for one traversal of an edge with Hermite index t in 1..4.
  /// Indices 3 and 4 are charged mixed_h_copy per edge-copy.
  double factor(unsigned t, StepLabel label) const;
};

EdgeFactorTable edge_factor_table(std::size_t d, std::size_t q, std::size_t dv);

}  // namespace ellfit::hermite
