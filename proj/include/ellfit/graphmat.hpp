#pragma once

#include "ellfit/common.hpp"
#include "ellfit/hermite.hpp"
#include "ellfit/sampling.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ellfit::graphmat {

enum class VertexType : std::uint8_t { Square, Circle };

/// Which random input a shape is realized from.
enum class InputKind : std::uint8_t {
  GaussianVectors,  // rows v_i ~ N(0, I/d); squares label [m], circles label [d]
  Goe,              // symmetric d x d Gaussian matrix with variance 1/d
};

struct ShapeVertex {
  int id = 0;
  VertexType type = VertexType::Circle;
};

/// Edge oriented along the U -> V traversal.
struct ShapeEdge {
  int from = 0;
  int to = 0;
  unsigned hermite = 1;
};

/// Graph-matrix shape. `edges` is listed in traversal order.
struct Shape {
  std::string name;
  InputKind input = InputKind::GaussianVectors;
  std::vector<ShapeVertex> vertices;
  std::vector<int> U;
  std::vector<int> V;
  std::vector<ShapeEdge> edges;

  const ShapeVertex& vertex(int id) const;
  bool in_U(int id) const;
  bool in_V(int id) const;
  /// U == V: the realized matrix is diagonal.
  bool diagonal() const;
  VertexType boundary_type() const;
  /// Throws std::invalid_argument on a malformed shape.
  void validate() const;
};

/// goe, malpha, mbeta, md1, md2, md3, sumvv.
const std::vector<Shape>& catalog();

/// Throws Error(UnknownShape) listing the catalog.
const Shape& shape_by_name(const std::string& name);

std::string catalog_names();

/// Largest vertex count in the catalog.
std::size_t catalog_max_vertices();

/// 2 * catalog_max_vertices().
std::size_t default_dv();

/// Row/column count of the realized matrix.
std::size_t matrix_dimension(const Shape& shape, std::size_t d, std::size_t m);

/// Throws Error(DimensionTooSmall) when no injective labeling of the middle
/// vertices exists.
void require_realizable(const Shape& shape, std::size_t d, std::size_t m);

/// M_tau from sampled vectors, through the algebraic fast path of each
/// catalog shape.
Matrix realize(const Shape& shape, const sampling::SampleSet& sample);

/// M_tau for the GOE shape.
Matrix realize(const Shape& shape, const sampling::GoeMatrix& goe);

/// M_tau by explicit summation over injective labelings of the middle
/// vertices. Exponential in the shape size; limited to small inputs.
Matrix realize_explicit(const Shape& shape, const sampling::SampleSet& sample);

/// Draws the shape's input for one trial and realizes it.
Matrix realize_trial(const Shape& shape, std::size_t d, std::size_t m, std::uint64_t seed);

/// tr((M M^T)^q) computed densely.
double trace_power(const Matrix& mat, int q);

inline constexpr std::size_t kMaxTraceDimension = 2000;

struct MonteCarloEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t trials = 0;
};

/// Monte Carlo estimate of E tr((M_tau M_tau^T)^q) over `trials` fresh
/// inputs; trial t uses derive_seed(seed, t). `threads` = 0 picks the
/// hardware concurrency. Results do not depend on the thread count.
MonteCarloEstimate trace_moment_mc(const Shape& shape, std::size_t d, std::size_t m, int q,
                                   std::size_t trials, std::uint64_t seed,
                                   unsigned threads = 0);

/// Per-vertex deductions for one labeling.
struct VertexDeduction {
  int vertex = 0;
  bool can_be_first = false;
  bool can_be_last = false;
};

struct LabelingRow {
  std::vector<StepLabel> labels;  // one per edge, traversal order
  std::vector<VertexDeduction> vertices;
  int pur_exponent = 0;        // number of (2q D_V) factors
  int square_return_sources = 0;  // squares that push out an R step: factor 2 each
  double vertex_factor = 0.0;  // product of sqrt(weight) over possible first/last
  double pur_factor = 0.0;     // (2q D_V)^pur_exponent * 2^square_return_sources
  double edge_factor = 0.0;
  double product = 0.0;

  std::string label_string() const;
};

struct BlockValueBreakdown {
  std::string shape;
  std::size_t d = 0, m = 0, q = 0, dv = 0;
  std::size_t candidates = 0;  // 4^|E|
  std::vector<LabelingRow> rows;  // admissible labelings only
  double total = 0.0;
};

/// Whether the labeling is consistent: a vertex entered by an F step is
/// new, so every other edge into it must also be F and every edge out of it
/// must be new (F or S). This excludes the F -> R path.
bool admissible(const Shape& shape, const std::vector<StepLabel>& labels);

std::vector<VertexDeduction> deduce_vertices(const Shape& shape,
                                             const std::vector<StepLabel>& labels);

/// Block-value function B_q(tau): sum over admissible step-labelings of
/// vertex factor * pur factor * edge factor.
BlockValueBreakdown block_value(const Shape& shape, std::size_t d, std::size_t m, std::size_t q,
                                std::size_t dv);

struct CheckRow {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double bound = 0.0;
  std::string detail;
};

struct BlockBoundReport {
  std::string shape;
  std::size_t d = 0, m = 0, q = 0, dv = 0, trials = 0;
  std::uint64_t seed = 0;
  double block_value = 0.0;
  std::size_t dimension = 0;
  MonteCarloEstimate trace;
  double max_norm = 0.0;
  std::vector<CheckRow> checks;

  bool pass() const;
};

inline constexpr double kNormSlack = 1.2;

/// Checks (a) mean - 3 stderr <= dim * B_q^{2q} and (b) every trial's
/// realized norm <= 1.2 B_q.
BlockBoundReport verify_block_bound(const Shape& shape, std::size_t d, std::size_t m,
                                    std::size_t q, std::size_t trials, std::uint64_t seed,
                                    std::size_t dv = 0, unsigned threads = 0);

}  // namespace ellfit::graphmat
