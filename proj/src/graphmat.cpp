#include "ellfit/graphmat.hpp"

#include "ellfit/construction.hpp"
#include "ellfit/parallel.hpp"
#include "ellfit/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace ellfit::graphmat {

namespace {

Shape make_shape(std::string name, InputKind input, std::vector<ShapeVertex> vertices,
                 std::vector<int> U, std::vector<int> V, std::vector<ShapeEdge> edges) {
  Shape s{std::move(name), input, std::move(vertices), std::move(U), std::move(V),
          std::move(edges)};
  s.validate();
  return s;
}

constexpr auto kSq = VertexType::Square;
constexpr auto kCi = VertexType::Circle;

std::vector<Shape> build_catalog() {
  std::vector<Shape> c;
  // d x d symmetric Gaussian matrix, zero diagonal.
  c.push_back(make_shape("goe", InputKind::Goe, {{0, kCi}, {1, kCi}}, {0}, {1}, {{0, 1, 1}}));
  // Two length-2 paths i -> a -> j and i -> b -> j, a != b.
  c.push_back(make_shape("malpha", InputKind::GaussianVectors,
                         {{0, kSq}, {1, kCi}, {2, kCi}, {3, kSq}}, {0}, {3},
                         {{0, 1, 1}, {1, 3, 1}, {0, 2, 1}, {2, 3, 1}}));
  c.push_back(make_shape("mbeta", InputKind::GaussianVectors, {{0, kSq}, {1, kCi}, {2, kSq}},
                         {0}, {2}, {{0, 1, 2}, {1, 2, 2}}));
  c.push_back(make_shape("md1", InputKind::GaussianVectors, {{0, kSq}, {1, kCi}, {2, kCi}},
                         {0}, {0}, {{0, 1, 2}, {0, 2, 2}}));
  c.push_back(make_shape("md2", InputKind::GaussianVectors, {{0, kSq}, {1, kCi}}, {0}, {0},
                         {{0, 1, 4}}));
  c.push_back(make_shape("md3", InputKind::GaussianVectors, {{0, kSq}, {1, kCi}}, {0}, {0},
                         {{0, 1, 2}}));
  // Off-diagonal part of sum_i v_i v_i^T.
  c.push_back(make_shape("sumvv", InputKind::GaussianVectors, {{0, kCi}, {1, kSq}, {2, kCi}},
                         {0}, {2}, {{0, 1, 1}, {1, 2, 1}}));
  return c;
}

std::size_t label_range(VertexType type, std::size_t d, std::size_t m) {
  return type == VertexType::Square ? m : d;
}

double weight(VertexType type, std::size_t d, std::size_t m) {
  return static_cast<double>(label_range(type, d, m));
}

Matrix diagonal_matrix(const Vector& diag) {
  Matrix out = Matrix::Zero(diag.size(), diag.size());
  out.diagonal() = diag;
  return out;
}

}  // namespace

const ShapeVertex& Shape::vertex(int id) const {
  for (const auto& v : vertices) {
    if (v.id == id) return v;
  }
  throw std::invalid_argument("shape " + name + ": no vertex " + std::to_string(id));
}

bool Shape::in_U(int id) const { return std::find(U.begin(), U.end(), id) != U.end(); }
bool Shape::in_V(int id) const { return std::find(V.begin(), V.end(), id) != V.end(); }
bool Shape::diagonal() const { return U == V; }
VertexType Shape::boundary_type() const { return vertex(U.front()).type; }

void Shape::validate() const {
  if (U.size() != 1 || V.size() != 1) {
    throw std::invalid_argument("shape " + name + ": boundaries must be single vertices");
  }
  if (vertex(U.front()).type != vertex(V.front()).type) {
    throw std::invalid_argument("shape " + name + ": boundary types differ");
  }
  if (edges.empty() || edges.size() > 6) {
    throw std::invalid_argument("shape " + name + ": needs 1..6 edges");
  }
  for (const auto& e : edges) {
    (void)vertex(e.from);
    (void)vertex(e.to);
    if (e.hermite < 1 || e.hermite > 4) {
      throw std::invalid_argument("shape " + name + ": Hermite index out of range");
    }
    if (input == InputKind::GaussianVectors && vertex(e.from).type == vertex(e.to).type) {
      throw std::invalid_argument("shape " + name + ": edges must join a square and a circle");
    }
  }
}

const std::vector<Shape>& catalog() {
  static const std::vector<Shape> shapes = build_catalog();
  return shapes;
}

std::string catalog_names() {
  std::string out;
  for (const auto& s : catalog()) {
    if (!out.empty()) out += ", ";
    out += s.name;
  }
  return out;
}

const Shape& shape_by_name(const std::string& name) {
  for (const auto& s : catalog()) {
    if (s.name == name) return s;
  }
  throw Error(ErrorCode::UnknownShape,
              "unknown shape '" + name + "'; catalog: " + catalog_names());
}

std::size_t catalog_max_vertices() {
  std::size_t best = 0;
  for (const auto& s : catalog()) best = std::max(best, s.vertices.size());
  return best;
}

std::size_t default_dv() { return 2 * catalog_max_vertices(); }

std::size_t matrix_dimension(const Shape& shape, std::size_t d, std::size_t m) {
  return label_range(shape.boundary_type(), d, m);
}

void require_realizable(const Shape& shape, std::size_t d, std::size_t m) {
  for (const VertexType type : {VertexType::Square, VertexType::Circle}) {
    std::size_t needed = 0;
    bool boundary = false;
    for (const auto& v : shape.vertices) {
      if (v.type != type) continue;
      if (shape.in_U(v.id) || shape.in_V(v.id)) {
        boundary = true;
      } else {
        ++needed;
      }
    }
    if (boundary) ++needed;
    if (needed > label_range(type, d, m)) {
      throw Error(ErrorCode::DimensionTooSmall,
                  "shape " + shape.name + " needs " + std::to_string(needed) + " distinct " +
                      (type == VertexType::Square ? "square" : "circle") + " labels");
    }
  }
}

Matrix realize(const Shape& shape, const sampling::SampleSet& sample) {
  if (shape.input != InputKind::GaussianVectors) {
    throw std::invalid_argument("shape " + shape.name + " is realized from a GOE matrix");
  }
  require_realizable(shape, sample.d, sample.m);
  const Matrix& v = sample.vectors;
  const double inv_d = 1.0 / static_cast<double>(sample.d);
  if (shape.name == "malpha") return construction::malpha_matrix(v);
  if (shape.name == "mbeta") return construction::mbeta_matrix(v);
  if (shape.name == "sumvv") {
    Matrix out = construction::sum_vv(sample);
    out.diagonal().setZero();
    return out;
  }
  const Matrix h2 = (v.array().square() - inv_d).matrix();
  const Vector eta = h2.rowwise().sum();
  if (shape.name == "md1") {
    return diagonal_matrix(eta.array().square() - h2.rowwise().squaredNorm().array());
  }
  if (shape.name == "md2") {
    const Matrix sq = v.array().square().matrix();
    const Matrix h4 = (sq.array().square() - 6.0 * inv_d * sq.array() + 3.0 * inv_d * inv_d).matrix();
    return diagonal_matrix(h4.rowwise().sum());
  }
  if (shape.name == "md3") return diagonal_matrix(eta);
  return realize_explicit(shape, sample);
}

Matrix realize(const Shape& shape, const sampling::GoeMatrix& goe) {
  if (shape.input != InputKind::Goe) {
    throw std::invalid_argument("shape " + shape.name + " is realized from Gaussian vectors");
  }
  return goe.entries;
}

Matrix realize_explicit(const Shape& shape, const sampling::SampleSet& sample) {
  if (shape.input != InputKind::GaussianVectors) {
    throw std::invalid_argument("realize_explicit: shape must use Gaussian vectors");
  }
  require_realizable(shape, sample.d, sample.m);
  const std::size_t d = sample.d, m = sample.m;
  std::vector<int> middle;
  for (const auto& v : shape.vertices) {
    if (!shape.in_U(v.id) && !shape.in_V(v.id)) middle.push_back(v.id);
  }
  double work = 1.0;
  for (int id : middle) work *= static_cast<double>(label_range(shape.vertex(id).type, d, m));
  const std::size_t dim = matrix_dimension(shape, d, m);
  work *= static_cast<double>(dim) * static_cast<double>(dim);
  if (work > 1e8) throw Error(ErrorCode::SizeLimit, "realize_explicit: input too large");

  int max_id = 0;
  for (const auto& v : shape.vertices) max_id = std::max(max_id, v.id);
  std::vector<std::size_t> label(static_cast<std::size_t>(max_id) + 1, 0);

  auto edge_value = [&](const ShapeEdge& e) {
    const bool from_square = shape.vertex(e.from).type == VertexType::Square;
    const std::size_t row = label[static_cast<std::size_t>(from_square ? e.from : e.to)];
    const std::size_t col = label[static_cast<std::size_t>(from_square ? e.to : e.from)];
    const double x = sample.vectors(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
    return hermite::hermite_scaled_eval(e.hermite, x, d);
  };
  auto taken = [&](int id, std::size_t value, std::size_t upto) {
    const VertexType type = shape.vertex(id).type;
    for (const auto& v : shape.vertices) {
      if (v.type != type || v.id == id) continue;
      const bool boundary = shape.in_U(v.id) || shape.in_V(v.id);
      const auto pos = std::find(middle.begin(), middle.end(), v.id) - middle.begin();
      const bool assigned = boundary || static_cast<std::size_t>(pos) < upto;
      if (assigned && label[static_cast<std::size_t>(v.id)] == value) return true;
    }
    return false;
  };

  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  const int u = shape.U.front(), w = shape.V.front();
  for (std::size_t s = 0; s < dim; ++s) {
    for (std::size_t t = 0; t < dim; ++t) {
      if (shape.diagonal() ? s != t : s == t) continue;
      label[static_cast<std::size_t>(u)] = s;
      label[static_cast<std::size_t>(w)] = t;
      double sum = 0.0;
      std::function<void(std::size_t)> assign = [&](std::size_t k) {
        if (k == middle.size()) {
          double prod = 1.0;
          for (const auto& e : shape.edges) prod *= edge_value(e);
          sum += prod;
          return;
        }
        const int id = middle[k];
        const std::size_t range = label_range(shape.vertex(id).type, d, m);
        for (std::size_t value = 0; value < range; ++value) {
          if (taken(id, value, k)) continue;
          label[static_cast<std::size_t>(id)] = value;
          assign(k + 1);
        }
      };
      assign(0);
      out(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) = sum;
    }
  }
  return out;
}

Matrix realize_trial(const Shape& shape, std::size_t d, std::size_t m, std::uint64_t seed) {
  if (shape.input == InputKind::Goe) {
    return realize(shape, sampling::sample_goe(seed, d, 1.0 / static_cast<double>(d)));
  }
  return realize(shape, sampling::sample_vectors(seed, d, m));
}

double trace_power(const Matrix& mat, int q) {
  if (q < 1) throw std::invalid_argument("trace_power: q must be positive");
  if (mat.rows() == mat.cols() && mat.isDiagonal(0.0)) {
    return mat.diagonal().array().abs().pow(2.0 * q).sum();
  }
  Matrix p = Matrix::Zero(mat.rows(), mat.rows());
  p.selfadjointView<Eigen::Lower>().rankUpdate(mat);
  p = Matrix(p.selfadjointView<Eigen::Lower>());
  if (q == 1) return p.trace();
  Matrix half = p;
  for (int k = 1; k < q / 2; ++k) half = half * p;
  if (q % 2 == 0) return half.cwiseProduct(half).sum();
  const Matrix next = half * p;
  return next.cwiseProduct(half).sum();
}

namespace {

MonteCarloEstimate summarize(const std::vector<double>& values) {
  MonteCarloEstimate est;
  est.trials = values.size();
  if (values.empty()) return est;
  const double n = static_cast<double>(values.size());
  est.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - est.mean) * (v - est.mean);
    est.stderr_ = std::sqrt(ss / (n - 1.0) / n);
  }
  return est;
}

void guard_trace_size(const Shape& shape, std::size_t d, std::size_t m, int q) {
  if (q < 1) throw std::invalid_argument("trace moment: q must be positive");
  if (matrix_dimension(shape, d, m) > kMaxTraceDimension) {
    throw Error(ErrorCode::SizeLimit, "trace moment: matrix dimension exceeds " +
                                          std::to_string(kMaxTraceDimension));
  }
}

}  // namespace

MonteCarloEstimate trace_moment_mc(const Shape& shape, std::size_t d, std::size_t m, int q,
                                   std::size_t trials, std::uint64_t seed, unsigned threads) {
  guard_trace_size(shape, d, m, q);
  std::vector<double> values(trials, 0.0);
  parallel_for(trials, threads, [&](std::size_t t) {
    values[t] = trace_power(realize_trial(shape, d, m, sampling::derive_seed(seed, t)), q);
  });
  return summarize(values);
}

std::string LabelingRow::label_string() const {
  std::string s;
  for (auto l : labels) s.push_back(to_char(l));
  return s;
}

bool admissible(const Shape& shape, const std::vector<StepLabel>& labels) {
  for (const auto& v : shape.vertices) {
    bool fresh = false;
    for (std::size_t k = 0; k < shape.edges.size(); ++k) {
      if (shape.edges[k].to == v.id && labels[k] == StepLabel::F) fresh = true;
    }
    if (!fresh) continue;
    if (shape.in_U(v.id)) return false;
    for (std::size_t k = 0; k < shape.edges.size(); ++k) {
      const auto& e = shape.edges[k];
      if (e.to == v.id && labels[k] != StepLabel::F) return false;
      if (e.from == v.id && labels[k] != StepLabel::F && labels[k] != StepLabel::S) return false;
    }
  }
  return true;
}

std::vector<VertexDeduction> deduce_vertices(const Shape& shape,
                                             const std::vector<StepLabel>& labels) {
  std::vector<VertexDeduction> out;
  for (const auto& v : shape.vertices) {
    VertexDeduction ded{v.id, !shape.in_U(v.id), !shape.in_V(v.id)};
    for (std::size_t k = 0; k < shape.edges.size(); ++k) {
      const auto& e = shape.edges[k];
      const StepLabel l = labels[k];
      if (e.to == v.id && l != StepLabel::F) ded.can_be_first = false;
      if ((e.to == v.id || e.from == v.id) && l != StepLabel::R) ded.can_be_last = false;
    }
    out.push_back(ded);
  }
  return out;
}

BlockValueBreakdown block_value(const Shape& shape, std::size_t d, std::size_t m, std::size_t q,
                                std::size_t dv) {
  const hermite::EdgeFactorTable table = hermite::edge_factor_table(d, q, dv);
  if (m == 0) throw std::invalid_argument("block_value: m must be positive");
  BlockValueBreakdown out;
  out.shape = shape.name;
  out.d = d;
  out.m = m;
  out.q = q;
  out.dv = dv;
  const std::size_t k = shape.edges.size();
  out.candidates = std::size_t{1} << (2 * k);
  const double pur_unit = 2.0 * static_cast<double>(q) * static_cast<double>(dv);

  std::vector<StepLabel> labels(k);
  for (std::size_t code = 0; code < out.candidates; ++code) {
    // Edge 0 is the most significant digit so rows come out in lexicographic
    // F < R < S < H order along the traversal.
    for (std::size_t e = 0; e < k; ++e) {
      labels[e] = kAllStepLabels[(code >> (2 * (k - 1 - e))) & 3U];
    }
    if (!admissible(shape, labels)) continue;
    LabelingRow row;
    row.labels = labels;
    row.vertices = deduce_vertices(shape, labels);
    row.vertex_factor = 1.0;
    for (const auto& ded : row.vertices) {
      const double root = std::sqrt(weight(shape.vertex(ded.vertex).type, d, m));
      if (ded.can_be_first) row.vertex_factor *= root;
      if (ded.can_be_last) row.vertex_factor *= root;
    }
    std::vector<int> return_squares;
    row.edge_factor = 1.0;
    for (std::size_t e = 0; e < k; ++e) {
      const auto& edge = shape.edges[e];
      const StepLabel l = labels[e];
      row.edge_factor *= table.factor(edge.hermite, l);
      const bool target_square = shape.vertex(edge.to).type == VertexType::Square;
      if (l == StepLabel::S) row.pur_exponent += 2;
      if (l == StepLabel::H) row.pur_exponent += target_square ? 2 : 1;
      if (l == StepLabel::R && shape.vertex(edge.from).type == VertexType::Square &&
          std::find(return_squares.begin(), return_squares.end(), edge.from) ==
              return_squares.end()) {
        return_squares.push_back(edge.from);
      }
    }
    row.square_return_sources = static_cast<int>(return_squares.size());
    row.pur_factor = std::pow(pur_unit, row.pur_exponent) * std::pow(2.0, row.square_return_sources);
    row.product = row.vertex_factor * row.pur_factor * row.edge_factor;
    out.total += row.product;
    out.rows.push_back(std::move(row));
  }
  return out;
}

bool BlockBoundReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckRow& c) { return c.pass; });
}

BlockBoundReport verify_block_bound(const Shape& shape, std::size_t d, std::size_t m,
                                    std::size_t q, std::size_t trials, std::uint64_t seed,
                                    std::size_t dv, unsigned threads) {
  const int qi = static_cast<int>(q);
  guard_trace_size(shape, d, m, qi);
  if (trials == 0) throw std::invalid_argument("verify_block_bound: trials must be positive");
  BlockBoundReport rep;
  rep.shape = shape.name;
  rep.d = d;
  rep.m = m;
  rep.q = q;
  rep.dv = dv == 0 ? default_dv() : dv;
  rep.trials = trials;
  rep.seed = seed;
  rep.dimension = matrix_dimension(shape, d, m);
  rep.block_value = block_value(shape, d, m, q, rep.dv).total;

  std::vector<double> traces(trials, 0.0);
  std::vector<double> norms(trials, 0.0);
  parallel_for(trials, threads, [&](std::size_t t) {
    const std::uint64_t trial_seed = sampling::derive_seed(seed, t);
    const Matrix mat = realize_trial(shape, d, m, trial_seed);
    traces[t] = trace_power(mat, qi);
    if (mat.isDiagonal(0.0)) {
      norms[t] = mat.diagonal().cwiseAbs().maxCoeff();
    } else {
      spectral::SpectralOptions opts;
      opts.seed = trial_seed;
      norms[t] = spectral::spectral_norm(mat, opts).norm_estimate;
    }
  });
  rep.trace = summarize(traces);
  rep.max_norm = *std::max_element(norms.begin(), norms.end());

  const double dim_bound =
      static_cast<double>(rep.dimension) * std::pow(rep.block_value, 2.0 * static_cast<double>(q));
  CheckRow trace_row;
  trace_row.name = "trace_moment";
  trace_row.measured = rep.trace.mean;
  trace_row.bound = dim_bound;
  trace_row.pass = rep.trace.mean - 3.0 * rep.trace.stderr_ <= dim_bound;
  trace_row.detail = "E tr((M M^T)^q) <= dim * B_q^{2q} within 3 stderr";
  rep.checks.push_back(trace_row);

  CheckRow norm_row;
  norm_row.name = "realized_norm";
  norm_row.measured = rep.max_norm;
  norm_row.bound = kNormSlack * rep.block_value;
  norm_row.pass = rep.max_norm <= norm_row.bound;
  norm_row.detail = "max over trials of ||M|| <= 1.2 B_q";
  rep.checks.push_back(norm_row);
  return rep;
}

}  // namespace ellfit::graphmat
