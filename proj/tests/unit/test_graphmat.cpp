#include "doctest.h"
#include "oracles.hpp"

#include "ellfit/graphmat.hpp"
#include "ellfit/hermite.hpp"

#include <cmath>
#include <map>

using namespace ellfit;
using namespace ellfit::oracle;
using namespace ellfit::graphmat;

namespace {

Matrix matrix_power(const Matrix& a, int q) {
  Matrix out = Matrix::Identity(a.rows(), a.rows());
  for (int k = 0; k < q; ++k) out = out * a;
  return out;
}

std::vector<StepLabel> parse(const std::string& s) {
  std::vector<StepLabel> out;
  for (char c : s) {
    out.push_back(c == 'F' ? StepLabel::F : c == 'R' ? StepLabel::R : c == 'S' ? StepLabel::S
                                                                             : StepLabel::H);
  }
  return out;
}

const LabelingRow* find(const BlockValueBreakdown& b, const std::string& labels) {
  for (const auto& r : b.rows) {
    if (r.label_string() == labels) return &r;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("catalog contents") {
  CHECK(catalog().size() == 7);
  for (const auto& s : catalog()) CHECK_NOTHROW(s.validate());
  CHECK(catalog_max_vertices() == 4);
  CHECK(default_dv() == 8);
  CHECK(catalog_names() == "goe, malpha, mbeta, md1, md2, md3, sumvv");
  CHECK(shape_by_name("md1").diagonal());
  CHECK_FALSE(shape_by_name("mbeta").diagonal());
  try {
    shape_by_name("nope");
    FAIL("expected UnknownShape");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownShape);
    CHECK(std::string(e.what()).find("malpha") != std::string::npos);
  }
}

TEST_CASE("malformed shapes are rejected") {
  Shape bad = shape_by_name("mbeta");
  bad.edges[0].hermite = 5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = shape_by_name("mbeta");
  bad.edges[0].to = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = shape_by_name("mbeta");
  bad.edges[0].to = 9;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("realize matches index loops at tiny sizes") {
  for (const auto& shape : catalog()) {
    if (shape.input != InputKind::GaussianVectors) continue;
    for (std::size_t d : {2UL, 3UL, 5UL}) {
      for (std::size_t m : {2UL, 3UL, 4UL}) {
        const auto s = sampling::sample_vectors(d * 7 + m, d, m);
        const Matrix expect = loops(shape.name, s);
        CHECK((realize(shape, s) - expect).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((realize_explicit(shape, s) - expect).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }
}

TEST_CASE("GOE shape realizes the sampled matrix") {
  const auto g = sampling::sample_goe(4, 6, 1.0 / 6);
  CHECK(realize(shape_by_name("goe"), g) == g.entries);
  const auto s = sampling::sample_vectors(1, 3, 3);
  CHECK_THROWS_AS(realize(shape_by_name("goe"), s), std::invalid_argument);
  CHECK_THROWS_AS(realize(shape_by_name("mbeta"), g), std::invalid_argument);
  CHECK(realize_trial(shape_by_name("goe"), 6, 1, 4) == g.entries);
}

TEST_CASE("realizability limits") {
  const auto one = sampling::sample_vectors(1, 1, 3);
  try {
    realize(shape_by_name("malpha"), one);
    FAIL("expected DimensionTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionTooSmall);
  }
  const auto single = sampling::sample_vectors(2, 4, 1);
  const Matrix z = realize(shape_by_name("mbeta"), single);
  CHECK(z.rows() == 1);
  CHECK(z(0, 0) == 0.0);
  CHECK(matrix_dimension(shape_by_name("sumvv"), 7, 3) == 7);
  CHECK(matrix_dimension(shape_by_name("malpha"), 7, 3) == 3);
  const auto large = sampling::sample_vectors(3, 200, 60);
  CHECK_THROWS_AS(realize_explicit(shape_by_name("malpha"), large), Error);
}

TEST_CASE("trace_power equals the trace of an explicit power") {
  const auto s = sampling::sample_vectors(6, 4, 7);
  for (const auto& name : {"malpha", "md2", "sumvv"}) {
    const Matrix a = realize(shape_by_name(name), s);
    for (int q = 1; q <= 5; ++q) {
      const double expect = matrix_power(a * a.transpose(), q).trace();
      CHECK(trace_power(a, q) == doctest::Approx(expect).epsilon(1e-11));
    }
  }
  Matrix rect(2, 3);
  rect << 1, 2, 3, -1, 0, 2;
  CHECK(trace_power(rect, 2) == doctest::Approx(matrix_power(rect * rect.transpose(), 2).trace()));
  CHECK_THROWS_AS(trace_power(rect, 0), std::invalid_argument);
}

TEST_CASE("Monte Carlo trace moment") {
  const Shape& goe = shape_by_name("goe");
  const auto a = trace_moment_mc(goe, 30, 1, 1, 400, 9, 1);
  const auto b = trace_moment_mc(goe, 30, 1, 1, 400, 9, 4);
  CHECK(a.mean == b.mean);
  CHECK(a.stderr_ == b.stderr_);
  CHECK(a.trials == 400);
  // E tr(G G^T) = n (n - 1) / n for off-diagonal variance 1/n.
  CHECK(std::abs(a.mean - 29.0) < 4.0 * a.stderr_);

  const Shape& beta = shape_by_name("mbeta");
  const auto est = trace_moment_mc(beta, 10, 12, 2, 5, 3, 2);
  double sum = 0.0;
  for (std::size_t t = 0; t < 5; ++t) {
    sum += trace_power(realize_trial(beta, 10, 12, sampling::derive_seed(3, t)), 2);
  }
  CHECK(est.mean == doctest::Approx(sum / 5).epsilon(1e-14));
  CHECK_THROWS_AS(trace_moment_mc(beta, 10, 3000, 2, 1, 1), Error);
}

TEST_CASE("admissibility excludes an F step into a returning vertex") {
  const Shape& beta = shape_by_name("mbeta");
  CHECK(admissible(beta, parse("FF")));
  CHECK(admissible(beta, parse("RR")));
  CHECK(admissible(beta, parse("RF")));
  CHECK_FALSE(admissible(beta, parse("FR")));
  CHECK_FALSE(admissible(beta, parse("FH")));
  CHECK(admissible(beta, parse("FS")));
  CHECK(admissible(beta, parse("SH")));
}

TEST_CASE("GOE block value is the four-term sum") {
  const Shape& goe = shape_by_name("goe");
  auto formula = [](double d, double q, double dv) {
    return 2.0 + std::pow(2 * q * dv, 2) / std::sqrt(d) + (2 * q * dv) * (2 * q) / std::sqrt(d);
  };
  for (double d : {1e4, 1e6, 1e12}) {
    for (std::size_t q : {1UL, 5UL, 40UL}) {
      for (std::size_t dv : {1UL, 2UL, 8UL}) {
        const auto b = block_value(goe, static_cast<std::size_t>(d), 1, q, dv);
        CHECK(b.rows.size() == 4);
        CHECK(b.candidates == 4);
        CHECK(b.total == doctest::Approx(formula(d, q, dv)).epsilon(1e-12));
      }
    }
  }
  CHECK(block_value(goe, 1000000, 1, 40, 2).total == doctest::Approx(40.4));
  CHECK(block_value(goe, 1000000000000, 1, 40, 2).total == doctest::Approx(2.0384));
  const auto b = block_value(goe, 10000, 1, 3, 2);
  CHECK(find(b, "F")->vertex_factor == doctest::Approx(100.0));
  CHECK(find(b, "S")->pur_exponent == 2);
  CHECK(find(b, "H")->pur_exponent == 1);
}

TEST_CASE("GOE block value decreases toward 2") {
  const Shape& goe = shape_by_name("goe");
  double previous = 1e300;
  for (double d = 1e4; d <= 1e16; d *= 100) {
    const double v = block_value(goe, static_cast<std::size_t>(d), 1, 10, 2).total;
    CHECK(v < previous);
    CHECK(v > 2.0);
    previous = v;
  }
  CHECK(previous < 2.001);
}

TEST_CASE("M_beta labelings") {
  const std::size_t d = 1000, m = 50000, q = 3, dv = 8;
  const auto b = block_value(shape_by_name("mbeta"), d, m, q, dv);
  const double dd = d, mm = m;
  CHECK(b.candidates == 16);
  CHECK(find(b, "FR") == nullptr);
  CHECK(find(b, "FF")->product == doctest::Approx(std::sqrt(mm * dd) * 2 / (dd * dd)));
  CHECK(find(b, "RR")->product == doctest::Approx(2 * std::sqrt(mm * dd) * 2 / (dd * dd)));
  const LabelingRow* rf = find(b, "RF");
  CHECK(rf->vertex_factor == doctest::Approx(mm));
  CHECK(rf->square_return_sources == 1);
  double sum = 0;
  for (const auto& r : b.rows) sum += r.product;
  CHECK(b.total == doctest::Approx(sum));
  // Leading behavior 2m/d^2 times the square-return factor as d grows with m = d^2 / 4.
  const std::size_t big = 100000000;
  const auto far = block_value(shape_by_name("mbeta"), big, big / 4 * big, 2, 8);
  const double lead = 4.0 * static_cast<double>(big / 4 * big) / std::pow(double(big), 2);
  CHECK(far.total / lead == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("M_alpha labelings") {
  const std::size_t d = 400, m = 20000, q = 2, dv = 8;
  const auto b = block_value(shape_by_name("malpha"), d, m, q, dv);
  const double dd = d, mm = m;
  CHECK(b.candidates == 256);
  CHECK(find(b, "FFFF")->product == doctest::Approx(dd * std::sqrt(mm) / (dd * dd)));
  CHECK(find(b, "RRRR")->product == doctest::Approx(2 * dd * std::sqrt(mm) / (dd * dd)));
  CHECK(find(b, "RFRF")->product == doctest::Approx(2 * mm / (dd * dd)));
  CHECK(find(b, "FRFF") == nullptr);
}

TEST_CASE("vertex deductions") {
  const Shape& alpha = shape_by_name("malpha");
  const auto ded = deduce_vertices(alpha, parse("FFFF"));
  REQUIRE(ded.size() == 4);
  CHECK_FALSE(ded[0].can_be_first);
  CHECK_FALSE(ded[0].can_be_last);
  CHECK(ded[1].can_be_first);
  CHECK(ded[2].can_be_first);
  CHECK(ded[3].can_be_first);
  CHECK_FALSE(ded[3].can_be_last);
}

TEST_CASE("block value input validation") {
  CHECK_THROWS_AS(block_value(shape_by_name("goe"), 0, 1, 2, 2), std::invalid_argument);
  CHECK_THROWS_AS(block_value(shape_by_name("goe"), 10, 1, 0, 2), std::invalid_argument);
  CHECK_THROWS_AS(block_value(shape_by_name("mbeta"), 10, 0, 2, 2), std::invalid_argument);
}

TEST_CASE("block bound verification at desk scale") {
  const auto rep = verify_block_bound(shape_by_name("mbeta"), 100, 400, 2, 40, 5, 0, 0);
  CHECK(rep.pass());
  CHECK(rep.dv == default_dv());
  CHECK(rep.dimension == 400);
  REQUIRE(rep.checks.size() == 2);
  CHECK(rep.checks[0].measured == doctest::Approx(rep.trace.mean));
  const auto again = verify_block_bound(shape_by_name("mbeta"), 100, 400, 2, 40, 5, 0, 3);
  CHECK(again.trace.mean == rep.trace.mean);
  CHECK(again.max_norm == rep.max_norm);
}
