// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. argv[1] is the ellfit command-line binary.

#include "oracles.hpp"

#include "ellfit/construction.hpp"
#include "ellfit/graphmat.hpp"
#include "ellfit/harness.hpp"
#include "ellfit/hermite.hpp"
#include "ellfit/neumann.hpp"
#include "ellfit/sampling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

using namespace ellfit;
using namespace ellfit::oracle;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string sci(double x) { return fmt("%.3g", x); }

// Residual computed from Lambda itself, independent of Candidate::residual.
double max_constraint_error(const Matrix& lambda, const sampling::SampleSet& s) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < s.vectors.rows(); ++i) {
    const Vector v = s.vectors.row(i).transpose();
    worst = std::max(worst, std::abs(v.dot(lambda * v) - 1.0));
  }
  return worst;
}

Outcome construction_exactness() {
  double worst = 0.0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    const auto s = sampling::sample_vectors(sampling::derive_seed(1001, t), 100, 500);
    const auto dec = construction::decompose(s);
    const auto cand = construction::solve_weights(dec, s);
    worst = std::max(worst, max_constraint_error(cand.Lambda, s));
  }
  return {worst < 1e-8, "max residual " + sci(worst) + " over 100 seeds (bound 1e-8)"};
}

Outcome decomposition_identities() {
  const std::size_t dims[] = {10, 50, 200};
  double worst = 0.0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    const std::size_t d = dims[t % 3];
    const std::uint64_t seed = sampling::derive_seed(2002, t);
    const std::size_t span = std::min<std::size_t>(4 * d, d * (d + 1) / 2 - 10);
    const std::size_t m = 2 + sampling::mix64(seed) % span;
    const auto s = sampling::sample_vectors(seed, d, m);
    const auto dec = construction::decompose(s);
    const double dd = static_cast<double>(d);
    const auto mm = static_cast<Eigen::Index>(m);

    const Matrix gram = s.vectors * s.vectors.transpose();
    const Matrix M_ref = gram.cwiseProduct(gram);
    const Vector eta_ref = s.vectors.rowwise().squaredNorm().array() - 1.0;

    Matrix A_split = dec.Malpha + dec.Mbeta;
    A_split.diagonal() += dec.MD;
    A_split.diagonal().array() += 1.0 + 1.0 / dd;
    const Vector md_split = dec.MD1 + dec.MD2 + (2.0 + 2.0 / dd) * dec.MD3;
    const Vector n2 = eta_ref.array() + 1.0;
    const Vector md_ref = n2.array().square() - 2.0 * n2.array() / dd - 1.0;
    Matrix U(mm, 2);
    U.col(0).setOnes();
    U.col(1) = eta_ref;
    Matrix C(2, 2);
    C << 1.0, 1.0, 1.0, 0.0;
    const Matrix B_ref = U * C * U.transpose() / dd;

    worst = std::max({worst, rel_diff(dec.A + dec.B, M_ref), rel_diff(A_split, dec.A),
                      rel_diff(md_split, dec.MD), rel_diff(dec.MD, md_ref),
                      rel_diff(dec.B, B_ref)});
  }
  return {worst < 1e-10, "max relative error " + sci(worst) + " over 100 instances (bound 1e-10)"};
}

Outcome woodbury_equivalence() {
  double worst = 0.0;
  const std::pair<std::size_t, std::size_t> sizes[] = {{50, 300}, {200, 800}};
  for (const auto& [d, m] : sizes) {
    for (std::uint64_t t = 0; t < 50; ++t) {
      const auto s = sampling::sample_vectors(sampling::derive_seed(3003 + d, t), d, m);
      const auto dec = construction::decompose(s);
      const Vector direct = Eigen::PartialPivLU<Matrix>(dec.M).solve(dec.eta);
      const Vector wood = construction::woodbury_inverse_eta(dec);
      worst = std::max(worst, (wood - direct).norm() / direct.norm());
    }
  }
  return {worst < 1e-8, "max relative difference " + sci(worst) + " over 100 instances (bound 1e-8)"};
}

Outcome brute_force_oracles() {
  double worst = 0.0;
  std::size_t decomposed = 0, realized = 0;
  for (std::size_t d = 2; d <= 5; ++d) {
    for (std::size_t m = 1; m <= 4; ++m) {
      const auto s = sampling::sample_vectors(4004 + 10 * d + m, d, m);
      const Brute b = brute(s);
      worst = std::max({worst, (construction::malpha_matrix(s.vectors) - b.Malpha).norm(),
                        (construction::mbeta_matrix(s.vectors) - b.Mbeta).norm()});
      for (const auto& shape : graphmat::catalog()) {
        if (shape.input != graphmat::InputKind::GaussianVectors) continue;
        const Matrix expect = loops(shape.name, s);
        worst = std::max(worst, (graphmat::realize(shape, s) - expect).norm());
        worst = std::max(worst, (graphmat::realize_explicit(shape, s) - expect).norm());
        ++realized;
      }
      try {
        const auto dec = construction::decompose(s);
        worst = std::max({worst, (dec.Malpha - b.Malpha).norm(), (dec.Mbeta - b.Mbeta).norm(),
                          (dec.MD1 - b.MD1).norm(), (dec.MD2 - b.MD2).norm(),
                          (dec.MD3 - b.MD3).norm(), (dec.MD - b.MD).norm()});
        ++decomposed;
      } catch (const Error& e) {
        // A is singular once m exceeds d(d+1)/2 + 1; the pieces are still
        // covered through realize() above.
        if (e.code() != ErrorCode::SingularMatrix) throw;
      }
    }
  }
  const auto& goe_shape = graphmat::shape_by_name("goe");
  for (std::size_t n = 2; n <= 5; ++n) {
    const auto g = sampling::sample_goe(4100 + n, n, 1.0 / static_cast<double>(n));
    worst = std::max(worst, (graphmat::realize(goe_shape, g) - g.entries).norm());
  }

  double t0_worst = 0.0;
  for (std::size_t m : {4UL, 8UL}) {
    const auto s = sampling::sample_vectors(4200 + m, 6, m);
    const auto dec = construction::decompose(s);
    for (const neumann::Caps& caps :
         {neumann::Caps{}, neumann::Caps{{2, 2, 3, 1}}, neumann::Caps{{1, 3, 0, 2}}}) {
      for (int maxdeg : {0, 2, 4}) {
        const Matrix fast = neumann::truncated_T0_exact(dec, caps, maxdeg);
        const Matrix slow = words_T0(dec, caps, maxdeg);
        t0_worst = std::max(t0_worst, (fast - slow).norm() / std::max(1.0, slow.norm()));
      }
    }
  }
  const bool ok = worst < 1e-12 && t0_worst < 1e-12;
  return {ok, "pieces/realize max error " + sci(worst) + " (" + std::to_string(realized) +
                  " realizations, " + std::to_string(decomposed) +
                  " decompositions), T0 max relative error " + sci(t0_worst) + " (bound 1e-12)"};
}

std::int64_t factorial(unsigned t) {
  std::int64_t f = 1;
  for (unsigned i = 2; i <= t; ++i) f *= i;
  return f;
}

Outcome hermite_exactness() {
  bool ok = true;
  std::size_t checks = 0;
  for (unsigned t = 1; t <= 4; ++t) {
    const auto e = hermite::hermite_moment_exact({{t, 2}});
    ok = ok && e.numerator == factorial(t) && e.degree == 2 * t;
    for (std::size_t d : {1UL, 7UL, 100UL}) {
      ok = ok && hermite::hermite_moment({{t, 2}}, d) ==
                     static_cast<double>(factorial(t)) / std::pow(static_cast<double>(d), t);
      ++checks;
    }
  }
  const auto mixed = hermite::hermite_moment_exact({{1, 2}, {2, 1}});
  ok = ok && mixed.numerator == 2 && mixed.degree == 4;
  for (std::size_t d : {1UL, 5UL, 300UL}) {
    ok = ok && hermite::hermite_moment({{1, 2}, {2, 1}}, d) ==
                   2.0 / (static_cast<double>(d) * static_cast<double>(d));
    ++checks;
  }
  std::size_t bound_checks = 0;
  bool bound_ok = true;
  for (unsigned t = 1; t <= 4; ++t) {
    for (unsigned k = 2; k <= 8; k += 2) {
      for (std::size_t d : {1UL, 10UL, 1000UL}) {
        bound_ok = bound_ok &&
                   hermite::hermite_moment({{t, k}}, d) <= hermite::hermite_moment_bound(t, k, d);
        ++bound_checks;
      }
    }
  }
  return {ok && bound_ok, std::to_string(checks) + " exact moment checks, " +
                              std::to_string(bound_checks) + " moment-bound checks" +
                              (ok ? "" : "; exact value mismatch") +
                              (bound_ok ? "" : "; bound violated")};
}

std::string row_summary(const harness::LemmaRow& r) {
  return r.name + " " + fmt("%.2f", r.fraction) + " [" + sci(r.stat_min) + ", " +
         sci(r.stat_max) + "]";
}

Outcome lemma_suite() {
  harness::LemmaConfig cfg;
  cfg.d = 500;
  cfg.m = 2500;
  cfg.trials = 50;
  cfg.seed = 1;
  cfg.neumann = false;
  const auto res = harness::run_verify_lemmas(cfg);
  struct Req {
    const char* name;
    double fraction;
  };
  const Req reqs[] = {{"a_eigenvalues", 1.0}, {"eta_upper", 0.95}, {"r_range", 0.95},
                      {"u_range", 0.95},       {"s_bound", 0.95},   {"woodbury_denominator", 0.95}};
  bool ok = res.failures == 0;
  std::string detail = "failed decompositions " + std::to_string(res.failures);
  for (const auto& q : reqs) {
    const auto& r = res.row(q.name);
    ok = ok && r.fraction >= q.fraction;
    detail += "; " + row_summary(r) + (r.fraction >= q.fraction ? "" : " (short)");
  }
  return {ok, detail};
}

Outcome norm_bounds() {
  harness::NormsConfig cfg;
  cfg.d = 300;
  cfg.m = 1800;
  cfg.trials = 30;
  cfg.goe_n = 500;
  cfg.slack = 1.3;
  const auto res = harness::run_norms(cfg);
  const auto& beta = res.row("mbeta_norm");
  const auto& alpha = res.row("malpha_norm");
  const auto& goe = res.row("goe_norm");
  const bool ok = beta.fraction >= 0.95 && alpha.fraction >= 0.95 && goe.fraction == 1.0;
  return {ok, row_summary(beta) + "; " + row_summary(alpha) + "; " + row_summary(goe)};
}

Outcome block_values() {
  bool ok = true;
  std::string failing;
  std::size_t runs = 0;
  for (const auto& shape : graphmat::catalog()) {
    for (std::size_t q : {2UL, 3UL}) {
      const auto rep = graphmat::verify_block_bound(shape, 200, 800, q, 200, 8008);
      ++runs;
      if (!rep.pass()) {
        ok = false;
        failing += " " + shape.name + "/q" + std::to_string(q);
      }
    }
  }
  return {ok, std::to_string(runs) + " shape/q combinations" +
                  (ok ? ", all within bound" : ", failing:" + failing)};
}

Outcome feasibility() {
  harness::SweepConfig cfg;
  cfg.dims = {150};
  cfg.ratios = {1.0 / 200.0};
  cfg.trials = 100;
  cfg.seed = 9009;
  const auto res = harness::run_sweep(cfg);
  const auto& cell = res.cells.at(0);
  std::size_t small_r = 0;
  for (const auto& t : res.trials) {
    if (!t.degenerate && t.normR < 0.9) ++small_r;
  }
  const double r_frac = static_cast<double>(small_r) / static_cast<double>(res.trials.size());
  const bool ok = cell.feasibility_rate >= 0.9 && r_frac >= 0.95;
  return {ok, "m " + std::to_string(cell.m) + ", PSD rate " + fmt("%.2f", cell.feasibility_rate) +
                  " (need 0.90), |R| < 0.9 in " + fmt("%.2f", r_frac) + " (need 0.95), mean |R| " +
                  fmt("%.3f", cell.mean_normR)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism(const std::string& cli) {
  if (cli.empty()) return {false, "no command-line binary given"};
  const auto dir = std::filesystem::temp_directory_path() /
                   ("ellfit_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const std::vector<std::string> commands = {
      "fit --seed 3 --d 60 --m 100",
      "sweep --dims 20,30 --ratios 1/100,1/10,1/3 --trials 8 --seed 5",
      "verify-lemmas --d 60 --trials 6 --seed 2",
      "norms --d 40 --m 120 --trials 6 --goe-n 60 --seed 4",
      "block-value --shape mbeta --d 30 --m 40 --q 2 --verify --trials 20 --seed 6",
      "trace-mc --shape malpha --d 20 --m 30 --q 2 --trials 20 --seed 8",
  };
  bool ok = true;
  std::string failing;
  std::size_t compared = 0;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    for (const char* format : {"csv", "json"}) {
      std::string reference;
      for (int threads : {1, 2, 4}) {
        const auto out = dir / (std::to_string(c) + "_" + std::to_string(threads) + "." + format);
        const std::string cmd = "\"" + cli + "\" " + commands[c] + " --format " + format +
                                " --threads " + std::to_string(threads) + " --out \"" +
                                out.string() + "\"";
        const int code = std::system(cmd.c_str());
        const std::string body = slurp(out);
        if (code != 0 || body.empty()) {
          ok = false;
          failing += " [" + commands[c] + " exited " + std::to_string(code) + "]";
          continue;
        }
        if (threads == 1) {
          reference = body;
        } else if (body != reference) {
          ok = false;
          failing += " [" + commands[c] + " " + format + " threads " + std::to_string(threads) + "]";
        }
        ++compared;
      }
    }
  }
  std::filesystem::remove_all(dir);
  return {ok, std::to_string(compared) + " reports over " + std::to_string(commands.size()) +
                  " commands, threads 1/2/4" + (ok ? ", byte-identical" : ", differing:" + failing)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"construction exactness", construction_exactness},
      {"decomposition identities", decomposition_identities},
      {"woodbury equivalence", woodbury_equivalence},
      {"brute-force oracles", brute_force_oracles},
      {"hermite exactness", hermite_exactness},
      {"lemma suite", lemma_suite},
      {"norm bounds", norm_bounds},
      {"block-value validity", block_values},
      {"feasibility endpoint", feasibility},
      {"determinism", [&cli] { return determinism(cli); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    std::printf("%s %2zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
