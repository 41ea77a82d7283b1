#pragma once

#include "ellfit/graphmat.hpp"
#include "ellfit/report.hpp"

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ellfit::harness {

/// One sample -> weights -> Lambda run. A trial whose weights cannot be
/// computed is marked degenerate; its numeric fields are then NaN.
struct TrialRecord {
  std::uint64_t seed = 0;
  std::size_t d = 0;
  std::size_t m = 0;
  bool feasible = false;
  bool degenerate = false;
  std::string reason;  // error code name for degenerate trials
  bool ill_conditioned = false;
  double residual = 0.0;
  double normR = 0.0;
  double lambdaMinLambda = 0.0;
  double r = 0.0;
  double s = 0.0;
  double u = 0.0;
  double normEtaSq = 0.0;
  double wallMillis = 0.0;
};

struct FitOptions {
  double tol = 1e-10;  // eigen-solver tolerance
};

/// Runs one trial with a single m x m factorization: M w = eta is solved
/// directly and r, s, u follow from M^{-1} [1 eta] by the rank-2 update
/// A = M - B.
TrialRecord fit_trial(std::uint64_t seed, std::size_t d, std::size_t m,
                      const FitOptions& options = {});

report::Report fit_report(const TrialRecord& rec, const FitOptions& options, bool timing);

/// m = floor(ratio * d^2); throws std::invalid_argument when below 1.
std::size_t sweep_m(std::size_t d, double ratio);

std::vector<std::size_t> default_sweep_dims();
std::vector<double> default_sweep_ratios();

struct SweepConfig {
  std::vector<std::size_t> dims = default_sweep_dims();
  std::vector<double> ratios = default_sweep_ratios();
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  FitOptions fit;
  const std::atomic<bool>* cancel = nullptr;  // stop scheduling new trials when set
};

struct SweepCell {
  std::size_t d = 0;
  double ratio = 0.0;
  std::size_t m = 0;
  std::size_t requested = 0;
  std::size_t run = 0;  // trials actually executed
  std::size_t degenerate = 0;
  std::size_t completed = 0;  // run - degenerate
  std::size_t feasible = 0;
  double feasibility_rate = 0.0;  // feasible / run; degenerate trials count as infeasible
  double rate_half_width = 0.0;   // 95% Wilson half-width
  double mean_normR = 0.0;        // over completed trials
  double normR_half_width = 0.0;  // 1.96 standard errors
};

struct SweepResult {
  SweepConfig config;
  std::vector<SweepCell> cells;
  std::vector<TrialRecord> trials;  // cell-major
  std::vector<std::string> warnings;
  bool interrupted = false;
};

/// Trial t of every cell uses seed derive_seed(config.seed, t).
SweepResult run_sweep(const SweepConfig& config);

report::Report sweep_report(const SweepResult& result, bool timing);

/// A measured statistic and its pass criterion. `required` is the fraction of
/// trials that must satisfy the bound; rows with required < 0 only observe.
struct LemmaRow {
  std::string name;
  std::string claim;
  std::string slack;
  std::size_t trials = 0;
  double fraction = 0.0;
  double required = -1.0;
  double stat_min = 0.0;
  double stat_max = 0.0;

  std::string status() const;
};

struct LemmaConfig {
  std::size_t d = 500;
  std::size_t m = 0;  // 0 selects d^2 / 100
  std::size_t trials = 50;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  double tol = 1e-10;
  int K = 0;  // Neumann degree for the R split; 0 selects ceil(log2 d) + 4
  bool neumann = true;  // include the Neumann and R-split rows
};

struct LemmaResult {
  LemmaConfig config;
  std::vector<LemmaRow> rows;
  std::size_t failures = 0;  // trials where decomposition failed

  const LemmaRow& row(const std::string& name) const;
};

LemmaResult run_verify_lemmas(const LemmaConfig& config);

report::Report lemma_report(const LemmaResult& result);

struct NormsConfig {
  std::size_t d = 300;
  std::size_t m = 1800;
  std::size_t trials = 30;
  std::size_t goe_n = 500;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  double tol = 1e-10;
  double slack = 1.3;
};

struct NormsResult {
  NormsConfig config;
  std::vector<LemmaRow> rows;

  const LemmaRow& row(const std::string& name) const;
};

NormsResult run_norms(const NormsConfig& config);

report::Report norms_report(const NormsResult& result);

report::Report block_value_report(const graphmat::BlockValueBreakdown& breakdown,
                                  const graphmat::BlockBoundReport* verification);

report::Report trace_mc_report(const graphmat::Shape& shape, std::size_t d, std::size_t m,
                               std::size_t q, std::size_t dv, std::size_t trials,
                               std::uint64_t seed, unsigned threads);

}  // namespace ellfit::harness
