#include "ellfit/harness.hpp"

#include "ellfit/construction.hpp"
#include "ellfit/neumann.hpp"
#include "ellfit/parallel.hpp"
#include "ellfit/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ellfit::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_dims(std::size_t d, std::size_t m) {
  if (d == 0 || m == 0) throw std::invalid_argument("d and m must be positive");
}

TrialRecord degenerate_record(TrialRecord rec, std::string reason) {
  rec.degenerate = true;
  rec.feasible = false;
  rec.reason = std::move(reason);
  rec.residual = rec.normR = rec.lambdaMinLambda = kNaN;
  rec.r = rec.s = rec.u = kNaN;
  return rec;
}

double wilson_half_width(std::size_t successes, std::size_t n) {
  if (n == 0) return 0.0;
  const double z = 1.959963984540054;
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  return z / (1.0 + z * z / nn) * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn));
}

// Counts trials whose statistic satisfies `ok` and tracks its range.
class RowBuilder {
 public:
  RowBuilder(std::string name, std::string claim, std::string slack, double required)
      : row_{std::move(name), std::move(claim), std::move(slack), 0, 0.0, required,
             std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()} {}

  void add(double lo_stat, double hi_stat, bool ok) {
    ++row_.trials;
    if (ok) ++hits_;
    row_.stat_min = std::min(row_.stat_min, lo_stat);
    row_.stat_max = std::max(row_.stat_max, hi_stat);
  }
  void add(double stat, bool ok) { add(stat, stat, ok); }

  LemmaRow finish() const {
    LemmaRow r = row_;
    r.fraction = r.trials ? static_cast<double>(hits_) / static_cast<double>(r.trials) : 0.0;
    if (r.trials == 0) r.stat_min = r.stat_max = kNaN;
    return r;
  }

 private:
  LemmaRow row_;
  std::size_t hits_ = 0;
};

report::Table lemma_table(const std::vector<LemmaRow>& rows) {
  report::Table t{"rows", {"name", "status", "trials", "fraction", "required", "stat_min",
                           "stat_max", "claim", "slack"}, {}};
  for (const auto& r : rows) {
    t.add({r.name, r.status(), static_cast<std::uint64_t>(r.trials), r.fraction,
           r.required < 0 ? kNaN : r.required, r.stat_min, r.stat_max, r.claim, r.slack});
  }
  return t;
}

const LemmaRow& find_row(const std::vector<LemmaRow>& rows, const std::string& name) {
  for (const auto& r : rows) {
    if (r.name == name) return r;
  }
  throw std::invalid_argument("no row named " + name);
}

}  // namespace

TrialRecord fit_trial(std::uint64_t seed, std::size_t d, std::size_t m,
                      const FitOptions& options) {
  require_dims(d, m);
  const auto start = std::chrono::steady_clock::now();
  TrialRecord rec;
  rec.seed = seed;
  rec.d = d;
  rec.m = m;
  auto stamp = [&](TrialRecord& r) {
    r.wallMillis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                             start)
                       .count();
    return r;
  };

  const sampling::SampleSet sample = sampling::sample_vectors(seed, d, m);
  const construction::Gram gram = construction::build_gram(sample);
  rec.normEtaSq = gram.eta.squaredNorm();
  // The M_ij are inner products of the lifted points v_i (x) v_i, which span
  // a space of dimension d(d+1)/2.
  if (m > d * (d + 1) / 2) {
    TrialRecord out = degenerate_record(rec, "rank_deficient");
    return stamp(out);
  }

  const auto mi = static_cast<Eigen::Index>(m);
  Eigen::Matrix<double, Eigen::Dynamic, 2> U(mi, 2);
  U.col(0).setOnes();
  U.col(1) = gram.eta;
  Eigen::Matrix<double, Eigen::Dynamic, 2> X;  // M^{-1} U
  double rcond = 0.0;
  try {
    const construction::SymmetricSolver solver(gram.M);
    rcond = solver.rcond();
    X.resize(mi, 2);
    X.col(0) = solver.solve(U.col(0));
    X.col(1) = solver.solve(U.col(1));
  } catch (const Error& e) {
    TrialRecord out = degenerate_record(rec, to_string(e.code()));
    return stamp(out);
  }
  const Vector w = X.col(1);
  const double eta_norm = gram.eta.norm();
  const double rel = eta_norm > 0.0 ? (gram.M * w - gram.eta).norm() / eta_norm : 0.0;
  if (!std::isfinite(rel) || rel >= 1e-8) {
    TrialRecord out = degenerate_record(rec, to_string(ErrorCode::SingularMatrix));
    return stamp(out);
  }
  rec.ill_conditioned = 1.0 / rcond > construction::kConditionLimit;

  // A = M - U C U^T / d with C = [[1,1],[1,0]], so
  // U^T A^{-1} U = G + G (d C^{-1} - G)^{-1} G with G = U^T M^{-1} U.
  const Eigen::Matrix2d G = U.transpose() * X;
  Eigen::Matrix2d Cinv;
  Cinv << 0.0, 1.0, 1.0, -1.0;
  const double dd = static_cast<double>(d);
  const Eigen::Matrix2d P = G + G * (dd * Cinv - G).inverse() * G;
  rec.r = P(0, 0) / dd;
  rec.s = 1.0 + P(1, 0) / dd;
  rec.u = -1.0 + P(1, 1) / dd;

  const construction::Candidate cand = construction::candidate_from_weights(w, sample);
  rec.residual = cand.residual;
  spectral::SpectralOptions sopts;
  sopts.tol = options.tol;
  sopts.seed = seed;
  const spectral::SpectralReport rs = spectral::spectral_norm(cand.R, sopts);
  rec.normR = std::max(std::abs(rs.lambda_min), std::abs(rs.lambda_max));
  rec.lambdaMinLambda = 1.0 - rs.lambda_max;
  const double lambda_norm = std::max(std::abs(1.0 - rs.lambda_min), std::abs(1.0 - rs.lambda_max));
  rec.feasible = rec.lambdaMinLambda >= -1e-8 * lambda_norm;
  return stamp(rec);
}

report::Report fit_report(const TrialRecord& rec, const FitOptions& options, bool timing) {
  report::Report rep;
  rep.kind = "fit";
  rep.config = {{"seed", rec.seed},
                {"d", static_cast<std::uint64_t>(rec.d)},
                {"m", static_cast<std::uint64_t>(rec.m)},
                {"tol", options.tol}};
  report::Table t{"trials",
                  {"seed", "d", "m", "feasible", "degenerate", "reason", "ill_conditioned",
                   "residual", "normR", "lambdaMinLambda", "r", "s", "u", "normEtaSq"},
                  {}};
  if (timing) t.columns.push_back("wallMillis");
  std::vector<report::Cell> row{rec.seed,
                                static_cast<std::uint64_t>(rec.d),
                                static_cast<std::uint64_t>(rec.m),
                                rec.feasible,
                                rec.degenerate,
                                rec.reason,
                                rec.ill_conditioned,
                                rec.residual,
                                rec.normR,
                                rec.lambdaMinLambda,
                                rec.r,
                                rec.s,
                                rec.u,
                                rec.normEtaSq};
  if (timing) row.emplace_back(rec.wallMillis);
  t.add(std::move(row));
  rep.tables.push_back(std::move(t));
  return rep;
}

std::size_t sweep_m(std::size_t d, double ratio) {
  if (d == 0) throw std::invalid_argument("sweep: d must be positive");
  if (!(ratio > 0.0) || !std::isfinite(ratio)) {
    throw std::invalid_argument("sweep: ratios must be positive");
  }
  const double dd = static_cast<double>(d);
  // The small offset keeps exact products such as 150^2 / 200 from rounding down.
  const double m = std::floor(ratio * dd * dd * (1.0 + 1e-12));
  if (m < 1.0) {
    throw std::invalid_argument("sweep: d * d * ratio must be at least 1 (d=" +
                                std::to_string(d) + ")");
  }
  return static_cast<std::size_t>(m);
}

std::vector<std::size_t> default_sweep_dims() { return {40, 60, 100, 150}; }

std::vector<double> default_sweep_ratios() {
  return {1.0 / 400, 1.0 / 200, 1.0 / 100, 1.0 / 50, 1.0 / 20, 1.0 / 8, 1.0 / 4, 1.0 / 2};
}

SweepResult run_sweep(const SweepConfig& config) {
  SweepResult result;
  result.config = config;
  struct Job {
    std::size_t cell;
    std::size_t trial;
  };
  std::vector<Job> jobs;
  for (std::size_t d : config.dims) {
    for (double ratio : config.ratios) {
      SweepCell cell;
      cell.d = d;
      cell.ratio = ratio;
      cell.m = sweep_m(d, ratio);
      cell.requested = config.trials;
      for (std::size_t t = 0; t < config.trials; ++t) jobs.push_back({result.cells.size(), t});
      result.cells.push_back(cell);
    }
  }

  std::vector<TrialRecord> records(jobs.size());
  std::vector<char> done(jobs.size(), 0);
  parallel_for(jobs.size(), config.threads, [&](std::size_t j) {
    if (config.cancel && config.cancel->load()) return;
    const SweepCell& cell = result.cells[jobs[j].cell];
    records[j] = fit_trial(sampling::derive_seed(config.seed, jobs[j].trial), cell.d, cell.m,
                           config.fit);
    done[j] = 1;
  });

  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (!done[j]) {
      result.interrupted = true;
      continue;
    }
    SweepCell& cell = result.cells[jobs[j].cell];
    const TrialRecord& rec = records[j];
    ++cell.run;
    if (rec.degenerate) {
      ++cell.degenerate;
    } else {
      ++cell.completed;
      cell.mean_normR += rec.normR;
    }
    if (rec.feasible) ++cell.feasible;
    result.trials.push_back(rec);
  }

  for (std::size_t c = 0; c < result.cells.size(); ++c) {
    SweepCell& cell = result.cells[c];
    if (cell.run > 0) {
      cell.feasibility_rate =
          static_cast<double>(cell.feasible) / static_cast<double>(cell.run);
      cell.rate_half_width = wilson_half_width(cell.feasible, cell.run);
    }
    if (cell.completed > 0) {
      const double n = static_cast<double>(cell.completed);
      cell.mean_normR /= n;
      double ss = 0.0;
      for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (jobs[j].cell == c && done[j] && !records[j].degenerate) {
          ss += (records[j].normR - cell.mean_normR) * (records[j].normR - cell.mean_normR);
        }
      }
      cell.normR_half_width = cell.completed > 1 ? 1.96 * std::sqrt(ss / (n - 1.0) / n) : 0.0;
    } else {
      cell.mean_normR = kNaN;
      cell.normR_half_width = kNaN;
    }
  }

  // Feasibility should not rise with m / d^2 at fixed d beyond sampling noise.
  const std::size_t per_d = config.ratios.size();
  for (std::size_t di = 0; di < config.dims.size(); ++di) {
    for (std::size_t a = 0; a < per_d; ++a) {
      for (std::size_t b = 0; b < per_d; ++b) {
        const SweepCell& lo = result.cells[di * per_d + a];
        const SweepCell& hi = result.cells[di * per_d + b];
        if (lo.ratio >= hi.ratio || lo.run == 0 || hi.run == 0) continue;
        const double noise = lo.rate_half_width + hi.rate_half_width;
        if (hi.feasibility_rate - lo.feasibility_rate > noise) {
          result.warnings.push_back(
              "feasibility rises from " + report::format_cell(lo.feasibility_rate) +
              " at ratio " + report::format_cell(lo.ratio) + " to " +
              report::format_cell(hi.feasibility_rate) + " at ratio " +
              report::format_cell(hi.ratio) + " (d=" + std::to_string(lo.d) + ")");
        }
      }
    }
  }
  return result;
}

report::Report sweep_report(const SweepResult& result, bool timing) {
  report::Report rep;
  rep.kind = "sweep";
  const SweepConfig& c = result.config;
  std::string dims, ratios;
  for (auto d : c.dims) dims += (dims.empty() ? "" : ";") + std::to_string(d);
  for (auto r : c.ratios) ratios += (ratios.empty() ? "" : ";") + report::format_cell(r);
  rep.config = {{"seed", c.seed},
                {"trials", static_cast<std::uint64_t>(c.trials)},
                {"dims", dims},
                {"ratios", ratios},
                {"tol", c.fit.tol},
                {"trial_seed", std::string("derive_seed(seed, trial_index)")}};
  report::Table cells{"cells",
                      {"d", "ratio", "m", "requested", "run", "completed", "degenerate",
                       "feasible", "feasibility_rate", "rate_half_width", "mean_normR",
                       "normR_half_width"},
                      {}};
  for (const auto& cell : result.cells) {
    cells.add({static_cast<std::uint64_t>(cell.d), cell.ratio, static_cast<std::uint64_t>(cell.m),
               static_cast<std::uint64_t>(cell.requested), static_cast<std::uint64_t>(cell.run),
               static_cast<std::uint64_t>(cell.completed),
               static_cast<std::uint64_t>(cell.degenerate),
               static_cast<std::uint64_t>(cell.feasible), cell.feasibility_rate,
               cell.rate_half_width, cell.mean_normR, cell.normR_half_width});
  }
  rep.tables.push_back(std::move(cells));
  report::Table trials = fit_report(TrialRecord{}, c.fit, timing).tables.front();
  trials.rows.clear();
  for (const auto& rec : result.trials) {
    trials.add(fit_report(rec, c.fit, timing).tables.front().rows.front());
  }
  rep.tables.push_back(std::move(trials));
  rep.warnings = result.warnings;
  rep.interrupted = result.interrupted;
  return rep;
}

std::string LemmaRow::status() const {
  if (required < 0.0) return "observe";
  return trials > 0 && fraction >= required ? "pass" : "fail";
}

const LemmaRow& LemmaResult::row(const std::string& name) const { return find_row(rows, name); }
const LemmaRow& NormsResult::row(const std::string& name) const { return find_row(rows, name); }

namespace {

struct LemmaTrial {
  bool ok = false;
  double a_min = 0, a_max = 0;
  double eta_ratio = 0;
  double r_ratio = 0, s = 0, u = 0, denom_ratio = 0;
  double woodbury_rel = 0;
  double md_ratio = 0;
  double t_norm = 0;
  bool converges = false;
  double truncation = 0;
  double er_rel = 0;
  double r_norm = 0;
  double lambda_min = 0;
};

LemmaTrial lemma_trial(const LemmaConfig& cfg, std::size_t m, std::uint64_t seed) {
  LemmaTrial t;
  const sampling::SampleSet sample = sampling::sample_vectors(seed, cfg.d, m);
  spectral::SpectralOptions sopts;
  sopts.tol = cfg.tol;
  sopts.seed = seed;
  const double dd = static_cast<double>(cfg.d);
  const double md = static_cast<double>(m) / dd;
  try {
    const construction::Decomposition dec = construction::decompose(sample);
    const spectral::SpectralReport ar = spectral::spectral_norm(dec.A, sopts);
    t.a_min = ar.lambda_min;
    t.a_max = ar.lambda_max;
    t.eta_ratio = dec.eta.squaredNorm() / (2.0 * md);
    t.r_ratio = dec.r / md;
    t.s = dec.s;
    t.u = dec.u;
    t.denom_ratio = dec.woodbury_denominator() / md;
    t.md_ratio = dec.MD.cwiseAbs().maxCoeff() / std::sqrt(std::log2(dd) / dd);

    const construction::Candidate cand = construction::solve_weights(dec, sample);
    const Vector w_wood = construction::woodbury_inverse_eta(dec);
    t.woodbury_rel = (w_wood - cand.w).norm() / std::max(cand.w.norm(), 1e-300);
    const spectral::SpectralReport rr = spectral::spectral_norm(cand.R, sopts);
    t.r_norm = std::max(std::abs(rr.lambda_min), std::abs(rr.lambda_max));
    t.lambda_min = 1.0 - rr.lambda_max;

    if (cfg.neumann) {
      spectral::SpectralOptions loose = sopts;
      loose.tol = std::max(cfg.tol, 1e-6);
      const LinearOperator op = [&dec](const Vector& x) { return neumann::apply_T(dec, x); };
      t.t_norm = spectral::spectral_norm(op, dec.m, loose).norm_estimate;
      t.converges = t.t_norm < 1.0;
    }
    if (cfg.neumann && t.converges) {
      const int K = cfg.K > 0 ? cfg.K : neumann::default_degree(cfg.d);
      spectral::SpectralOptions loose = sopts;
      loose.tol = std::max(cfg.tol, 1e-6);
      const neumann::NeumannSeries series(dec, loose);
      t.truncation = neumann::truncation_error(dec, K, loose);
      const LinearOperator trunc = [&](const Vector& x) { return series.apply(x, K); };
      const construction::RSplit split = construction::assemble_R_split(dec, sample, trunc);
      const double rn = spectral::spectral_norm(split.R, loose).norm_estimate;
      t.er_rel = spectral::spectral_norm(split.ER, loose).norm_estimate / std::max(rn, 1e-300);
    }
    t.ok = true;
  } catch (const Error&) {
    t.ok = false;
  }
  return t;
}

}  // namespace

LemmaResult run_verify_lemmas(const LemmaConfig& config) {
  require_dims(config.d, 1);
  if (config.trials == 0) throw std::invalid_argument("verify-lemmas: trials must be positive");
  LemmaResult result;
  result.config = config;
  const std::size_t m =
      config.m > 0 ? config.m : std::max<std::size_t>(1, config.d * config.d / 100);
  result.config.m = m;
  std::vector<LemmaTrial> trials(config.trials);
  parallel_for(config.trials, config.threads, [&](std::size_t t) {
    trials[t] = lemma_trial(config, m, sampling::derive_seed(config.seed, t));
  });

  RowBuilder invertible("m_invertible", "M is invertible and M^{-1} eta via the rank-2 update "
                        "matches the direct solve", "relative difference <= 1e-8", 1.0);
  RowBuilder a_spec("a_eigenvalues", "0.5 I <= A <= 1.5 I", "none", 1.0);
  RowBuilder eta_band("eta_band", "|eta|^2 = (1 + o(1)) 2m/d; stat is |eta|^2 / (2m/d)",
                      "within [0.8, 1.2]", 0.95);
  RowBuilder eta_upper("eta_upper", "|eta|^2 <= (1 + o(1)) 2m/d; stat is |eta|^2 / (2m/d)",
                       "<= 1.2", 0.95);
  RowBuilder r_range("r_range", "r = Theta(m/d); stat is r / (m/d)", "within [2/3, 2]", 0.95);
  RowBuilder u_range("u_range", "u in [-1, -1/2]", "none", 0.95);
  RowBuilder s_bound("s_bound", "|s| <= 1 + o(1)", "|s| <= 1.2", 0.95);
  RowBuilder denom("woodbury_denominator", "s^2 - ru = Omega(m/d); stat is (s^2 - ru) / (m/d)",
                   ">= 0.1", 0.95);
  RowBuilder md("md_norm", "|M_D| = O(sqrt(log d / d)); stat is |M_D| / sqrt(log2 d / d)",
                "constant 5", 0.95);
  RowBuilder r_norm("r_norm", "|R| <= 1/2 asymptotically", "observed only", -1.0);
  RowBuilder psd("lambda_psd", "Lambda = I - R is PSD; stat is lambda_min(Lambda)",
                 "observed only", -1.0);
  RowBuilder t_norm("t_norm", "|T| < 1 so the Neumann series for A^{-1} converges",
                    "strict", 1.0);
  RowBuilder trunc("neumann_truncation", "|A^{-1} - sum_{k<=K} T^k| shrinks geometrically in K",
                   "observed only", -1.0);
  RowBuilder er("r_split_error", "R = R1 + R2 + E_R with E_R small; stat is |E_R| / |R|",
                "observed only", -1.0);

  for (const auto& t : trials) {
    if (!t.ok) {
      ++result.failures;
      invertible.add(kNaN, false);
      continue;
    }
    invertible.add(t.woodbury_rel, t.woodbury_rel <= 1e-8);
    a_spec.add(t.a_min, t.a_max, t.a_min >= 0.5 && t.a_max <= 1.5);
    eta_band.add(t.eta_ratio, t.eta_ratio >= 0.8 && t.eta_ratio <= 1.2);
    eta_upper.add(t.eta_ratio, t.eta_ratio <= 1.2);
    r_range.add(t.r_ratio, t.r_ratio >= 2.0 / 3.0 && t.r_ratio <= 2.0);
    u_range.add(t.u, t.u >= -1.0 && t.u <= -0.5);
    s_bound.add(t.s, std::abs(t.s) <= 1.2);
    denom.add(t.denom_ratio, t.denom_ratio >= 0.1);
    md.add(t.md_ratio, t.md_ratio <= 5.0);
    r_norm.add(t.r_norm, t.r_norm <= 0.5);
    psd.add(t.lambda_min, t.lambda_min >= 0.0);
    if (config.neumann) {
      t_norm.add(t.t_norm, t.converges);
      if (t.converges) {
        trunc.add(t.truncation, true);
        er.add(t.er_rel, true);
      }
    }
  }
  for (const RowBuilder* b : {&invertible, &a_spec, &eta_band, &eta_upper, &r_range, &u_range,
                              &s_bound, &denom, &md, &r_norm, &psd}) {
    result.rows.push_back(b->finish());
  }
  if (config.neumann) {
    for (const RowBuilder* b : {&t_norm, &trunc, &er}) result.rows.push_back(b->finish());
  }
  return result;
}

report::Report lemma_report(const LemmaResult& result) {
  report::Report rep;
  rep.kind = "verify-lemmas";
  const LemmaConfig& c = result.config;
  rep.config = {{"seed", c.seed},
                {"d", static_cast<std::uint64_t>(c.d)},
                {"m", static_cast<std::uint64_t>(c.m)},
                {"trials", static_cast<std::uint64_t>(c.trials)},
                {"tol", c.tol},
                {"K", static_cast<std::int64_t>(c.K > 0 ? c.K : neumann::default_degree(c.d))},
                {"failed_trials", static_cast<std::uint64_t>(result.failures)}};
  rep.tables.push_back(lemma_table(result.rows));
  return rep;
}

NormsResult run_norms(const NormsConfig& config) {
  require_dims(config.d, config.m);
  if (config.trials == 0) throw std::invalid_argument("norms: trials must be positive");
  if (config.goe_n == 0) throw std::invalid_argument("norms: GOE dimension must be positive");
  NormsResult result;
  result.config = config;
  const double dd = static_cast<double>(config.d);
  const double mm = static_cast<double>(config.m);
  const double beta_ref = 2.0 * mm / (dd * dd);
  const double alpha_ref = (3.0 * dd * std::sqrt(mm) + 2.0 * mm) / (dd * dd);

  struct Norms {
    double beta = 0, alpha = 0, md = 0, goe = 0;
  };
  std::vector<Norms> norms(config.trials);
  parallel_for(config.trials, config.threads, [&](std::size_t t) {
    const std::uint64_t seed = sampling::derive_seed(config.seed, t);
    spectral::SpectralOptions sopts;
    sopts.tol = config.tol;
    sopts.seed = seed;
    const sampling::SampleSet sample = sampling::sample_vectors(seed, config.d, config.m);
    norms[t].beta =
        spectral::spectral_norm(construction::mbeta_matrix(sample.vectors), sopts).norm_estimate;
    norms[t].alpha =
        spectral::spectral_norm(construction::malpha_matrix(sample.vectors), sopts).norm_estimate;
    norms[t].md = graphmat::realize(graphmat::shape_by_name("md1"), sample).diagonal().cwiseAbs().maxCoeff();
    const sampling::GoeMatrix goe =
        sampling::sample_goe(seed, config.goe_n, 1.0 / static_cast<double>(config.goe_n));
    norms[t].goe = spectral::spectral_norm(goe.entries, sopts).norm_estimate;
  });

  const std::string slack = "<= " + report::format_cell(config.slack) + " x reference";
  RowBuilder beta("mbeta_norm", "|M_beta| <= (1 + o(1)) 2m/d^2; stat is |M_beta| / (2m/d^2)",
                  slack, 0.95);
  RowBuilder alpha("malpha_norm",
                   "|M_alpha| <= (1 + o(1)) (3d sqrt(m) + 2m)/d^2; stat is the ratio",
                   slack, 0.95);
  RowBuilder md1("md1_norm", "|M_D1| (diagonal); stat is |M_D1| / sqrt(log d / d)",
                 "observed only", -1.0);
  RowBuilder goe("goe_norm", "|G| = 2 + o(1)", "within [1.8, 2.2]", 0.95);
  const double md_scale = std::sqrt(std::log2(dd) / dd);
  for (const auto& n : norms) {
    beta.add(n.beta / beta_ref, n.beta <= config.slack * beta_ref);
    alpha.add(n.alpha / alpha_ref, n.alpha <= config.slack * alpha_ref);
    md1.add(n.md / md_scale, true);
    goe.add(n.goe, n.goe >= 1.8 && n.goe <= 2.2);
  }
  result.rows = {beta.finish(), alpha.finish(), md1.finish(), goe.finish()};
  return result;
}

report::Report norms_report(const NormsResult& result) {
  report::Report rep;
  rep.kind = "norms";
  const NormsConfig& c = result.config;
  rep.config = {{"seed", c.seed},
                {"d", static_cast<std::uint64_t>(c.d)},
                {"m", static_cast<std::uint64_t>(c.m)},
                {"trials", static_cast<std::uint64_t>(c.trials)},
                {"goe_n", static_cast<std::uint64_t>(c.goe_n)},
                {"tol", c.tol},
                {"slack", c.slack}};
  rep.tables.push_back(lemma_table(result.rows));
  return rep;
}

report::Report block_value_report(const graphmat::BlockValueBreakdown& b,
                                  const graphmat::BlockBoundReport* verification) {
  report::Report rep;
  rep.kind = "block-value";
  rep.config = {{"shape", b.shape},
                {"d", static_cast<std::uint64_t>(b.d)},
                {"m", static_cast<std::uint64_t>(b.m)},
                {"q", static_cast<std::uint64_t>(b.q)},
                {"dv", static_cast<std::uint64_t>(b.dv)},
                {"candidates", static_cast<std::uint64_t>(b.candidates)},
                {"total", b.total}};
  report::Table rows{"labelings",
                     {"labels", "first_vertices", "last_vertices", "vertex_factor",
                      "pur_exponent", "square_returns", "pur_factor", "edge_factor", "product"},
                     {}};
  for (const auto& r : b.rows) {
    std::string first, last;
    for (const auto& v : r.vertices) {
      if (v.can_be_first) first += (first.empty() ? "" : " ") + std::to_string(v.vertex);
      if (v.can_be_last) last += (last.empty() ? "" : " ") + std::to_string(v.vertex);
    }
    rows.add({r.label_string(), first, last, r.vertex_factor,
              static_cast<std::int64_t>(r.pur_exponent),
              static_cast<std::int64_t>(r.square_return_sources), r.pur_factor, r.edge_factor,
              r.product});
  }
  rows.add({std::string("total"), std::string(), std::string(), kNaN, std::int64_t{0},
            std::int64_t{0}, kNaN, kNaN, b.total});
  rep.tables.push_back(std::move(rows));
  if (verification) {
    const auto& v = *verification;
    rep.config.emplace_back("trials", static_cast<std::uint64_t>(v.trials));
    rep.config.emplace_back("seed", v.seed);
    rep.config.emplace_back("dimension", static_cast<std::uint64_t>(v.dimension));
    rep.config.emplace_back("trace_mean", v.trace.mean);
    rep.config.emplace_back("trace_stderr", v.trace.stderr_);
    report::Table checks{"checks", {"name", "status", "measured", "bound", "detail"}, {}};
    for (const auto& c : v.checks) {
      checks.add({c.name, std::string(c.pass ? "PASS" : "FAIL"), c.measured, c.bound, c.detail});
    }
    rep.tables.push_back(std::move(checks));
  }
  return rep;
}

report::Report trace_mc_report(const graphmat::Shape& shape, std::size_t d, std::size_t m,
                               std::size_t q, std::size_t dv, std::size_t trials,
                               std::uint64_t seed, unsigned threads) {
  const std::size_t dv_used = dv == 0 ? graphmat::default_dv() : dv;
  const auto est =
      graphmat::trace_moment_mc(shape, d, m, static_cast<int>(q), trials, seed, threads);
  const double B = graphmat::block_value(shape, d, m, q, dv_used).total;
  const double dim = static_cast<double>(graphmat::matrix_dimension(shape, d, m));
  report::Report rep;
  rep.kind = "trace-mc";
  rep.config = {{"shape", shape.name},
                {"d", static_cast<std::uint64_t>(d)},
                {"m", static_cast<std::uint64_t>(m)},
                {"q", static_cast<std::uint64_t>(q)},
                {"dv", static_cast<std::uint64_t>(dv_used)},
                {"trials", static_cast<std::uint64_t>(trials)},
                {"seed", seed}};
  report::Table t{"estimate",
                  {"mean", "stderr", "trials", "dimension", "block_value", "dim_times_B_2q",
                   "norm_estimate"},
                  {}};
  const double qq = static_cast<double>(q);
  t.add({est.mean, est.stderr_, static_cast<std::uint64_t>(est.trials),
         static_cast<std::uint64_t>(dim), B, dim * std::pow(B, 2.0 * qq),
         std::pow(est.mean / dim, 1.0 / (2.0 * qq))});
  rep.tables.push_back(std::move(t));
  return rep;
}

}  // namespace ellfit::harness
