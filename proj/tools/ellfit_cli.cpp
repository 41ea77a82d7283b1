#include "ellfit/graphmat.hpp"
#include "ellfit/harness.hpp"
#include "ellfit/report.hpp"

#include "CLI11.hpp"

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

using namespace ellfit;

std::atomic<bool> g_interrupt{false};

extern "C" void on_interrupt(int) { g_interrupt.store(true); }

struct Common {
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
  unsigned threads = 0;
  double tol = 1e-10;
  bool timing = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Base RNG seed");
  sub->add_option("--out", c.out, "Output file (default: stdout)");
  sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--threads", c.threads, "Worker threads (0 = auto)");
  sub->add_option("--tol", c.tol, "Eigen-solver tolerance")->check(CLI::PositiveNumber);
}

void emit(const report::Report& rep, const Common& c) {
  const report::Format format = report::parse_format(c.format);
  if (c.out.empty()) {
    report::write(std::cout, rep, format);
    std::cout.flush();
    return;
  }
  std::ofstream file(c.out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + c.out + " for writing");
  report::write(file, rep, format);
}

double parse_ratio(const std::string& text) {
  const auto slash = text.find('/');
  std::size_t used = 0;
  try {
    if (slash == std::string::npos) {
      const double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument("");
      return v;
    }
    const std::string num = text.substr(0, slash), den = text.substr(slash + 1);
    const double a = std::stod(num, &used);
    if (used != num.size()) throw std::invalid_argument("");
    const double b = std::stod(den, &used);
    if (used != den.size() || b == 0.0) throw std::invalid_argument("");
    return a / b;
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse ratio '" + text + "'");
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::size_t parse_size(const std::string& text) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    if (!text.empty() && text.front() == '-') throw std::invalid_argument("");
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) {
    throw std::invalid_argument("cannot parse dimension '" + text + "'");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Identity-perturbation ellipsoid fitting and graph-matrix norm bounds"};
  app.require_subcommand(1);

  Common common;

  std::size_t fit_d = 100, fit_m = 300;
  auto* fit = app.add_subcommand("fit", "Run one construction trial");
  add_common(fit, common);
  fit->add_option("--d", fit_d, "Dimension")->required();
  fit->add_option("--m", fit_m, "Number of points")->required();
  fit->add_flag("--timing", common.timing, "Include wall-clock milliseconds");

  std::string sweep_dims, sweep_ratios;
  std::size_t sweep_trials = 20;
  auto* sweep = app.add_subcommand("sweep", "Feasibility rate over a (d, m/d^2) grid");
  add_common(sweep, common);
  sweep->add_option("--dims", sweep_dims, "Comma-separated d values (default 40,60,100,150)");
  sweep->add_option("--ratios", sweep_ratios,
                    "Comma-separated m/d^2 values, fractions allowed (default 1/400..1/2)");
  sweep->add_option("--trials", sweep_trials, "Trials per cell");
  sweep->add_flag("--timing", common.timing, "Include wall-clock milliseconds");

  harness::LemmaConfig lemma;
  auto* verify = app.add_subcommand("verify-lemmas", "Statistical checks of the analysis");
  add_common(verify, common);
  verify->add_option("--d", lemma.d, "Dimension");
  verify->add_option("--m", lemma.m, "Number of points (0 = d^2/100)");
  verify->add_option("--trials", lemma.trials, "Trials");
  verify->add_option("--K", lemma.K, "Neumann degree (0 = ceil(log2 d) + 4)");

  std::string bv_shape;
  std::size_t bv_d = 0, bv_m = 0, bv_q = 2, bv_dv = 0, bv_trials = 200;
  bool bv_verify = false;
  auto* bv = app.add_subcommand("block-value", "Per-labeling block-value table");
  add_common(bv, common);
  bv->add_option("--shape", bv_shape, "Catalog shape")->required();
  bv->add_option("--d", bv_d, "Dimension")->required();
  bv->add_option("--m", bv_m, "Number of points (default d)");
  bv->add_option("--q", bv_q, "Trace power")->check(CLI::PositiveNumber);
  bv->add_option("--dv", bv_dv, "Vertex bound D_V (0 = 2 x largest catalog shape)");
  bv->add_flag("--verify", bv_verify, "Check the bound against Monte Carlo");
  bv->add_option("--trials", bv_trials, "Monte Carlo trials for --verify");

  std::string mc_shape;
  std::size_t mc_d = 0, mc_m = 0, mc_q = 2, mc_dv = 0, mc_trials = 100;
  auto* mc = app.add_subcommand("trace-mc", "Monte Carlo estimate of E tr((M M^T)^q)");
  add_common(mc, common);
  mc->add_option("--shape", mc_shape, "Catalog shape")->required();
  mc->add_option("--d", mc_d, "Dimension")->required();
  mc->add_option("--m", mc_m, "Number of points (default d)");
  mc->add_option("--q", mc_q, "Trace power")->check(CLI::PositiveNumber);
  mc->add_option("--dv", mc_dv, "Vertex bound D_V for the reference block value");
  mc->add_option("--trials", mc_trials, "Trials");

  harness::NormsConfig norms;
  auto* nm = app.add_subcommand("norms", "Empirical norms against the predicted bounds");
  add_common(nm, common);
  nm->add_option("--d", norms.d, "Dimension");
  nm->add_option("--m", norms.m, "Number of points");
  nm->add_option("--trials", norms.trials, "Trials");
  nm->add_option("--goe-n", norms.goe_n, "GOE dimension");
  nm->add_option("--slack", norms.slack, "Multiplier on the predicted bounds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*fit) {
      harness::FitOptions opts;
      opts.tol = common.tol;
      const auto rec = harness::fit_trial(common.seed, fit_d, fit_m, opts);
      emit(harness::fit_report(rec, opts, common.timing), common);
    } else if (*sweep) {
      harness::SweepConfig cfg;
      if (sweep->count("--dims")) {
        cfg.dims.clear();
        for (const auto& s : split_list(sweep_dims)) cfg.dims.push_back(parse_size(s));
      }
      if (sweep->count("--ratios")) {
        cfg.ratios.clear();
        for (const auto& s : split_list(sweep_ratios)) cfg.ratios.push_back(parse_ratio(s));
      }
      for (auto d : cfg.dims) {
        for (auto r : cfg.ratios) (void)harness::sweep_m(d, r);
      }
      cfg.trials = sweep_trials;
      cfg.seed = common.seed;
      cfg.threads = common.threads;
      cfg.fit.tol = common.tol;
      cfg.cancel = &g_interrupt;
      std::signal(SIGINT, on_interrupt);
      std::signal(SIGTERM, on_interrupt);
      const auto result = harness::run_sweep(cfg);
      emit(harness::sweep_report(result, common.timing), common);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
      if (result.interrupted) std::cerr << "interrupted: partial results written\n";
    } else if (*verify) {
      lemma.seed = common.seed;
      lemma.threads = common.threads;
      lemma.tol = common.tol;
      emit(harness::lemma_report(harness::run_verify_lemmas(lemma)), common);
    } else if (*bv) {
      const auto& shape = graphmat::shape_by_name(bv_shape);
      if (bv_d == 0) throw std::invalid_argument("--d must be positive");
      const std::size_t m = bv_m == 0 ? bv_d : bv_m;
      const std::size_t dv = bv_dv == 0 ? graphmat::default_dv() : bv_dv;
      const auto breakdown = graphmat::block_value(shape, bv_d, m, bv_q, dv);
      if (bv_verify) {
        const auto check = graphmat::verify_block_bound(shape, bv_d, m, bv_q, bv_trials,
                                                        common.seed, dv, common.threads);
        emit(harness::block_value_report(breakdown, &check), common);
      } else {
        emit(harness::block_value_report(breakdown, nullptr), common);
      }
    } else if (*mc) {
      const auto& shape = graphmat::shape_by_name(mc_shape);
      if (mc_d == 0) throw std::invalid_argument("--d must be positive");
      emit(harness::trace_mc_report(shape, mc_d, mc_m == 0 ? mc_d : mc_m, mc_q, mc_dv,
                                    mc_trials, common.seed, common.threads),
           common);
    } else if (*nm) {
      norms.seed = common.seed;
      norms.threads = common.threads;
      norms.tol = common.tol;
      emit(harness::norms_report(harness::run_norms(norms)), common);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    const bool user_error = e.code() == ErrorCode::UnknownShape ||
                            e.code() == ErrorCode::DimensionTooSmall ||
                            e.code() == ErrorCode::SizeLimit;
    return user_error ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
