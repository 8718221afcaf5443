// Command-line front end: run experiments, export the TAP instance, estimate
// operator constants, and run the fast self-checks.
//
// Exit codes: 0 success, 1 configuration error, 2 non-convergence within
// budget (or a failed self-check).

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "fwvip/harness.hpp"
#include "fwvip/selftest.hpp"
#include "fwvip/tap.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kNotConverged = 2;

struct Flags {
  std::optional<std::string> output;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

fwvip::harness::ExperimentConfig load(const std::string& path, const Flags& f) {
  auto cfg = fwvip::harness::load_config(path);
  if (f.output) cfg.output_path = *f.output;
  if (f.seed) cfg.seed = *f.seed;
  return cfg;
}

int cmd_run(const std::string& path, const Flags& f) {
  const auto cfg = load(path, f);
  const auto result = fwvip::harness::run_experiment_to_file(cfg);
  if (!f.quiet) {
    std::printf("problem=%s mu=%.6g L=%.6g gamma=%.6g%s\n", result.info.kind.c_str(), result.info.mu,
                result.info.L, result.info.gamma(), result.info.estimated ? " (estimated)" : "");
    for (const auto& s : result.solvers) std::printf("%s\n", fwvip::harness::summary_line(s).c_str());
    std::printf("wrote %s\n", cfg.output_path.c_str());
  }
  return result.all_converged() ? kOk : kNotConverged;
}

int cmd_estimate(const std::string& path, const Flags& f) {
  const auto cfg = load(path, f);
  auto bp = fwvip::harness::build_problem(cfg);
  const auto est = fwvip::estimate_constants(bp.vi.g, bp.vi.set, cfg.estimate_samples, cfg.seed);
  std::printf("mu_hat=%.10g\nL_hat=%.10g\ngamma_hat=%.10g\n", est.mu_hat, est.L_hat, est.gamma_hat);
  if (!f.quiet) {
    std::printf("samples=%ld seed=%llu raw_mu=%.10g raw_L=%.10g%s\n", est.n_samples,
                static_cast<unsigned long long>(est.seed), est.raw_mu, est.raw_L,
                est.non_monotone ? " (non-monotone pair observed)" : "");
  }
  return kOk;
}

int cmd_tap_export(const std::string& path, const Flags& f) {
  const auto inst = fwvip::tap::build_instance();
  fwvip::tap::write_instance(inst, path);
  if (!(fwvip::tap::read_instance(path) == inst)) {
    std::fprintf(stderr, "error: exported instance does not round-trip\n");
    return kConfigError;
  }
  if (!f.quiet) std::printf("wrote %s (%ld links, %ld paths)\n", path.c_str(), inst.num_links(), inst.num_paths());
  return kOk;
}

int cmd_selftest(const Flags& f) {
  bool ok = true;
  for (const auto& c : fwvip::selftest::run_all()) {
    ok = ok && c.passed;
    if (!f.quiet || !c.passed) {
      std::printf("[%s] %s%s%s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.empty() ? "" : ": ",
                  c.detail.c_str());
    }
  }
  return ok ? kOk : kNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projection-free solvers for strongly monotone variational inequalities"};
  app.require_subcommand(1);
  Flags flags;
  std::string output;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--output", output, "Output path (overrides the config)");
    sub->add_option("--seed", seed, "Seed (overrides the config)");
    sub->add_flag("--quiet", flags.quiet, "Suppress the summary");
  };

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run an experiment config and write its CSV");
  run->add_option("config", config_path, "Config file (JSON)")->required();
  add_common(run);

  std::string export_path;
  auto* exp = app.add_subcommand("tap-export", "Write the canonical TAP instance file");
  exp->add_option("path", export_path, "Output file")->required();
  add_common(exp);

  auto* est = app.add_subcommand("estimate", "Estimate mu, L and gamma for a config's problem");
  est->add_option("config", config_path, "Config file (JSON)")->required();
  add_common(est);

  auto* self = app.add_subcommand("selftest", "Run the fast property checks");
  add_common(self);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  for (auto* sub : {run, exp, est, self}) {
    if (sub->count("--output") > 0) flags.output = output;
    if (sub->count("--seed") > 0) flags.seed = seed;
  }

  try {
    if (*run) return cmd_run(config_path, flags);
    if (*exp) return cmd_tap_export(export_path, flags);
    if (*est) return cmd_estimate(config_path, flags);
    return cmd_selftest(flags);
  } catch (const fwvip::harness::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
  } catch (const fwvip::tap::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
  }
  return kConfigError;
}
