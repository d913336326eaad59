#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "chaoslab/config.hpp"
#include "chaoslab/errors.hpp"
#include "chaoslab/runner.hpp"
#include "chaoslab/version.hpp"

namespace {

void emit_error(const char* kind, const std::string& field, const std::string& msg,
                int code) {
  nlohmann::json j;
  j["error"] = kind;
  j["field"] = field;
  j["message"] = msg;
  j["exit_code"] = code;
  std::cerr << j.dump() << std::endl;
}

void apply_threads(int threads) {
  if (threads <= 0) {
    if (const char* env = std::getenv("CHAOSLAB_THREADS")) {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (end && *end == '\0' && v > 0) threads = static_cast<int>(v);
    }
  }
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

struct CommonOpts {
  std::string config_path;
  long long seed = -1;
  std::string out;
  int threads = 0;
};

void add_common(CLI::App* sub, CommonOpts& opts) {
  sub->add_option("-c,--config", opts.config_path, "TOML configuration file")
      ->required();
  sub->add_option("-s,--seed", opts.seed, "override the configured base seed");
  sub->add_option("-o,--out", opts.out, "override the configured output directory");
  sub->add_option("-t,--threads", opts.threads,
                  "worker threads (default: CHAOSLAB_THREADS env, else OpenMP default)");
}

int dispatch(chaoslab::Command cmd, const CommonOpts& opts) {
  apply_threads(opts.threads);
  chaoslab::ExperimentConfig cfg =
      chaoslab::config_from_toml(chaoslab::parse_toml_file(opts.config_path));
  if (opts.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed);
  if (!opts.out.empty()) cfg.output_dir = opts.out;
  switch (cmd) {
    case chaoslab::Command::kSimulate: return chaoslab::run_simulate(cfg);
    case chaoslab::Command::kKernelCheck: return chaoslab::run_kernel_check(cfg);
    case chaoslab::Command::kLiouvilleOracle: return chaoslab::run_liouville_oracle(cfg);
    case chaoslab::Command::kPdeCompare: return chaoslab::run_pde_compare(cfg);
    case chaoslab::Command::kRateSweep: return chaoslab::run_rate_sweep(cfg);
  }
  return chaoslab::kExitValidation;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"chaoslab: interacting-particle / mean-field comparison toolkit"};
  app.set_version_flag("--version", std::string(chaoslab::kVersion));
  app.require_subcommand(1);

  struct SubSpec {
    const char* name;
    const char* help;
    chaoslab::Command cmd;
  };
  const SubSpec specs[] = {
      {"simulate", "run coupled particle/mean-field simulations over N_list",
       chaoslab::Command::kSimulate},
      {"kernel-check", "certify kernel admissibility and factorization",
       chaoslab::Command::kKernelCheck},
      {"liouville-oracle", "N=2 Liouville solve vs entropy bound",
       chaoslab::Command::kLiouvilleOracle},
      {"pde-compare", "regularized vs unregularized mean-field PDE",
       chaoslab::Command::kPdeCompare},
      {"rate-sweep", "simulate plus convergence-rate fits",
       chaoslab::Command::kRateSweep},
  };

  CommonOpts opts[5];
  chaoslab::Command chosen = chaoslab::Command::kSimulate;
  const CommonOpts* chosen_opts = nullptr;
  for (int i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(specs[i].name, specs[i].help);
    add_common(sub, opts[i]);
    sub->callback([&chosen, &chosen_opts, &opts, i, &specs]() {
      chosen = specs[i].cmd;
      chosen_opts = &opts[i];
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("usage", "argv", e.what(), chaoslab::kExitValidation);
    return chaoslab::kExitValidation;
  }
  if (!chosen_opts) {
    emit_error("usage", "argv", "no subcommand selected", chaoslab::kExitValidation);
    return chaoslab::kExitValidation;
  }

  try {
    return dispatch(chosen, *chosen_opts);
  } catch (const chaoslab::ValidationError& e) {
    emit_error("validation", e.field, e.what(), chaoslab::kExitValidation);
    return chaoslab::kExitValidation;
  } catch (const chaoslab::NumericalError& e) {
    emit_error("numerical", e.field, e.what(), chaoslab::kExitNumerical);
    return chaoslab::kExitNumerical;
  } catch (const chaoslab::IoError& e) {
    emit_error("io", e.field, e.what(), chaoslab::kExitIo);
    return chaoslab::kExitIo;
  } catch (const std::exception& e) {
    emit_error("internal", "", e.what(), chaoslab::kExitNumerical);
    return chaoslab::kExitNumerical;
  }
}
