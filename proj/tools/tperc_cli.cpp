// tperc: command-line front end over the C API.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tperc/tperc.h"

namespace {

int exit_code(tperc_status s) {
  switch (s) {
    case TPERC_OK: return 0;
    case TPERC_ERR_CONTRACT:
    case TPERC_ERR_INPUT: return 2;
    case TPERC_NOT_CONVERGED: return 3;
    case TPERC_ERR_NUMERICAL: return 4;
    default: return 1;
  }
}

int report(tperc_status s, const std::string& context) {
  if (s != TPERC_OK) std::fprintf(stderr, "tperc %s: %s\n", context.c_str(), tperc_last_error());
  return exit_code(s);
}

struct GenArgs {
  double lambda = 0.65;
  double sigma = 0.45;
  double duration = 20.0;
  double dt = 0.1;
  std::size_t channels = 15;
  std::uint64_t seed = 1;
  std::string out;
};

int run_gen(const GenArgs& a) {
  if (!(a.dt > 0.0) || !(a.duration > 0.0)) {
    std::fprintf(stderr, "tperc gen: duration and dt must be positive\n");
    return 2;
  }
  const auto samples = static_cast<std::size_t>(a.duration / a.dt + 0.5);
  tperc_batch* b = nullptr;
  tperc_status s = tperc_batch_generate(a.lambda, a.sigma, samples, a.dt, a.channels, a.seed, &b);
  if (s == TPERC_OK) s = tperc_batch_write_csv(b, a.out.c_str());
  tperc_batch_free(b);
  return report(s, "gen");
}

struct FitArgs {
  std::string input;
  std::string config;
  std::string out;
};

int run_fit(const FitArgs& a) {
  tperc_config* cfg = nullptr;
  tperc_batch* b = nullptr;
  tperc_status s = tperc_config_new(&cfg);
  if (s == TPERC_OK && !a.config.empty()) s = tperc_config_load(cfg, a.config.c_str());
  if (s == TPERC_OK) s = tperc_batch_read_csv(a.input.c_str(), &b);
  if (s != TPERC_OK) {
    tperc_batch_free(b);
    tperc_config_free(cfg);
    return report(s, "fit");
  }
  tperc_fit_result r{};
  s = tperc_fit(b, cfg, &r);
  tperc_batch_free(b);
  tperc_config_free(cfg);
  if (s != TPERC_OK && s != TPERC_NOT_CONVERGED && s != TPERC_ERR_NUMERICAL) return report(s, "fit");
  // The best iterate is written even when the fit stops early.
  const std::string fit_error = tperc_last_error();
  const tperc_status w = tperc_fit_write_json(&r, a.out.c_str());
  if (w != TPERC_OK) return report(w, "fit");
  if (s != TPERC_OK) std::fprintf(stderr, "tperc fit: %s (best iterate written)\n", fit_error.c_str());
  return exit_code(s);
}

struct EstimateArgs {
  std::string input;
  std::string hyperparams;
  double lambda = 0.65;
  double sigma = 0.45;
  std::string grid = "0.5:0.5:30";
  std::string out;
};

int run_estimate(const EstimateArgs& a) {
  double lambda = a.lambda;
  double sigma = a.sigma;
  tperc_status s = TPERC_OK;
  if (!a.hyperparams.empty()) s = tperc_hyperparams_read_json(a.hyperparams.c_str(), &lambda, &sigma);
  tperc_batch* b = nullptr;
  tperc_estimate* e = nullptr;
  if (s == TPERC_OK) s = tperc_batch_read_csv(a.input.c_str(), &b);
  if (s == TPERC_OK) {
    s = tperc_estimate_tau(b, lambda, sigma, a.grid.c_str(), &e);
    // Bad grids and hyperparameters are input problems at this level.
    if (s == TPERC_ERR_CONTRACT) s = TPERC_ERR_INPUT;
  }
  if (s == TPERC_OK) s = tperc_estimate_write_json(e, a.out.c_str());
  tperc_estimate_free(e);
  tperc_batch_free(b);
  return report(s, "estimate");
}

struct TrainArgs {
  std::string config;
  std::string out;
  std::vector<std::string> sets;
  std::string representation;
  bool oracle_tau = false;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

int run_train(const TrainArgs& a) {
  tperc_config* cfg = nullptr;
  tperc_status s = tperc_config_new(&cfg);
  if (s == TPERC_OK && !a.config.empty()) s = tperc_config_load(cfg, a.config.c_str());
  for (const auto& kv : a.sets) {
    if (s != TPERC_OK) break;
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "tperc train: --set expects key=value, got '%s'\n", kv.c_str());
      tperc_config_free(cfg);
      return 2;
    }
    s = tperc_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
  }
  if (s == TPERC_OK && a.seed_given) s = tperc_config_set(cfg, "seed", std::to_string(a.seed).c_str());
  if (s == TPERC_OK && !a.representation.empty()) s = tperc_config_set(cfg, "representation", a.representation.c_str());
  if (s == TPERC_OK && a.oracle_tau) s = tperc_config_set(cfg, "oracle_tau", "true");

  int failed_episode = -1;
  if (s == TPERC_OK) {
    s = tperc_train(cfg, a.out.c_str(), &failed_episode);
    if (s == TPERC_ERR_NUMERICAL)
      std::fprintf(stderr, "tperc train: numerical abort at episode %d\n", failed_episode);
  }
  tperc_config_free(cfg);
  return report(s, "train");
}

struct SweepArgs {
  double lambda = 0.65;
  double sigma = 0.45;
  double dt = 0.1;
  std::size_t channels = 15;
  std::string grid = "0.5:0.5:30";
  std::vector<double> taus{5.0, 10.0, 15.0, 20.0};
  std::size_t seeds = 20;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string out;
};

int run_sweep(const SweepArgs& a) {
  tperc_status s = tperc_sweep(a.lambda, a.sigma, a.dt, a.channels, a.grid.c_str(), a.taus.data(), a.taus.size(),
                               a.seeds, a.seed, a.jobs, a.out.c_str());
  if (s == TPERC_ERR_CONTRACT) s = TPERC_ERR_INPUT;
  return report(s, "sweep");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interval timing from sensor statistics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tperc_version()));

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic OU sensor CSV");
  g->add_option("--lambda", gen.lambda, "Inverse length scale")->capture_default_str();
  g->add_option("--sigma", gen.sigma, "Noise standard deviation")->capture_default_str();
  g->add_option("--duration", gen.duration, "Seconds of data")->capture_default_str();
  g->add_option("--dt", gen.dt, "Sample spacing in seconds")->capture_default_str();
  g->add_option("--channels", gen.channels, "Number of channels")->capture_default_str();
  g->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  g->add_option("-o,--out", gen.out, "Output CSV")->required();

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Fit OU hyperparameters to a sensor CSV");
  f->add_option("input", fit.input, "Sensor CSV")->required();
  f->add_option("-c,--config", fit.config, "Config file (fit.* keys)");
  f->add_option("-o,--out", fit.out, "Output JSON")->required();

  EstimateArgs est;
  auto* e = app.add_subcommand("estimate", "Estimate the interval length of a sensor CSV");
  e->add_option("input", est.input, "Sensor CSV")->required();
  auto* hp = e->add_option("--hyperparams", est.hyperparams, "JSON with lambda and sigma");
  e->add_option("--lambda", est.lambda, "Inverse length scale")->capture_default_str()->excludes(hp);
  e->add_option("--sigma", est.sigma, "Noise standard deviation")->capture_default_str()->excludes(hp);
  e->add_option("--grid", est.grid, "Candidates as start:step:stop or a,b,c")->capture_default_str();
  e->add_option("-o,--out", est.out, "Output JSON")->required();

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train the agent on the discrimination task");
  t->add_option("-c,--config", train.config, "Config file");
  t->add_option("-o,--out", train.out, "Output directory")->required();
  t->add_option("--set", train.sets, "Override a config key (key=value), repeatable");
  t->add_option("--seed", train.seed, "Master seed")->each([&](const std::string&) { train.seed_given = true; });
  t->add_option("--representation", train.representation, "Feature representation")
      ->check(CLI::IsMember({"microstimuli", "csc", "tabular", "tabular-history"}));
  t->add_flag("--oracle-tau", train.oracle_tau, "Use the true interval instead of the estimate");

  SweepArgs sw;
  auto* s = app.add_subcommand("sweep", "Interval-estimation accuracy over true durations and seeds");
  s->add_option("--lambda", sw.lambda, "Inverse length scale")->capture_default_str();
  s->add_option("--sigma", sw.sigma, "Noise standard deviation")->capture_default_str();
  s->add_option("--dt", sw.dt, "Sample spacing in seconds")->capture_default_str();
  s->add_option("--channels", sw.channels, "Number of channels")->capture_default_str();
  s->add_option("--grid", sw.grid, "Candidates as start:step:stop or a,b,c")->capture_default_str();
  s->add_option("--taus", sw.taus, "True durations in seconds")->delimiter(',')->capture_default_str();
  s->add_option("--seeds", sw.seeds, "Recordings per duration")->capture_default_str();
  s->add_option("--seed", sw.seed, "Base seed")->capture_default_str();
  s->add_option("-j,--jobs", sw.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  s->add_option("-o,--out", sw.out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForVersion& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return 2;
  }

  if (*g) return run_gen(gen);
  if (*f) return run_fit(fit);
  if (*e) return run_estimate(est);
  if (*t) return run_train(train);
  return run_sweep(sw);
}
