#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include "bqnn/errors.hpp"
#include "bqnn/experiment.hpp"

namespace {

using nlohmann::json;

void print_epoch(const bqnn::EpochRecord& r) {
  std::fprintf(stderr, "epoch %4d  loss %.6f  train %.4f  test %.4f", r.epoch, r.loss,
               r.train_acc, r.test_acc);
  if (r.shot_acc >= 0.0) std::fprintf(stderr, "  shots %.4f", r.shot_acc);
  std::fprintf(stderr, "  clamp %d  %.0f ms\n", r.clamp_events, r.wall_ms);
}

int cmd_run(const std::string& config, std::optional<std::uint64_t> seed,
            const std::string& out_dir, bool quiet) {
  bqnn::ExperimentConfig cfg = bqnn::load_experiment_config(config, seed);
  bqnn::ExperimentSetup setup = bqnn::build_experiment(cfg);
  if (!quiet) setup.training.on_epoch = print_epoch;
  bqnn::Trainer trainer(setup.model, setup.forward, setup.training);
  const bqnn::TrainResult res = bqnn::run_training(setup, trainer, out_dir);

  json summary{{"task", cfg.task},
               {"seed", cfg.seed},
               {"config_hash", cfg.hash},
               {"epochs_run", res.epochs_run},
               {"early_stopped", res.early_stopped},
               {"final_train_acc", res.final_train_acc},
               {"final_test_acc", res.final_test_acc}};
  if (res.final_shot_acc >= 0.0) summary["final_shot_acc"] = res.final_shot_acc;
  if (!out_dir.empty()) summary["out_dir"] = out_dir;
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::optional<std::string>& config,
             std::optional<std::int64_t> shots) {
  const bqnn::EvalReport rep = bqnn::evaluate_checkpoint(checkpoint, config, shots);
  json summary{{"task", rep.task}, {"accuracy", rep.accuracy}, {"samples", rep.samples}};
  if (rep.shot_accuracy >= 0.0) summary["shot_accuracy"] = rep.shot_accuracy;
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_check_grad(const std::string& config, std::optional<std::uint64_t> seed, int samples,
                   double step, double tol) {
  const bqnn::ExperimentConfig cfg = bqnn::load_experiment_config(config, seed);
  const bqnn::GradientReport rep = bqnn::run_gradient_check(cfg, samples, step);
  for (const auto& row : rep.rows) {
    if (row.rel_err > tol || !row.note.empty())
      std::fprintf(stderr, "  %-28s analytic % .9e  fd % .9e  rel %.3e %s\n", row.name.c_str(),
                   row.analytic, row.fd, row.rel_err, row.note.c_str());
  }
  json summary{{"parameters", rep.rows.size()},
               {"worst_rel_err", rep.worst_rel_err},
               {"unstable", rep.unstable},
               {"tol", tol}};
  std::cout << summary.dump() << "\n";
  if (rep.unstable || rep.worst_rel_err > tol) {
    std::cerr << "gradient check failed (tol " << tol << ")\n";
    return 2;
  }
  return 0;
}

int cmd_oracle_compare(int configs, std::uint64_t seed, double tol) {
  const bqnn::OracleComparison cmp = bqnn::run_oracle_compare(configs, seed);
  for (std::size_t i = 0; i < cmp.rows.size(); ++i)
    std::fprintf(stderr, "  config %2zu  modes %d  worst |dP| %.3e\n", i, cmp.rows[i].modes,
                 cmp.rows[i].worst_abs_err);
  json summary{{"configs", cmp.rows.size()}, {"worst_abs_err", cmp.worst_abs_err}, {"tol", tol}};
  std::cout << summary.dump() << "\n";
  if (cmp.worst_abs_err > tol) {
    std::cerr << "oracle comparison failed (tol " << tol << ")\n";
    return 2;
  }
  return 0;
}

int cmd_sweep(int modes, double g_hz, double gs_hz, double kappa_hz, int points) {
  const bqnn::StabilitySweep sw = bqnn::run_stability_sweep(modes, g_hz, gs_hz, kappa_hz, points);
  json summary{{"modes", modes},
               {"g_hz", g_hz},
               {"gs_hz", gs_hz},
               {"kappa_hz", kappa_hz},
               {"grid_points", sw.grid_points},
               {"divergent", sw.divergent},
               {"worst_re_lambda_hz", sw.worst_re_lambda_hz}};
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_dataset_gen(const std::string& config, std::optional<std::uint64_t> seed,
                    const std::string& out) {
  const bqnn::ExperimentConfig cfg = bqnn::load_experiment_config(config, seed);
  bqnn::write_dataset_csv(cfg, out);
  std::cout << json{{"task", cfg.task}, {"out", out}}.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coupled bosonic mode network: training, evaluation and audits"};
  app.require_subcommand(1);

  int threads = 1;
  app.add_option("--threads", threads, "linear algebra thread cap")->capture_default_str();

  std::string config, out_dir, checkpoint, out_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> eval_config;
  std::optional<std::int64_t> shots;
  int samples = 4, configs = 30, sweep_modes = 3, points = 13;
  double step = 1e-5, grad_tol = 1e-4, oracle_tol = 1e-3;
  double g_hz = 4.1e7, gs_hz = 2e7, kappa_hz = 2e6;
  std::uint64_t oracle_seed = 7;
  bool quiet = false;

  CLI::App* run = app.add_subcommand("run", "train a model from a config file");
  run->add_option("--config", config, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--out", out_dir, "directory for metrics.jsonl / timings.jsonl / checkpoint.json");
  run->add_flag("--quiet", quiet, "suppress per-epoch progress on stderr");

  CLI::App* eval = app.add_subcommand("eval", "score a checkpoint on its held-out data");
  eval->add_option("--checkpoint", checkpoint, "checkpoint.json from a run")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--config", eval_config, "config file that must match the checkpoint");
  eval->add_option("--shots", shots, "shot count for sampled accuracy");

  CLI::App* grad = app.add_subcommand("check-grad", "compare analytic and numerical gradients");
  grad->add_option("--config", config, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  grad->add_option("--seed", seed, "override the config seed");
  grad->add_option("--samples", samples, "drawn task inputs")->capture_default_str();
  grad->add_option("--step", step, "central-difference step")->capture_default_str();
  grad->add_option("--tol", grad_tol, "worst relative error allowed")->capture_default_str();

  CLI::App* oracle = app.add_subcommand("oracle-compare",
                                        "check closed forms against master-equation integration");
  oracle->add_option("--configs", configs, "accepted random systems")->capture_default_str();
  oracle->add_option("--seed", oracle_seed, "draw seed")->capture_default_str();
  oracle->add_option("--tol", oracle_tol, "worst |dP| allowed")->capture_default_str();

  CLI::App* sweep = app.add_subcommand("sweep", "squeezing-phase stability grid");
  sweep->add_option("--modes", sweep_modes, "mode count (2 or 3)")->capture_default_str();
  sweep->add_option("--g-hz", g_hz, "conversion rate, Hz")->capture_default_str();
  sweep->add_option("--gs-hz", gs_hz, "squeezing rate, Hz")->capture_default_str();
  sweep->add_option("--kappa-hz", kappa_hz, "loss rate, Hz")->capture_default_str();
  sweep->add_option("--points", points, "phase points per pair")->capture_default_str();

  CLI::App* dataset = app.add_subcommand("dataset-gen", "write the configured dataset as CSV");
  dataset->add_option("--config", config, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  dataset->add_option("--seed", seed, "override the config seed");
  dataset->add_option("--out", out_file, "output CSV path")->required();

  try {
    app.parse(argc, argv);
    Eigen::setNbThreads(threads);
    if (run->parsed()) return cmd_run(config, seed, out_dir, quiet);
    if (eval->parsed()) return cmd_eval(checkpoint, eval_config, shots);
    if (grad->parsed()) return cmd_check_grad(config, seed, samples, step, grad_tol);
    if (oracle->parsed()) return cmd_oracle_compare(configs, oracle_seed, oracle_tol);
    if (sweep->parsed()) return cmd_sweep(sweep_modes, g_hz, gs_hz, kappa_hz, points);
    if (dataset->parsed()) return cmd_dataset_gen(config, seed, out_file);
    return 1;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const bqnn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
