#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bqnn/datasets.hpp"
#include "bqnn/trainer.hpp"

namespace bqnn {

/// Fully resolved experiment description.  All physical quantities are SI
/// (rates in Hz, drive amplitudes in sqrt(Hz), durations in seconds); they
/// are renormalized to internal units only when the model is built.
struct ExperimentConfig {
  struct Group {
    double init = 0.0;
    double jitter = 0.0;  ///< uniform half-width of the per-component draw
    double lr = 0.0;
  };
  struct Enc {
    EncodingTarget target = EncodingTarget::eps;
    EncodingKind kind = EncodingKind::amplitude;
    bool train_theta0 = true;
    std::optional<double> theta0_init;  ///< class units; class init when absent
    double theta0_jitter = 0.0;
  };

  std::string task;  ///< "sinesquare", "spirals", "digits"
  std::uint64_t seed = 1;
  int modes = 2;
  int uploads = 1;
  int outputs = 1;
  double segment_s = 1e-7;

  Group kappa, delta, eps, g, gs;
  std::optional<Enc> encoding;
  MeasurementPlan plan;

  double w_init = 1.0, b_init = 0.0;
  double lr_w = 0.01, lr_b = 0.01;
  LossKind loss = LossKind::mse;

  int epochs = 500, batches = 5;
  double beta = 0.02, n_target = 2.0;
  bool early_stop = false;
  std::int64_t shots = 1000;
  int seq_steps = 40, detach_every = 8, eval_steps = 80;
  int reg_samples = 5;
  int train_size = 0, test_size = 0;
  std::string dataset_path;

  double g_max_hz = 5e8;
  std::optional<double> gs_max_hz;

  std::string canonical_json;  ///< resolved config, canonical key order
  std::string hash;            ///< FNV-1a of canonical_json
};

/// FNV-1a 64-bit, lowercase hex.
std::string fnv1a_hex(const std::string& text);

/// Loads, applies BQNN_* environment overrides (double underscore nests:
/// BQNN_TRAINING__EPOCHS=10), validates (unknown keys are rejected), and
/// resolves.  Throws ConfigError.
ExperimentConfig load_experiment_config(const std::string& path,
                                        std::optional<std::uint64_t> seed_override = {});

/// Same from in-memory JSON text (checkpoint-embedded configs, tests).
ExperimentConfig parse_experiment_config_text(const std::string& json_text,
                                              std::optional<std::uint64_t> seed_override = {});

struct ExperimentSetup {
  ExperimentConfig cfg;
  Model model;
  ForwardOptions forward;
  TrainOptions training;
  Dataset train, test;  ///< empty for the sequential task
};

/// Seeds and draws all initial parameters, builds datasets.
ExperimentSetup build_experiment(const ExperimentConfig& cfg);

/// Trains; when out_dir is nonempty writes metrics.jsonl (deterministic),
/// timings.jsonl (wall clock) and checkpoint.json there.
TrainResult run_training(ExperimentSetup& setup, Trainer& trainer, const std::string& out_dir);

void save_checkpoint(const ExperimentSetup& setup, const Adam& adam, const std::string& path);

struct EvalReport {
  std::string task;
  double accuracy = 0.0;
  double shot_accuracy = -1.0;
  int samples = 0;
};

/// Rebuilds the experiment from the config embedded in the checkpoint,
/// restores the parameters, and scores the held-out data.  When config_path
/// is given its hash must match the embedded one.
EvalReport evaluate_checkpoint(const std::string& checkpoint_path,
                               const std::optional<std::string>& config_path,
                               std::optional<std::int64_t> shots);

/// Central-difference audit of the full batch-loss gradient at the freshly
/// initialized parameters, over `samples` drawn task inputs.
GradientReport run_gradient_check(const ExperimentConfig& cfg, int samples, double h = 1e-5);

/// Gaussian closed forms against the truncated-Fock master equation on
/// random small systems.  Configs whose Gaussian precheck shows more than
/// ~3 photons or near-critical dynamics are redrawn.
struct OracleComparison {
  struct Row {
    int modes = 0;
    double worst_abs_err = 0.0;
  };
  std::vector<Row> rows;
  double worst_abs_err = 0.0;
};

OracleComparison run_oracle_compare(int config_count, std::uint64_t seed);

/// Largest drift eigenvalue real part over a phase grid of the squeezing
/// couplings (all pair magnitudes equal, detunings zero).
struct StabilitySweep {
  int grid_points = 0;
  int divergent = 0;
  double worst_re_lambda_hz = 0.0;
};

StabilitySweep run_stability_sweep(int modes, double g_hz, double gs_hz, double kappa_hz,
                                   int phase_points);

/// Writes the configured task's dataset as CSV (features then label).
void write_dataset_csv(const ExperimentConfig& cfg, const std::string& out_path);

}  // namespace bqnn
