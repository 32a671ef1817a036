#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "bqnn/datasets.hpp"
#include "bqnn/forward.hpp"
#include "bqnn/model.hpp"
#include "bqnn/optimizer.hpp"

namespace bqnn {

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;       ///< task + regularizer
  double task_loss = 0.0;
  double reg_loss = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  double shot_acc = -1.0;  ///< sequential tasks only, -1 elsewhere
  int clamp_events = 0;
  double grad_norm = 0.0;  ///< mean over the epoch's optimizer steps
  double wall_ms = 0.0;    ///< reported separately from the deterministic metrics
};

struct TrainOptions {
  int epochs = 500;
  int batches = 5;  ///< optimizer steps per epoch
  double beta = 0.02;
  double n_target = 2.0;
  ClampConfig clamp;
  AdamOptions adam;
  std::uint64_t seed = 1;

  // sequential stream shape
  int seq_steps = 40;     ///< segment count per chunk (one optimizer step each)
  int detach_every = 8;   ///< tangent truncation horizon
  int eval_steps = 80;    ///< held-out stream length

  bool early_stop = false;  ///< stop once exact and sampled accuracy both hit 1
  std::int64_t shots = 1000;

  std::function<void(const EpochRecord&)> on_epoch;  ///< progress hook, may be empty
};

struct TrainResult {
  std::vector<EpochRecord> history;
  int epochs_run = 0;
  bool early_stopped = false;
  double final_train_acc = 0.0;
  double final_test_acc = 0.0;
  double final_shot_acc = -1.0;
};

/// The held-out waveform stream of a run: drawn from the run seed, redrawn
/// until both classes appear.  Shared by training and checkpoint evaluation.
std::vector<WaveStep> make_eval_stream(const TrainOptions& options);

class Trainer {
 public:
  Trainer(Model& model, ForwardOptions forward, TrainOptions options);

  /// Minibatch training on a fixed dataset (spirals, digit scans).
  TrainResult train_supervised(const Dataset& train, const Dataset& test);

  /// Online training on the alternating waveform stream; a fixed held-out
  /// stream (drawn once, containing both classes) scores each epoch.
  TrainResult train_sequential();

  double accuracy(const Dataset& data) const;
  /// Deterministic accuracy on a waveform stream.
  double sequential_accuracy(const std::vector<WaveStep>& stream) const;
  /// Accuracy with features replaced by shot estimates.
  double sequential_shot_accuracy(const std::vector<WaveStep>& stream, std::int64_t shots,
                                  std::uint64_t seed) const;

  Adam& optimizer() { return adam_; }
  const ForwardOptions& forward_options() const { return forward_; }

 private:
  void apply_update(VecR& flat, const VecR& grad, EpochRecord& rec);

  Model& model_;
  ForwardOptions forward_;
  TrainOptions options_;
  Adam adam_;
  std::mt19937_64 rng_;
};

}  // namespace bqnn
