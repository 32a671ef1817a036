#include "bqnn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <stdexcept>

namespace bqnn {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed ^ (salt * 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

}  // namespace

Trainer::Trainer(Model& model, ForwardOptions forward, TrainOptions options)
    : model_(model),
      forward_(std::move(forward)),
      options_(options),
      adam_(model.lr_vector(), options.adam),
      rng_(options.seed) {
  if (options_.batches < 1) throw std::invalid_argument("Trainer: batches must be positive");
}

void Trainer::apply_update(VecR& flat, const VecR& grad, EpochRecord& rec) {
  adam_.step(flat, grad);
  model_.unflatten(flat);
  rec.clamp_events += model_.clamp_step(options_.clamp);
  flat = model_.flatten();  // the projected point is the optimizer's next iterate
  rec.grad_norm += grad.norm();
}

TrainResult Trainer::train_supervised(const Dataset& train, const Dataset& test) {
  if (train.size() < options_.batches)
    throw std::invalid_argument("train_supervised: fewer samples than batches");

  TrainResult result;
  VecR flat = model_.flatten();
  std::vector<int> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < options_.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    EpochRecord rec;
    rec.epoch = epoch;
    std::shuffle(order.begin(), order.end(), rng_);

    int correct = 0;
    int cursor = 0;
    const int base = train.size() / options_.batches;
    const int remainder = train.size() % options_.batches;
    for (int b = 0; b < options_.batches; ++b) {
      const int batch_size = base + (b < remainder ? 1 : 0);
      VecR grad = VecR::Zero(model_.trainable_count());
      double task_loss = 0.0;
      for (int i = 0; i < batch_size; ++i) {
        const Sample& s = train.samples[order[cursor++]];
        const SampleForward fwd = forward_sample(model_, forward_, s.x, s.target);
        accumulate_sample_gradient(model_, fwd, grad);
        task_loss += fwd.loss.value;
        correct += fwd.prediction == s.label;
      }
      grad /= batch_size;
      task_loss /= batch_size;

      const RealWithGrad reg =
          photon_regularizer(model_, forward_, options_.beta, options_.n_target);
      grad.head(model_.dyn_count()) += reg.grad;

      rec.task_loss += task_loss;
      rec.reg_loss += reg.value;
      rec.loss += task_loss + reg.value;
      apply_update(flat, grad, rec);
    }
    rec.task_loss /= options_.batches;
    rec.reg_loss /= options_.batches;
    rec.loss /= options_.batches;
    rec.grad_norm /= options_.batches;
    rec.train_acc = static_cast<double>(correct) / train.size();
    rec.test_acc = accuracy(test);
    rec.wall_ms = elapsed_ms(t0);
    result.history.push_back(rec);
    if (options_.on_epoch) options_.on_epoch(rec);

    if (options_.early_stop && rec.test_acc == 1.0) {
      result.early_stopped = true;
      break;
    }
  }

  result.epochs_run = static_cast<int>(result.history.size());
  if (!result.history.empty()) {
    result.final_train_acc = result.history.back().train_acc;
    result.final_test_acc = result.history.back().test_acc;
  }
  return result;
}

std::vector<WaveStep> make_eval_stream(const TrainOptions& options) {
  std::mt19937_64 eval_rng(mix_seed(options.seed, 0xE7A1));
  std::vector<WaveStep> stream;
  // Redraw bounded; a fair coin per waveform makes a one-class stream vanishingly rare.
  for (int attempt = 0; attempt < 20; ++attempt) {
    stream = make_wave_chunk(options.eval_steps, eval_rng);
    const bool has0 = std::any_of(stream.begin(), stream.end(),
                                  [](const WaveStep& w) { return w.label == 0; });
    const bool has1 = std::any_of(stream.begin(), stream.end(),
                                  [](const WaveStep& w) { return w.label == 1; });
    if (has0 && has1) break;
  }
  return stream;
}

TrainResult Trainer::train_sequential() {
  TrainResult result;
  VecR flat = model_.flatten();

  const std::vector<WaveStep> eval_stream = make_eval_stream(options_);

  for (int epoch = 0; epoch < options_.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    EpochRecord rec;
    rec.epoch = epoch;

    int correct = 0, seen = 0;
    for (int b = 0; b < options_.batches; ++b) {
      const std::vector<WaveStep> chunk = make_wave_chunk(options_.seq_steps, rng_);
      TangentState ts = TangentState::vacuum(model_.modes(), model_.dyn_count());
      VecR grad = VecR::Zero(model_.trainable_count());
      double task_loss = 0.0;
      for (int t = 0; t < static_cast<int>(chunk.size()); ++t) {
        const VecR target = VecR::Constant(1, chunk[t].label);
        const StepResult step = forward_step(model_, forward_, ts, chunk[t].value, target, &grad);
        task_loss += step.loss.value;
        correct += step.prediction == chunk[t].label;
        ++seen;
        if ((t + 1) % options_.detach_every == 0) ts.detach();
      }
      grad /= static_cast<double>(chunk.size());
      task_loss /= static_cast<double>(chunk.size());

      const RealWithGrad reg =
          photon_regularizer(model_, forward_, options_.beta, options_.n_target);
      grad.head(model_.dyn_count()) += reg.grad;

      rec.task_loss += task_loss;
      rec.reg_loss += reg.value;
      rec.loss += task_loss + reg.value;
      apply_update(flat, grad, rec);
    }
    rec.task_loss /= options_.batches;
    rec.reg_loss /= options_.batches;
    rec.loss /= options_.batches;
    rec.grad_norm /= options_.batches;
    rec.train_acc = static_cast<double>(correct) / seen;
    rec.test_acc = sequential_accuracy(eval_stream);
    rec.shot_acc =
        sequential_shot_accuracy(eval_stream, options_.shots, mix_seed(options_.seed, epoch));
    rec.wall_ms = elapsed_ms(t0);
    result.history.push_back(rec);
    if (options_.on_epoch) options_.on_epoch(rec);

    if (options_.early_stop && rec.test_acc == 1.0 && rec.shot_acc == 1.0) {
      result.early_stopped = true;
      break;
    }
  }

  result.epochs_run = static_cast<int>(result.history.size());
  if (!result.history.empty()) {
    result.final_train_acc = result.history.back().train_acc;
    result.final_test_acc = result.history.back().test_acc;
    result.final_shot_acc = result.history.back().shot_acc;
  }
  return result;
}

double Trainer::accuracy(const Dataset& data) const {
  if (data.size() == 0) return 0.0;
  int correct = 0;
  for (const Sample& s : data.samples) {
    const VecR logits = model_.logits(forward_features(model_, forward_, s.x));
    correct += predict(forward_.loss, logits) == s.label;
  }
  return static_cast<double>(correct) / data.size();
}

double Trainer::sequential_accuracy(const std::vector<WaveStep>& stream) const {
  GaussianState state = GaussianState::vacuum(model_.modes());
  int correct = 0;
  for (const WaveStep& w : stream) {
    const VecR target = VecR::Constant(1, w.label);
    const StepResult step = forward_step_value(model_, forward_, state, w.value, target);
    correct += step.prediction == w.label;
  }
  return static_cast<double>(correct) / stream.size();
}

double Trainer::sequential_shot_accuracy(const std::vector<WaveStep>& stream,
                                         std::int64_t shots, std::uint64_t seed) const {
  GaussianState state = GaussianState::vacuum(model_.modes());
  int correct = 0;
  for (int t = 0; t < static_cast<int>(stream.size()); ++t) {
    const VecR slice = VecR::Constant(1, stream[t].value);
    const DriftSpectrum spec =
        decompose_drift(model_.system_for(0, slice), DegeneracyGuard::value_only);
    state = evolve_segment(state, make_propagator(spec, forward_.dt));
    const VecR probs = measure_features_value(state, forward_.plan);
    const VecR estimate = sample_features(probs, shots, mix_seed(seed, t));
    correct += predict(forward_.loss, model_.logits(estimate)) == stream[t].label;
  }
  return static_cast<double>(correct) / stream.size();
}

}  // namespace bqnn
