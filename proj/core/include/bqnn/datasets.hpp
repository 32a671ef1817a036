#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "bqnn/types.hpp"

namespace bqnn {

struct Sample {
  VecR x;       ///< features in [0, 1]
  VecR target;  ///< regression target, 0/1 class, or label index
  int label = 0;
};

struct Dataset {
  std::vector<Sample> samples;
  int input_dim = 0;
  int outputs = 1;

  int size() const { return static_cast<int>(samples.size()); }
};

/// One step of the alternating sine/square stream, already rescaled to
/// [0, 1]: value = (waveform + 1) / 2.
struct WaveStep {
  double value = 0.0;
  int label = 0;  ///< 0 sine, 1 square
};

/// A run of `steps` sequential points: fair-coin waveform choice every eight
/// steps, sine sin(2 pi k / 8) or square (+1 x4, -1 x4), k = 0..7.
/// steps must be a multiple of eight.
std::vector<WaveStep> make_wave_chunk(int steps, std::mt19937_64& rng);

/// Mirrored two-spiral set: per pair, theta ~ U(0, 3 pi), radius
/// (2 theta + pi) / 25, one point on the spiral (class 1) and its point
/// reflection (class 0).  Features are [x1, x2, -x1, -x2] rescaled from
/// [-7 pi / 25, 7 pi / 25] to [0, 1].
Dataset make_spirals(int pairs, std::uint64_t seed);

/// 8x8 grayscale digit scans: CSV rows of 64 integer pixels (0..16) and a
/// label.  The four corner pixels are dropped (always blank) and the rest
/// divided by 16, leaving 60 features.
Dataset load_digits_csv(const std::string& path);

/// Seeded shuffle split into train/test of the requested sizes.
std::pair<Dataset, Dataset> split_dataset(const Dataset& all, int train_size, int test_size,
                                          std::uint64_t seed);

}  // namespace bqnn
