#include "bqnn/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace bqnn {

std::vector<WaveStep> make_wave_chunk(int steps, std::mt19937_64& rng) {
  if (steps <= 0 || steps % 8 != 0)
    throw std::invalid_argument("make_wave_chunk: steps must be a positive multiple of 8");
  std::uniform_int_distribution<int> coin(0, 1);
  std::vector<WaveStep> chunk;
  chunk.reserve(steps);
  for (int w = 0; w < steps / 8; ++w) {
    const int label = coin(rng);
    for (int k = 0; k < 8; ++k) {
      const double v = label == 0 ? std::sin(2.0 * kPi * k / 8.0) : (k < 4 ? 1.0 : -1.0);
      chunk.push_back({(v + 1.0) / 2.0, label});
    }
  }
  return chunk;
}

Dataset make_spirals(int pairs, std::uint64_t seed) {
  if (pairs <= 0) throw std::invalid_argument("make_spirals: pairs must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 3.0 * kPi);
  const double radius_cap = 7.0 * kPi / 25.0;

  Dataset out;
  out.input_dim = 4;
  out.outputs = 1;
  out.samples.reserve(2 * pairs);
  auto rescale = [radius_cap](double v) { return (v + radius_cap) / (2.0 * radius_cap); };
  for (int i = 0; i < pairs; ++i) {
    const double theta = angle(rng);
    const double r = (2.0 * theta + kPi) / 25.0;
    const double x1 = r * std::cos(theta);
    const double x2 = r * std::sin(theta);
    for (int sign : {+1, -1}) {
      Sample s;
      s.x.resize(4);
      s.x << rescale(sign * x1), rescale(sign * x2), rescale(-sign * x1), rescale(-sign * x2);
      s.label = sign > 0 ? 1 : 0;
      s.target = VecR::Constant(1, s.label);
      out.samples.push_back(std::move(s));
    }
  }
  return out;
}

Dataset load_digits_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_digits_csv: cannot open " + path);

  Dataset out;
  out.input_dim = 60;
  out.outputs = 10;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::vector<double> values;
    values.reserve(65);
    while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
    if (values.size() != 65)
      throw std::runtime_error("load_digits_csv: line " + std::to_string(line_no) +
                               " has " + std::to_string(values.size()) + " fields, want 65");
    Sample s;
    s.x.resize(60);
    int f = 0;
    for (int p = 0; p < 64; ++p) {
      if (p == 0 || p == 7 || p == 56 || p == 63) continue;  // blank corners
      s.x[f++] = values[p] / 16.0;
    }
    s.label = static_cast<int>(values[64]);
    if (s.label < 0 || s.label > 9)
      throw std::runtime_error("load_digits_csv: label out of range on line " +
                               std::to_string(line_no));
    s.target = VecR::Constant(1, s.label);
    out.samples.push_back(std::move(s));
  }
  if (out.samples.empty()) throw std::runtime_error("load_digits_csv: empty file " + path);
  return out;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& all, int train_size, int test_size,
                                          std::uint64_t seed) {
  if (train_size < 0 || test_size < 0 || train_size + test_size > all.size())
    throw std::invalid_argument("split_dataset: sizes exceed the dataset");
  std::vector<int> order(all.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  Dataset train, test;
  train.input_dim = test.input_dim = all.input_dim;
  train.outputs = test.outputs = all.outputs;
  for (int i = 0; i < train_size; ++i) train.samples.push_back(all.samples[order[i]]);
  for (int i = 0; i < test_size; ++i)
    test.samples.push_back(all.samples[order[train_size + i]]);
  return {std::move(train), std::move(test)};
}

}  // namespace bqnn
