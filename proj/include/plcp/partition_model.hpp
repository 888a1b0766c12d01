#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "plcp/types.hpp"

namespace plcp {

/// Dense matrix stored as contiguous rows of length cols(). Batched code keeps
/// one row per feature (or hidden unit, or group) and one column per sample,
/// so every inner loop runs over samples.
class SampleMatrix {
 public:
  SampleMatrix() = default;
  SampleMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  /// Column `c` copied out as a vector of length rows().
  Vector column(std::size_t c) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
};

/// Feature-major copy (d x n) of the covariates in `data`.
SampleMatrix feature_matrix(std::span<const ScoredSample> data);
SampleMatrix feature_matrix(std::span<const Vector> xs);

enum class ArchKind { SoftmaxLinear, SoftmaxMlp };

/// Layer widths run from the input dimension to the group count m. A linear
/// architecture has exactly two widths; an MLP has ReLU hidden layers between.
struct Architecture {
  ArchKind kind = ArchKind::SoftmaxLinear;
  std::vector<std::size_t> widths;
  /// Logits are divided by this before the softmax.
  double temperature = 1.0;

  static Architecture softmax_linear(std::size_t d, std::size_t m);
  static Architecture softmax_mlp(std::size_t d, std::vector<std::size_t> hidden, std::size_t m);

  std::size_t input_dim() const { return widths.front(); }
  std::size_t output_dim() const { return widths.back(); }
  std::size_t layer_count() const { return widths.size() - 1; }
  std::size_t param_count() const;
  /// Offset of layer l's weight block; its biases follow the out*in weights.
  std::size_t layer_offset(std::size_t l) const;

  void validate() const;
};

using GradientVector = Vector;

/// Activations retained from a batched forward pass for backpropagation.
struct ForwardPass {
  std::vector<SampleMatrix> pre;     // pre-activations of every layer
  std::vector<SampleMatrix> hidden;  // ReLU outputs of the hidden layers
  SampleMatrix probs;                // m x n softmax outputs
};

/// A parameterized map from covariates to the probability simplex.
class PartitionModel {
 public:
  PartitionModel() = default;
  PartitionModel(Architecture arch, Vector params, std::uint64_t seed = 0);

  /// Weights uniform in +-scale/sqrt(fan_in), biases zero.
  static PartitionModel init(const Architecture& arch, std::uint64_t seed, double scale = 0.1);

  const Architecture& arch() const { return arch_; }
  const Vector& params() const { return params_; }
  Vector& params() { return params_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t input_dim() const { return arch_.input_dim(); }
  std::size_t m() const { return arch_.output_dim(); }

  Vector forward(std::span<const double> x) const;

  /// m x n group probabilities for a d x n feature matrix.
  SampleMatrix forward_batch(const SampleMatrix& features) const;
  ForwardPass forward_pass(const SampleMatrix& features) const;

  /// Gradient of the mean weighted cost (1/n) sum_j sum_i h^i(x_j) costs(i, j)
  /// with respect to the parameters, given a forward pass over `features`.
  GradientVector backward(const SampleMatrix& features, const ForwardPass& pass,
                          const SampleMatrix& costs) const;

 private:
  Architecture arch_;
  Vector params_;
  std::uint64_t seed_ = 0;
};

/// m x n pinball costs of every threshold against every score.
SampleMatrix pinball_costs(const QuantileVector& q, std::span<const double> scores, double alpha);

/// Gradient of the empirical PLCP objective in the model parameters, q fixed.
GradientVector objective_gradient(const PartitionModel& model, const QuantileVector& q,
                                  std::span<const ScoredSample> batch, double alpha);

}  // namespace plcp
