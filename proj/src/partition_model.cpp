#include "plcp/partition_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "plcp/rng.hpp"
#include "plcp/simd/kernels.hpp"

namespace plcp {

Vector SampleMatrix::column(std::size_t c) const {
  Vector out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

SampleMatrix feature_matrix(std::span<const ScoredSample> data) {
  if (data.empty()) return {};
  const std::size_t d = data.front().x.size();
  SampleMatrix out(d, data.size());
  for (std::size_t j = 0; j < data.size(); ++j) {
    if (data[j].x.size() != d) throw std::invalid_argument("inconsistent covariate dimension");
    for (std::size_t k = 0; k < d; ++k) out(k, j) = data[j].x[k];
  }
  return out;
}

SampleMatrix feature_matrix(std::span<const Vector> xs) {
  if (xs.empty()) return {};
  const std::size_t d = xs.front().size();
  SampleMatrix out(d, xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (xs[j].size() != d) throw std::invalid_argument("inconsistent covariate dimension");
    for (std::size_t k = 0; k < d; ++k) out(k, j) = xs[j][k];
  }
  return out;
}

Architecture Architecture::softmax_linear(std::size_t d, std::size_t m) {
  return Architecture{ArchKind::SoftmaxLinear, {d, m}, 1.0};
}

Architecture Architecture::softmax_mlp(std::size_t d, std::vector<std::size_t> hidden,
                                       std::size_t m) {
  Architecture arch{ArchKind::SoftmaxMlp, {d}, 1.0};
  arch.widths.insert(arch.widths.end(), hidden.begin(), hidden.end());
  arch.widths.push_back(m);
  return arch;
}

std::size_t Architecture::param_count() const {
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) total += (widths[l] + 1) * widths[l + 1];
  return total;
}

std::size_t Architecture::layer_offset(std::size_t l) const {
  std::size_t offset = 0;
  for (std::size_t i = 0; i < l; ++i) offset += (widths[i] + 1) * widths[i + 1];
  return offset;
}

void Architecture::validate() const {
  if (widths.size() < 2) throw std::invalid_argument("architecture needs input and output widths");
  if (kind == ArchKind::SoftmaxLinear && widths.size() != 2) {
    throw std::invalid_argument("SoftmaxLinear has no hidden layers");
  }
  if (kind == ArchKind::SoftmaxMlp && widths.size() < 3) {
    throw std::invalid_argument("SoftmaxMlp needs at least one hidden layer");
  }
  for (std::size_t w : widths) {
    if (w == 0) throw std::invalid_argument("layer widths must be positive");
  }
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw std::invalid_argument("temperature must be positive and finite");
  }
}

PartitionModel::PartitionModel(Architecture arch, Vector params, std::uint64_t seed)
    : arch_(std::move(arch)), params_(std::move(params)), seed_(seed) {
  arch_.validate();
  if (params_.size() != arch_.param_count()) {
    throw std::invalid_argument("parameter count " + std::to_string(params_.size()) +
                                " does not match architecture (" +
                                std::to_string(arch_.param_count()) + ")");
  }
}

PartitionModel PartitionModel::init(const Architecture& arch, std::uint64_t seed, double scale) {
  arch.validate();
  Vector params(arch.param_count(), 0.0);
  Rng rng(seed);
  for (std::size_t l = 0; l < arch.layer_count(); ++l) {
    const std::size_t in = arch.widths[l];
    const std::size_t out = arch.widths[l + 1];
    const double bound = scale / std::sqrt(static_cast<double>(in));
    const std::size_t offset = arch.layer_offset(l);
    for (std::size_t i = 0; i < out * in; ++i) params[offset + i] = rng.uniform(-bound, bound);
  }
  return PartitionModel(arch, std::move(params), seed);
}

ForwardPass PartitionModel::forward_pass(const SampleMatrix& features) const {
  if (features.rows() != input_dim()) {
    throw std::invalid_argument("covariate dimension " + std::to_string(features.rows()) +
                                " does not match model input " + std::to_string(input_dim()));
  }
  const std::size_t n = features.cols();
  const std::size_t layers = arch_.layer_count();
  ForwardPass pass;
  pass.pre.reserve(layers);
  pass.hidden.reserve(layers - 1);

  const SampleMatrix* input = &features;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = arch_.widths[l];
    const std::size_t out = arch_.widths[l + 1];
    const double* weights = params_.data() + arch_.layer_offset(l);
    const double* bias = weights + out * in;
    SampleMatrix z(out, n);
    for (std::size_t u = 0; u < out; ++u) {
      auto zrow = z.row(u);
      std::fill(zrow.begin(), zrow.end(), bias[u]);
      for (std::size_t k = 0; k < in; ++k) simd::axpy(weights[u * in + k], input->row(k), zrow);
    }
    pass.pre.push_back(std::move(z));
    if (l + 1 < layers) {
      SampleMatrix a(out, n);
      for (std::size_t u = 0; u < out; ++u) simd::relu(pass.pre.back().row(u), a.row(u));
      pass.hidden.push_back(std::move(a));
      input = &pass.hidden.back();
    }
  }

  // Column-wise softmax with max subtraction.
  const SampleMatrix& logits = pass.pre.back();
  const std::size_t m = logits.rows();
  const double inv_t = 1.0 / arch_.temperature;
  SampleMatrix probs(m, n);
  Vector col_max(n, -kInfinity);
  for (std::size_t i = 0; i < m; ++i) {
    auto prow = probs.row(i);
    const auto lrow = logits.row(i);
    for (std::size_t j = 0; j < n; ++j) prow[j] = lrow[j] * inv_t;
    simd::max_into(prow, col_max);
  }
  Vector col_sum(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    auto prow = probs.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      // Overflowed logits share the mass among the infinite entries.
      prow[j] = std::isinf(col_max[j]) && col_max[j] > 0 ? (prow[j] == col_max[j] ? 1.0 : 0.0)
                                                         : std::exp(prow[j] - col_max[j]);
      col_sum[j] += prow[j];
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    auto prow = probs.row(i);
    for (std::size_t j = 0; j < n; ++j) prow[j] /= col_sum[j];
  }
  pass.probs = std::move(probs);
  return pass;
}

SampleMatrix PartitionModel::forward_batch(const SampleMatrix& features) const {
  return forward_pass(features).probs;
}

Vector PartitionModel::forward(std::span<const double> x) const {
  SampleMatrix single(x.size(), 1);
  for (std::size_t k = 0; k < x.size(); ++k) single(k, 0) = x[k];
  return forward_batch(single).column(0);
}

GradientVector PartitionModel::backward(const SampleMatrix& features, const ForwardPass& pass,
                                        const SampleMatrix& costs) const {
  const SampleMatrix& probs = pass.probs;
  const std::size_t m = probs.rows();
  const std::size_t n = probs.cols();
  if (costs.rows() != m || costs.cols() != n) throw std::invalid_argument("cost matrix shape");

  GradientVector grad(params_.size(), 0.0);
  if (n == 0) return grad;

  Vector cbar(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) simd::mul_acc(probs.row(i), costs.row(i), cbar);

  const double scale = 1.0 / (static_cast<double>(n) * arch_.temperature);
  SampleMatrix delta(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    simd::softmax_grad(probs.row(i), costs.row(i), cbar, scale, delta.row(i));
  }

  for (std::size_t l = arch_.layer_count(); l-- > 0;) {
    const std::size_t in = arch_.widths[l];
    const std::size_t out = arch_.widths[l + 1];
    const SampleMatrix& input = l == 0 ? features : pass.hidden[l - 1];
    const std::size_t offset = arch_.layer_offset(l);
    const double* weights = params_.data() + offset;
    double* gw = grad.data() + offset;
    double* gb = gw + out * in;
    for (std::size_t u = 0; u < out; ++u) {
      const auto drow = delta.row(u);
      for (std::size_t k = 0; k < in; ++k) gw[u * in + k] = simd::dot(drow, input.row(k));
      gb[u] = simd::sum(drow);
    }
    if (l == 0) break;
    SampleMatrix below(in, n);
    for (std::size_t k = 0; k < in; ++k) {
      auto brow = below.row(k);
      for (std::size_t u = 0; u < out; ++u) simd::axpy(weights[u * in + k], delta.row(u), brow);
      // ReLU subgradient at zero is zero.
      simd::relu_mask(pass.pre[l - 1].row(k), brow);
    }
    delta = std::move(below);
  }
  return grad;
}

SampleMatrix pinball_costs(const QuantileVector& q, std::span<const double> scores, double alpha) {
  SampleMatrix costs(q.m(), scores.size());
  for (std::size_t i = 0; i < q.m(); ++i) simd::pinball(q[i], scores, alpha, costs.row(i));
  return costs;
}

GradientVector objective_gradient(const PartitionModel& model, const QuantileVector& q,
                                  std::span<const ScoredSample> batch, double alpha) {
  if (q.m() != model.m()) throw std::invalid_argument("model output dimension differs from q.m");
  if (batch.empty()) return GradientVector(model.params().size(), 0.0);
  const SampleMatrix features = feature_matrix(batch);
  Vector scores(batch.size());
  for (std::size_t j = 0; j < batch.size(); ++j) scores[j] = batch[j].s;
  const ForwardPass pass = model.forward_pass(features);
  return model.backward(features, pass, pinball_costs(q, scores, alpha));
}

}  // namespace plcp
