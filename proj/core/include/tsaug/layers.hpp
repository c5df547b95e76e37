#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tsaug/rng.hpp"

// Layer kernels with hand-derived gradients. Activations are
// [batch][channels][length] tensors; dense layers use length == 1.
namespace tsaug::nn {

struct Tensor {
  std::size_t batch = 0;
  std::size_t channels = 0;
  std::size_t length = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::size_t b, std::size_t c, std::size_t l) : batch(b), channels(c), length(l), data(b * c * l, 0.0) {}

  double& at(std::size_t b, std::size_t c, std::size_t l) { return data[(b * channels + c) * length + l]; }
  const double& at(std::size_t b, std::size_t c, std::size_t l) const { return data[(b * channels + c) * length + l]; }
  bool same_shape(const Tensor& o) const { return batch == o.batch && channels == o.channels && length == o.length; }
};

// weights: [out][in]; bias: [out].
Tensor dense_forward(const Tensor& x, std::span<const double> weights, std::span<const double> bias, std::size_t out);
// Accumulates into grad_weights / grad_bias; returns dL/dx.
Tensor dense_backward(const Tensor& x, const Tensor& grad_out, std::span<const double> weights,
                      std::span<double> grad_weights, std::span<double> grad_bias);

// "Same" convolution, stride 1, zero padding kernel/2 on the left.
// weights: [out][in][kernel]; bias: [out].
Tensor conv1d_forward(const Tensor& x, std::span<const double> weights, std::span<const double> bias,
                      std::size_t out_channels, std::size_t kernel);
Tensor conv1d_backward(const Tensor& x, const Tensor& grad_out, std::span<const double> weights,
                       std::span<double> grad_weights, std::span<double> grad_bias, std::size_t kernel);

// Per-channel normalization over (batch, length).
struct BatchNormCache {
  bool train = false;
  std::vector<double> xhat;
  std::vector<double> inv_std;     // per channel
  std::vector<double> batch_mean;  // per channel, train mode only
  std::vector<double> batch_var;   // biased, train mode only
};

Tensor batchnorm_forward(const Tensor& x, std::span<const double> gamma, std::span<const double> beta,
                         std::span<const double> running_mean, std::span<const double> running_var, bool train,
                         double eps, BatchNormCache& cache);
Tensor batchnorm_backward(const Tensor& grad_out, std::span<const double> gamma, std::span<double> grad_gamma,
                          std::span<double> grad_beta, const BatchNormCache& cache);

Tensor relu_forward(const Tensor& x);
Tensor relu_backward(const Tensor& x, const Tensor& grad_out);

// Inverted dropout: kept units are scaled by 1/(1-rate). `mask` receives the
// per-element multiplier.
Tensor dropout_forward(const Tensor& x, double rate, RngStream rng, std::vector<double>& mask);
Tensor dropout_backward(const Tensor& grad_out, std::span<const double> mask);

// Non-overlapping windows of `size`; output length max(1, L / size), a short
// series pools over its whole length.
std::size_t maxpool_output_length(std::size_t length, std::size_t size);
Tensor maxpool_forward(const Tensor& x, std::size_t size, std::vector<std::size_t>& argmax);
Tensor maxpool_backward(const Tensor& grad_out, const Tensor& input_shape, std::span<const std::size_t> argmax);

Tensor global_avgpool_forward(const Tensor& x);
Tensor global_avgpool_backward(const Tensor& grad_out, std::size_t length);

}  // namespace tsaug::nn
