#include "tsaug/layers.hpp"

#include <algorithm>
#include <cmath>

namespace tsaug::nn {

Tensor dense_forward(const Tensor& x, std::span<const double> weights, std::span<const double> bias, std::size_t out) {
  const std::size_t in = x.channels * x.length;
  Tensor y(x.batch, out, 1);
  for (std::size_t b = 0; b < x.batch; ++b) {
    const double* xb = x.data.data() + b * in;
    for (std::size_t o = 0; o < out; ++o) {
      const double* w = weights.data() + o * in;
      double acc = bias[o];
      for (std::size_t i = 0; i < in; ++i) acc += w[i] * xb[i];
      y.data[b * out + o] = acc;
    }
  }
  return y;
}

Tensor dense_backward(const Tensor& x, const Tensor& grad_out, std::span<const double> weights,
                      std::span<double> grad_weights, std::span<double> grad_bias) {
  const std::size_t in = x.channels * x.length;
  const std::size_t out = grad_out.channels;
  Tensor dx(x.batch, x.channels, x.length);
  for (std::size_t b = 0; b < x.batch; ++b) {
    const double* xb = x.data.data() + b * in;
    double* dxb = dx.data.data() + b * in;
    for (std::size_t o = 0; o < out; ++o) {
      const double g = grad_out.data[b * out + o];
      if (g == 0.0) continue;
      grad_bias[o] += g;
      double* gw = grad_weights.data() + o * in;
      const double* w = weights.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) {
        gw[i] += g * xb[i];
        dxb[i] += g * w[i];
      }
    }
  }
  return dx;
}

Tensor conv1d_forward(const Tensor& x, std::span<const double> weights, std::span<const double> bias,
                      std::size_t out_channels, std::size_t kernel) {
  const std::size_t in_channels = x.channels;
  const std::size_t len = x.length;
  const auto pad = static_cast<std::ptrdiff_t>(kernel / 2);
  Tensor y(x.batch, out_channels, len);
  for (std::size_t b = 0; b < x.batch; ++b) {
    for (std::size_t o = 0; o < out_channels; ++o) {
      double* yrow = &y.at(b, o, 0);
      for (std::size_t l = 0; l < len; ++l) yrow[l] = bias[o];
      for (std::size_t i = 0; i < in_channels; ++i) {
        const double* xrow = &x.at(b, i, 0);
        const double* w = weights.data() + (o * in_channels + i) * kernel;
        for (std::size_t j = 0; j < kernel; ++j) {
          const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(j) - pad;
          const std::size_t lo = shift < 0 ? static_cast<std::size_t>(-shift) : 0;
          const std::size_t hi = shift > 0 ? len - std::min(len, static_cast<std::size_t>(shift)) : len;
          const double wj = w[j];
          for (std::size_t l = lo; l < hi; ++l) yrow[l] += wj * xrow[static_cast<std::ptrdiff_t>(l) + shift];
        }
      }
    }
  }
  return y;
}

Tensor conv1d_backward(const Tensor& x, const Tensor& grad_out, std::span<const double> weights,
                       std::span<double> grad_weights, std::span<double> grad_bias, std::size_t kernel) {
  const std::size_t in_channels = x.channels;
  const std::size_t out_channels = grad_out.channels;
  const std::size_t len = x.length;
  const auto pad = static_cast<std::ptrdiff_t>(kernel / 2);
  Tensor dx(x.batch, in_channels, len);
  for (std::size_t b = 0; b < x.batch; ++b) {
    for (std::size_t o = 0; o < out_channels; ++o) {
      const double* g = &grad_out.at(b, o, 0);
      double gsum = 0.0;
      for (std::size_t l = 0; l < len; ++l) gsum += g[l];
      grad_bias[o] += gsum;
      for (std::size_t i = 0; i < in_channels; ++i) {
        const double* xrow = &x.at(b, i, 0);
        double* dxrow = &dx.at(b, i, 0);
        const std::size_t widx = (o * in_channels + i) * kernel;
        for (std::size_t j = 0; j < kernel; ++j) {
          const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(j) - pad;
          const std::size_t lo = shift < 0 ? static_cast<std::size_t>(-shift) : 0;
          const std::size_t hi = shift > 0 ? len - std::min(len, static_cast<std::size_t>(shift)) : len;
          const double wj = weights[widx + j];
          double acc = 0.0;
          for (std::size_t l = lo; l < hi; ++l) {
            const auto src = static_cast<std::ptrdiff_t>(l) + shift;
            acc += g[l] * xrow[src];
            dxrow[src] += wj * g[l];
          }
          grad_weights[widx + j] += acc;
        }
      }
    }
  }
  return dx;
}

Tensor batchnorm_forward(const Tensor& x, std::span<const double> gamma, std::span<const double> beta,
                         std::span<const double> running_mean, std::span<const double> running_var, bool train,
                         double eps, BatchNormCache& cache) {
  const std::size_t channels = x.channels;
  const double n = static_cast<double>(x.batch * x.length);
  cache.train = train;
  cache.inv_std.assign(channels, 0.0);
  cache.xhat.assign(x.data.size(), 0.0);
  std::vector<double> mean(channels), var(channels);
  if (train) {
    for (std::size_t c = 0; c < channels; ++c) {
      double sum = 0.0;
      for (std::size_t b = 0; b < x.batch; ++b) {
        for (std::size_t l = 0; l < x.length; ++l) sum += x.at(b, c, l);
      }
      mean[c] = sum / n;
      double sq = 0.0;
      for (std::size_t b = 0; b < x.batch; ++b) {
        for (std::size_t l = 0; l < x.length; ++l) {
          const double d = x.at(b, c, l) - mean[c];
          sq += d * d;
        }
      }
      var[c] = sq / n;
    }
    cache.batch_mean = mean;
    cache.batch_var = var;
  } else {
    mean.assign(running_mean.begin(), running_mean.end());
    var.assign(running_var.begin(), running_var.end());
    cache.batch_mean.clear();
    cache.batch_var.clear();
  }
  Tensor y(x.batch, channels, x.length);
  for (std::size_t c = 0; c < channels; ++c) cache.inv_std[c] = 1.0 / std::sqrt(var[c] + eps);
  for (std::size_t b = 0; b < x.batch; ++b) {
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t l = 0; l < x.length; ++l) {
        const std::size_t idx = (b * channels + c) * x.length + l;
        const double xh = (x.data[idx] - mean[c]) * cache.inv_std[c];
        cache.xhat[idx] = xh;
        y.data[idx] = gamma[c] * xh + beta[c];
      }
    }
  }
  return y;
}

Tensor batchnorm_backward(const Tensor& grad_out, std::span<const double> gamma, std::span<double> grad_gamma,
                          std::span<double> grad_beta, const BatchNormCache& cache) {
  const std::size_t channels = grad_out.channels;
  const std::size_t len = grad_out.length;
  const double n = static_cast<double>(grad_out.batch * len);
  Tensor dx(grad_out.batch, channels, len);
  for (std::size_t c = 0; c < channels; ++c) {
    double sum_g = 0.0;
    double sum_gx = 0.0;
    for (std::size_t b = 0; b < grad_out.batch; ++b) {
      for (std::size_t l = 0; l < len; ++l) {
        const std::size_t idx = (b * channels + c) * len + l;
        sum_g += grad_out.data[idx];
        sum_gx += grad_out.data[idx] * cache.xhat[idx];
      }
    }
    grad_gamma[c] += sum_gx;
    grad_beta[c] += sum_g;
    const double scale = gamma[c] * cache.inv_std[c];
    for (std::size_t b = 0; b < grad_out.batch; ++b) {
      for (std::size_t l = 0; l < len; ++l) {
        const std::size_t idx = (b * channels + c) * len + l;
        if (cache.train) {
          // Batch statistics depend on every input in the channel.
          dx.data[idx] = scale * (grad_out.data[idx] - sum_g / n - cache.xhat[idx] * sum_gx / n);
        } else {
          dx.data[idx] = scale * grad_out.data[idx];
        }
      }
    }
  }
  return dx;
}

Tensor relu_forward(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.data) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor relu_backward(const Tensor& x, const Tensor& grad_out) {
  Tensor dx = grad_out;
  for (std::size_t i = 0; i < dx.data.size(); ++i) {
    if (!(x.data[i] > 0.0)) dx.data[i] = 0.0;
  }
  return dx;
}

Tensor dropout_forward(const Tensor& x, double rate, RngStream rng, std::vector<double>& mask) {
  mask.assign(x.data.size(), 1.0);
  Tensor y = x;
  if (rate <= 0.0) return y;
  const double keep_scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < y.data.size(); ++i) {
    mask[i] = rng.uniform() < rate ? 0.0 : keep_scale;
    y.data[i] *= mask[i];
  }
  return y;
}

Tensor dropout_backward(const Tensor& grad_out, std::span<const double> mask) {
  Tensor dx = grad_out;
  for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] *= mask[i];
  return dx;
}

std::size_t maxpool_output_length(std::size_t length, std::size_t size) {
  return length < size ? 1 : length / size;
}

Tensor maxpool_forward(const Tensor& x, std::size_t size, std::vector<std::size_t>& argmax) {
  const std::size_t out_len = maxpool_output_length(x.length, size);
  const std::size_t window = x.length < size ? x.length : size;
  Tensor y(x.batch, x.channels, out_len);
  argmax.assign(y.data.size(), 0);
  for (std::size_t b = 0; b < x.batch; ++b) {
    for (std::size_t c = 0; c < x.channels; ++c) {
      for (std::size_t j = 0; j < out_len; ++j) {
        std::size_t best = j * window;
        for (std::size_t k = best + 1; k < j * window + window; ++k) {
          if (x.at(b, c, k) > x.at(b, c, best)) best = k;
        }
        const std::size_t oidx = (b * x.channels + c) * out_len + j;
        y.data[oidx] = x.at(b, c, best);
        argmax[oidx] = (b * x.channels + c) * x.length + best;
      }
    }
  }
  return y;
}

Tensor maxpool_backward(const Tensor& grad_out, const Tensor& input_shape, std::span<const std::size_t> argmax) {
  Tensor dx(input_shape.batch, input_shape.channels, input_shape.length);
  for (std::size_t i = 0; i < grad_out.data.size(); ++i) dx.data[argmax[i]] += grad_out.data[i];
  return dx;
}

Tensor global_avgpool_forward(const Tensor& x) {
  Tensor y(x.batch, x.channels, 1);
  const double inv = 1.0 / static_cast<double>(x.length);
  for (std::size_t b = 0; b < x.batch; ++b) {
    for (std::size_t c = 0; c < x.channels; ++c) {
      double sum = 0.0;
      for (std::size_t l = 0; l < x.length; ++l) sum += x.at(b, c, l);
      y.at(b, c, 0) = sum * inv;
    }
  }
  return y;
}

Tensor global_avgpool_backward(const Tensor& grad_out, std::size_t length) {
  Tensor dx(grad_out.batch, grad_out.channels, length);
  const double inv = 1.0 / static_cast<double>(length);
  for (std::size_t b = 0; b < grad_out.batch; ++b) {
    for (std::size_t c = 0; c < grad_out.channels; ++c) {
      const double g = grad_out.at(b, c, 0) * inv;
      for (std::size_t l = 0; l < length; ++l) dx.at(b, c, l) = g;
    }
  }
  return dx;
}

}  // namespace tsaug::nn
