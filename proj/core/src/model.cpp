#include "tsaug/model.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "tsaug/error.hpp"

namespace tsaug {

std::string_view to_string(ModelKind kind) { return kind == ModelKind::Mlp ? "mlp" : "conv1d"; }

std::optional<ModelKind> parse_model_kind(std::string_view name) {
  if (name == "mlp") return ModelKind::Mlp;
  if (name == "conv1d") return ModelKind::Conv1d;
  return std::nullopt;
}

namespace {

std::vector<std::size_t> scaled(std::initializer_list<std::size_t> widths, double width) {
  std::vector<std::size_t> out;
  for (auto w : widths) {
    out.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(w) * width))));
  }
  return out;
}

}  // namespace

ModelSpec ModelSpec::mlp(std::size_t length, std::size_t channels, std::size_t num_classes, double width) {
  ModelSpec s;
  s.kind = ModelKind::Mlp;
  s.length = length;
  s.channels = channels;
  s.num_classes = num_classes;
  s.hidden = scaled({500, 256}, width);
  return s;
}

ModelSpec ModelSpec::conv1d(std::size_t length, std::size_t channels, std::size_t num_classes, double width) {
  ModelSpec s;
  s.kind = ModelKind::Conv1d;
  s.length = length;
  s.channels = channels;
  s.num_classes = num_classes;
  s.hidden = scaled({32, 64, 128, 256}, width);
  s.dropout = 0.0;
  return s;
}

ModelSpec ModelSpec::make(ModelKind kind, std::size_t length, std::size_t channels, std::size_t num_classes,
                          double width) {
  return kind == ModelKind::Mlp ? mlp(length, channels, num_classes, width)
                                : conv1d(length, channels, num_classes, width);
}

void ModelSpec::validate() const {
  if (length < 1 || channels < 1) throw ValidationError("model input shape must be positive");
  if (num_classes < 1) throw ValidationError("model needs at least one class");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ValidationError("dropout rate must lie in [0, 1)");
  if (std::any_of(hidden.begin(), hidden.end(), [](std::size_t h) { return h == 0; })) {
    throw ValidationError("hidden widths must be positive");
  }
  if (kind == ModelKind::Conv1d) {
    if (hidden.empty()) throw ValidationError("conv1d model needs at least one block");
    if (kernel_size < 1 || pool_size < 1) throw ValidationError("conv kernel and pool sizes must be positive");
  }
  if (!(bn_eps > 0.0) || !(bn_momentum > 0.0 && bn_momentum <= 1.0)) {
    throw ValidationError("invalid batch-norm settings");
  }
}

std::size_t parameter_count(const ModelSpec& spec) {
  std::size_t total = 0;
  std::size_t in = spec.kind == ModelKind::Mlp ? spec.length * spec.channels : spec.channels;
  const std::size_t fan = spec.kind == ModelKind::Mlp ? 1 : spec.kernel_size;
  for (auto h : spec.hidden) {
    total += in * h * fan + h + 2 * h;
    in = h;
  }
  return total + in * spec.num_classes + spec.num_classes;
}

Model::Model(ModelSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  std::size_t p = 0;
  std::size_t s = 0;
  auto dense = [&](std::size_t in, std::size_t out) {
    layers_.push_back(layer::Dense{in, out, p, p + in * out});
    p += in * out + out;
  };
  auto norm = [&](std::size_t ch) {
    layers_.push_back(layer::BatchNorm{ch, p, p + ch, s});
    p += 2 * ch;
    s += 2 * ch;
  };
  if (spec_.kind == ModelKind::Mlp) {
    std::size_t in = spec_.length * spec_.channels;
    for (auto h : spec_.hidden) {
      dense(in, h);
      norm(h);
      layers_.push_back(layer::Relu{});
      layers_.push_back(layer::Dropout{spec_.dropout});
      in = h;
    }
    dense(in, spec_.num_classes);
  } else {
    std::size_t in = spec_.channels;
    for (std::size_t i = 0; i < spec_.hidden.size(); ++i) {
      const std::size_t h = spec_.hidden[i];
      layers_.push_back(layer::Conv{in, h, spec_.kernel_size, p, p + in * h * spec_.kernel_size});
      p += in * h * spec_.kernel_size + h;
      norm(h);
      layers_.push_back(layer::Relu{});
      if (i + 1 < spec_.hidden.size()) layers_.push_back(layer::MaxPool{spec_.pool_size});
      in = h;
    }
    layers_.push_back(layer::AvgPool{});
    dense(in, spec_.num_classes);
  }
  params_.assign(p, 0.0);
  stats_.assign(s, 0.0);
  for (const auto& l : layers_) {
    if (const auto* bn = std::get_if<layer::BatchNorm>(&l)) {
      std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(bn->gamma_offset), bn->channels, 1.0);
      std::fill_n(stats_.begin() + static_cast<std::ptrdiff_t>(bn->stat_offset + bn->channels), bn->channels, 1.0);
    }
  }
}

Model Model::create(ModelSpec spec, RngStream rng) {
  Model m(std::move(spec));
  auto fill = [&](std::size_t offset, std::size_t count, double fan_in) {
    const double bound = 1.0 / std::sqrt(fan_in);
    for (std::size_t i = 0; i < count; ++i) m.params_[offset + i] = (2.0 * rng.uniform() - 1.0) * bound;
  };
  for (const auto& l : m.layers_) {
    if (const auto* d = std::get_if<layer::Dense>(&l)) {
      fill(d->weight_offset, d->in * d->out, static_cast<double>(d->in));
      fill(d->bias_offset, d->out, static_cast<double>(d->in));
    } else if (const auto* c = std::get_if<layer::Conv>(&l)) {
      const auto fan_in = static_cast<double>(c->in * c->kernel);
      fill(c->weight_offset, c->in * c->out * c->kernel, fan_in);
      fill(c->bias_offset, c->out, fan_in);
    }
  }
  return m;
}

bool operator==(const Model& a, const Model& b) {
  return a.spec_ == b.spec_ && a.params_ == b.params_ && a.stats_ == b.stats_;
}

Batch make_batch(std::span<const TimeSeries> series) {
  Batch batch;
  batch.size = series.size();
  if (series.empty()) return batch;
  batch.length = series.front().length();
  batch.channels = series.front().channels();
  batch.inputs.reserve(batch.size * batch.length * batch.channels);
  bool labeled = true;
  for (const auto& s : series) {
    if (s.length() != batch.length || s.channels() != batch.channels) {
      throw ValidationError("batch series have mixed shapes");
    }
    batch.inputs.insert(batch.inputs.end(), s.values().begin(), s.values().end());
    labeled = labeled && s.label().has_value();
  }
  if (labeled) {
    for (const auto& s : series) batch.labels.push_back(*s.label());
  }
  return batch;
}

Batch make_batch(const Dataset& d, std::span<const std::size_t> indices) {
  std::vector<TimeSeries> picked;
  picked.reserve(indices.size());
  for (auto i : indices) picked.push_back(d[i]);
  return make_batch(picked);
}

namespace {

nn::Tensor input_tensor(const ModelSpec& spec, const Batch& batch) {
  if (batch.length != spec.length || batch.channels != spec.channels) {
    throw ValidationError("batch shape " + std::to_string(batch.length) + "x" + std::to_string(batch.channels) +
                          " does not match model input " + std::to_string(spec.length) + "x" +
                          std::to_string(spec.channels));
  }
  if (spec.kind == ModelKind::Mlp) {
    nn::Tensor t(batch.size, batch.length * batch.channels, 1);
    t.data = batch.inputs;
    return t;
  }
  nn::Tensor t(batch.size, batch.channels, batch.length);
  for (std::size_t b = 0; b < batch.size; ++b) {
    for (std::size_t step = 0; step < batch.length; ++step) {
      for (std::size_t c = 0; c < batch.channels; ++c) {
        t.at(b, c, step) = batch.inputs[(b * batch.length + step) * batch.channels + c];
      }
    }
  }
  return t;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

ForwardPass forward(const Model& model, const Batch& batch, Mode mode, RngStream rng) {
  const auto& spec = model.spec();
  const bool train = mode == Mode::Train;
  const auto params = model.parameters();
  const auto stats = model.running_stats();
  nn::Tensor x = input_tensor(spec, batch);

  ForwardPass pass;
  pass.cache.mode = mode;
  pass.cache.layers.resize(model.layers().size());
  for (std::size_t i = 0; i < model.layers().size(); ++i) {
    auto& lc = pass.cache.layers[i];
    lc.input = x;
    x = std::visit(
        Overloaded{
            [&](const layer::Dense& d) {
              return nn::dense_forward(x, params.subspan(d.weight_offset, d.in * d.out),
                                       params.subspan(d.bias_offset, d.out), d.out);
            },
            [&](const layer::Conv& c) {
              return nn::conv1d_forward(x, params.subspan(c.weight_offset, c.in * c.out * c.kernel),
                                        params.subspan(c.bias_offset, c.out), c.out, c.kernel);
            },
            [&](const layer::BatchNorm& bn) {
              return nn::batchnorm_forward(x, params.subspan(bn.gamma_offset, bn.channels),
                                           params.subspan(bn.beta_offset, bn.channels),
                                           stats.subspan(bn.stat_offset, bn.channels),
                                           stats.subspan(bn.stat_offset + bn.channels, bn.channels), train,
                                           spec.bn_eps, lc.norm);
            },
            [&](const layer::Relu&) { return nn::relu_forward(x); },
            [&](const layer::Dropout& d) {
              if (!train) return x;
              return nn::dropout_forward(x, d.rate, rng.derive(i), lc.mask);
            },
            [&](const layer::MaxPool& p) { return nn::maxpool_forward(x, p.size, lc.argmax); },
            [&](const layer::AvgPool&) { return nn::global_avgpool_forward(x); },
        },
        model.layers()[i]);
  }
  pass.batch = x.batch;
  pass.classes = x.channels;
  pass.logits = std::move(x.data);
  return pass;
}

std::vector<double> backward(const Model& model, const ForwardCache& cache, std::span<const double> grad_logits) {
  const auto params = model.parameters();
  std::vector<double> grad(params.size(), 0.0);
  std::span<double> g(grad);
  const auto& layers = model.layers();
  if (cache.layers.size() != layers.size()) throw ValidationError("forward cache does not match model");
  const std::size_t batch = cache.layers.empty() ? 0 : cache.layers.front().input.batch;
  const std::size_t classes = model.spec().num_classes;
  if (grad_logits.size() != batch * classes) throw ValidationError("logit gradient has wrong size");

  nn::Tensor dy(batch, classes, 1);
  std::copy(grad_logits.begin(), grad_logits.end(), dy.data.begin());
  const bool train = cache.mode == Mode::Train;
  for (std::size_t i = layers.size(); i-- > 0;) {
    const auto& lc = cache.layers[i];
    dy = std::visit(
        Overloaded{
            [&](const layer::Dense& d) {
              return nn::dense_backward(lc.input, dy, params.subspan(d.weight_offset, d.in * d.out),
                                        g.subspan(d.weight_offset, d.in * d.out), g.subspan(d.bias_offset, d.out));
            },
            [&](const layer::Conv& c) {
              const std::size_t n = c.in * c.out * c.kernel;
              return nn::conv1d_backward(lc.input, dy, params.subspan(c.weight_offset, n), g.subspan(c.weight_offset, n),
                                         g.subspan(c.bias_offset, c.out), c.kernel);
            },
            [&](const layer::BatchNorm& bn) {
              return nn::batchnorm_backward(dy, params.subspan(bn.gamma_offset, bn.channels),
                                            g.subspan(bn.gamma_offset, bn.channels),
                                            g.subspan(bn.beta_offset, bn.channels), lc.norm);
            },
            [&](const layer::Relu&) { return nn::relu_backward(lc.input, dy); },
            [&](const layer::Dropout&) { return train ? nn::dropout_backward(dy, lc.mask) : dy; },
            [&](const layer::MaxPool&) { return nn::maxpool_backward(dy, lc.input, lc.argmax); },
            [&](const layer::AvgPool&) { return nn::global_avgpool_backward(dy, lc.input.length); },
        },
        layers[i]);
  }
  return grad;
}

void update_running_stats(Model& model, const ForwardCache& cache) {
  if (cache.mode != Mode::Train) return;
  const double momentum = model.spec().bn_momentum;
  auto stats = model.running_stats();
  for (std::size_t i = 0; i < model.layers().size(); ++i) {
    const auto* bn = std::get_if<layer::BatchNorm>(&model.layers()[i]);
    if (bn == nullptr) continue;
    const auto& lc = cache.layers[i];
    const double n = static_cast<double>(lc.input.batch * lc.input.length);
    const double correction = n > 1.0 ? n / (n - 1.0) : 1.0;
    for (std::size_t c = 0; c < bn->channels; ++c) {
      double& mean = stats[bn->stat_offset + c];
      double& var = stats[bn->stat_offset + bn->channels + c];
      mean = (1.0 - momentum) * mean + momentum * lc.norm.batch_mean[c];
      var = (1.0 - momentum) * var + momentum * lc.norm.batch_var[c] * correction;
    }
  }
}

LossResult softmax_cross_entropy(std::span<const double> logits, std::size_t classes, std::span<const int> labels) {
  const std::size_t batch = labels.size();
  if (logits.size() != batch * classes) throw ValidationError("logits and labels disagree on batch size");
  LossResult r;
  r.grad_logits.assign(logits.size(), 0.0);
  if (batch == 0) return r;
  const double inv_batch = 1.0 / static_cast<double>(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    const auto row = logits.subspan(b * classes, classes);
    const auto label = static_cast<std::size_t>(labels[b]);
    if (label >= classes) throw ValidationError("label outside model classes");
    const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    if (best == label) ++r.correct;
    const double top = row[best];
    double sum = 0.0;
    for (double z : row) sum += std::exp(z - top);
    const double log_norm = top + std::log(sum);
    r.loss += (log_norm - row[label]) * inv_batch;
    for (std::size_t k = 0; k < classes; ++k) {
      const double p = std::exp(row[k] - log_norm);
      r.grad_logits[b * classes + k] = (p - (k == label ? 1.0 : 0.0)) * inv_batch;
    }
  }
  return r;
}

// --- checkpoints

namespace {

constexpr std::array<char, 8> kMagic = {'T', 'S', 'A', 'U', 'G', 'M', 'D', 'L'};

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> bytes{};
  for (int i = 0; i < 8; ++i) bytes[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes.data(), 8);
}
void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> bytes{};
  for (int i = 0; i < 4; ++i) bytes[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes.data(), 4);
}
void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_bytes(std::istream& in, int n) {
  std::array<unsigned char, 8> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), n);
  if (!in) throw ValidationError("checkpoint truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes[static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}
std::uint64_t get_u64(std::istream& in) { return get_bytes(in, 8); }
std::uint32_t get_u32(std::istream& in) { return static_cast<std::uint32_t>(get_bytes(in, 4)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void save_checkpoint(const Model& model, std::ostream& out) {
  const auto& s = model.spec();
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kCheckpointVersion);
  put_u32(out, s.kind == ModelKind::Mlp ? 0 : 1);
  put_u64(out, s.length);
  put_u64(out, s.channels);
  put_u64(out, s.num_classes);
  put_u64(out, s.kernel_size);
  put_u64(out, s.pool_size);
  put_f64(out, s.dropout);
  put_f64(out, s.bn_eps);
  put_f64(out, s.bn_momentum);
  put_u64(out, s.hidden.size());
  for (auto h : s.hidden) put_u64(out, h);
  put_u64(out, model.num_parameters());
  for (double v : model.parameters()) put_f64(out, v);
  put_u64(out, model.running_stats().size());
  for (double v : model.running_stats()) put_f64(out, v);
  if (!out) throw ValidationError("failed to write checkpoint");
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
  save_checkpoint(model, out);
}

Model load_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ValidationError("not a model checkpoint (bad magic)");
  const auto version = get_u32(in);
  if (version != kCheckpointVersion) {
    throw ValidationError("unsupported checkpoint version " + std::to_string(version));
  }
  ModelSpec s;
  const auto kind = get_u32(in);
  if (kind > 1) throw ValidationError("unknown model kind in checkpoint");
  s.kind = kind == 0 ? ModelKind::Mlp : ModelKind::Conv1d;
  s.length = get_u64(in);
  s.channels = get_u64(in);
  s.num_classes = get_u64(in);
  s.kernel_size = get_u64(in);
  s.pool_size = get_u64(in);
  s.dropout = get_f64(in);
  s.bn_eps = get_f64(in);
  s.bn_momentum = get_f64(in);
  const auto n_hidden = get_u64(in);
  if (n_hidden > 1024) throw ValidationError("implausible layer count in checkpoint");
  s.hidden.resize(n_hidden);
  for (auto& h : s.hidden) h = get_u64(in);
  Model model(s);
  if (get_u64(in) != model.num_parameters()) throw ValidationError("checkpoint parameter count mismatch");
  for (double& v : model.parameters()) v = get_f64(in);
  if (get_u64(in) != model.running_stats().size()) throw ValidationError("checkpoint statistics count mismatch");
  for (double& v : model.running_stats()) v = get_f64(in);
  return model;
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint " + path.string());
  return load_checkpoint(in);
}

}  // namespace tsaug
