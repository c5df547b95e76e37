#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "tsaug/layers.hpp"
#include "tsaug/rng.hpp"
#include "tsaug/series.hpp"

namespace tsaug {

enum class ModelKind { Mlp, Conv1d };

std::string_view to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view name);

// Architecture description.
//
// MLP:    flatten(T*C) -> [Linear, BatchNorm, ReLU, Dropout] per hidden width
//         -> Linear(classes). Default widths 500, 256.
// Conv1D: [Conv(k=5, same), BatchNorm, ReLU, MaxPool(3)] per block with the
//         last block unpooled -> global average pool -> Linear(classes).
//         Default block channels 32, 64, 128, 256.
struct ModelSpec {
  ModelKind kind = ModelKind::Mlp;
  std::size_t length = 0;
  std::size_t channels = 0;
  std::size_t num_classes = 2;
  std::vector<std::size_t> hidden;  // MLP widths or conv block channels
  std::size_t kernel_size = 5;
  std::size_t pool_size = 3;
  double dropout = 0.2;  // MLP only
  double bn_eps = 1e-5;
  double bn_momentum = 0.1;

  // `width` scales the default hidden sizes (rounded, at least 1).
  static ModelSpec mlp(std::size_t length, std::size_t channels, std::size_t num_classes, double width = 1.0);
  static ModelSpec conv1d(std::size_t length, std::size_t channels, std::size_t num_classes, double width = 1.0);
  static ModelSpec make(ModelKind kind, std::size_t length, std::size_t channels, std::size_t num_classes,
                        double width = 1.0);

  void validate() const;
  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// Closed-form trainable parameter count for a spec.
std::size_t parameter_count(const ModelSpec& spec);

namespace layer {
struct Dense { std::size_t in, out, weight_offset, bias_offset; };
struct Conv { std::size_t in, out, kernel, weight_offset, bias_offset; };
struct BatchNorm { std::size_t channels, gamma_offset, beta_offset, stat_offset; };
struct Relu {};
struct Dropout { double rate; };
struct MaxPool { std::size_t size; };
struct AvgPool {};
}  // namespace layer

using Layer = std::variant<layer::Dense, layer::Conv, layer::BatchNorm, layer::Relu, layer::Dropout, layer::MaxPool,
                           layer::AvgPool>;

// A network as a flat parameter vector plus a layer plan indexing into it.
// Batch-norm running statistics live outside the parameter vector.
class Model {
 public:
  // Parameters zero, running mean 0 / variance 1, BatchNorm scales 1.
  explicit Model(ModelSpec spec);
  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  static Model create(ModelSpec spec, RngStream rng);

  const ModelSpec& spec() const { return spec_; }
  std::span<const Layer> layers() const { return layers_; }
  std::size_t num_parameters() const { return params_.size(); }
  std::span<const double> parameters() const { return params_; }
  std::span<double> parameters() { return params_; }
  std::span<const double> running_stats() const { return stats_; }
  std::span<double> running_stats() { return stats_; }

  friend bool operator==(const Model&, const Model&);

 private:
  ModelSpec spec_;
  std::vector<Layer> layers_;
  std::vector<double> params_;
  std::vector<double> stats_;
};

// Model inputs: `size` series of T x C values, time-major within a series.
struct Batch {
  std::size_t size = 0;
  std::size_t length = 0;
  std::size_t channels = 0;
  std::vector<double> inputs;
  std::vector<int> labels;  // empty when the series are unlabeled
};

Batch make_batch(std::span<const TimeSeries> series);
Batch make_batch(const Dataset& d, std::span<const std::size_t> indices);

enum class Mode { Train, Eval };

struct LayerCache {
  nn::Tensor input;
  nn::BatchNormCache norm;
  std::vector<double> mask;
  std::vector<std::size_t> argmax;
};

struct ForwardCache {
  Mode mode = Mode::Eval;
  std::vector<LayerCache> layers;
};

struct ForwardPass {
  std::size_t batch = 0;
  std::size_t classes = 0;
  std::vector<double> logits;  // [batch][classes]
  ForwardCache cache;
};

// Eval mode is deterministic and ignores `rng`; train mode uses batch
// statistics and draws dropout masks from rng.derive(layer_index).
// Throws ValidationError on a shape mismatch.
ForwardPass forward(const Model& model, const Batch& batch, Mode mode, RngStream rng = {});

// Gradient of the loss w.r.t. every parameter, same layout as
// model.parameters().
std::vector<double> backward(const Model& model, const ForwardCache& cache, std::span<const double> grad_logits);

// Blends the batch statistics recorded by a train-mode forward pass into the
// running statistics (unbiased variance, ModelSpec::bn_momentum).
void update_running_stats(Model& model, const ForwardCache& cache);

struct LossResult {
  double loss = 0.0;                // mean cross-entropy
  std::vector<double> grad_logits;  // d loss / d logits
  std::size_t correct = 0;          // argmax hits
};

LossResult softmax_cross_entropy(std::span<const double> logits, std::size_t classes, std::span<const int> labels);

// Checkpoint layout (all integers little-endian):
//   magic "TSAUGMDL" | u32 version=1 | u32 kind | u64 length | u64 channels |
//   u64 classes | u64 kernel | u64 pool | f64 dropout | f64 bn_eps |
//   f64 bn_momentum | u64 n_hidden | u64 hidden[n_hidden] |
//   u64 n_params | f64 params[n_params] | u64 n_stats | f64 stats[n_stats]
inline constexpr int kCheckpointVersion = 1;
void save_checkpoint(const Model& model, std::ostream& out);
void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(std::istream& in);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace tsaug
