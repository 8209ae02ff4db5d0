#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace uavedge {

enum class Activation { relu, identity };

const char* to_string(Activation a);

struct LayerSpec {
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  Activation activation = Activation::identity;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Fully connected chain of layers with ReLU hidden activations and an
// identity output layer.
std::vector<LayerSpec> mlp_specs(std::size_t input_dim, std::span<const std::size_t> hidden,
                                 std::size_t output_dim);

// Row-major dense matrix; one row per sample in batched calls.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// Weights are output_dim x input_dim, row-major.
struct LayerParams {
  std::vector<double> weights;
  std::vector<double> bias;

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

using Gradients = std::vector<LayerParams>;

// activations[0] is the input batch, activations[k + 1] the output of layer k.
// pre_activations[k] is layer k's affine output before its nonlinearity.
struct ForwardCache {
  std::vector<Matrix> activations;
  std::vector<Matrix> pre_activations;

  const Matrix& output() const { return activations.back(); }
};

struct AdamParams {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class QNetwork {
 public:
  // He-uniform weights (bound sqrt(6 / input_dim)), zero biases, zero Adam
  // moments. Throws ShapeError when the specs do not chain.
  QNetwork(std::vector<LayerSpec> specs, std::uint64_t seed);

  // Builds from explicit parameters (checkpoint loading, tests).
  QNetwork(std::vector<LayerSpec> specs, std::vector<LayerParams> params);

  const std::vector<LayerSpec>& specs() const noexcept { return specs_; }
  const std::vector<LayerParams>& params() const noexcept { return params_; }
  std::vector<LayerParams>& mutable_params() noexcept { return params_; }

  std::size_t input_dim() const { return specs_.front().input_dim; }
  std::size_t output_dim() const { return specs_.back().output_dim; }
  std::size_t parameter_count() const;
  std::int64_t adam_steps() const noexcept { return adam_t_; }

  ForwardCache forward(const Matrix& batch) const;
  ForwardCache forward(std::span<const double> x) const;
  std::vector<double> predict(std::span<const double> x) const;

  // d_output has one row per cached sample and output_dim columns.
  Gradients backward(const ForwardCache& cache, const Matrix& d_output) const;

  void adam_step(const Gradients& grads, const AdamParams& hp);

  // Copies parameters only; Adam moments are left untouched.
  void copy_parameters_from(const QNetwork& other);

  Gradients zero_gradients() const;

 private:
  void check_shapes() const;

  std::vector<LayerSpec> specs_;
  std::vector<LayerParams> params_;
  std::vector<LayerParams> adam_m_;
  std::vector<LayerParams> adam_v_;
  std::int64_t adam_t_ = 0;
};

// Checkpoint I/O in the qnet-v1 text format (see docs/checkpoint-format.md).
void write_checkpoint(const QNetwork& net, std::ostream& out);
QNetwork read_checkpoint(std::istream& in);
void save_checkpoint(const QNetwork& net, const std::filesystem::path& path);
QNetwork load_checkpoint(const std::filesystem::path& path);

}  // namespace uavedge
