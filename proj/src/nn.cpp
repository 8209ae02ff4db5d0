#include "uavedge/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <utility>

#include "uavedge/errors.hpp"
#include "uavedge/format.hpp"
#include "uavedge/rng.hpp"

namespace uavedge {

const char* to_string(Activation a) {
  switch (a) {
    case Activation::relu:
      return "relu";
    case Activation::identity:
      return "identity";
  }
  return "identity";
}

std::vector<LayerSpec> mlp_specs(std::size_t input_dim, std::span<const std::size_t> hidden,
                                 std::size_t output_dim) {
  std::vector<LayerSpec> specs;
  std::size_t in = input_dim;
  for (std::size_t width : hidden) {
    specs.push_back({in, width, Activation::relu});
    in = width;
  }
  specs.push_back({in, output_dim, Activation::identity});
  return specs;
}

namespace {

void check_specs(const std::vector<LayerSpec>& specs) {
  if (specs.empty()) throw ShapeError("network needs at least one layer");
  for (std::size_t k = 0; k < specs.size(); ++k) {
    if (specs[k].input_dim == 0 || specs[k].output_dim == 0) {
      throw ShapeError("layer " + std::to_string(k) + " has a zero dimension");
    }
    if (k + 1 < specs.size() && specs[k].output_dim != specs[k + 1].input_dim) {
      throw ShapeError("layer " + std::to_string(k) + " output_dim " +
                       std::to_string(specs[k].output_dim) + " != layer " +
                       std::to_string(k + 1) + " input_dim " +
                       std::to_string(specs[k + 1].input_dim));
    }
  }
  if (specs.back().activation != Activation::identity) {
    throw ShapeError("last layer must use identity activation");
  }
}

// Four independent partial sums break the add latency chain; the summation
// order is fixed, so results stay reproducible.
double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

std::vector<LayerParams> zeros_like(const std::vector<LayerSpec>& specs) {
  std::vector<LayerParams> out(specs.size());
  for (std::size_t k = 0; k < specs.size(); ++k) {
    out[k].weights.assign(specs[k].input_dim * specs[k].output_dim, 0.0);
    out[k].bias.assign(specs[k].output_dim, 0.0);
  }
  return out;
}

}  // namespace

QNetwork::QNetwork(std::vector<LayerSpec> specs, std::uint64_t seed) : specs_(std::move(specs)) {
  check_specs(specs_);
  params_ = zeros_like(specs_);
  Rng rng(seed);
  for (std::size_t k = 0; k < specs_.size(); ++k) {
    const double bound = std::sqrt(6.0 / static_cast<double>(specs_[k].input_dim));
    for (double& w : params_[k].weights) w = rng.uniform(-bound, bound);
  }
  adam_m_ = zeros_like(specs_);
  adam_v_ = zeros_like(specs_);
}

QNetwork::QNetwork(std::vector<LayerSpec> specs, std::vector<LayerParams> params)
    : specs_(std::move(specs)), params_(std::move(params)) {
  check_specs(specs_);
  check_shapes();
  adam_m_ = zeros_like(specs_);
  adam_v_ = zeros_like(specs_);
}

void QNetwork::check_shapes() const {
  if (params_.size() != specs_.size()) throw ShapeError("parameter/layer count mismatch");
  for (std::size_t k = 0; k < specs_.size(); ++k) {
    if (params_[k].weights.size() != specs_[k].input_dim * specs_[k].output_dim ||
        params_[k].bias.size() != specs_[k].output_dim) {
      throw ShapeError("parameter shape mismatch in layer " + std::to_string(k));
    }
  }
}

std::size_t QNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const LayerParams& p : params_) n += p.weights.size() + p.bias.size();
  return n;
}

ForwardCache QNetwork::forward(const Matrix& batch) const {
  if (batch.cols != input_dim()) {
    throw ShapeError("forward: input has " + std::to_string(batch.cols) + " features, expected " +
                     std::to_string(input_dim()));
  }
  ForwardCache cache;
  cache.activations.reserve(specs_.size() + 1);
  cache.pre_activations.reserve(specs_.size());
  cache.activations.push_back(batch);

  for (std::size_t k = 0; k < specs_.size(); ++k) {
    const LayerSpec& spec = specs_[k];
    const LayerParams& p = params_[k];
    const Matrix& in = cache.activations.back();
    Matrix z(batch.rows, spec.output_dim);
    for (std::size_t b = 0; b < batch.rows; ++b) {
      const double* x = in.row(b);
      double* zb = z.row(b);
      for (std::size_t o = 0; o < spec.output_dim; ++o) {
        zb[o] = p.bias[o] + dot(p.weights.data() + o * spec.input_dim, x, spec.input_dim);
      }
    }
    Matrix a = z;
    if (spec.activation == Activation::relu) {
      for (double& v : a.data) v = v > 0.0 ? v : 0.0;
    }
    cache.pre_activations.push_back(std::move(z));
    cache.activations.push_back(std::move(a));
  }
  return cache;
}

ForwardCache QNetwork::forward(std::span<const double> x) const {
  Matrix m(1, x.size());
  std::copy(x.begin(), x.end(), m.data.begin());
  return forward(m);
}

std::vector<double> QNetwork::predict(std::span<const double> x) const {
  return forward(x).output().data;
}

Gradients QNetwork::backward(const ForwardCache& cache, const Matrix& d_output) const {
  if (cache.activations.size() != specs_.size() + 1 ||
      cache.pre_activations.size() != specs_.size()) {
    throw ShapeError("backward: cache does not belong to this network");
  }
  const std::size_t batch = cache.activations.front().rows;
  if (d_output.rows != batch || d_output.cols != output_dim()) {
    throw ShapeError("backward: output gradient shape mismatch");
  }

  Gradients grads = zero_gradients();
  Matrix delta = d_output;
  for (std::size_t k = specs_.size(); k-- > 0;) {
    const LayerSpec& spec = specs_[k];
    if (spec.activation == Activation::relu) {
      const Matrix& z = cache.pre_activations[k];
      for (std::size_t j = 0; j < delta.data.size(); ++j) {
        if (z.data[j] <= 0.0) delta.data[j] = 0.0;
      }
    }
    const Matrix& a_prev = cache.activations[k];
    LayerParams& g = grads[k];
    for (std::size_t b = 0; b < batch; ++b) {
      const double* x = a_prev.row(b);
      const double* d = delta.row(b);
      for (std::size_t o = 0; o < spec.output_dim; ++o) {
        const double dv = d[o];
        if (dv == 0.0) continue;
        g.bias[o] += dv;
        double* gw = g.weights.data() + o * spec.input_dim;
        for (std::size_t i = 0; i < spec.input_dim; ++i) gw[i] += dv * x[i];
      }
    }
    if (k == 0) break;
    Matrix prev(batch, spec.input_dim);
    const LayerParams& p = params_[k];
    for (std::size_t b = 0; b < batch; ++b) {
      const double* d = delta.row(b);
      double* out = prev.row(b);
      for (std::size_t o = 0; o < spec.output_dim; ++o) {
        const double dv = d[o];
        if (dv == 0.0) continue;
        const double* w = p.weights.data() + o * spec.input_dim;
        for (std::size_t i = 0; i < spec.input_dim; ++i) out[i] += dv * w[i];
      }
    }
    delta = std::move(prev);
  }
  return grads;
}

void QNetwork::adam_step(const Gradients& grads, const AdamParams& hp) {
  if (grads.size() != params_.size()) throw ShapeError("adam_step: gradient layer count mismatch");
  for (std::size_t k = 0; k < params_.size(); ++k) {
    if (grads[k].weights.size() != params_[k].weights.size() ||
        grads[k].bias.size() != params_[k].bias.size()) {
      throw ShapeError("adam_step: gradient shape mismatch in layer " + std::to_string(k));
    }
  }
  ++adam_t_;
  const double t = static_cast<double>(adam_t_);
  const double correction1 = 1.0 - std::pow(hp.beta1, t);
  const double correction2 = 1.0 - std::pow(hp.beta2, t);

  auto update = [&](std::vector<double>& theta, const std::vector<double>& g,
                    std::vector<double>& m, std::vector<double>& v) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * g[i];
      v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      theta[i] -= hp.learning_rate * m_hat / (std::sqrt(v_hat) + hp.epsilon);
    }
  };
  for (std::size_t k = 0; k < params_.size(); ++k) {
    update(params_[k].weights, grads[k].weights, adam_m_[k].weights, adam_v_[k].weights);
    update(params_[k].bias, grads[k].bias, adam_m_[k].bias, adam_v_[k].bias);
  }
}

void QNetwork::copy_parameters_from(const QNetwork& other) {
  if (other.specs_ != specs_) throw ShapeError("copy_parameters_from: architecture mismatch");
  params_ = other.params_;
}

Gradients QNetwork::zero_gradients() const { return zeros_like(specs_); }

// ---------------------------------------------------------------------------
// Checkpoint I/O

namespace {

constexpr const char* kCheckpointMagic = "qnet-v1";

void write_values(std::ostream& out, const char* tag, std::size_t layer,
                  const std::vector<double>& values) {
  out << tag << layer << ':';
  for (double v : values) out << ' ' << format_double(v);
  out << '\n';
}

[[noreturn]] void parse_fail(const std::string& message) {
  throw CheckpointError(CheckpointError::Kind::parse, "checkpoint parse error: " + message);
}

std::vector<std::string> split_words(const std::string& text) {
  std::istringstream ss(text);
  std::vector<std::string> words;
  std::string w;
  while (ss >> w) words.push_back(w);
  return words;
}

// Returns the words after "<key>:" on the next line.
std::vector<std::string> read_keyed_line(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) parse_fail("missing '" + key + "' line (truncated file?)");
  const std::string prefix = key + ":";
  if (line.rfind(prefix, 0) != 0) parse_fail("expected '" + prefix + "', got '" + line + "'");
  return split_words(line.substr(prefix.size()));
}

std::vector<double> read_values(std::istream& in, const std::string& key, std::size_t count) {
  const std::vector<std::string> words = read_keyed_line(in, key);
  if (words.size() != count) {
    parse_fail(key + " has " + std::to_string(words.size()) + " values, expected " +
               std::to_string(count));
  }
  std::vector<double> values;
  values.reserve(count);
  for (const std::string& w : words) {
    const std::optional<double> v = parse_double(w);
    if (!v || !std::isfinite(*v)) parse_fail(key + " has a non-finite or malformed value '" + w + "'");
    values.push_back(*v);
  }
  return values;
}

}  // namespace

void write_checkpoint(const QNetwork& net, std::ostream& out) {
  const auto& specs = net.specs();
  out << kCheckpointMagic << '\n';
  out << "layers: " << specs.front().input_dim;
  for (const LayerSpec& s : specs) out << ' ' << s.output_dim;
  out << '\n';
  out << "activations:";
  for (const LayerSpec& s : specs) out << ' ' << to_string(s.activation);
  out << '\n';
  for (std::size_t k = 0; k < specs.size(); ++k) {
    write_values(out, "w", k, net.params()[k].weights);
    write_values(out, "b", k, net.params()[k].bias);
  }
  out << "end\n";
}

QNetwork read_checkpoint(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) parse_fail("empty file");
  if (header != kCheckpointMagic) {
    if (header.rfind("qnet-v", 0) == 0) {
      throw CheckpointError(CheckpointError::Kind::version,
                            "unsupported checkpoint version '" + header + "', expected " +
                                kCheckpointMagic);
    }
    parse_fail("missing qnet header");
  }

  std::vector<std::size_t> dims;
  for (const std::string& w : read_keyed_line(in, "layers")) {
    std::size_t pos = 0;
    unsigned long long d = 0;
    try {
      d = std::stoull(w, &pos);
    } catch (const std::exception&) {
      parse_fail("bad layer dimension '" + w + "'");
    }
    if (pos != w.size() || d == 0) parse_fail("bad layer dimension '" + w + "'");
    dims.push_back(static_cast<std::size_t>(d));
  }
  if (dims.size() < 2) parse_fail("need at least two layer dimensions");

  const std::vector<std::string> acts = read_keyed_line(in, "activations");
  if (acts.size() != dims.size() - 1) parse_fail("activation count does not match layers");

  std::vector<LayerSpec> specs;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    Activation a;
    if (acts[k] == "relu") {
      a = Activation::relu;
    } else if (acts[k] == "identity") {
      a = Activation::identity;
    } else {
      parse_fail("unknown activation '" + acts[k] + "'");
    }
    specs.push_back({dims[k], dims[k + 1], a});
  }

  std::vector<LayerParams> params(specs.size());
  for (std::size_t k = 0; k < specs.size(); ++k) {
    params[k].weights =
        read_values(in, "w" + std::to_string(k), specs[k].input_dim * specs[k].output_dim);
    params[k].bias = read_values(in, "b" + std::to_string(k), specs[k].output_dim);
  }
  std::string tail;
  if (!std::getline(in, tail) || tail != "end") parse_fail("missing 'end' marker (truncated file?)");

  try {
    return QNetwork(std::move(specs), std::move(params));
  } catch (const ShapeError& e) {
    throw CheckpointError(CheckpointError::Kind::shape, e.what());
  }
}

void save_checkpoint(const QNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_checkpoint(net, out);
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

QNetwork load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CheckpointError(CheckpointError::Kind::io, "cannot open checkpoint '" + path.string() + "'");
  }
  return read_checkpoint(in);
}

}  // namespace uavedge
