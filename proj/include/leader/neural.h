#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace leader::nn {

struct ParamArray {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> values;
};

/// Named parameter arrays in declaration order, plus a version counter bumped
/// by every optimiser step. Values are kept exactly representable as 32-bit
/// floats so checkpoints round-trip bit-exactly; arithmetic is in double.
class ParamSet {
 public:
  int add(std::string name, std::vector<std::size_t> shape);

  std::size_t size() const { return arrays_.size(); }
  std::size_t total_size() const;
  ParamArray& operator[](int i) { return arrays_[static_cast<std::size_t>(i)]; }
  const ParamArray& operator[](int i) const { return arrays_[static_cast<std::size_t>(i)]; }
  const std::vector<ParamArray>& arrays() const { return arrays_; }
  std::vector<ParamArray>& arrays() { return arrays_; }

  std::uint64_t version() const { return version_; }
  void set_version(std::uint64_t v) { version_ = v; }
  void bump_version() { ++version_; }

  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
  void round_to_float();
  bool all_finite() const;

  friend bool operator==(const ParamSet& a, const ParamSet& b);

 private:
  std::vector<ParamArray> arrays_;
  std::uint64_t version_ = 0;
};

/// Gradient buffers laid out like a ParamSet.
using Gradients = std::vector<std::vector<double>>;
Gradients zeros_like(const ParamSet& params);
void add_scaled(Gradients& into, const Gradients& from, double scale);
void scale(Gradients& grads, double factor);

/// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for every matrix (fan-in is
/// the last dimension); biases start at zero.
void init_fan_in_uniform(ParamSet& params, std::uint64_t seed);

/// Fully connected layer y = W x + b with W stored row-major (out x in).
struct Dense {
  int weight = -1;
  int bias = -1;
  std::size_t in = 0;
  std::size_t out = 0;

  static Dense create(ParamSet& params, const std::string& name, std::size_t in, std::size_t out);
  void forward(const ParamSet& p, std::span<const double> x, std::span<double> y) const;
  /// Accumulates parameter gradients into `g`; writes dL/dx into `dx` if non-empty.
  void backward(const ParamSet& p, std::span<const double> x, std::span<const double> dy, Gradients& g,
                std::span<double> dx) const;
};

/// Stack of dense layers with ReLU after every layer except optionally the last.
struct Mlp {
  std::vector<Dense> layers;
  bool relu_last = true;

  struct Trace {
    std::vector<std::vector<double>> inputs;  // input to each layer
    std::vector<std::vector<double>> outputs; // post-activation output of each layer
  };

  static Mlp create(ParamSet& params, const std::string& name, std::size_t in, std::size_t width,
                    std::size_t layers, std::size_t out, bool relu_last);
  std::size_t out_size() const { return layers.back().out; }
  std::vector<double> forward(const ParamSet& p, std::span<const double> x, Trace* trace) const;
  /// Returns dL/dx.
  std::vector<double> backward(const ParamSet& p, const Trace& trace, std::span<const double> dy, Gradients& g) const;
};

/// GRU cell with update gate u, reset gate r and candidate state:
///   u = sigmoid(W_u x + U_u h + b_u)
///   r = sigmoid(W_r x + U_r h + b_r)
///   c = tanh(W_h x + U_h (r * h) + b_h)
///   h' = (1 - u) * h + u * c
struct GruCell {
  int wu = -1, uu = -1, bu = -1;
  int wr = -1, ur = -1, br = -1;
  int wh = -1, uh = -1, bh = -1;
  std::size_t in = 0;
  std::size_t hidden = 0;

  struct Trace {
    std::vector<double> x, h, u, r, c, rh;
  };

  static GruCell create(ParamSet& params, const std::string& name, std::size_t in, std::size_t hidden);
  std::vector<double> forward(const ParamSet& p, std::span<const double> x, std::span<const double> h,
                              Trace* trace) const;
  /// Accumulates parameter gradients; writes dL/dx and dL/dh.
  void backward(const ParamSet& p, const Trace& trace, std::span<const double> dh_next, Gradients& g,
                std::vector<double>& dx, std::vector<double>& dh) const;
};

/// Adaptive-moment optimiser state for one ParamSet.
struct AdamState {
  Gradients m;
  Gradients v;
  std::uint64_t steps = 0;
};

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One Adam update; parameters are rounded to float precision afterwards and
/// the version counter is incremented.
void adam_step(ParamSet& params, const Gradients& grads, AdamState& state, const AdamOptions& options);

double sigmoid(double x);

}  // namespace leader::nn
