#include "leader/neural.h"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "leader/stream.h"

namespace leader::nn {

int ParamSet::add(std::string name, std::vector<std::size_t> shape) {
  const std::size_t n = std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  arrays_.push_back({std::move(name), std::move(shape), std::vector<double>(n, 0.0)});
  return static_cast<int>(arrays_.size()) - 1;
}

std::size_t ParamSet::total_size() const {
  std::size_t n = 0;
  for (const auto& a : arrays_) n += a.values.size();
  return n;
}

std::vector<double> ParamSet::flatten() const {
  std::vector<double> flat;
  flat.reserve(total_size());
  for (const auto& a : arrays_) flat.insert(flat.end(), a.values.begin(), a.values.end());
  return flat;
}

void ParamSet::assign(std::span<const double> flat) {
  if (flat.size() != total_size()) throw std::invalid_argument("flat parameter vector has the wrong length");
  std::size_t o = 0;
  for (auto& a : arrays_) {
    for (double& v : a.values) v = flat[o++];
  }
}

void ParamSet::round_to_float() {
  for (auto& a : arrays_) {
    for (double& v : a.values) v = static_cast<double>(static_cast<float>(v));
  }
}

bool ParamSet::all_finite() const {
  for (const auto& a : arrays_) {
    for (double v : a.values) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

bool operator==(const ParamSet& a, const ParamSet& b) {
  if (a.arrays_.size() != b.arrays_.size()) return false;
  for (std::size_t i = 0; i < a.arrays_.size(); ++i) {
    if (a.arrays_[i].name != b.arrays_[i].name || a.arrays_[i].shape != b.arrays_[i].shape ||
        a.arrays_[i].values != b.arrays_[i].values) {
      return false;
    }
  }
  return true;
}

Gradients zeros_like(const ParamSet& params) {
  Gradients g;
  g.reserve(params.size());
  for (const auto& a : params.arrays()) g.emplace_back(a.values.size(), 0.0);
  return g;
}

void add_scaled(Gradients& into, const Gradients& from, double s) {
  for (std::size_t i = 0; i < into.size(); ++i) {
    for (std::size_t j = 0; j < into[i].size(); ++j) into[i][j] += s * from[i][j];
  }
}

void scale(Gradients& grads, double factor) {
  for (auto& g : grads) {
    for (double& v : g) v *= factor;
  }
}

void init_fan_in_uniform(ParamSet& params, std::uint64_t seed) {
  ScenarioStream stream(seed);
  for (auto& a : params.arrays()) {
    if (a.shape.size() < 2) {
      std::fill(a.values.begin(), a.values.end(), 0.0);
      continue;
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(a.shape.back()));
    for (double& v : a.values) v = (2.0 * stream.next_uniform() - 1.0) * bound;
  }
  params.round_to_float();
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Dense Dense::create(ParamSet& params, const std::string& name, std::size_t in, std::size_t out) {
  Dense d;
  d.in = in;
  d.out = out;
  d.weight = params.add(name + ".weight", {out, in});
  d.bias = params.add(name + ".bias", {out});
  return d;
}

void Dense::forward(const ParamSet& p, std::span<const double> x, std::span<double> y) const {
  if (x.size() != in || y.size() != out) throw std::invalid_argument("dense layer shape mismatch");
  const auto& w = p[weight].values;
  const auto& b = p[bias].values;
  for (std::size_t o = 0; o < out; ++o) {
    const double* row = w.data() + o * in;
    double acc = b[o];
    for (std::size_t i = 0; i < in; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
}

void Dense::backward(const ParamSet& p, std::span<const double> x, std::span<const double> dy, Gradients& g,
                     std::span<double> dx) const {
  const auto& w = p[weight].values;
  auto& gw = g[static_cast<std::size_t>(weight)];
  auto& gb = g[static_cast<std::size_t>(bias)];
  if (!dx.empty()) std::fill(dx.begin(), dx.end(), 0.0);
  for (std::size_t o = 0; o < out; ++o) {
    const double d = dy[o];
    if (d == 0.0) continue;
    gb[o] += d;
    double* grow = gw.data() + o * in;
    const double* row = w.data() + o * in;
    for (std::size_t i = 0; i < in; ++i) grow[i] += d * x[i];
    if (!dx.empty()) {
      for (std::size_t i = 0; i < in; ++i) dx[i] += d * row[i];
    }
  }
}

Mlp Mlp::create(ParamSet& params, const std::string& name, std::size_t in, std::size_t width, std::size_t layers,
                std::size_t out, bool relu_last) {
  if (layers < 1) throw std::invalid_argument("MLP needs at least one layer");
  Mlp m;
  m.relu_last = relu_last;
  std::size_t cur = in;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t next = l + 1 == layers ? out : width;
    m.layers.push_back(Dense::create(params, name + "." + std::to_string(l), cur, next));
    cur = next;
  }
  return m;
}

std::vector<double> Mlp::forward(const ParamSet& p, std::span<const double> x, Trace* trace) const {
  std::vector<double> cur(x.begin(), x.end());
  if (trace) {
    trace->inputs.clear();
    trace->outputs.clear();
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    std::vector<double> y(layers[l].out);
    layers[l].forward(p, cur, y);
    if (l + 1 < layers.size() || relu_last) {
      for (double& v : y) v = v > 0.0 ? v : 0.0;
    }
    for (double v : y) {
      if (!std::isfinite(v)) throw std::runtime_error("non-finite activation in layer " + std::to_string(l));
    }
    if (trace) {
      trace->inputs.push_back(std::move(cur));
      trace->outputs.push_back(y);
    }
    cur = std::move(y);
  }
  return cur;
}

std::vector<double> Mlp::backward(const ParamSet& p, const Trace& trace, std::span<const double> dy,
                                  Gradients& g) const {
  std::vector<double> grad(dy.begin(), dy.end());
  for (std::size_t l = layers.size(); l-- > 0;) {
    if (l + 1 < layers.size() || relu_last) {
      const auto& out = trace.outputs[l];
      for (std::size_t o = 0; o < grad.size(); ++o) {
        if (!(out[o] > 0.0)) grad[o] = 0.0;
      }
    }
    std::vector<double> dx(layers[l].in);
    layers[l].backward(p, trace.inputs[l], grad, g, dx);
    grad = std::move(dx);
  }
  return grad;
}

GruCell GruCell::create(ParamSet& params, const std::string& name, std::size_t in, std::size_t hidden) {
  GruCell c;
  c.in = in;
  c.hidden = hidden;
  c.wu = params.add(name + ".W_u", {hidden, in});
  c.uu = params.add(name + ".U_u", {hidden, hidden});
  c.bu = params.add(name + ".b_u", {hidden});
  c.wr = params.add(name + ".W_r", {hidden, in});
  c.ur = params.add(name + ".U_r", {hidden, hidden});
  c.br = params.add(name + ".b_r", {hidden});
  c.wh = params.add(name + ".W_h", {hidden, in});
  c.uh = params.add(name + ".U_h", {hidden, hidden});
  c.bh = params.add(name + ".b_h", {hidden});
  return c;
}

namespace {

// acc[o] += M[o, :] . v for a row-major (rows x cols) matrix.
void matvec_add(const std::vector<double>& m, std::size_t rows, std::size_t cols, std::span<const double> v,
                std::vector<double>& acc) {
  for (std::size_t o = 0; o < rows; ++o) {
    const double* row = m.data() + o * cols;
    double s = 0.0;
    for (std::size_t i = 0; i < cols; ++i) s += row[i] * v[i];
    acc[o] += s;
  }
}

// gm += d v^T ; dv += M^T d
void matvec_backward(const std::vector<double>& m, std::size_t rows, std::size_t cols, std::span<const double> v,
                     std::span<const double> d, std::vector<double>& gm, std::vector<double>* dv) {
  for (std::size_t o = 0; o < rows; ++o) {
    const double g = d[o];
    if (g == 0.0) continue;
    double* grow = gm.data() + o * cols;
    const double* row = m.data() + o * cols;
    for (std::size_t i = 0; i < cols; ++i) grow[i] += g * v[i];
    if (dv) {
      for (std::size_t i = 0; i < cols; ++i) (*dv)[i] += g * row[i];
    }
  }
}

}  // namespace

std::vector<double> GruCell::forward(const ParamSet& p, std::span<const double> x, std::span<const double> h,
                                     Trace* trace) const {
  if (x.size() != in || h.size() != hidden) throw std::invalid_argument("GRU input shape mismatch");
  std::vector<double> u(p[bu].values), r(p[br].values), c(p[bh].values);
  matvec_add(p[wu].values, hidden, in, x, u);
  matvec_add(p[uu].values, hidden, hidden, h, u);
  matvec_add(p[wr].values, hidden, in, x, r);
  matvec_add(p[ur].values, hidden, hidden, h, r);
  for (std::size_t k = 0; k < hidden; ++k) {
    u[k] = sigmoid(u[k]);
    r[k] = sigmoid(r[k]);
  }
  std::vector<double> rh(hidden);
  for (std::size_t k = 0; k < hidden; ++k) rh[k] = r[k] * h[k];
  matvec_add(p[wh].values, hidden, in, x, c);
  matvec_add(p[uh].values, hidden, hidden, rh, c);
  std::vector<double> out(hidden);
  for (std::size_t k = 0; k < hidden; ++k) {
    c[k] = std::tanh(c[k]);
    out[k] = (1.0 - u[k]) * h[k] + u[k] * c[k];
    if (!std::isfinite(out[k])) throw std::runtime_error("non-finite GRU state");
  }
  if (trace) {
    trace->x.assign(x.begin(), x.end());
    trace->h.assign(h.begin(), h.end());
    trace->u = std::move(u);
    trace->r = std::move(r);
    trace->c = std::move(c);
    trace->rh = std::move(rh);
  }
  return out;
}

void GruCell::backward(const ParamSet& p, const Trace& t, std::span<const double> dh_next, Gradients& g,
                       std::vector<double>& dx, std::vector<double>& dh) const {
  dx.assign(in, 0.0);
  dh.assign(hidden, 0.0);
  std::vector<double> da_c(hidden), da_u(hidden), da_r(hidden);
  for (std::size_t k = 0; k < hidden; ++k) {
    const double d = dh_next[k];
    dh[k] += d * (1.0 - t.u[k]);
    const double dc = d * t.u[k];
    const double du = d * (t.c[k] - t.h[k]);
    da_c[k] = dc * (1.0 - t.c[k] * t.c[k]);
    da_u[k] = du * t.u[k] * (1.0 - t.u[k]);
  }
  auto G = [&](int idx) -> std::vector<double>& { return g[static_cast<std::size_t>(idx)]; };

  // Candidate path.
  std::vector<double> drh(hidden, 0.0);
  matvec_backward(p[wh].values, hidden, in, t.x, da_c, G(wh), &dx);
  matvec_backward(p[uh].values, hidden, hidden, t.rh, da_c, G(uh), &drh);
  for (std::size_t k = 0; k < hidden; ++k) {
    G(bh)[k] += da_c[k];
    dh[k] += drh[k] * t.r[k];
    const double dr = drh[k] * t.h[k];
    da_r[k] = dr * t.r[k] * (1.0 - t.r[k]);
  }
  // Gates.
  matvec_backward(p[wu].values, hidden, in, t.x, da_u, G(wu), &dx);
  matvec_backward(p[uu].values, hidden, hidden, t.h, da_u, G(uu), &dh);
  matvec_backward(p[wr].values, hidden, in, t.x, da_r, G(wr), &dx);
  matvec_backward(p[ur].values, hidden, hidden, t.h, da_r, G(ur), &dh);
  for (std::size_t k = 0; k < hidden; ++k) {
    G(bu)[k] += da_u[k];
    G(br)[k] += da_r[k];
  }
}

void adam_step(ParamSet& params, const Gradients& grads, AdamState& state, const AdamOptions& o) {
  if (grads.size() != params.size()) throw std::invalid_argument("gradient layout does not match parameters");
  if (state.m.empty()) {
    state.m = zeros_like(params);
    state.v = zeros_like(params);
  }
  ++state.steps;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.steps));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.steps));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& values = params.arrays()[i].values;
    if (grads[i].size() != values.size()) throw std::invalid_argument("gradient shape mismatch");
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double g = grads[i][j];
      state.m[i][j] = o.beta1 * state.m[i][j] + (1.0 - o.beta1) * g;
      state.v[i][j] = o.beta2 * state.v[i][j] + (1.0 - o.beta2) * g * g;
      const double mhat = state.m[i][j] / c1;
      const double vhat = state.v[i][j] / c2;
      values[j] -= o.learning_rate * mhat / (std::sqrt(vhat) + o.epsilon);
    }
  }
  params.round_to_float();
  params.bump_version();
}

}  // namespace leader::nn
