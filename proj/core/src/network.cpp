#include "fedunlearn/network.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "fedunlearn/rng.hpp"

namespace fedunlearn {

NetworkSpec mlp_spec(int64_t input_dim, const std::vector<int64_t>& hidden, int num_classes) {
  NetworkSpec spec;
  spec.num_classes = num_classes;
  int64_t width = input_dim;
  for (int64_t h : hidden) {
    spec.layers.push_back(DenseLayer{width, h, true});
    spec.layers.push_back(ReluLayer{});
    width = h;
  }
  spec.layers.push_back(DenseLayer{width, num_classes, true});
  return spec;
}

void validate_spec(const NetworkSpec& spec) {
  if (spec.num_classes < 2) throw std::invalid_argument("network spec: num_classes must be >= 2");
  if (spec.layers.empty()) throw std::invalid_argument("network spec: no layers");
  int64_t width = -1;
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    if (const auto* d = std::get_if<DenseLayer>(&spec.layers[i])) {
      if (d->in <= 0 || d->out <= 0) throw std::invalid_argument("network spec: dense layer with non-positive width");
      if (width >= 0 && width != d->in) {
        throw std::invalid_argument("network spec: layer " + std::to_string(i) + " expects input width " +
                                    std::to_string(d->in) + " but receives " + std::to_string(width));
      }
      width = d->out;
    }
    // ReLU / Flatten preserve width.
  }
  if (width != spec.num_classes) {
    throw std::invalid_argument("network spec: final width " + std::to_string(width) +
                                " does not match num_classes " + std::to_string(spec.num_classes));
  }
}

int64_t input_width(const NetworkSpec& spec) {
  for (const auto& layer : spec.layers) {
    if (const auto* d = std::get_if<DenseLayer>(&layer)) return d->in;
  }
  throw std::invalid_argument("network spec: no dense layer");
}

int64_t output_width(const NetworkSpec& spec) {
  for (auto it = spec.layers.rbegin(); it != spec.layers.rend(); ++it) {
    if (const auto* d = std::get_if<DenseLayer>(&*it)) return d->out;
  }
  throw std::invalid_argument("network spec: no dense layer");
}

int64_t ParamSet::numel() const {
  int64_t n = 0;
  for (const auto& b : blocks) n += b.tensor.numel();
  return n;
}

const ParamSet::Block* ParamSet::find(const std::string& name) const {
  for (const auto& b : blocks) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

ParamSet::Block* ParamSet::find(const std::string& name) {
  for (auto& b : blocks) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

bool shape_congruent(const ParamSet& a, const ParamSet& b) {
  if (a.blocks.size() != b.blocks.size()) return false;
  for (size_t i = 0; i < a.blocks.size(); ++i) {
    if (a.blocks[i].name != b.blocks[i].name) return false;
    if (!a.blocks[i].tensor.same_shape(b.blocks[i].tensor)) return false;
  }
  return true;
}

bool bit_equal(const ParamSet& a, const ParamSet& b) {
  if (!shape_congruent(a, b)) return false;
  for (size_t i = 0; i < a.blocks.size(); ++i) {
    const auto& va = a.blocks[i].tensor.values;
    const auto& vb = b.blocks[i].tensor.values;
    if (std::memcmp(va.data(), vb.data(), va.size() * sizeof(double)) != 0) return false;
  }
  return true;
}

ParamSet zeros_like(const ParamSet& p) {
  ParamSet z;
  z.rng_seed = p.rng_seed;
  z.blocks.reserve(p.blocks.size());
  for (const auto& b : p.blocks) z.blocks.push_back({b.name, Tensor(b.tensor.shape, 0.0)});
  return z;
}

ParamSet init_params(const NetworkSpec& spec, uint64_t seed) {
  validate_spec(spec);
  ParamSet params;
  params.rng_seed = seed;
  std::mt19937_64 rng(seed);
  int dense_index = 0;
  for (const auto& layer : spec.layers) {
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(d->in));
      Tensor w({d->out, d->in});
      for (auto& v : w.values) v = uniform_range(rng, -bound, bound);
      const std::string base = "dense" + std::to_string(dense_index);
      params.blocks.push_back({base + ".weight", std::move(w)});
      if (d->bias) params.blocks.push_back({base + ".bias", Tensor({d->out}, 0.0)});
      ++dense_index;
    }
  }
  return params;
}

namespace {

void dense_forward(const DenseLayer& d, const Tensor& w, const Tensor* b, const Tensor& in, Tensor& out) {
  const int64_t batch = in.rows();
  out = Tensor({batch, d.out});
  for (int64_t n = 0; n < batch; ++n) {
    const double* x = &in.values[static_cast<size_t>(n * d.in)];
    double* z = &out.values[static_cast<size_t>(n * d.out)];
    for (int64_t o = 0; o < d.out; ++o) {
      const double* wr = &w.values[static_cast<size_t>(o * d.in)];
      double acc = b ? b->values[static_cast<size_t>(o)] : 0.0;
      for (int64_t i = 0; i < d.in; ++i) acc += wr[i] * x[i];
      z[o] = acc;
    }
  }
}

}  // namespace

ForwardTrace forward_trace(const NetworkSpec& spec, const ParamSet& params, const Tensor& batch) {
  validate_spec(spec);
  if (batch.shape.size() != 2) throw std::invalid_argument("forward: batch must be 2-D, got " + shape_str(batch.shape));
  if (batch.row_width() != input_width(spec)) {
    throw std::invalid_argument("forward: batch width " + std::to_string(batch.row_width()) +
                                " does not match network input width " + std::to_string(input_width(spec)));
  }
  ForwardTrace trace;
  trace.activations.reserve(spec.layers.size() + 1);
  trace.activations.push_back(batch);
  int dense_index = 0;
  for (const auto& layer : spec.layers) {
    const Tensor& in = trace.activations.back();
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      const std::string base = "dense" + std::to_string(dense_index);
      const auto* w = params.find(base + ".weight");
      const auto* b = d->bias ? params.find(base + ".bias") : nullptr;
      if (!w || (d->bias && !b)) throw std::invalid_argument("forward: missing parameter block for " + base);
      if (w->tensor.shape != std::vector<int64_t>{d->out, d->in}) {
        throw std::invalid_argument("forward: block " + base + ".weight has shape " + shape_str(w->tensor.shape) +
                                    ", expected [" + std::to_string(d->out) + "," + std::to_string(d->in) + "]");
      }
      Tensor out;
      dense_forward(*d, w->tensor, b ? &b->tensor : nullptr, in, out);
      trace.activations.push_back(std::move(out));
      ++dense_index;
    } else if (std::holds_alternative<ReluLayer>(layer)) {
      Tensor out = in;
      for (auto& v : out.values) v = v > 0.0 ? v : 0.0;
      trace.activations.push_back(std::move(out));
    } else {
      trace.activations.push_back(in);  // flatten: identity on [N, d]
    }
  }
  return trace;
}

Tensor forward(const NetworkSpec& spec, const ParamSet& params, const Tensor& batch) {
  return forward_trace(spec, params, batch).activations.back();
}

}  // namespace fedunlearn
