#include "fedunlearn/curvature.hpp"

#include <cmath>
#include <stdexcept>
#include <variant>

#include "fedunlearn/train.hpp"

namespace fedunlearn {

int64_t HessianDiag::numel() const {
  int64_t n = 0;
  for (const auto& b : blocks) n += b.tensor.numel();
  return n;
}

const ParamSet::Block* HessianDiag::find(const std::string& name) const {
  for (const auto& b : blocks) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

ParamSet::Block* HessianDiag::find(const std::string& name) {
  for (auto& b : blocks) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

bool shape_congruent(const HessianDiag& a, const HessianDiag& b) {
  if (a.blocks.size() != b.blocks.size()) return false;
  for (size_t i = 0; i < a.blocks.size(); ++i) {
    if (a.blocks[i].name != b.blocks[i].name) return false;
    if (!a.blocks[i].tensor.same_shape(b.blocks[i].tensor)) return false;
  }
  return true;
}

HessianDiag zeros_diag(const ParamSet& params, CurvatureMode mode) {
  HessianDiag h;
  h.mode = mode;
  h.blocks.reserve(params.blocks.size());
  for (const auto& b : params.blocks) h.blocks.push_back({b.name, Tensor(b.tensor.shape, 0.0)});
  return h;
}

namespace {

constexpr size_t kChunk = 256;  // samples per forward trace

void check_finite(const HessianDiag& h) {
  for (const auto& b : h.blocks) {
    if (!b.tensor.all_finite()) {
      throw std::runtime_error("hessian_diag: non-finite curvature in block " + b.name);
    }
  }
}

HessianDiag ggn_diag(const NetworkSpec& spec, const ParamSet& params, const Dataset& data,
                     std::span<const size_t> indices) {
  HessianDiag acc = zeros_diag(params, CurvatureMode::Ggn);
  const int64_t c = spec.num_classes;

  // Dense layer positions, top to bottom, with the index of their ParamSet blocks.
  struct DensePos {
    int layer;
    DenseLayer d;
    int dense_index;
  };
  std::vector<DensePos> dense_layers;
  {
    int di = 0;
    for (size_t l = 0; l < spec.layers.size(); ++l) {
      if (const auto* d = std::get_if<DenseLayer>(&spec.layers[l])) {
        dense_layers.push_back({static_cast<int>(l), *d, di++});
      }
    }
  }
  const int lowest_dense = dense_layers.front().layer;

  std::vector<double> g;       // logit Jacobian w.r.t. current layer output, row-major [c x width]
  std::vector<double> g_next;  // propagated Jacobian
  std::vector<size_t> chunk_idx;

  for (size_t start = 0; start < indices.size(); start += kChunk) {
    const size_t stop = std::min(indices.size(), start + kChunk);
    chunk_idx.assign(indices.begin() + static_cast<ptrdiff_t>(start), indices.begin() + static_cast<ptrdiff_t>(stop));
    const Tensor batch = gather_rows(data.features, chunk_idx);
    const ForwardTrace trace = forward_trace(spec, params, batch);
    const Tensor probs = softmax_rows(trace.logits());

    for (size_t smp = 0; smp < chunk_idx.size(); ++smp) {
      const double* p = &probs.values[smp * static_cast<size_t>(c)];
      // G starts as the identity at the logits.
      int64_t width = c;
      g.assign(static_cast<size_t>(c * c), 0.0);
      for (int64_t j = 0; j < c; ++j) g[static_cast<size_t>(j * c + j)] = 1.0;

      int dense_cursor = static_cast<int>(dense_layers.size()) - 1;
      for (int l = static_cast<int>(spec.layers.size()) - 1; l >= lowest_dense; --l) {
        const Tensor& in = trace.activations[static_cast<size_t>(l)];
        if (const auto* d = std::get_if<DenseLayer>(&spec.layers[static_cast<size_t>(l)])) {
          const int di = dense_layers[static_cast<size_t>(dense_cursor)].dense_index;
          const std::string base = "dense" + std::to_string(di);
          Tensor& hw = acc.find(base + ".weight")->tensor;
          Tensor* hb = d->bias ? &acc.find(base + ".bias")->tensor : nullptr;
          const double* a = &in.values[smp * static_cast<size_t>(d->in)];

          for (int64_t o = 0; o < d->out; ++o) {
            // q_o = Var_{c~p}(G[c][o]), computed mean-centered so q_o >= 0.
            double mu = 0.0;
            for (int64_t cc = 0; cc < c; ++cc) mu += p[cc] * g[static_cast<size_t>(cc * width + o)];
            double q = 0.0;
            for (int64_t cc = 0; cc < c; ++cc) {
              const double dev = g[static_cast<size_t>(cc * width + o)] - mu;
              q += p[cc] * dev * dev;
            }
            double* hwr = &hw.values[static_cast<size_t>(o * d->in)];
            for (int64_t i = 0; i < d->in; ++i) hwr[i] += q * a[i] * a[i];
            if (hb) hb->values[static_cast<size_t>(o)] += q;
          }

          if (l > lowest_dense) {
            const Tensor& w = params.find(base + ".weight")->tensor;
            g_next.assign(static_cast<size_t>(c * d->in), 0.0);
            for (int64_t cc = 0; cc < c; ++cc) {
              const double* grow = &g[static_cast<size_t>(cc * width)];
              double* nrow = &g_next[static_cast<size_t>(cc * d->in)];
              for (int64_t o = 0; o < d->out; ++o) {
                const double gv = grow[o];
                if (gv == 0.0) continue;
                const double* wr = &w.values[static_cast<size_t>(o * d->in)];
                for (int64_t i = 0; i < d->in; ++i) nrow[i] += gv * wr[i];
              }
            }
            g.swap(g_next);
            width = d->in;
          }
          --dense_cursor;
        } else if (std::holds_alternative<ReluLayer>(spec.layers[static_cast<size_t>(l)])) {
          const double* x = &in.values[smp * static_cast<size_t>(width)];
          for (int64_t j = 0; j < width; ++j) {
            if (!(x[j] > 0.0)) {
              for (int64_t cc = 0; cc < c; ++cc) g[static_cast<size_t>(cc * width + j)] = 0.0;
            }
          }
        }
        // flatten: identity
      }
    }
  }

  const double inv_n = 1.0 / static_cast<double>(indices.size());
  for (auto& b : acc.blocks) {
    for (auto& v : b.tensor.values) v *= inv_n;
  }
  return acc;
}

HessianDiag fd_exact_diag(const NetworkSpec& spec, const ParamSet& params, const Dataset& data,
                          std::span<const size_t> indices) {
  constexpr double kStep = 1e-5;
  const Tensor batch = gather_rows(data.features, indices);
  const std::vector<int> labels = gather_labels(data.labels, indices);

  HessianDiag h = zeros_diag(params, CurvatureMode::FdExact);
  ParamSet probe = params;
  for (size_t b = 0; b < params.blocks.size(); ++b) {
    for (size_t i = 0; i < params.blocks[b].tensor.values.size(); ++i) {
      const double original = probe.blocks[b].tensor.values[i];
      probe.blocks[b].tensor.values[i] = original + kStep;
      const double g_plus = loss_and_grad(spec, probe, batch, labels).grad.blocks[b].tensor.values[i];
      probe.blocks[b].tensor.values[i] = original - kStep;
      const double g_minus = loss_and_grad(spec, probe, batch, labels).grad.blocks[b].tensor.values[i];
      probe.blocks[b].tensor.values[i] = original;
      h.blocks[b].tensor.values[i] = (g_plus - g_minus) / (2.0 * kStep);
    }
  }
  return h;
}

}  // namespace

HessianDiag hessian_diag(const NetworkSpec& spec, const ParamSet& params, const Dataset& data,
                         std::span<const size_t> indices, CurvatureMode mode) {
  if (indices.empty()) throw std::invalid_argument("hessian_diag: empty sample set");
  HessianDiag h = mode == CurvatureMode::Ggn ? ggn_diag(spec, params, data, indices)
                                             : fd_exact_diag(spec, params, data, indices);
  check_finite(h);
  return h;
}

HessianDiag hessian_diag(const NetworkSpec& spec, const ParamSet& params, const Dataset& data, CurvatureMode mode) {
  const auto idx = all_indices(static_cast<size_t>(data.size()));
  return hessian_diag(spec, params, data, idx, mode);
}

}  // namespace fedunlearn
