#pragma once

#include <span>
#include <string>
#include <vector>

#include "fedunlearn/dataset.hpp"
#include "fedunlearn/network.hpp"

namespace fedunlearn {

enum class CurvatureMode { Ggn, FdExact };

/// Per-parameter-element diagonal curvature of the mean loss, shape-congruent
/// with the ParamSet it was computed for.
struct HessianDiag {
  std::vector<ParamSet::Block> blocks;
  CurvatureMode mode = CurvatureMode::Ggn;

  int64_t numel() const;
  const ParamSet::Block* find(const std::string& name) const;
  ParamSet::Block* find(const std::string& name);
};

bool shape_congruent(const HessianDiag& a, const HessianDiag& b);
HessianDiag zeros_diag(const ParamSet& params, CurvatureMode mode = CurvatureMode::Ggn);

/// Diagonal second-order statistics of the mean softmax cross-entropy over
/// the selected samples.
///
/// Ggn: diag( (1/N) sum_n J_n^T H_L(p_n) J_n ) with J_n the Jacobian of the
/// logits w.r.t. the parameters and H_L = diag(p) - p p^T the loss Hessian at
/// the logits. Computed layer-by-layer: for a dense layer with per-sample
/// input a and logit-Jacobian G at its output, the diagonal for weight (o, i)
/// is q_o * a_i^2 and for bias o is q_o, where q_o = Var_{c~p}(G[c][o]) is
/// evaluated in mean-centered form so every value is nonnegative.
///
/// FdExact: central finite differences of the analytic gradient (true Hessian
/// diagonal). Quadratic cost in parameter count; intended for small nets.
///
/// Additive over disjoint sample sets when weighted by sample counts.
/// Throws std::runtime_error naming the offending block if a non-finite value
/// appears.
HessianDiag hessian_diag(const NetworkSpec& spec, const ParamSet& params, const Dataset& data,
                         std::span<const size_t> indices, CurvatureMode mode = CurvatureMode::Ggn);
HessianDiag hessian_diag(const NetworkSpec& spec, const ParamSet& params, const Dataset& data,
                         CurvatureMode mode = CurvatureMode::Ggn);

}  // namespace fedunlearn
