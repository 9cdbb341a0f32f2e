#include "fedunlearn/unlearn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "fedunlearn/report.hpp"
#include "fedunlearn/trim.hpp"

namespace fedunlearn {

const ParamSet::Block* InfoScores::find(const std::string& name) const {
  for (const auto& b : blocks) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

size_t ResetMask::selected_count() const {
  size_t n = 0;
  for (const auto& b : blocks) n += static_cast<size_t>(std::count(b.selected.begin(), b.selected.end(), 1));
  return n;
}

const ResetMask::Block* ResetMask::find(const std::string& name) const {
  for (const auto& b : blocks) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

ClientStats client_stats(const NetworkSpec& spec, const ParamSet& trained, const Dataset& data,
                         const Partition& partition, int client, DataAccessLog* log) {
  const auto all = partition.client_samples(client, SampleFilter::All);
  if (all.empty()) throw std::invalid_argument("client_stats: client " + std::to_string(client) + " has no samples");
  if (log) log->entries.push_back({"client_stats", client, all});

  std::vector<size_t> forget_idx;
  std::vector<size_t> retain_idx;
  for (size_t i : all) (partition.forget_flags[i] ? forget_idx : retain_idx).push_back(i);

  ClientStats stats;
  stats.n_forget = forget_idx.size();
  stats.n_retain = retain_idx.size();
  stats.h_forget = forget_idx.empty() ? zeros_diag(trained) : hessian_diag(spec, trained, data, forget_idx);
  stats.h_retain = retain_idx.empty() ? zeros_diag(trained) : hessian_diag(spec, trained, data, retain_idx);
  return stats;
}

std::pair<HessianDiag, HessianDiag> aggregate_hessians(const std::vector<ClientStats>& stats) {
  if (stats.empty()) throw std::invalid_argument("aggregate_hessians: no client statistics");
  size_t n_total = 0;
  size_t n_target = 0;
  for (const auto& s : stats) {
    n_total += s.n_forget + s.n_retain;
    n_target += s.n_forget;
    if (!shape_congruent(s.h_forget, stats.front().h_forget) ||
        !shape_congruent(s.h_retain, stats.front().h_forget)) {
      throw std::invalid_argument("aggregate_hessians: client statistics are not shape-congruent");
    }
  }
  if (n_target == 0) throw std::runtime_error("aggregate_hessians: nothing to forget (no flagged samples)");

  HessianDiag h;
  HessianDiag h_prime;
  h.mode = h_prime.mode = stats.front().h_forget.mode;
  for (const auto& b : stats.front().h_forget.blocks) {
    h.blocks.push_back({b.name, Tensor(b.tensor.shape, 0.0)});
    h_prime.blocks.push_back({b.name, Tensor(b.tensor.shape, 0.0)});
  }
  for (const auto& s : stats) {
    const double nf = static_cast<double>(s.n_forget);
    const double nr = static_cast<double>(s.n_retain);
    for (size_t b = 0; b < h.blocks.size(); ++b) {
      auto& hv = h.blocks[b].tensor.values;
      auto& hp = h_prime.blocks[b].tensor.values;
      const auto& f = s.h_forget.blocks[b].tensor.values;
      const auto& r = s.h_retain.blocks[b].tensor.values;
      for (size_t i = 0; i < hv.size(); ++i) {
        hv[i] += nf * f[i] + nr * r[i];
        hp[i] += nf * f[i];
      }
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n_total);
  const double inv_t = 1.0 / static_cast<double>(n_target);
  for (size_t b = 0; b < h.blocks.size(); ++b) {
    for (auto& v : h.blocks[b].tensor.values) v *= inv_n;
    for (auto& v : h_prime.blocks[b].tensor.values) v *= inv_t;
  }
  return {std::move(h), std::move(h_prime)};
}

InfoScores target_information_score(const HessianDiag& h, const HessianDiag& h_prime, double eps_h) {
  if (!shape_congruent(h, h_prime)) {
    throw std::invalid_argument("target_information_score: h and h_prime are not shape-congruent");
  }
  InfoScores scores;
  scores.blocks.reserve(h.blocks.size());
  for (size_t b = 0; b < h.blocks.size(); ++b) {
    Tensor t(h.blocks[b].tensor.shape, 0.0);
    const auto& hv = h.blocks[b].tensor.values;
    const auto& hp = h_prime.blocks[b].tensor.values;
    for (size_t i = 0; i < t.values.size(); ++i) {
      if (hv[i] > eps_h) {
        const double ratio = hp[i] / hv[i];
        t.values[i] = ratio * ratio;
      }
    }
    scores.blocks.push_back({h.blocks[b].name, std::move(t)});
  }
  return scores;
}

double fisher_total(const HessianDiag& h, const HessianDiag& h_prime, double eps_h) {
  const InfoScores scores = target_information_score(h, h_prime, eps_h);
  double total = 0.0;
  for (const auto& b : scores.blocks) {
    for (double v : b.tensor.values) total += v;
  }
  return total;
}

ResetMask select_reset_mask(const InfoScores& scores, double alpha_removal) {
  if (!(alpha_removal >= 0.0 && alpha_removal <= 1.0)) {
    throw std::invalid_argument("select_reset_mask: alpha_removal must be in [0,1]");
  }
  ResetMask mask;
  mask.alpha_removal = alpha_removal;
  for (const auto& b : scores.blocks) {
    const size_t size = b.tensor.values.size();
    // round half away from zero
    const auto k = static_cast<size_t>(std::llround(alpha_removal * static_cast<double>(size)));
    ResetMask::Block mb;
    mb.name = b.name;
    mb.shape = b.tensor.shape;
    mb.selected.assign(size, 0);
    if (k > 0) {
      std::vector<size_t> order(size);
      std::iota(order.begin(), order.end(), size_t{0});
      std::sort(order.begin(), order.end(), [&](size_t x, size_t y) {
        if (b.tensor.values[x] != b.tensor.values[y]) return b.tensor.values[x] > b.tensor.values[y];
        return x < y;
      });
      for (size_t i = 0; i < std::min(k, size); ++i) mb.selected[order[i]] = 1;
    }
    mask.blocks.push_back(std::move(mb));
  }
  return mask;
}

ParamSet reset_params(const ParamSet& trained, const ParamSet& init_snapshot, const ResetMask& mask) {
  if (!shape_congruent(trained, init_snapshot)) {
    throw std::invalid_argument("reset_params: trained and snapshot are not shape-congruent");
  }
  if (mask.blocks.size() != trained.blocks.size()) {
    throw std::invalid_argument("reset_params: mask is not shape-congruent");
  }
  ParamSet out = trained;
  for (size_t b = 0; b < out.blocks.size(); ++b) {
    const auto& mb = mask.blocks[b];
    if (mb.name != out.blocks[b].name || mb.selected.size() != out.blocks[b].tensor.values.size()) {
      throw std::invalid_argument("reset_params: mask block " + mb.name + " is not congruent");
    }
    const auto& snap = init_snapshot.blocks[b].tensor.values;
    auto& dst = out.blocks[b].tensor.values;
    for (size_t i = 0; i < dst.size(); ++i) {
      if (mb.selected[i]) dst[i] = snap[i];
    }
  }
  return out;
}

void export_scores_csv(const InfoScores& scores, const ResetMask& mask, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_scores_csv: cannot open " + path);
  out << "block,flat_index,tis,selected\n";
  for (size_t b = 0; b < scores.blocks.size(); ++b) {
    const auto& sb = scores.blocks[b];
    const auto* mb = mask.find(sb.name);
    for (size_t i = 0; i < sb.tensor.values.size(); ++i) {
      out << sb.name << ',' << i << ',' << format_double(sb.tensor.values[i]) << ','
          << (mb && mb->selected[i] ? 1 : 0) << '\n';
    }
  }
}

UnlearnResult unlearn_pipeline(const NetworkSpec& spec, const ParamSet& trained, const ParamSet& init_snapshot,
                               const Dataset& data, const Partition& partition, double alpha_removal,
                               const FedConfig& cfg, double eps_h, DataAccessLog* log) {
  const auto start = std::chrono::steady_clock::now();

  std::vector<ClientStats> stats;
  stats.reserve(static_cast<size_t>(partition.n_clients()));
  for (int c = 0; c < partition.n_clients(); ++c) {
    if (partition.client_indices[static_cast<size_t>(c)].empty()) continue;
    stats.push_back(client_stats(spec, trained, data, partition, c, log));
  }

  UnlearnResult result;
  auto [h, h_prime] = aggregate_hessians(stats);
  result.scores = target_information_score(h, h_prime, eps_h);
  result.mask = select_reset_mask(result.scores, alpha_removal);
  result.theta_reset = reset_params(trained, init_snapshot, result.mask);

  TrimState trim = trim_initialize(result.theta_reset, result.mask);
  result.theta_retrained =
      trim_retrain(std::move(trim), spec, data, partition, cfg, log, &result.warnings);

  result.timing.unlearn_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace fedunlearn
