#include "untangle/replay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace untangle {

std::string_view to_string(BufferId b) {
  switch (b) {
    case BufferId::safe: return "safe";
    case BufferId::risky: return "risky";
    case BufferId::neutral: return "neutral";
  }
  return "unknown";
}

BufferId classify_risk(double risk, const RiskCoeffs& c) {
  if (!std::isfinite(risk)) return BufferId::risky;
  if (risk < c.tau_low) return BufferId::safe;
  if (risk >= c.tau_high) return BufferId::risky;
  return BufferId::neutral;
}

double replay_omega(std::uint64_t n_entangle, std::uint64_t n_total, double omega_min,
                    double omega_max) {
  if (n_total == 0) return omega_min;
  const double frac = static_cast<double>(n_entangle) / static_cast<double>(n_total);
  return omega_min + (omega_max - omega_min) * std::clamp(frac, 0.0, 1.0);
}

void DualReplay::SumTree::resize(std::size_t n) {
  leaves = 1;
  while (leaves < n) leaves <<= 1;
  td.assign(2 * leaves, 0.0);
  risk.assign(2 * leaves, 0.0);
}

void DualReplay::SumTree::set(std::size_t leaf, double td_value, double risk_value) {
  std::size_t i = leaves + leaf;
  td[i] = td_value;
  risk[i] = risk_value;
  for (i >>= 1; i >= 1; i >>= 1) {
    td[i] = td[2 * i] + td[2 * i + 1];
    risk[i] = risk[2 * i] + risk[2 * i + 1];
  }
}

std::size_t DualReplay::SumTree::find(double u, double omega) const {
  std::size_t i = 1;
  while (i < leaves) {
    const std::size_t l = 2 * i;
    const double left = (1.0 - omega) * td[l] + omega * risk[l];
    const double right = (1.0 - omega) * td[l + 1] + omega * risk[l + 1];
    if (right <= 0.0 || (u < left && left > 0.0)) {
      i = l;
    } else {
      u -= left;
      i = l + 1;
    }
  }
  return i - leaves;
}

DualReplay::DualReplay(ReplayConfig config, RiskCoeffs coeffs)
    : config_(config), coeffs_(coeffs) {
  coeffs_.validate();
  if (config_.omega_min < 0.0 || config_.omega_max > 1.0 || config_.omega_min > config_.omega_max) {
    throw std::invalid_argument("replay omega bounds must satisfy 0 <= min <= max <= 1");
  }
  std::size_t offset = 0;
  for (int b = 0; b < 3; ++b) {
    if (config_.capacities[b] == 0) throw std::invalid_argument("replay capacity must be positive");
    buffers_[b].capacity = config_.capacities[b];
    buffers_[b].offset = offset;
    buffers_[b].items.reserve(std::min<std::size_t>(config_.capacities[b], 4096));
    offset += config_.capacities[b];
  }
  tree_.resize(offset);
}

BufferId DualReplay::classify_and_store(Experience e) {
  const BufferId id = classify_risk(e.topo_risk, coeffs_);
  double risk_score = e.topo_risk;
  if (!std::isfinite(risk_score)) {
    ++non_finite_;
    risk_score = coeffs_.tau_high;
  }
  risk_score = std::max(risk_score, 0.0);
  e.td_error = max_priority_;
  ++n_total_;
  if (e.entangled) ++n_entangle_;

  Ring& ring = buffers_[static_cast<int>(id)];
  const std::size_t slot = ring.head;
  if (ring.items.size() < ring.capacity) {
    ring.items.push_back(std::move(e));
  } else {
    ring.items[slot] = std::move(e);
  }
  ring.head = (ring.head + 1) % ring.capacity;
  ring.count = std::min(ring.count + 1, ring.capacity);
  tree_.set(ring.offset + slot, max_priority_, risk_score);
  return id;
}

const Experience& DualReplay::at(ReplaySlot s) const {
  const Ring& ring = buffers_[static_cast<int>(s.buffer)];
  if (s.index >= ring.count) throw std::out_of_range("replay slot not occupied");
  return ring.items[s.index];
}

void DualReplay::update_td_error(ReplaySlot s, double td_error) {
  Ring& ring = buffers_[static_cast<int>(s.buffer)];
  if (s.index >= ring.count) throw std::out_of_range("replay slot not occupied");
  double v = std::abs(td_error);
  if (!std::isfinite(v)) v = max_priority_;
  ring.items[s.index].td_error = v;
  max_priority_ = std::max(max_priority_, v);
  const std::size_t leaf = ring.offset + s.index;
  tree_.set(leaf, v, tree_.risk[tree_.leaves + leaf]);
}

ReplaySlot DualReplay::slot_of(std::size_t leaf) const {
  for (int b = 2; b >= 0; --b) {
    if (leaf >= buffers_[b].offset) return {static_cast<BufferId>(b), leaf - buffers_[b].offset};
  }
  return {};
}

double DualReplay::omega() const {
  return replay_omega(n_entangle_, n_total_, config_.omega_min, config_.omega_max);
}

std::size_t DualReplay::size() const {
  return buffers_[0].count + buffers_[1].count + buffers_[2].count;
}

double DualReplay::priority_score(ReplaySlot s) const {
  return tree_.leaf_score(leaf_of(s), omega());
}

std::vector<std::pair<ReplaySlot, double>> DualReplay::probabilities() const {
  std::vector<std::pair<ReplaySlot, double>> out;
  const double w = omega();
  const bool uniform = !config_.prioritized || !(tree_.total(w) > 0.0);
  double total = 0.0;
  for (int b = 0; b < 3; ++b) {
    for (std::size_t i = 0; i < buffers_[b].count; ++i) {
      const ReplaySlot s{static_cast<BufferId>(b), i};
      const double score = uniform ? 1.0 : tree_.leaf_score(leaf_of(s), w);
      out.emplace_back(s, score);
      total += score;
    }
  }
  for (auto& [slot, p] : out) p /= total;
  return out;
}

ReplaySample DualReplay::sample(std::size_t batch, std::mt19937_64& rng) const {
  ReplaySample out;
  const std::size_t m = size();
  out.omega = omega();
  out.partial = m < batch;
  const std::size_t n = std::min(batch, m);
  if (n == 0) return out;

  const double w = out.omega;
  const double total = tree_.total(w);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  if (!config_.prioritized || !(total > 0.0)) {
    std::vector<ReplaySlot> all;
    all.reserve(m);
    for (int b = 0; b < 3; ++b) {
      for (std::size_t i = 0; i < buffers_[b].count; ++i) all.push_back({static_cast<BufferId>(b), i});
    }
    for (std::size_t k = 0; k < n; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, m - 1);
      std::swap(all[k], all[pick(rng)]);
      out.slots.push_back(all[k]);
      out.probabilities.push_back(1.0 / static_cast<double>(m));
      out.weights.push_back(1.0);
    }
    return out;
  }

  std::vector<std::size_t> taken;
  std::vector<std::pair<double, double>> saved;
  taken.reserve(n);
  saved.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double remaining = tree_.total(w);
    if (!(remaining > 0.0)) break;
    const std::size_t leaf = tree_.find(unit(rng) * remaining, w);
    const double score = tree_.leaf_score(leaf, w);
    out.slots.push_back(slot_of(leaf));
    out.probabilities.push_back(score / total);
    taken.push_back(leaf);
    saved.emplace_back(tree_.td[tree_.leaves + leaf], tree_.risk[tree_.leaves + leaf]);
    tree_.set(leaf, 0.0, 0.0);
  }
  for (std::size_t k = taken.size(); k-- > 0;) {
    tree_.set(taken[k], saved[k].first, saved[k].second);
  }

  double max_w = 0.0;
  for (double p : out.probabilities) {
    const double wi = std::pow(static_cast<double>(m) * p, -config_.beta_is);
    out.weights.push_back(wi);
    max_w = std::max(max_w, wi);
  }
  for (double& wi : out.weights) wi /= max_w;
  if (out.slots.size() < batch) out.partial = true;
  return out;
}

void DualReplay::restore_counters(std::uint64_t n_entangle, std::uint64_t n_total,
                                  std::uint64_t non_finite, double max_priority) {
  n_entangle_ = n_entangle;
  n_total_ = n_total;
  non_finite_ = non_finite;
  max_priority_ = max_priority;
}

}  // namespace untangle
