#include "addpp/poset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <stdexcept>

namespace addpp {

int subset_order(std::uint32_t subset) { return std::popcount(subset); }

namespace {

// Nonempty subsets of {1..d} sorted by (cardinality, lexicographic index
// list).  For d=3: {1},{2},{3},{1,2},{1,3},{2,3},{1,2,3}.
std::vector<std::uint32_t> ranked_subsets(int d) {
  std::vector<std::uint32_t> out;
  out.reserve((std::size_t{1} << d) - 1);
  std::vector<int> comb;
  for (int c = 1; c <= d; ++c) {
    comb.resize(c);
    for (int i = 0; i < c; ++i) comb[i] = i + 1;
    while (true) {
      std::uint32_t mask = 0;
      for (int j : comb) mask |= 1u << (j - 1);
      out.push_back(mask);
      int i = c - 1;
      while (i >= 0 && comb[i] == d - (c - 1 - i)) --i;
      if (i < 0) break;
      ++comb[i];
      for (int j = i + 1; j < c; ++j) comb[j] = comb[j - 1] + 1;
    }
  }
  return out;
}

}  // namespace

SampleSpace SampleSpace::build(int processes, int bins, double duration) {
  if (processes < 1) throw std::invalid_argument("sample space needs at least one process");
  if (processes > 20) throw std::invalid_argument("more than 20 processes is not supported");
  if (bins < 1) throw std::invalid_argument("sample space needs at least one bin");
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
  const std::size_t n_states =
      ((std::size_t{1} << processes) - 1) * static_cast<std::size_t>(bins) + 1;
  if (n_states > 50'000'000) throw std::invalid_argument("sample space too large");

  SampleSpace space;
  space.d_ = processes;
  space.m_ = bins;
  space.t_ = duration;
  space.rank_to_mask_ = ranked_subsets(processes);
  space.mask_to_rank_.assign(std::size_t{1} << processes, -1);
  for (int r = 0; r < static_cast<int>(space.rank_to_mask_.size()); ++r)
    space.mask_to_rank_[space.rank_to_mask_[r]] = r;

  space.states_.reserve(n_states);
  space.states_.push_back(PosetState{0, 1, true});
  for (std::uint32_t mask : space.rank_to_mask_)
    for (int tau = 1; tau <= bins; ++tau)
      space.states_.push_back(PosetState{mask, tau, false});
  return space;
}

int SampleSpace::rank_of_subset(std::uint32_t subset) const {
  if (subset == 0 || subset >= mask_to_rank_.size())
    throw std::invalid_argument("subset out of range");
  return mask_to_rank_[subset];
}

int SampleSpace::index_of(std::uint32_t subset, int bin) const {
  if (bin < 1 || bin > m_) throw std::invalid_argument("bin out of range");
  return index_at(rank_of_subset(subset), bin);
}

int SampleSpace::index_of(const PosetState& s) const {
  if (s.is_bottom) return 0;
  return index_of(s.subset, s.bin);
}

bool SampleSpace::leq(const PosetState& a, const PosetState& b) const {
  if (a.is_bottom) return true;
  if (b.is_bottom) return false;
  return (a.subset & ~b.subset) == 0 && a.bin <= b.bin;
}

PosetState SampleSpace::join(const PosetState& a, const PosetState& b) const {
  if (a.is_bottom || b.is_bottom)
    throw std::invalid_argument("join is not defined for the bottom element");
  return PosetState{a.subset | b.subset, std::max(a.bin, b.bin), false};
}

int SampleSpace::join_index(int a, int b) const {
  const PosetState& sa = states_[a];
  const PosetState& sb = states_[b];
  return index_at(mask_to_rank_[sa.subset | sb.subset], std::max(sa.bin, sb.bin));
}

std::vector<int> SampleSpace::upset_indices(const PosetState& s) const {
  std::vector<int> out;
  if (s.is_bottom) {
    out.resize(states_.size());
    for (int i = 0; i < static_cast<int>(states_.size()); ++i) out[i] = i;
    return out;
  }
  for (int i = 1; i < static_cast<int>(states_.size()); ++i)
    if (leq(s, states_[i])) out.push_back(i);
  return out;
}

std::vector<double> upset_sums(const std::vector<double>& mass,
                               const SampleSpace& space) {
  if (mass.size() != static_cast<std::size_t>(space.size()))
    throw std::invalid_argument("mass vector does not match the sample space");
  const int m = space.bin_count();
  const int n_sub = space.subset_count();
  const std::uint32_t full = static_cast<std::uint32_t>(n_sub);

  // suffix[r*m + (tau-1)] = sum of mass over bins >= tau within subset rank r
  std::vector<long double> suffix(static_cast<std::size_t>(n_sub) * m);
  for (int r = 0; r < n_sub; ++r) {
    long double acc = 0.0L;
    for (int tau = m; tau >= 1; --tau) {
      acc += mass[space.index_at(r, tau)];
      suffix[static_cast<std::size_t>(r) * m + (tau - 1)] = acc;
    }
  }

  std::vector<double> eta(mass.size());
  long double total = mass[0];
  for (int r = 0; r < n_sub; ++r) total += suffix[static_cast<std::size_t>(r) * m];
  eta[0] = static_cast<double>(total);

  for (int r = 0; r < n_sub; ++r) {
    const std::uint32_t mask = space.subset_at_rank(r);
    const std::uint32_t comp = full & ~mask;
    for (int tau = 1; tau <= m; ++tau) {
      long double acc = 0.0L;
      std::uint32_t sub = comp;
      while (true) {
        const int rr = space.rank_of_subset(mask | sub);
        acc += suffix[static_cast<std::size_t>(rr) * m + (tau - 1)];
        if (sub == 0) break;
        sub = (sub - 1) & comp;
      }
      eta[space.index_at(r, tau)] = static_cast<double>(acc);
    }
  }
  return eta;
}

ParamDomain ParamDomain::build(const SampleSpace& space, int max_order) {
  if (max_order < 1) throw std::invalid_argument("interaction order must be at least 1");
  if (max_order > space.process_count())
    throw std::invalid_argument("interaction order exceeds the process count");
  ParamDomain dom;
  dom.k_ = max_order;
  dom.position_.assign(space.size(), -1);
  for (int r = 0; r < space.subset_count(); ++r) {
    if (subset_order(space.subset_at_rank(r)) > max_order) continue;
    for (int tau = 1; tau <= space.bin_count(); ++tau) {
      const int idx = space.index_at(r, tau);
      dom.position_[idx] = static_cast<int>(dom.members_.size());
      dom.members_.push_back(space.state(idx));
      dom.space_index_.push_back(idx);
    }
  }
  return dom;
}

ParamDomain ParamDomain::restricted(const std::vector<char>& keep) const {
  if (keep.size() != members_.size())
    throw std::invalid_argument("keep flags do not match the domain");
  ParamDomain dom;
  dom.k_ = k_;
  dom.position_.assign(position_.size(), -1);
  dom.pruned_ = pruned_;
  for (int i = 0; i < static_cast<int>(members_.size()); ++i) {
    if (!keep[i]) {
      dom.pruned_.push_back(members_[i]);
      continue;
    }
    dom.position_[space_index_[i]] = static_cast<int>(dom.members_.size());
    dom.members_.push_back(members_[i]);
    dom.space_index_.push_back(space_index_[i]);
  }
  return dom;
}

std::string subset_key(std::uint32_t subset) {
  if (subset == 0) throw std::invalid_argument("empty subset has no key");
  std::string out;
  for (int j = 0; subset >> j; ++j) {
    if (!(subset >> j & 1u)) continue;
    if (!out.empty()) out += ',';
    out += std::to_string(j + 1);
  }
  return out;
}

std::uint32_t parse_subset_key(const std::string& key, int processes) {
  std::uint32_t mask = 0;
  const char* p = key.data();
  const char* end = key.data() + key.size();
  while (p < end) {
    int j = 0;
    auto res = std::from_chars(p, end, j);
    if (res.ec != std::errc() || j < 1 || j > processes)
      throw std::invalid_argument("bad subset key: " + key);
    if (mask & (1u << (j - 1)))
      throw std::invalid_argument("duplicate index in subset key: " + key);
    mask |= 1u << (j - 1);
    p = res.ptr;
    if (p < end) {
      if (*p != ',') throw std::invalid_argument("bad subset key: " + key);
      ++p;
      if (p == end) throw std::invalid_argument("bad subset key: " + key);
    }
  }
  if (mask == 0) throw std::invalid_argument("empty subset key");
  return mask;
}

std::string state_key(const PosetState& s) {
  if (s.is_bottom) throw std::invalid_argument("bottom state has no key");
  return subset_key(s.subset) + ':' + std::to_string(s.bin);
}

PosetState parse_state_key(const std::string& key, int processes, int bins) {
  const auto colon = key.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("bad state key: " + key);
  const std::uint32_t mask = parse_subset_key(key.substr(0, colon), processes);
  int bin = 0;
  const char* p = key.data() + colon + 1;
  const char* end = key.data() + key.size();
  auto res = std::from_chars(p, end, bin);
  if (res.ec != std::errc() || res.ptr != end || bin < 1 || bin > bins)
    throw std::invalid_argument("bad state key: " + key);
  return PosetState{mask, bin, false};
}

}  // namespace addpp
