#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace addpp {

// One element of the sample space: a nonempty set of process indices plus a
// time-bin index, or the unique least element.
struct PosetState {
  std::uint32_t subset = 0;  // bit j-1 set <=> process j in the subset
  int bin = 1;               // 1..M
  bool is_bottom = false;

  friend bool operator==(const PosetState&, const PosetState&) = default;
};

int subset_order(std::uint32_t subset);

// The partially ordered sample space: all (subset, bin) pairs with a nonempty
// subset, plus the least element at index 0.  State order is deterministic for
// fixed (D, M): bottom first, then sorted by (|J|, lexicographic J, bin).
class SampleSpace {
 public:
  static SampleSpace build(int processes, int bins, double duration);

  int process_count() const { return d_; }
  int bin_count() const { return m_; }
  double duration() const { return t_; }
  int size() const { return static_cast<int>(states_.size()); }
  const std::vector<PosetState>& states() const { return states_; }
  const PosetState& state(int index) const { return states_[index]; }
  int bottom_index() const { return 0; }

  // Nonempty subsets in (|J|, lex J) order; rank is 0-based.
  int subset_count() const { return (1 << d_) - 1; }
  std::uint32_t subset_at_rank(int rank) const { return rank_to_mask_[rank]; }
  int rank_of_subset(std::uint32_t subset) const;

  int index_of(std::uint32_t subset, int bin) const;
  int index_of(const PosetState& s) const;
  int index_at(int rank, int bin) const { return 1 + rank * m_ + (bin - 1); }

  bool leq(const PosetState& a, const PosetState& b) const;
  PosetState join(const PosetState& a, const PosetState& b) const;
  int join_index(int a, int b) const;
  std::vector<int> upset_indices(const PosetState& s) const;

  double bin_center(int bin) const { return (bin - 0.5) * t_ / m_; }
  double bin_width() const { return t_ / m_; }

 private:
  int d_ = 0;
  int m_ = 0;
  double t_ = 0.0;
  std::vector<PosetState> states_;
  std::vector<int> mask_to_rank_;  // 2^D entries, -1 for the empty set
  std::vector<std::uint32_t> rank_to_mask_;
};

// Sum of `mass` over the up-set of every state, indexed like space.states().
// Suffix sums along bins followed by superset accumulation keep the cost
// linear in the number of bins.
std::vector<double> upset_sums(const std::vector<double>& mass,
                               const SampleSpace& space);

// The parameter domain: states with 1 <= |subset| <= k, in space order.
// Pruned members (removed because their empirical expectation vanished) are
// carried along rather than silently dropped.
class ParamDomain {
 public:
  static ParamDomain build(const SampleSpace& space, int max_order);

  int max_order() const { return k_; }
  int size() const { return static_cast<int>(members_.size()); }
  const std::vector<PosetState>& members() const { return members_; }
  const PosetState& member(int i) const { return members_[i]; }
  int space_index(int i) const { return space_index_[i]; }
  // Position of a space state inside the domain, -1 if absent.
  int position_of_space_index(int idx) const { return position_[idx]; }
  const std::vector<PosetState>& pruned() const { return pruned_; }

  // Domain restricted to members with keep[i] true; removed members are
  // appended to the pruned list.
  ParamDomain restricted(const std::vector<char>& keep) const;

 private:
  int k_ = 0;
  std::vector<PosetState> members_;
  std::vector<int> space_index_;
  std::vector<int> position_;
  std::vector<PosetState> pruned_;
};

// Canonical text keys: subsets as sorted comma-joined indices ("1,3"),
// states as "subset:bin" ("1,3:7").
std::string subset_key(std::uint32_t subset);
std::uint32_t parse_subset_key(const std::string& key, int processes);
std::string state_key(const PosetState& s);
PosetState parse_state_key(const std::string& key, int processes, int bins);

}  // namespace addpp
