#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rankcom/common.hpp"

namespace rankcom {

/// One stored adjacency entry seen from a node: the other endpoint and the
/// (positive integer) multiplicity of the interaction.
struct Nbr {
  int node;
  long long weight;
};

/// Sparse directed weighted multigraph. Immutable after construction, so it
/// is safe to share across parallel workers. Self-loops are never stored;
/// absent pairs mean A_ij = 0.
class DirectedWeightedGraph {
 public:
  /// Builds from (src, dst, weight) triples. Entries with src == dst are
  /// dropped (counted in `self_loops_dropped`), duplicates are summed.
  DirectedWeightedGraph(int n_nodes, const std::vector<std::tuple<int, int, long long>>& entries,
                        std::vector<std::string> labels = {});

  int n_nodes() const { return n_; }
  std::size_t n_entries() const { return out_flat_.size(); }
  long long total_weight() const { return total_weight_; }
  int self_loops_dropped() const { return self_loops_dropped_; }

  /// Out-going entries of node i, sorted by target; O(out-degree) access.
  std::span<const Nbr> out(int i) const {
    return {out_flat_.data() + out_ptr_[static_cast<std::size_t>(i)],
            out_flat_.data() + out_ptr_[static_cast<std::size_t>(i) + 1]};
  }
  /// In-coming entries of node i (Nbr::node is the source), sorted by source.
  std::span<const Nbr> in(int i) const {
    return {in_flat_.data() + in_ptr_[static_cast<std::size_t>(i)],
            in_flat_.data() + in_ptr_[static_cast<std::size_t>(i) + 1]};
  }

  /// A_ij, by binary search in row i. O(log out-degree).
  long long weight(int i, int j) const;

  const std::vector<std::string>& labels() const { return labels_; }

 private:
  int n_ = 0;
  std::vector<Nbr> out_flat_, in_flat_;
  std::vector<std::size_t> out_ptr_, in_ptr_;
  std::vector<std::string> labels_;
  long long total_weight_ = 0;
  int self_loops_dropped_ = 0;
};

/// Reads an edge list: one `source<sep>target[<sep>weight]` per line with
/// sep in {tab, comma, space}; `#` lines are comments; a leading
/// `source<sep>target...` header row is skipped. Node labels are arbitrary
/// strings mapped to dense indices in first-appearance order; repeated rows
/// sum their weights. Throws std::runtime_error with the offending line
/// number on malformed rows or non-positive / non-integer weights.
DirectedWeightedGraph load_edge_list(const std::string& path);

/// Writes the graph in the same format (tab-separated, using node labels).
void save_edge_list(const DirectedWeightedGraph& g, const std::string& path);

struct DegreeStats {
  double mean_degree = 0.0;  // total weight / N
  Vec in_degree;             // weighted
  Vec out_degree;
};

DegreeStats degree_stats(const DirectedWeightedGraph& g);

/// Set of ordered off-diagonal pairs hidden from every training sum and
/// scored at test time.
class EntryMask {
 public:
  EntryMask() = default;
  EntryMask(int n_nodes, std::vector<std::pair<int, int>> pairs);

  int n_nodes() const { return n_; }
  std::size_t size() const { return count_; }
  bool contains(int i, int j) const;

  /// Targets j of hidden pairs (i, j), sorted.
  std::span<const int> hidden_out(int i) const {
    return {out_[static_cast<std::size_t>(i)].data(), out_[static_cast<std::size_t>(i)].size()};
  }
  /// Sources j of hidden pairs (j, i), sorted.
  std::span<const int> hidden_in(int i) const {
    return {in_[static_cast<std::size_t>(i)].data(), in_[static_cast<std::size_t>(i)].size()};
  }

  std::vector<std::pair<int, int>> pairs() const;

  void save_json(const std::string& path) const;
  static EntryMask load_json(const std::string& path, int n_nodes);

 private:
  int n_ = 0;
  std::size_t count_ = 0;
  std::vector<std::vector<int>> out_, in_;
};

/// Partitions all N(N-1) ordered off-diagonal pairs (zero and nonzero
/// entries alike) into k near-equal masks, deterministically for a given
/// seed. The masks are pairwise disjoint and cover every pair exactly once.
std::vector<EntryMask> make_folds(const DirectedWeightedGraph& g, int k_folds, std::uint64_t seed);

/// Mask-aware adjacency view used by every training-time computation. Raw
/// values of hidden entries are only reachable through weight_checked(),
/// which counts such reads; a fit that never leaks test data reports zero.
class GraphView {
 public:
  explicit GraphView(const DirectedWeightedGraph& g, const EntryMask* mask = nullptr)
      : g_(&g), mask_(mask) {}

  int n() const { return g_->n_nodes(); }
  const DirectedWeightedGraph& graph() const { return *g_; }
  const EntryMask* mask() const { return mask_; }

  bool is_hidden(int i, int j) const { return mask_ != nullptr && mask_->contains(i, j); }

  template <class F>
  void for_train_out(int i, F&& f) const {
    for (const Nbr& e : g_->out(i)) {
      if (!is_hidden(i, e.node)) f(e.node, e.weight);
    }
  }
  template <class F>
  void for_train_in(int i, F&& f) const {
    for (const Nbr& e : g_->in(i)) {
      if (!is_hidden(e.node, i)) f(e.node, e.weight);
    }
  }

  /// A_ij if (i,j) is visible; 0 otherwise. Reads of hidden entries are
  /// counted as mask violations.
  long long weight_checked(int i, int j) const {
    if (is_hidden(i, j)) {
      masked_reads_.fetch_add(1, std::memory_order_relaxed);
      return 0;
    }
    return g_->weight(i, j);
  }

  std::uint64_t masked_reads() const { return masked_reads_.load(std::memory_order_relaxed); }

  long long train_total_weight() const;
  /// Number of visible ordered off-diagonal pairs: N(N-1) - |mask|.
  long long train_pair_count() const;

 private:
  const DirectedWeightedGraph* g_;
  const EntryMask* mask_;
  mutable std::atomic<std::uint64_t> masked_reads_{0};
};

}  // namespace rankcom
