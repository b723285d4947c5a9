#pragma once

#include <vector>

namespace apap {

/// s-t max-flow with real capacities on a graph whose terminals are implicit:
/// every node may carry a source and a sink capacity. Solved by growing
/// search trees from both terminals and augmenting along the paths where
/// they meet (Boykov-Kolmogorov), reusing the trees between augmentations.
class MaxFlow {
 public:
  explicit MaxFlow(int nodes);

  int nodes() const { return static_cast<int>(first_.size()); }

  /// u->v with capacity `cap`, v->u with capacity `rev_cap`.
  void add_edge(int u, int v, double cap, double rev_cap = 0.0);
  /// Adds s->v and v->t capacities (accumulates).
  void add_terminal(int v, double source_cap, double sink_cap);

  /// Maximum flow value. Call once.
  double solve();

  /// Nodes reachable from s in the residual graph.
  std::vector<char> source_side() const;
  /// Nodes that can still reach t in the residual graph.
  std::vector<char> sink_side() const;

 private:
  struct Arc {
    int to;
    int next;
    double cap;
  };
  static constexpr int kNone = -1;
  static constexpr int kTerminal = -2;
  static constexpr int kOrphan = -3;

  void set_active(int v);
  void augment(int mid);
  void adopt(int v);

  std::vector<Arc> arcs_;
  std::vector<int> first_;
  std::vector<double> terminal_;  ///< Residual s->v when positive, v->t when negative.
  double flow_ = 0.0;
  double tol_ = 0.0;
  double cap_sum_ = 0.0;

  std::vector<int> parent_;  ///< Arc towards the parent: v->p in the sink tree, v->p (reverse of p->v) in the source tree.
  std::vector<char> sink_;
  std::vector<char> active_;
  std::vector<int> stamp_;
  std::vector<int> dist_;
  std::vector<int> queue_;
  std::size_t queue_head_ = 0;
  std::vector<int> orphans_;
  int time_ = 0;
};

}  // namespace apap
