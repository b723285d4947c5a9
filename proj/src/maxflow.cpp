#include "apap/maxflow.hpp"

#include <algorithm>
#include <climits>
#include <cmath>

#include "apap/error.hpp"

namespace apap {

MaxFlow::MaxFlow(int nodes) {
  if (nodes < 1) throw InvalidInput("MaxFlow: need at least one node");
  first_.assign(static_cast<std::size_t>(nodes), -1);
  terminal_.assign(static_cast<std::size_t>(nodes), 0.0);
}

void MaxFlow::add_edge(int u, int v, double cap, double rev_cap) {
  if (u < 0 || v < 0 || u >= nodes() || v >= nodes()) throw InvalidInput("MaxFlow: node out of range");
  if (u == v) throw InvalidInput("MaxFlow: self loop");
  if (!(cap >= 0.0) || !(rev_cap >= 0.0) || !std::isfinite(cap) || !std::isfinite(rev_cap))
    throw InvalidInput("MaxFlow: capacities must be finite and non-negative");
  arcs_.push_back({v, first_[u], cap});
  first_[u] = static_cast<int>(arcs_.size()) - 1;
  arcs_.push_back({u, first_[v], rev_cap});
  first_[v] = static_cast<int>(arcs_.size()) - 1;
  cap_sum_ += cap + rev_cap;
}

void MaxFlow::add_terminal(int v, double source_cap, double sink_cap) {
  if (v < 0 || v >= nodes()) throw InvalidInput("MaxFlow: node out of range");
  if (!(source_cap >= 0.0) || !(sink_cap >= 0.0) || !std::isfinite(source_cap) || !std::isfinite(sink_cap))
    throw InvalidInput("MaxFlow: capacities must be finite and non-negative");
  double& r = terminal_[v];
  if (r > 0.0)
    source_cap += r;
  else
    sink_cap -= r;
  flow_ += std::min(source_cap, sink_cap);
  r = source_cap - sink_cap;
  cap_sum_ += source_cap + sink_cap;
}

void MaxFlow::set_active(int v) {
  if (active_[v]) return;
  active_[v] = 1;
  queue_.push_back(v);
}

void MaxFlow::augment(int mid) {
  const int u = arcs_[mid ^ 1].to, v = arcs_[mid].to;

  double f = arcs_[mid].cap;
  for (int x = u;;) {
    const int e = parent_[x];
    if (e == kTerminal) {
      f = std::min(f, terminal_[x]);
      break;
    }
    f = std::min(f, arcs_[e ^ 1].cap);
    x = arcs_[e].to;
  }
  for (int x = v;;) {
    const int e = parent_[x];
    if (e == kTerminal) {
      f = std::min(f, -terminal_[x]);
      break;
    }
    f = std::min(f, arcs_[e].cap);
    x = arcs_[e].to;
  }

  arcs_[mid].cap -= f;
  arcs_[mid ^ 1].cap += f;
  for (int x = u;;) {
    const int e = parent_[x];
    if (e == kTerminal) {
      terminal_[x] -= f;
      if (terminal_[x] <= tol_) {
        parent_[x] = kOrphan;
        orphans_.push_back(x);
      }
      break;
    }
    arcs_[e].cap += f;
    arcs_[e ^ 1].cap -= f;
    const int next = arcs_[e].to;
    if (arcs_[e ^ 1].cap <= tol_) {
      parent_[x] = kOrphan;
      orphans_.push_back(x);
    }
    x = next;
  }
  for (int x = v;;) {
    const int e = parent_[x];
    if (e == kTerminal) {
      terminal_[x] += f;
      if (terminal_[x] >= -tol_) {
        parent_[x] = kOrphan;
        orphans_.push_back(x);
      }
      break;
    }
    arcs_[e].cap -= f;
    arcs_[e ^ 1].cap += f;
    const int next = arcs_[e].to;
    if (arcs_[e].cap <= tol_) {
      parent_[x] = kOrphan;
      orphans_.push_back(x);
    }
    x = next;
  }
  flow_ += f;
}

void MaxFlow::adopt(int x) {
  const bool sink = sink_[x];
  int best = kNone;
  int dmin = INT_MAX;
  for (int e = first_[x]; e != -1; e = arcs_[e].next) {
    const double residual = sink ? arcs_[e].cap : arcs_[e ^ 1].cap;
    if (!(residual > tol_)) continue;
    const int q = arcs_[e].to;
    if (parent_[q] == kNone || static_cast<bool>(sink_[q]) != sink) continue;
    int d = 0;
    bool rooted = false;
    for (int j = q;;) {
      if (stamp_[j] == time_) {
        d += dist_[j];
        rooted = true;
        break;
      }
      const int pe = parent_[j];
      ++d;
      if (pe == kTerminal) {
        stamp_[j] = time_;
        dist_[j] = 1;
        rooted = true;
        break;
      }
      if (pe == kOrphan) break;
      j = arcs_[pe].to;
    }
    if (!rooted) continue;
    if (d < dmin) {
      best = e;
      dmin = d;
    }
    for (int j = q; stamp_[j] != time_; j = arcs_[parent_[j]].to) {
      stamp_[j] = time_;
      dist_[j] = d--;
    }
  }

  if (best != kNone) {
    parent_[x] = best;
    stamp_[x] = time_;
    dist_[x] = dmin + 1;
    return;
  }

  for (int e = first_[x]; e != -1; e = arcs_[e].next) {
    const int q = arcs_[e].to;
    const int pe = parent_[q];
    if (pe == kNone || static_cast<bool>(sink_[q]) != sink) continue;
    const double residual = sink ? arcs_[e].cap : arcs_[e ^ 1].cap;
    if (residual > tol_) set_active(q);
    if (pe != kTerminal && pe != kOrphan && arcs_[pe].to == x) {
      parent_[q] = kOrphan;
      orphans_.push_back(q);
    }
  }
  parent_[x] = kNone;
  stamp_[x] = 0;
}

double MaxFlow::solve() {
  if (!parent_.empty()) throw InvalidInput("MaxFlow: solve called twice");
  const std::size_t n = first_.size();
  tol_ = 1e-12 * std::max(cap_sum_, 1e-300);
  parent_.assign(n, kNone);
  sink_.assign(n, 0);
  active_.assign(n, 0);
  stamp_.assign(n, 0);
  dist_.assign(n, 0);
  queue_.clear();
  queue_head_ = 0;
  time_ = 0;

  for (std::size_t i = 0; i < n; ++i) {
    const int v = static_cast<int>(i);
    if (terminal_[i] > tol_) {
      sink_[i] = 0;
    } else if (terminal_[i] < -tol_) {
      sink_[i] = 1;
    } else {
      continue;
    }
    parent_[i] = kTerminal;
    dist_[i] = 1;
    set_active(v);
  }

  int current = -1;
  while (true) {
    int v = current;
    if (v < 0 || parent_[v] == kNone) {
      v = -1;
      while (queue_head_ < queue_.size()) {
        const int u = queue_[queue_head_++];
        active_[u] = 0;
        if (parent_[u] != kNone) {
          v = u;
          break;
        }
      }
      if (queue_head_ > 4096 && 2 * queue_head_ > queue_.size()) {
        queue_.erase(queue_.begin(), queue_.begin() + static_cast<std::ptrdiff_t>(queue_head_));
        queue_head_ = 0;
      }
      if (v < 0) break;
    }

    int mid = -1;
    for (int e = first_[v]; e != -1; e = arcs_[e].next) {
      const double residual = sink_[v] ? arcs_[e ^ 1].cap : arcs_[e].cap;
      if (!(residual > tol_)) continue;
      const int q = arcs_[e].to;
      if (parent_[q] == kNone) {
        sink_[q] = sink_[v];
        parent_[q] = e ^ 1;
        stamp_[q] = stamp_[v];
        dist_[q] = dist_[v] + 1;
        set_active(q);
      } else if (sink_[q] != sink_[v]) {
        mid = sink_[v] ? e ^ 1 : e;
        break;
      } else if (stamp_[q] <= stamp_[v] && dist_[q] > dist_[v]) {
        parent_[q] = e ^ 1;
        stamp_[q] = stamp_[v];
        dist_[q] = dist_[v] + 1;
      }
    }

    ++time_;
    if (mid < 0) {
      current = -1;
      continue;
    }
    current = v;
    augment(mid);
    for (std::size_t k = 0; k < orphans_.size(); ++k) adopt(orphans_[k]);
    orphans_.clear();
  }
  return flow_;
}

std::vector<char> MaxFlow::source_side() const {
  std::vector<char> seen(first_.size(), 0);
  std::vector<int> stack;
  for (std::size_t i = 0; i < first_.size(); ++i) {
    if (terminal_[i] > tol_) {
      seen[i] = 1;
      stack.push_back(static_cast<int>(i));
    }
  }
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int e = first_[u]; e != -1; e = arcs_[e].next) {
      const int q = arcs_[e].to;
      if (arcs_[e].cap > tol_ && !seen[q]) {
        seen[q] = 1;
        stack.push_back(q);
      }
    }
  }
  return seen;
}

std::vector<char> MaxFlow::sink_side() const {
  std::vector<char> seen(first_.size(), 0);
  std::vector<int> stack;
  for (std::size_t i = 0; i < first_.size(); ++i) {
    if (terminal_[i] < -tol_) {
      seen[i] = 1;
      stack.push_back(static_cast<int>(i));
    }
  }
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int e = first_[v]; e != -1; e = arcs_[e].next) {
      const int u = arcs_[e].to;
      if (arcs_[e ^ 1].cap > tol_ && !seen[u]) {
        seen[u] = 1;
        stack.push_back(u);
      }
    }
  }
  return seen;
}

}  // namespace apap
