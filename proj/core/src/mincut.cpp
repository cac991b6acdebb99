#include "pss/mincut.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "pss/common.hpp"

namespace pss {

double BinaryMrf::energy(std::span<const std::uint8_t> labels) const {
  if (labels.size() != unary.size()) throw InputError("labeling size does not match the MRF");
  double e = 0.0;
  for (std::size_t i = 0; i < unary.size(); ++i) e += unary[i][labels[i] ? 1 : 0];
  for (const auto& edge : edges)
    if ((labels[edge.a] != 0) != (labels[edge.b] != 0)) e += edge.weight;
  return e;
}

namespace {

class Dinic {
 public:
  explicit Dinic(std::size_t n) : head_(n, -1), level_(n), iter_(n) {}

  void add_edge(int u, int v, double cap, double rev_cap) {
    arcs_.push_back({v, head_[u], cap});
    head_[u] = static_cast<int>(arcs_.size()) - 1;
    arcs_.push_back({u, head_[v], rev_cap});
    head_[v] = static_cast<int>(arcs_.size()) - 1;
  }

  void run(int s, int t, double eps) {
    eps_ = eps;
    while (bfs(s, t)) {
      iter_ = head_;
      while (dfs(s, t, std::numeric_limits<double>::infinity()) > eps_) {
      }
    }
  }

  /// Nodes that can still reach t through arcs with residual capacity.
  std::vector<std::uint8_t> reaches_sink(int t) const {
    std::vector<std::uint8_t> mark(head_.size(), 0);
    std::vector<int> stack{t};
    mark[t] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      // Arc e runs v -> u; its twin e^1 runs u -> v with residual arcs_[e^1].cap.
      for (int e = head_[v]; e >= 0; e = arcs_[e].next) {
        const int u = arcs_[e].to;
        if (!mark[u] && arcs_[e ^ 1].cap > eps_) {
          mark[u] = 1;
          stack.push_back(u);
        }
      }
    }
    return mark;
  }

 private:
  struct Arc {
    int to;
    int next;
    double cap;
  };

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int e = head_[v]; e >= 0; e = arcs_[e].next)
        if (arcs_[e].cap > eps_ && level_[arcs_[e].to] < 0) {
          level_[arcs_[e].to] = level_[v] + 1;
          q.push(arcs_[e].to);
        }
    }
    return level_[t] >= 0;
  }

  double dfs(int v, int t, double f) {
    if (v == t) return f;
    for (int& e = iter_[v]; e >= 0; e = arcs_[e].next) {
      Arc& a = arcs_[e];
      if (a.cap > eps_ && level_[a.to] == level_[v] + 1) {
        const double d = dfs(a.to, t, std::min(f, a.cap));
        if (d > eps_) {
          a.cap -= d;
          arcs_[e ^ 1].cap += d;
          return d;
        }
      }
    }
    return 0.0;
  }

  std::vector<Arc> arcs_;
  std::vector<int> head_;
  std::vector<int> level_;
  std::vector<int> iter_;
  double eps_ = 0.0;
};

}  // namespace

std::vector<std::uint8_t> min_cut_binary(const BinaryMrf& mrf) {
  const std::size_t n = mrf.size();
  double scale = 0.0;
  for (const auto& u : mrf.unary) {
    if (!std::isfinite(u[0]) || !std::isfinite(u[1])) throw InputError("unary costs must be finite");
    scale = std::max(scale, std::abs(u[0] - u[1]));
  }
  for (const auto& e : mrf.edges) {
    if (e.a < 0 || e.b < 0 || static_cast<std::size_t>(e.a) >= n || static_cast<std::size_t>(e.b) >= n)
      throw InputError("MRF edge refers to a missing node");
    if (!(e.weight >= 0.0)) throw InputError("MRF edge weight must be non-negative");
    scale = std::max(scale, e.weight);
  }
  if (n == 0) return {};

  // Source side = label 0. s->i is cut when i takes label 1, i->t when it
  // takes label 0; only the difference of the two unaries matters.
  const int s = static_cast<int>(n), t = s + 1;
  Dinic flow(n + 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = mrf.unary[i][1] - mrf.unary[i][0];
    if (d > 0) flow.add_edge(s, static_cast<int>(i), d, 0.0);
    else if (d < 0) flow.add_edge(static_cast<int>(i), t, -d, 0.0);
  }
  for (const auto& e : mrf.edges)
    if (e.a != e.b && e.weight > 0) flow.add_edge(e.a, e.b, e.weight, e.weight);
  flow.run(s, t, scale * 1e-13);

  const auto sink_side = flow.reaches_sink(t);
  std::vector<std::uint8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = sink_side[i];
  return labels;
}

}  // namespace pss
