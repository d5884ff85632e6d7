#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

namespace matchboard::detail {

// Successive-shortest-path min-cost flow with Johnson potentials. Costs may be negative on the
// initial graph as long as it has no negative cycle.
class MinCostFlow {
 public:
  explicit MinCostFlow(int nodes) : graph_(nodes), potential_(nodes, 0.0) {}

  int add_edge(int from, int to, int capacity, double cost) {
    graph_[from].push_back({to, static_cast<int>(graph_[to].size()), capacity, cost});
    graph_[to].push_back({from, static_cast<int>(graph_[from].size()) - 1, 0, -cost});
    handles_.emplace_back(from, static_cast<int>(graph_[from].size()) - 1);
    original_.push_back(capacity);
    return static_cast<int>(handles_.size()) - 1;
  }

  struct Result {
    int flow = 0;
    double cost = 0.0;
  };

  Result run(int source, int sink, int max_flow) {
    Result result;
    if (!initial_potentials(source)) return result;
    const double inf = std::numeric_limits<double>::infinity();
    const int n = static_cast<int>(graph_.size());
    std::vector<double> dist(n);
    std::vector<int> prev_node(n), prev_edge(n);
    while (result.flow < max_flow) {
      std::fill(dist.begin(), dist.end(), inf);
      dist[source] = 0.0;
      using Item = std::pair<double, int>;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
      heap.emplace(0.0, source);
      while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (d > dist[v]) continue;
        for (int i = 0; i < static_cast<int>(graph_[v].size()); ++i) {
          const Edge& e = graph_[v][i];
          if (e.capacity <= 0) continue;
          double reduced = std::max(0.0, e.cost + potential_[v] - potential_[e.to]);
          if (dist[v] + reduced < dist[e.to]) {
            dist[e.to] = dist[v] + reduced;
            prev_node[e.to] = v;
            prev_edge[e.to] = i;
            heap.emplace(dist[e.to], e.to);
          }
        }
      }
      double reach = 0.0;
      for (double d : dist) {
        if (d < inf) reach = std::max(reach, d);
      }
      for (int v = 0; v < n; ++v) potential_[v] += dist[v] < inf ? dist[v] : reach;
      if (dist[sink] == inf) break;

      int push = max_flow - result.flow;
      for (int v = sink; v != source; v = prev_node[v]) {
        push = std::min(push, graph_[prev_node[v]][prev_edge[v]].capacity);
      }
      for (int v = sink; v != source; v = prev_node[v]) {
        Edge& e = graph_[prev_node[v]][prev_edge[v]];
        e.capacity -= push;
        graph_[v][e.reverse].capacity += push;
        result.cost += push * e.cost;
      }
      result.flow += push;
    }
    return result;
  }

  int flow_on(int edge) const {
    auto [from, slot] = handles_[edge];
    return original_[edge] - graph_[from][slot].capacity;
  }

  // Shortest-path potentials of the final residual graph (reduced costs are non-negative).
  double potential(int node) const { return potential_[node]; }

 private:
  struct Edge {
    int to;
    int reverse;
    int capacity;
    double cost;
  };

  // Bellman-Ford from the source; unreachable nodes keep potential 0.
  bool initial_potentials(int source) {
    const double inf = std::numeric_limits<double>::infinity();
    const int n = static_cast<int>(graph_.size());
    std::vector<double> dist(n, inf);
    dist[source] = 0.0;
    for (int pass = 0; pass < n; ++pass) {
      bool changed = false;
      for (int v = 0; v < n; ++v) {
        if (dist[v] == inf) continue;
        for (const Edge& e : graph_[v]) {
          if (e.capacity > 0 && dist[v] + e.cost < dist[e.to]) {
            dist[e.to] = dist[v] + e.cost;
            changed = true;
          }
        }
      }
      if (!changed) break;
      if (pass == n - 1) return false;  // negative cycle
    }
    for (int v = 0; v < n; ++v) potential_[v] = dist[v] < inf ? dist[v] : 0.0;
    return true;
  }

  std::vector<std::vector<Edge>> graph_;
  std::vector<double> potential_;
  std::vector<std::pair<int, int>> handles_;
  std::vector<int> original_;
};

}  // namespace matchboard::detail
