#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace faircut {

struct Edge {
    int i = 0;
    int j = 0;
    double w = 1.0;
};

// Immutable undirected weighted graph in CSR form. Both directions of every
// edge are stored, so a single row scan yields the full neighborhood of a
// node and its degree is a plain row sum. Construction rejects self-loops,
// non-positive weights and isolated nodes; parallel edges are summed.
class Graph {
  public:
    static Graph build(std::span<const Edge> edges, std::optional<int> num_nodes = {}) {
        int n = num_nodes.value_or(0);
        for (const Edge& e : edges) {
            if (e.i < 0 || e.j < 0) fail(Errc::bad_input, "negative node id");
            if (e.i == e.j) fail(Errc::self_loop, "self-loop at node " + std::to_string(e.i));
            if (!(e.w > 0.0))
                fail(Errc::negative_weight, "non-positive weight on edge (" +
                                                std::to_string(e.i) + ", " + std::to_string(e.j) + ")");
            n = std::max(n, std::max(e.i, e.j) + 1);
        }
        if (num_nodes && n > *num_nodes) fail(Errc::bad_input, "node id beyond declared node count");
        if (n <= 0) fail(Errc::bad_input, "graph with no nodes");

        struct Arc {
            int from, to;
            double w;
        };
        std::vector<Arc> arcs;
        arcs.reserve(edges.size() * 2);
        for (const Edge& e : edges) {
            arcs.push_back({e.i, e.j, e.w});
            arcs.push_back({e.j, e.i, e.w});
        }
        std::sort(arcs.begin(), arcs.end(), [](const Arc& a, const Arc& b) {
            return a.from != b.from ? a.from < b.from : a.to < b.to;
        });

        Graph g;
        g.n_ = n;
        g.row_ptr_.assign(n + 1, 0);
        for (size_t s = 0; s < arcs.size();) {
            size_t t = s;
            double w = 0.0;
            while (t < arcs.size() && arcs[t].from == arcs[s].from && arcs[t].to == arcs[s].to)
                w += arcs[t++].w;
            g.col_.push_back(arcs[s].to);
            g.wgt_.push_back(w);
            g.row_ptr_[arcs[s].from + 1]++;
            s = t;
        }
        for (int i = 0; i < n; ++i) g.row_ptr_[i + 1] += g.row_ptr_[i];

        g.degree_.assign(n, 0.0);
        g.inv_sqrt_degree_.assign(n, 0.0);
        for (int i = 0; i < n; ++i) {
            double d = 0.0;
            for (std::int64_t a = g.row_ptr_[i]; a < g.row_ptr_[i + 1]; ++a) d += g.wgt_[a];
            if (d <= 0.0) fail(Errc::isolated_node, "isolated node " + std::to_string(i));
            g.degree_[i] = d;
            g.inv_sqrt_degree_[i] = 1.0 / std::sqrt(d);
            g.total_volume_ += d;
        }
        return g;
    }

    int num_nodes() const { return n_; }
    std::int64_t num_arcs() const { return static_cast<std::int64_t>(col_.size()); }
    double degree(int i) const { return degree_[i]; }
    double inv_sqrt_degree(int i) const { return inv_sqrt_degree_[i]; }
    double total_volume() const { return total_volume_; }

    std::span<const int> neighbors(int i) const {
        return {col_.data() + row_ptr_[i], static_cast<size_t>(row_ptr_[i + 1] - row_ptr_[i])};
    }
    std::span<const double> weights(int i) const {
        return {wgt_.data() + row_ptr_[i], static_cast<size_t>(row_ptr_[i + 1] - row_ptr_[i])};
    }

  private:
    int n_ = 0;
    std::vector<std::int64_t> row_ptr_;
    std::vector<int> col_;
    std::vector<double> wgt_;
    std::vector<double> degree_;
    std::vector<double> inv_sqrt_degree_;
    double total_volume_ = 0.0;
};

}  // namespace faircut
