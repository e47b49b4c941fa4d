#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "groups.hpp"

namespace faircut {

// Cluster labels plus cached per-cluster cut weight, volume, size and
// group-count matrix. The caches make a node move O(deg) and let the move
// delta be evaluated without touching them. Single writer; independent runs
// use independent instances.
class PartitionState {
  public:
    // allow_empty admits transiently empty clusters (used while repairing a
    // rounded assignment); callers owning such a state must refill every
    // cluster before handing it anywhere else.
    static PartitionState build(const Graph& g, const GroupAssignment& ga, std::vector<int> labels,
                                int k, bool allow_empty = false) {
        const int n = g.num_nodes();
        if (static_cast<int>(labels.size()) != n || ga.num_nodes() != n)
            fail(Errc::bad_shape, "label vector does not match graph");
        if (k < 1) fail(Errc::bad_shape, "cluster count must be positive");
        for (int l : labels)
            if (l < 0 || l >= k) fail(Errc::bad_input, "cluster label out of range");

        PartitionState p;
        p.k_ = k;
        p.m_ = ga.num_groups();
        p.labels_ = std::move(labels);
        p.cut_.assign(k, 0.0);
        p.vol_.assign(k, 0.0);
        p.size_.assign(k, 0);
        p.group_counts_.assign(static_cast<size_t>(p.m_) * k, 0);
        for (int i = 0; i < n; ++i) {
            const int l = p.labels_[i];
            p.vol_[l] += g.degree(i);
            p.size_[l]++;
            p.group_counts_[static_cast<size_t>(ga.group_of(i)) * k + l]++;
            auto cols = g.neighbors(i);
            auto wgts = g.weights(i);
            for (size_t a = 0; a < cols.size(); ++a)
                if (p.labels_[cols[a]] != l) p.cut_[l] += wgts[a];
        }
        if (!allow_empty)
            for (int l = 0; l < k; ++l)
                if (p.size_[l] == 0) fail(Errc::empty_cluster, "empty cluster " + std::to_string(l));
        return p;
    }

    int k() const { return k_; }
    int num_groups() const { return m_; }
    int label(int i) const { return labels_[i]; }
    std::span<const int> labels() const { return labels_; }
    double cut(int l) const { return cut_[l]; }
    double vol(int l) const { return vol_[l]; }
    int cluster_size(int l) const { return size_[l]; }
    std::int64_t group_count(int c, int l) const { return group_counts_[static_cast<size_t>(c) * k_ + l]; }
    std::span<const std::int64_t> group_counts() const { return group_counts_; }

    // Weight from node i into cluster l, scanning i's adjacency row.
    double weight_into(const Graph& g, int i, int l) const {
        auto cols = g.neighbors(i);
        auto wgts = g.weights(i);
        double z = 0.0;
        for (size_t a = 0; a < cols.size(); ++a)
            if (labels_[cols[a]] == l) z += wgts[a];
        return z;
    }

    // Move delta and move without the empty-cluster guards; a cluster left or
    // entered empty contributes zero to the objective. The reassignment loop
    // needs this to pass through transient empty states (e.g. swapping the
    // sole members of two singleton clusters).
    double move_delta(const Graph& g, int i, int to) const {
        const int from = labels_[i];
        const double d = g.degree(i);
        double z_from = 0.0, z_to = 0.0;
        auto cols = g.neighbors(i);
        auto wgts = g.weights(i);
        for (size_t a = 0; a < cols.size(); ++a) {
            const int l = labels_[cols[a]];
            if (l == from) z_from += wgts[a];
            else if (l == to) z_to += wgts[a];
        }
        double delta = -cut_[from] / vol_[from];
        if (size_[from] > 1) delta += (cut_[from] - d + 2.0 * z_from) / (vol_[from] - d);
        delta += (cut_[to] + d - 2.0 * z_to) / (vol_[to] + d);
        if (size_[to] > 0) delta -= cut_[to] / vol_[to];
        return delta;
    }

    void move(const Graph& g, const GroupAssignment& ga, int i, int to) {
        const int from = labels_[i];
        const double d = g.degree(i);
        double z_from = 0.0, z_to = 0.0;
        auto cols = g.neighbors(i);
        auto wgts = g.weights(i);
        for (size_t a = 0; a < cols.size(); ++a) {
            const int l = labels_[cols[a]];
            if (l == from) z_from += wgts[a];
            else if (l == to) z_to += wgts[a];
        }
        cut_[from] += -d + 2.0 * z_from;
        cut_[to] += d - 2.0 * z_to;
        vol_[from] -= d;
        vol_[to] += d;
        size_[from]--;
        size_[to]++;
        if (size_[from] == 0) {
            cut_[from] = 0.0;
            vol_[from] = 0.0;
        }
        const int c = ga.group_of(i);
        group_counts_[static_cast<size_t>(c) * k_ + from]--;
        group_counts_[static_cast<size_t>(c) * k_ + to]++;
        labels_[i] = to;
    }

    friend void apply_move(PartitionState& p, const Graph& g, const GroupAssignment& ga, int i, int to);

  private:
    int k_ = 0;
    int m_ = 0;
    std::vector<int> labels_;
    std::vector<double> cut_;
    std::vector<double> vol_;
    std::vector<int> size_;
    std::vector<std::int64_t> group_counts_;
};

inline double ncut(const Graph& g, const PartitionState& p) {
    (void)g;
    double total = 0.0;
    for (int l = 0; l < p.k(); ++l) {
        if (!(p.vol(l) > 0.0)) fail(Errc::empty_cluster, "cluster " + std::to_string(l) + " has zero volume");
        total += p.cut(l) / p.vol(l);
    }
    return total;
}

// Exact Ncut change from moving node i between clusters, in O(deg(i)).
inline double ncut_delta(const Graph& g, const PartitionState& p, int i, int from, int to) {
    if (p.label(i) != from) fail(Errc::wrong_source, "node " + std::to_string(i) + " is not in the source cluster");
    if (from == to) fail(Errc::bad_input, "source and destination clusters coincide");
    if (p.cluster_size(from) <= 1)
        fail(Errc::would_empty_cluster, "moving node " + std::to_string(i) + " would empty its cluster");
    return p.move_delta(g, i, to);
}

inline void apply_move(PartitionState& p, const Graph& g, const GroupAssignment& ga, int i, int to) {
    const int from = p.labels_[i];
    if (from == to) fail(Errc::bad_input, "node already in destination cluster");
    if (p.size_[from] <= 1)
        fail(Errc::would_empty_cluster, "moving node " + std::to_string(i) + " would empty its cluster");
    p.move(g, ga, i, to);
}

// min over groups and clusters of min{r_c/r_cl, r_cl/r_c}; 0 when some
// cluster misses a group entirely.
inline double balance(const PartitionState& p, const GroupAssignment& ga) {
    double best = 1.0;
    for (int c = 0; c < ga.num_groups(); ++c) {
        const double rc = ga.proportion(c);
        for (int l = 0; l < p.k(); ++l) {
            const double rcl =
                static_cast<double>(p.group_count(c, l)) / static_cast<double>(p.cluster_size(l));
            if (rcl == 0.0) return 0.0;
            best = std::min(best, std::min(rc / rcl, rcl / rc));
        }
    }
    return best;
}

}  // namespace faircut
