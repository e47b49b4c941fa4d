#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "groups.hpp"
#include "rng.hpp"

namespace faircut {

struct SbmConfig {
    std::vector<int> cluster_sizes;
    double p_in = 0.25;
    double p_out = 0.05;
    double p_same = 0.6;  // probability a node takes its own cluster's group
    std::uint64_t seed = 0;
    int max_retries = 32;

    int num_clusters() const { return static_cast<int>(cluster_sizes.size()); }
    double p_other() const {
        return num_clusters() > 1 ? (1.0 - p_same) / (num_clusters() - 1) : 0.0;
    }
};

struct SbmSample {
    Graph graph;
    GroupAssignment groups;
    std::vector<int> ground_truth;
    std::uint64_t seed_used = 0;
    int attempts = 1;
};

namespace detail {

class UnionFind {
  public:
    explicit UnionFind(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    int find(int x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(int a, int b) { parent_[find(a)] = find(b); }

  private:
    std::vector<int> parent_;
};

}  // namespace detail

// Planted-partition benchmark: every intra-cluster pair gets an edge with
// probability p_in, inter-cluster pairs with p_out, unit weights. Groups are
// sampled per node (own cluster's group with p_same, any other uniformly).
// Disconnected or degenerate samples retry with a derived seed.
inline SbmSample sbm_generate(const SbmConfig& cfg) {
    const int blocks = cfg.num_clusters();
    if (blocks < 2) fail(Errc::bad_input, "need at least two cluster sizes");
    for (int s : cfg.cluster_sizes)
        if (s <= 0) fail(Errc::bad_input, "cluster sizes must be positive");
    for (double pr : {cfg.p_in, cfg.p_out, cfg.p_same})
        if (pr < 0.0 || pr > 1.0) fail(Errc::bad_input, "probabilities must lie in [0, 1]");

    const int n = std::accumulate(cfg.cluster_sizes.begin(), cfg.cluster_sizes.end(), 0);
    std::vector<int> truth(n);
    {
        int at = 0;
        for (int b = 0; b < blocks; ++b)
            for (int s = 0; s < cfg.cluster_sizes[b]; ++s) truth[at++] = b;
    }

    Rng root(cfg.seed);
    for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
        Rng rng = attempt == 0 ? root : root.child(attempt);
        std::vector<Edge> edges;
        detail::UnionFind uf(n);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const double pr = truth[i] == truth[j] ? cfg.p_in : cfg.p_out;
                if (rng.uniform() < pr) {
                    edges.push_back({i, j, 1.0});
                    uf.unite(i, j);
                }
            }

        std::vector<int> phi(n);
        for (int i = 0; i < n; ++i) {
            if (rng.uniform() < cfg.p_same) {
                phi[i] = truth[i];
            } else {
                int other = static_cast<int>(rng.below(blocks - 1));
                phi[i] = other >= truth[i] ? other + 1 : other;
            }
        }

        bool connected = !edges.empty();
        const int root_cc = connected ? uf.find(0) : 0;
        for (int i = 1; i < n && connected; ++i)
            if (uf.find(i) != root_cc) connected = false;
        if (!connected) continue;

        bool all_groups = true;
        std::vector<int> gcount(blocks, 0);
        for (int c : phi) gcount[c]++;
        for (int c = 0; c < blocks; ++c)
            if (gcount[c] == 0) all_groups = false;
        if (!all_groups) continue;

        SbmSample sample{Graph::build(edges, n), GroupAssignment::build(std::move(phi), blocks),
                         std::move(truth), cfg.seed, attempt + 1};
        return sample;
    }
    fail(Errc::disconnected_after_retries,
         "no connected sample after " + std::to_string(cfg.max_retries) + " attempts");
}

}  // namespace faircut
