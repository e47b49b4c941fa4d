#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "groups.hpp"

namespace faircut {

// Edge list: one `i j [w]` per line, whitespace-separated 0-based ids, weight
// defaulting to 1.0, `#` lines ignored.
inline std::vector<Edge> read_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::bad_input, "cannot open edge file '" + path + "'");
    std::vector<Edge> edges;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t at = line.find_first_not_of(" \t\r");
        if (at == std::string::npos || line[at] == '#') continue;
        std::istringstream ls(line);
        Edge e;
        if (!(ls >> e.i >> e.j))
            fail(Errc::bad_input, path + ":" + std::to_string(lineno) + ": expected 'i j [w]'");
        if (!(ls >> e.w)) e.w = 1.0;
        edges.push_back(e);
    }
    if (edges.empty()) fail(Errc::bad_input, "edge file '" + path + "' has no edges");
    return edges;
}

// Group file: one `i c` per line with 0-based group ids; every node id in
// [0, n) must appear exactly once.
inline std::vector<int> read_groups(const std::string& path, int n) {
    std::ifstream in(path);
    if (!in) fail(Errc::bad_input, "cannot open group file '" + path + "'");
    std::vector<int> phi(n, -1);
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t at = line.find_first_not_of(" \t\r");
        if (at == std::string::npos || line[at] == '#') continue;
        std::istringstream ls(line);
        int i = -1, c = -1;
        if (!(ls >> i >> c))
            fail(Errc::bad_input, path + ":" + std::to_string(lineno) + ": expected 'i c'");
        if (i < 0 || i >= n)
            fail(Errc::bad_input, path + ":" + std::to_string(lineno) + ": node id out of range");
        if (phi[i] != -1)
            fail(Errc::bad_input, path + ":" + std::to_string(lineno) + ": duplicate node id");
        phi[i] = c;
    }
    for (int i = 0; i < n; ++i)
        if (phi[i] == -1)
            fail(Errc::bad_input, "group file '" + path + "' misses node " + std::to_string(i));
    return phi;
}

inline void write_edge_list(const std::string& path, std::span<const Edge> edges) {
    std::ofstream out(path);
    if (!out) fail(Errc::bad_input, "cannot write '" + path + "'");
    out.precision(17);
    for (const Edge& e : edges) {
        out << e.i << ' ' << e.j;
        if (e.w != 1.0) out << ' ' << e.w;
        out << '\n';
    }
}

inline void write_groups(const std::string& path, std::span<const int> phi) {
    std::ofstream out(path);
    if (!out) fail(Errc::bad_input, "cannot write '" + path + "'");
    for (size_t i = 0; i < phi.size(); ++i) out << i << ' ' << phi[i] << '\n';
}

inline void write_labels(const std::string& path, std::span<const int> labels) {
    write_groups(path, labels);
}

struct ConnectedComponentResult {
    std::vector<Edge> edges;         // ids remapped to [0, kept)
    std::vector<int> kept_original;  // new id -> original id
};

// Largest connected component with densely remapped ids; nodes are counted
// from the edge endpoints (up to max id, or an explicit n).
inline ConnectedComponentResult largest_connected_component(std::span<const Edge> edges,
                                                            std::optional<int> num_nodes = {}) {
    int n = num_nodes.value_or(0);
    for (const Edge& e : edges) n = std::max(n, std::max(e.i, e.j) + 1);
    std::vector<int> parent(n);
    for (int i = 0; i < n; ++i) parent[i] = i;
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const Edge& e : edges) parent[find(e.i)] = find(e.j);

    std::vector<int> size(n, 0);
    for (int i = 0; i < n; ++i) size[find(i)]++;
    int best_root = 0;
    for (int i = 0; i < n; ++i)
        if (size[find(i)] > size[find(best_root)]) best_root = find(i);
    best_root = find(best_root);

    ConnectedComponentResult res;
    std::vector<int> remap(n, -1);
    for (int i = 0; i < n; ++i)
        if (find(i) == best_root) {
            remap[i] = static_cast<int>(res.kept_original.size());
            res.kept_original.push_back(i);
        }
    for (const Edge& e : edges)
        if (remap[e.i] >= 0 && remap[e.j] >= 0) res.edges.push_back({remap[e.i], remap[e.j], e.w});
    return res;
}

}  // namespace faircut
