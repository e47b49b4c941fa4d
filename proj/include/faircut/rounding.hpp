#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "error.hpp"
#include "fairness.hpp"
#include "graph.hpp"
#include "groups.hpp"
#include "lp.hpp"
#include "matrix.hpp"
#include "partition.hpp"
#include "rng.hpp"

namespace faircut {

struct CenterSet {
    Matrix q;  // k rows, one center per row
    int iteration = 0;
};

struct RoundingConfig {
    enum class Mode { lp_assign, nearest_assign };
    Mode mode = Mode::lp_assign;
    int kmeans_iters = 100;    // Lloyd cap inside the seeding step
    int max_outer = 10;        // assignment / repair / recenter rounds
    double center_tol = 1e-4;  // stop when total center movement drops below
    int ip2_exact_limit = 20;  // exact count-repair search while m*k fits
    int hill_restarts = 10;
    bool greedy_triples = false;  // scan all (group, from, to) triples for the cheapest move
    std::uint64_t seed = 0;
    bool record_trace = false;
};

// D^2-weighted seeding followed by plain Lloyd refinement; deterministic for
// a fixed seed. Empty clusters keep their previous center.
inline CenterSet kmeanspp_init(const Matrix& H, int k, std::uint64_t seed, int max_iters = 100) {
    const int n = static_cast<int>(H.rows());
    if (n < k || k < 1) fail(Errc::bad_shape, "need at least k points to seed k centers");
    Rng rng(seed);

    std::vector<int> chosen;
    std::vector<bool> is_chosen(n, false);
    std::vector<double> d2(n, 0.0);
    chosen.push_back(static_cast<int>(rng.below(n)));
    is_chosen[chosen[0]] = true;
    for (int i = 0; i < n; ++i) d2[i] = (H.row(i) - H.row(chosen[0])).squaredNorm();
    while (static_cast<int>(chosen.size()) < k) {
        double total = 0.0;
        for (int i = 0; i < n; ++i)
            if (!is_chosen[i]) total += d2[i];
        int pick = -1;
        if (total > 0.0) {
            double r = rng.uniform() * total;
            for (int i = 0; i < n; ++i) {
                if (is_chosen[i] || d2[i] <= 0.0) continue;
                r -= d2[i];
                if (r < 0.0) {
                    pick = i;
                    break;
                }
            }
        }
        if (pick < 0)
            for (int i = 0; i < n; ++i)
                if (!is_chosen[i]) {
                    pick = i;
                    break;
                }
        chosen.push_back(pick);
        is_chosen[pick] = true;
        for (int i = 0; i < n; ++i)
            d2[i] = std::min(d2[i], (H.row(i) - H.row(pick)).squaredNorm());
    }

    CenterSet cs;
    cs.q.resize(k, H.cols());
    for (int l = 0; l < k; ++l) cs.q.row(l) = H.row(chosen[l]);

    std::vector<int> labels(n, -1);
    for (int it = 0; it < max_iters; ++it) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bd = (H.row(i) - cs.q.row(0)).squaredNorm();
            for (int l = 1; l < k; ++l) {
                const double d = (H.row(i) - cs.q.row(l)).squaredNorm();
                if (d < bd) {
                    bd = d;
                    best = l;
                }
            }
            if (labels[i] != best) {
                labels[i] = best;
                changed = true;
            }
        }
        cs.iteration = it + 1;
        if (!changed) break;
        Matrix sums = Matrix::Zero(k, H.cols());
        std::vector<int> counts(k, 0);
        for (int i = 0; i < n; ++i) {
            sums.row(labels[i]) += H.row(i);
            counts[labels[i]]++;
        }
        for (int l = 0; l < k; ++l)
            if (counts[l] > 0) cs.q.row(l) = sums.row(l) / counts[l];
    }
    return cs;
}

inline Matrix cost_matrix(const Matrix& H, const CenterSet& Q) {
    if (H.cols() != Q.q.cols()) fail(Errc::bad_shape, "points and centers disagree on dimension");
    Matrix C(H.rows(), Q.q.rows());
    for (Eigen::Index i = 0; i < H.rows(); ++i)
        for (Eigen::Index l = 0; l < Q.q.rows(); ++l) C(i, l) = (H.row(i) - Q.q.row(l)).norm();
    return C;
}

inline std::vector<int> nearest_assignment(const Matrix& H, const CenterSet& Q) {
    std::vector<int> labels(H.rows());
    for (Eigen::Index i = 0; i < H.rows(); ++i) {
        int best = 0;
        double bd = (H.row(i) - Q.q.row(0)).squaredNorm();
        for (Eigen::Index l = 1; l < Q.q.rows(); ++l) {
            const double d = (H.row(i) - Q.q.row(l)).squaredNorm();
            if (d < bd) {
                bd = d;
                best = static_cast<int>(l);
            }
        }
        labels[i] = best;
    }
    return labels;
}

// Per-row argmax with ties to the lowest cluster index.
inline std::vector<int> round_assignment(const Matrix& S) {
    std::vector<int> labels(S.rows());
    for (Eigen::Index i = 0; i < S.rows(); ++i) {
        int best = 0;
        for (Eigen::Index l = 1; l < S.cols(); ++l)
            if (S(i, l) > S(i, best)) best = static_cast<int>(l);
        labels[i] = best;
    }
    return labels;
}

// Optimal fractional fair assignment of points to centers via the LP. The
// optional warm basis carries across recenter iterations, where only the
// distance costs change.
inline Matrix fractional_fair_assignment(const Matrix& H, const CenterSet& Q,
                                         const GroupAssignment& ga, const FairnessBounds& fb,
                                         SimplexBasis* warm = nullptr) {
    const LpProblem p = build_lp1(cost_matrix(H, Q), ga, fb);
    const LpSolution sol = solve_lp(p, {}, warm);
    if (sol.status != LpStatus::optimal)
        fail(Errc::lp_infeasible, sol.status == LpStatus::infeasible
                                      ? "fair assignment LP infeasible"
                                      : "fair assignment LP hit the iteration limit");
    const int k = static_cast<int>(Q.q.rows());
    Matrix S(H.rows(), k);
    for (Eigen::Index i = 0; i < H.rows(); ++i)
        for (int l = 0; l < k; ++l) S(i, l) = sol.x[i * k + l];
    return S;
}

// Minimal-change fair group-count target: current counts N, target counts N'
// with preserved per-group totals, nonempty clusters and every cell inside
// the exact share bounds.
struct ReassignmentPlan {
    int m = 0, k = 0;
    std::vector<std::int64_t> current;
    std::vector<std::int64_t> target;

    std::int64_t delta(int c, int l) const {
        return target[static_cast<size_t>(c) * k + l] - current[static_cast<size_t>(c) * k + l];
    }
    std::int64_t objective() const {
        std::int64_t s = 0;
        for (size_t t = 0; t < target.size(); ++t) s += std::llabs(target[t] - current[t]);
        return s;
    }
};

namespace detail {

// Exact integral share bounds for a cluster of size s.
inline std::int64_t cell_lower(const FairnessBounds& fb, int c, std::int64_t s) {
    const Rational& b = fb.beta_exact(c);
    return static_cast<std::int64_t>((static_cast<__int128>(b.num) * s + b.den - 1) / b.den);
}
inline std::int64_t cell_upper(const FairnessBounds& fb, int c, std::int64_t s) {
    const Rational& a = fb.alpha_exact(c);
    return static_cast<std::int64_t>(static_cast<__int128>(a.num) * s / a.den);
}

inline std::int64_t column_violation(const FairnessBounds& fb, const std::vector<std::int64_t>& cells,
                                     int m, int k, int l) {
    std::int64_t s = 0;
    for (int c = 0; c < m; ++c) s += cells[static_cast<size_t>(c) * k + l];
    std::int64_t v = s < 1 ? 1 - s : 0;
    for (int c = 0; c < m; ++c) {
        const std::int64_t x = cells[static_cast<size_t>(c) * k + l];
        const std::int64_t lo = cell_lower(fb, c, s);
        const std::int64_t hi = cell_upper(fb, c, s);
        if (x < lo) v += lo - x;
        if (x > hi) v += x - hi;
    }
    return v;
}

// Tiny successive-shortest-path min-cost flow; the repair graph has at most
// a few dozen nodes, so Bellman-Ford relaxation per augmentation is plenty.
class MinCostFlow {
  public:
    explicit MinCostFlow(int nodes) : head_(nodes, -1) {}

    int add_arc(int u, int v, std::int64_t cap, std::int64_t cost) {
        const int id = static_cast<int>(to_.size());
        to_.push_back(v);
        cap_.push_back(cap);
        cost_.push_back(cost);
        next_.push_back(head_[u]);
        head_[u] = id;
        to_.push_back(u);
        cap_.push_back(0);
        cost_.push_back(-cost);
        next_.push_back(head_[v]);
        head_[v] = id + 1;
        return id;
    }

    std::int64_t flow_on(int arc) const { return cap_[arc ^ 1]; }

    // Pushes up to `want` units; returns (pushed, cost).
    std::pair<std::int64_t, std::int64_t> run(int s, int t, std::int64_t want) {
        const std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;
        std::int64_t pushed = 0, total_cost = 0;
        const int n = static_cast<int>(head_.size());
        while (pushed < want) {
            std::vector<std::int64_t> dist(n, inf);
            std::vector<int> in_arc(n, -1);
            dist[s] = 0;
            bool changed = true;
            for (int round = 0; round < n && changed; ++round) {
                changed = false;
                for (int u = 0; u < n; ++u) {
                    if (dist[u] >= inf) continue;
                    for (int a = head_[u]; a >= 0; a = next_[a]) {
                        if (cap_[a] <= 0) continue;
                        if (dist[u] + cost_[a] < dist[to_[a]]) {
                            dist[to_[a]] = dist[u] + cost_[a];
                            in_arc[to_[a]] = a;
                            changed = true;
                        }
                    }
                }
            }
            if (dist[t] >= inf) break;
            std::int64_t push = want - pushed;
            for (int v = t; v != s; v = to_[in_arc[v] ^ 1]) push = std::min(push, cap_[in_arc[v]]);
            for (int v = t; v != s; v = to_[in_arc[v] ^ 1]) {
                cap_[in_arc[v]] -= push;
                cap_[in_arc[v] ^ 1] += push;
            }
            pushed += push;
            total_cost += push * dist[t];
        }
        return {pushed, total_cost};
    }

  private:
    std::vector<int> head_;
    std::vector<int> to_;
    std::vector<std::int64_t> cap_;
    std::vector<std::int64_t> cost_;
    std::vector<int> next_;
};

struct TransportResult {
    bool feasible = false;
    std::int64_t cost = 0;  // total moved-node objective sum |x - n|
    std::int64_t deficit = 0;
    std::vector<std::int64_t> cells;
};

// Exact repair for fixed cluster sizes: distribute each group's total over
// the clusters within the integral share bounds, minimizing total movement.
// This is a transportation problem with convex per-cell costs, split into a
// slope -1 segment (toward the current count) and a slope +1 segment.
inline TransportResult solve_transport(const std::vector<std::int64_t>& N, int m, int k,
                                       const FairnessBounds& fb,
                                       const std::vector<std::int64_t>& sizes) {
    TransportResult res;
    std::vector<std::int64_t> row(m, 0);
    for (int c = 0; c < m; ++c)
        for (int l = 0; l < k; ++l) row[c] += N[static_cast<size_t>(c) * k + l];

    std::vector<std::int64_t> lo(static_cast<size_t>(m) * k), hi(lo.size());
    std::int64_t base = 0;
    for (int c = 0; c < m; ++c)
        for (int l = 0; l < k; ++l) {
            const size_t cell = static_cast<size_t>(c) * k + l;
            lo[cell] = cell_lower(fb, c, sizes[l]);
            hi[cell] = cell_upper(fb, c, sizes[l]);
            if (lo[cell] > hi[cell]) {
                res.deficit = std::numeric_limits<std::int64_t>::max() / 8;
                return res;
            }
            base += std::llabs(lo[cell] - N[cell]);
        }

    std::vector<std::int64_t> row_extra(m), col_extra(k);
    std::int64_t want = 0;
    for (int c = 0; c < m; ++c) {
        row_extra[c] = row[c];
        for (int l = 0; l < k; ++l) row_extra[c] -= lo[static_cast<size_t>(c) * k + l];
        if (row_extra[c] < 0) {
            res.deficit = -row_extra[c];
            return res;
        }
    }
    for (int l = 0; l < k; ++l) {
        col_extra[l] = sizes[l];
        for (int c = 0; c < m; ++c) col_extra[l] -= lo[static_cast<size_t>(c) * k + l];
        if (col_extra[l] < 0) {
            res.deficit = -col_extra[l];
            return res;
        }
        want += col_extra[l];
    }

    const int src = 0, snk = m + k + 1;
    MinCostFlow flow(m + k + 2);
    std::vector<int> down(static_cast<size_t>(m) * k, -1), up(down.size(), -1);
    for (int c = 0; c < m; ++c) flow.add_arc(src, 1 + c, row_extra[c], 0);
    for (int c = 0; c < m; ++c)
        for (int l = 0; l < k; ++l) {
            const size_t cell = static_cast<size_t>(c) * k + l;
            const std::int64_t mid = std::clamp(N[cell], lo[cell], hi[cell]);
            if (mid > lo[cell]) down[cell] = flow.add_arc(1 + c, 1 + m + l, mid - lo[cell], -1);
            if (hi[cell] > mid) up[cell] = flow.add_arc(1 + c, 1 + m + l, hi[cell] - mid, +1);
        }
    for (int l = 0; l < k; ++l) flow.add_arc(1 + m + l, snk, col_extra[l], 0);

    auto [pushed, cost] = flow.run(src, snk, want);
    if (pushed < want) {
        res.deficit = want - pushed;
        return res;
    }
    res.feasible = true;
    res.cost = base + cost;
    res.cells.resize(static_cast<size_t>(m) * k);
    for (int c = 0; c < m; ++c)
        for (int l = 0; l < k; ++l) {
            const size_t cell = static_cast<size_t>(c) * k + l;
            res.cells[cell] = lo[cell];
            if (down[cell] >= 0) res.cells[cell] += flow.flow_on(down[cell]);
            if (up[cell] >= 0) res.cells[cell] += flow.flow_on(up[cell]);
        }
    return res;
}

// Search over cluster-size vectors with the exact transportation solve per
// candidate: exhaustive when the composition space is small, otherwise
// steepest-descent hill climbing over unit size transfers with seeded
// restarts from the current and the evenly split sizes.
inline bool hill_climb(const std::vector<std::int64_t>& N, int m, int k, const FairnessBounds& fb,
                       std::uint64_t seed, int restarts, std::vector<std::int64_t>& best_out) {
    std::int64_t total = 0;
    for (std::int64_t v : N) total += v;
    std::vector<std::int64_t> current(k, 0);
    for (int c = 0; c < m; ++c)
        for (int l = 0; l < k; ++l) current[l] += N[static_cast<size_t>(c) * k + l];

    bool have = false;
    std::int64_t best_cost = 0;
    auto consider = [&](const std::vector<std::int64_t>& sizes) -> TransportResult {
        TransportResult t = solve_transport(N, m, k, fb, sizes);
        if (t.feasible && (!have || t.cost < best_cost)) {
            have = true;
            best_cost = t.cost;
            best_out = t.cells;
        }
        return t;
    };

    // composition count of total into k positive parts, saturated
    double comps = 1.0;
    for (int i = 1; i < k; ++i) comps *= static_cast<double>(total - i) / i;
    if (comps <= 200000.0) {
        std::vector<std::int64_t> sizes(k, 1);
        std::function<void(int, std::int64_t)> rec = [&](int l, std::int64_t left) {
            if (l == k - 1) {
                sizes[l] = left;
                consider(sizes);
                return;
            }
            for (std::int64_t v = 1; v + (k - l - 1) <= left; ++v) {
                sizes[l] = v;
                rec(l + 1, left - v);
            }
        };
        if (total >= k) rec(0, total);
        return have;
    }

    Rng rng(seed);
    for (int attempt = 0; attempt <= restarts; ++attempt) {
        if (have && best_cost == 0) break;  // current counts already fair
        std::vector<std::int64_t> sizes;
        if (attempt % 2 == 0) {
            sizes = current;
        } else {
            sizes.assign(k, total / k);
            for (std::int64_t r = total % k; r > 0; --r) sizes[r - 1]++;
        }
        for (auto& s : sizes) s = std::max<std::int64_t>(1, s);
        if (attempt > 1) {
            const int shakes = 1 + static_cast<int>(rng.below(2 * k));
            for (int s = 0; s < shakes; ++s) {
                const int a = static_cast<int>(rng.below(k));
                const int b = static_cast<int>(rng.below(k));
                if (a != b && sizes[a] > 1) {
                    sizes[a]--;
                    sizes[b]++;
                }
            }
        }

        TransportResult cur = consider(sizes);
        auto score = [&](const TransportResult& t) {
            return t.feasible ? t.cost : 4 * total + 16 + t.deficit;
        };
        for (int step = 0; step < 400; ++step) {
            std::int64_t cur_score = score(cur);
            TransportResult best_neighbor;
            std::int64_t best_neighbor_score = cur_score;
            int ba = -1, bb = -1;
            for (int a = 0; a < k; ++a) {
                if (sizes[a] <= 1) continue;
                for (int b = 0; b < k; ++b) {
                    if (a == b) continue;
                    sizes[a]--;
                    sizes[b]++;
                    TransportResult t = consider(sizes);
                    sizes[a]++;
                    sizes[b]--;
                    if (score(t) < best_neighbor_score) {
                        best_neighbor_score = score(t);
                        best_neighbor = std::move(t);
                        ba = a;
                        bb = b;
                    }
                }
            }
            if (ba < 0) break;
            sizes[ba]--;
            sizes[bb]++;
            cur = std::move(best_neighbor);
        }
    }
    return have;
}

// Exact branch-and-bound over target matrices: depth-first over cells in
// column-major order, last column forced by the row budgets, admissible
// remaining-cost bound, column fairness checked on completion. Cell values
// are enumerated in nondecreasing cost order, so a pruned candidate ends the
// whole cell.
class Ip2Exact {
  public:
    Ip2Exact(const std::vector<std::int64_t>& N, int m, int k, const FairnessBounds& fb)
        : N_(N), m_(m), k_(k), fb_(fb) {
        row_rem_.resize(m);
        for (int c = 0; c < m; ++c) {
            row_rem_[c] = 0;
            for (int l = 0; l < k; ++l) row_rem_[c] += N_[static_cast<size_t>(c) * k + l];
        }
        suffix_.assign(static_cast<size_t>(m) * (k + 1), 0);
        for (int c = 0; c < m; ++c)
            for (int l = k - 1; l >= 0; --l)
                suffix_[static_cast<size_t>(c) * (k + 1) + l] =
                    suffix_[static_cast<size_t>(c) * (k + 1) + l + 1] + N_[static_cast<size_t>(c) * k + l];
        cells_.assign(N_.size(), 0);
    }

    bool search(std::vector<std::int64_t>& incumbent, std::int64_t& ub, bool have_incumbent) {
        found_ = have_incumbent;
        best_ = incumbent;
        ub_ = ub;
        nodes_ = 0;
        dfs(0, 0, 0);
        if (found_) {
            incumbent = best_;
            ub = ub_;
        }
        return found_;
    }

    bool exhausted() const { return nodes_ < node_cap_; }

  private:
    std::int64_t future_bound(int next_col) const {
        std::int64_t bound = 0;
        for (int c = 0; c < m_; ++c)
            bound += std::llabs(row_rem_[c] - suffix_[static_cast<size_t>(c) * (k_ + 1) + next_col]);
        return bound;
    }

    void dfs(int l, int c, std::int64_t cost) {
        if (++nodes_ >= node_cap_) return;
        if (c == m_) {
            if (column_violation(fb_, cells_, m_, k_, l) != 0) return;
            if (l + 1 == k_) {
                if (!found_ || cost < ub_) {
                    found_ = true;
                    ub_ = cost;
                    best_ = cells_;
                }
                return;
            }
            if (cost + future_bound(l + 1) >= ub_ && found_) return;
            dfs(l + 1, 0, cost);
            return;
        }
        const size_t cell = static_cast<size_t>(c) * k_ + l;
        if (l + 1 == k_) {  // last column: forced by the remaining row budget
            const std::int64_t v = row_rem_[c];
            const std::int64_t add = std::llabs(v - N_[cell]);
            if (found_ && cost + add >= ub_) return;
            cells_[cell] = v;
            row_rem_[c] = 0;
            dfs(l, c + 1, cost + add);
            row_rem_[c] = v;
            cells_[cell] = 0;
            return;
        }
        const std::int64_t budget = row_rem_[c];
        const std::int64_t center = std::min(N_[cell], budget);
        std::int64_t down = center, up = center + 1;
        for (;;) {
            const bool down_ok = down >= 0;
            const bool up_ok = up <= budget;
            if (!down_ok && !up_ok) break;
            std::int64_t v;
            if (down_ok && (!up_ok || std::llabs(down - N_[cell]) <= std::llabs(up - N_[cell])))
                v = down--;
            else
                v = up++;
            const std::int64_t add = std::llabs(v - N_[cell]);
            if (found_ && cost + add >= ub_) break;
            cells_[cell] = v;
            row_rem_[c] = budget - v;
            dfs(l, c + 1, cost + add);
            row_rem_[c] = budget;
            cells_[cell] = 0;
            if (nodes_ >= node_cap_) return;
        }
    }

    const std::vector<std::int64_t>& N_;
    int m_, k_;
    const FairnessBounds& fb_;
    std::vector<std::int64_t> row_rem_;
    std::vector<std::int64_t> suffix_;
    std::vector<std::int64_t> cells_;
    std::vector<std::int64_t> best_;
    std::int64_t ub_ = 0;
    bool found_ = false;
    std::int64_t nodes_ = 0;
    static constexpr std::int64_t node_cap_ = 100'000'000;
};

}  // namespace detail

// Computes the fair count matrix closest to N in total moved nodes. Hill
// climbing provides the incumbent; while m*k fits under exact_limit a
// branch-and-bound pass certifies optimality.
inline ReassignmentPlan solve_ip2(const std::vector<std::int64_t>& N, int m, int k,
                                  const FairnessBounds& fb, int exact_limit, std::uint64_t seed,
                                  int restarts = 10) {
    if (static_cast<int>(N.size()) != m * k) fail(Errc::bad_shape, "count matrix size mismatch");
    ReassignmentPlan plan;
    plan.m = m;
    plan.k = k;
    plan.current = N;

    std::vector<std::int64_t> best;
    bool have = detail::hill_climb(N, m, k, fb, seed, restarts, best);
    if (m * k <= exact_limit) {
        std::int64_t ub = std::numeric_limits<std::int64_t>::max();
        if (have) {
            ub = 0;
            for (size_t t = 0; t < best.size(); ++t) ub += std::llabs(best[t] - N[t]);
        }
        detail::Ip2Exact exact(N, m, k, fb);
        have = exact.search(best, ub, have);
    }
    if (!have)
        fail(Errc::ip2_infeasible,
             "no fair integral target exists for these counts; a looser sigma may admit one");
    plan.target = std::move(best);
    return plan;
}

// Executes the plan on the partition: repeatedly pick a (group, from, to)
// triple with deficit and surplus (lexicographic by default, or globally
// cheapest in greedy mode), move the member with the smallest Ncut delta,
// and update the residual until the target counts are met exactly.
inline long reassign_to_fair(const Graph& g, PartitionState& p, const GroupAssignment& ga,
                             const ReassignmentPlan& plan, bool greedy = false) {
    const int m = plan.m, k = plan.k;
    for (int c = 0; c < m; ++c)
        for (int l = 0; l < k; ++l)
            if (p.group_count(c, l) != plan.current[static_cast<size_t>(c) * k + l])
                fail(Errc::bad_input, "plan does not match the partition's group counts");

    std::vector<std::int64_t> delta(plan.target.size());
    for (size_t t = 0; t < delta.size(); ++t) delta[t] = plan.target[t] - plan.current[t];

    long moves = 0;
    for (;;) {
        int sc = -1, sf = -1, st = -1;
        int best_node = -1;
        double best_delta = std::numeric_limits<double>::infinity();
        if (!greedy) {
            for (int c = 0; c < m && sc < 0; ++c)
                for (int lf = 0; lf < k && sc < 0; ++lf) {
                    if (delta[static_cast<size_t>(c) * k + lf] >= 0) continue;
                    for (int lt = 0; lt < k; ++lt)
                        if (delta[static_cast<size_t>(c) * k + lt] > 0) {
                            sc = c;
                            sf = lf;
                            st = lt;
                            break;
                        }
                }
            if (sc < 0) break;
            for (int i = 0; i < ga.num_nodes(); ++i) {
                if (ga.group_of(i) != sc || p.label(i) != sf) continue;
                const double d = p.move_delta(g, i, st);
                if (d < best_delta) {
                    best_delta = d;
                    best_node = i;
                }
            }
        } else {
            for (int c = 0; c < m; ++c)
                for (int lf = 0; lf < k; ++lf) {
                    if (delta[static_cast<size_t>(c) * k + lf] >= 0) continue;
                    for (int lt = 0; lt < k; ++lt) {
                        if (delta[static_cast<size_t>(c) * k + lt] <= 0) continue;
                        for (int i = 0; i < ga.num_nodes(); ++i) {
                            if (ga.group_of(i) != c || p.label(i) != lf) continue;
                            const double d = p.move_delta(g, i, lt);
                            if (d < best_delta) {
                                best_delta = d;
                                best_node = i;
                                sc = c;
                                sf = lf;
                                st = lt;
                            }
                        }
                    }
                }
            if (sc < 0) break;
        }
        if (best_node < 0) throw std::logic_error("reassignment candidate set empty despite pending deficit");
        p.move(g, ga, best_node, st);
        delta[static_cast<size_t>(sc) * k + sf]++;
        delta[static_cast<size_t>(sc) * k + st]--;
        ++moves;
    }
    for (std::int64_t d : delta)
        if (d != 0) throw std::logic_error("reassignment terminated with nonzero residual");
    return moves;
}

struct RoundingIterRecord {
    int iteration = 0;
    double ncut = 0.0;
    long moves = 0;
    double center_drift = 0.0;
};

struct RoundingResult {
    std::vector<int> labels;
    double ncut = 0.0;
    double balance = 0.0;
    long moves = 0;
    int iterations = 0;
    std::vector<RoundingIterRecord> trace;
};

namespace detail {

// Refills empty clusters with the globally cheapest move before count repair.
inline void repair_empty_clusters(const Graph& g, const GroupAssignment& ga, PartitionState& p) {
    for (int l = 0; l < p.k(); ++l) {
        while (p.cluster_size(l) == 0) {
            int best_node = -1;
            double best_delta = std::numeric_limits<double>::infinity();
            for (int i = 0; i < g.num_nodes(); ++i) {
                if (p.cluster_size(p.label(i)) <= 1) continue;
                const double d = p.move_delta(g, i, l);
                if (d < best_delta) {
                    best_delta = d;
                    best_node = i;
                }
            }
            if (best_node < 0) throw std::logic_error("cannot repair empty cluster");
            p.move(g, ga, best_node, l);
        }
    }
}

}  // namespace detail

// Alternating fair assignment and recentering: assign points (LP rounding or
// nearest center), repair counts to exact fairness with the cheapest moves,
// track the best fair partition by Ncut, recenter on the produced clusters,
// and stop once centers settle or the round budget is exhausted. The returned
// partition is always strictly fair.
inline RoundingResult fair_rounding(const Graph& g, const Matrix& H, const GroupAssignment& ga,
                                    const FairnessBounds& fb, const RoundingConfig& cfg) {
    const int n = g.num_nodes();
    const int k = static_cast<int>(H.cols());
    const int m = ga.num_groups();
    if (static_cast<int>(H.rows()) != n) fail(Errc::bad_shape, "embedding rows do not match graph");
    if (n < k) fail(Errc::bad_shape, "fewer nodes than clusters");
    if (cfg.kmeans_iters < 1 || cfg.max_outer < 1 || cfg.center_tol < 0 || cfg.ip2_exact_limit < 0 ||
        cfg.hill_restarts < 0)
        fail(Errc::bad_input, "rounding configuration out of range");

    Rng rng(cfg.seed);
    CenterSet Q = kmeanspp_init(H, k, rng.child(1).next_u64(), cfg.kmeans_iters);

    RoundingResult res;
    double best_ncut = std::numeric_limits<double>::infinity();
    SimplexBasis warm;

    for (int t = 1; t <= cfg.max_outer; ++t) {
        std::vector<int> labels =
            cfg.mode == RoundingConfig::Mode::lp_assign
                ? round_assignment(fractional_fair_assignment(H, Q, ga, fb, &warm))
                : nearest_assignment(H, Q);
        PartitionState p = PartitionState::build(g, ga, std::move(labels), k, /*allow_empty=*/true);
        detail::repair_empty_clusters(g, ga, p);

        std::vector<std::int64_t> counts(p.group_counts().begin(), p.group_counts().end());
        ReassignmentPlan plan =
            solve_ip2(counts, m, k, fb, cfg.ip2_exact_limit, rng.child(100 + t).next_u64(),
                      cfg.hill_restarts);
        const long moves = reassign_to_fair(g, p, ga, plan, cfg.greedy_triples);
        res.moves += moves;
        if (!is_fair(p, ga, fb)) throw std::logic_error("rounding produced an unfair partition");

        const double nc = ncut(g, p);
        if (nc < best_ncut) {
            best_ncut = nc;
            res.labels.assign(p.labels().begin(), p.labels().end());
            res.balance = balance(p, ga);
        }

        Matrix sums = Matrix::Zero(k, H.cols());
        std::vector<int> sizes(k, 0);
        for (int i = 0; i < n; ++i) {
            sums.row(p.label(i)) += H.row(i);
            sizes[p.label(i)]++;
        }
        double drift = 0.0;
        for (int l = 0; l < k; ++l) {
            Eigen::RowVectorXd nq = sums.row(l) / sizes[l];
            drift += (nq - Q.q.row(l)).norm();
            Q.q.row(l) = nq;
        }
        Q.iteration = t;
        res.iterations = t;
        if (cfg.record_trace) res.trace.push_back({t, nc, moves, drift});
        if (drift <= cfg.center_tol) break;
    }
    res.ncut = best_ncut;
    return res;
}

}  // namespace faircut
