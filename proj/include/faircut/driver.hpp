#pragma once

#include <atomic>
#include <chrono>
#include <future>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "embedding.hpp"
#include "error.hpp"
#include "fairness.hpp"
#include "graph.hpp"
#include "groups.hpp"
#include "report.hpp"
#include "rounding.hpp"

namespace faircut {

struct RunConfig {
    int k = 5;
    Rational sigma{1, 5};
    std::optional<Rational> sigma_emb;  // embedding-phase looseness, defaults to sigma
    BoundsScheme scheme = BoundsScheme::scaled;
    enum class Mode { auto_select, lp, kr } mode = Mode::auto_select;
    std::uint64_t seed = 0;
    std::string dataset_name = "graph";
    EmbeddingConfig embed;
    RoundingConfig round;
    bool keep_labels = true;
};

namespace detail {

// The LP assignment is the default while the instance stays within the
// solver's comfortable range; beyond it nearest-center assignment with the
// same repair machinery takes over.
inline bool lp_in_range(int n, int k) { return n <= 5000 && k <= 20; }

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

// Full pipeline: fair spectral embedding followed by fair rounding, with a
// populated report.
inline RunReport run_partition(const Graph& g, const GroupAssignment& ga, const RunConfig& cfg) {
    RunReport rep;
    rep.dataset = cfg.dataset_name;
    rep.n = g.num_nodes();
    rep.m = ga.num_groups();
    rep.k = cfg.k;
    rep.sigma = cfg.sigma;
    rep.sigma_emb = cfg.sigma_emb.value_or(cfg.sigma);
    rep.seed = cfg.seed;
    rep.xi = cfg.embed.xi;
    rep.mu0 = cfg.embed.mu0;

    const FairnessBounds fb = FairnessBounds::from_sigma(ga, cfg.sigma, cfg.scheme);
    const FairnessBounds fb_emb = FairnessBounds::from_sigma(ga, rep.sigma_emb, cfg.scheme);

    const bool use_lp = cfg.mode == RunConfig::Mode::lp ||
                        (cfg.mode == RunConfig::Mode::auto_select &&
                         detail::lp_in_range(g.num_nodes(), cfg.k));
    rep.mode = use_lp ? "lp" : "kr";

    Rng seeds(cfg.seed);
    EmbeddingConfig ecfg = cfg.embed;
    ecfg.seed = seeds.child(1).next_u64();
    RoundingConfig rcfg = cfg.round;
    rcfg.seed = seeds.child(2).next_u64();
    rcfg.mode = use_lp ? RoundingConfig::Mode::lp_assign : RoundingConfig::Mode::nearest_assign;

    const auto t0 = std::chrono::steady_clock::now();
    EmbeddingResult emb = fair_spectral_embedding(g, ga, fb_emb, cfg.k, ecfg);
    rep.embed_seconds = detail::seconds_since(t0);
    rep.embed_iters = emb.inner_iters;
    rep.embed_outer_iters = emb.outer_iters;
    rep.embed_converged = emb.converged;
    rep.violation = emb.violation;
    rep.objective = emb.objective;
    rep.embed_trace = std::move(emb.trace);

    const auto t1 = std::chrono::steady_clock::now();
    RoundingResult rr = fair_rounding(g, emb.H, ga, fb, rcfg);
    rep.round_seconds = detail::seconds_since(t1);
    rep.total_seconds = detail::seconds_since(t0);

    rep.ncut = rr.ncut;
    rep.balance = rr.balance;
    rep.moves = rr.moves;
    rep.round_trace = std::move(rr.trace);
    if (cfg.keep_labels) rep.labels = rr.labels;

    PartitionState p = PartitionState::build(g, ga, rep.labels.empty() ? rr.labels : rep.labels, cfg.k);
    rep.fair = is_fair(p, ga, fb);
    return rep;
}

// Runs one pipeline per (xi, mu0) cell — in parallel when hardware allows —
// and returns the report of the fair cell with the smallest Ncut; all cell
// summaries are retained. Ties go to the earlier cell in row-major
// (xi, mu0) order.
inline RunReport grid_search(const Graph& g, const GroupAssignment& ga, const RunConfig& cfg,
                             std::span<const double> xi_grid, std::span<const double> mu0_grid,
                             unsigned threads = 0) {
    if (xi_grid.empty() || mu0_grid.empty()) fail(Errc::bad_input, "empty parameter grid");

    struct Cell {
        RunConfig cfg;
        RunReport rep;
        bool ok = false;
        std::string error;
    };
    std::vector<Cell> cells;
    for (double xi : xi_grid)
        for (double mu0 : mu0_grid) {
            Cell cell;
            cell.cfg = cfg;
            cell.cfg.embed.xi = xi;
            cell.cfg.embed.mu0 = mu0;
            cells.push_back(std::move(cell));
        }

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const size_t at = next.fetch_add(1);
            if (at >= cells.size()) return;
            try {
                const auto t0 = std::chrono::steady_clock::now();
                cells[at].rep = run_partition(g, ga, cells[at].cfg);
                cells[at].rep.total_seconds = detail::seconds_since(t0);
                cells[at].ok = true;
            } catch (const std::exception& e) {
                cells[at].error = e.what();
            }
        }
    };
    std::vector<std::future<void>> jobs;
    for (unsigned t = 1; t < threads && t < cells.size(); ++t)
        jobs.push_back(std::async(std::launch::async, worker));
    worker();
    for (auto& j : jobs) j.get();

    // Selection is by smallest Ncut among fair cells; the cell with the
    // lowest embedding objective is recorded alongside for reference.
    int best = -1, best_obj = -1;
    for (size_t i = 0; i < cells.size(); ++i) {
        if (!cells[i].ok || !cells[i].rep.fair) continue;
        if (best < 0 || cells[i].rep.ncut < cells[best].rep.ncut) best = static_cast<int>(i);
        if (best_obj < 0 || cells[i].rep.objective < cells[best_obj].rep.objective)
            best_obj = static_cast<int>(i);
    }
    if (best < 0) {
        std::string detail = "grid search: no cell produced a fair partition";
        for (const auto& c : cells)
            if (!c.error.empty()) {
                detail += "; first error: " + c.error;
                break;
            }
        fail(Errc::all_cells_failed, detail);
    }

    RunReport rep = cells[best].rep;
    rep.chosen_cell = best;
    rep.lowest_objective_cell = best_obj;
    for (const auto& c : cells) {
        CellResult cr;
        cr.xi = c.cfg.embed.xi;
        cr.mu0 = c.cfg.embed.mu0;
        if (c.ok) {
            cr.ncut = c.rep.ncut;
            cr.balance = c.rep.balance;
            cr.objective = c.rep.objective;
            cr.violation = c.rep.violation;
            cr.fair = c.rep.fair;
            cr.converged = c.rep.embed_converged;
            cr.seconds = c.rep.total_seconds;
        }
        rep.cells.push_back(cr);
    }
    return rep;
}

}  // namespace faircut
