#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "faircut/driver.hpp"
#include "faircut/io.hpp"
#include "faircut/report.hpp"
#include "faircut/sbm.hpp"
#include "oracles.hpp"

using namespace faircut;

namespace {

SbmConfig small_sbm(std::uint64_t seed) {
    SbmConfig cfg;
    cfg.cluster_sizes = {30, 20, 14};
    cfg.p_in = 0.35;
    cfg.p_out = 0.06;
    cfg.p_same = 0.6;
    cfg.seed = seed;
    return cfg;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("sbm generation is deterministic and samples the planted structure") {
    auto a = sbm_generate(small_sbm(5));
    auto b = sbm_generate(small_sbm(5));
    REQUIRE(a.graph.num_arcs() == b.graph.num_arcs());
    REQUIRE(a.ground_truth == b.ground_truth);
    REQUIRE(std::equal(a.groups.phi().begin(), a.groups.phi().end(), b.groups.phi().begin()));

    REQUIRE(a.graph.num_nodes() == 64);
    REQUIRE(a.groups.num_groups() == 3);
    // ground-truth clusters are the first 30, next 20, last 14 nodes
    REQUIRE(a.ground_truth[0] == 0);
    REQUIRE(a.ground_truth[63] == 2);
}

TEST_CASE("sbm rejects configurations that cannot connect") {
    SbmConfig cfg;
    cfg.cluster_sizes = {6, 6};
    cfg.p_in = 1.0;
    cfg.p_out = 0.0;
    cfg.seed = 1;
    cfg.max_retries = 4;
    REQUIRE_THROWS_MATCHES(sbm_generate(cfg), Error,
                           Catch::Matchers::Predicate<Error>([](const Error& e) {
                               return e.code() == Errc::disconnected_after_retries;
                           }));
}

TEST_CASE("sbm edge counts track the binomial expectation") {
    // pair classes: within-cluster and across-cluster Bernoulli draws
    auto cfg = small_sbm(9);
    double intra_pairs = 0.0;
    for (int s : cfg.cluster_sizes) intra_pairs += 0.5 * s * (s - 1.0);
    const double all_pairs = 0.5 * 64 * 63;
    const double expectation = cfg.p_in * intra_pairs + cfg.p_out * (all_pairs - intra_pairs);
    const double variance = cfg.p_in * (1 - cfg.p_in) * intra_pairs +
                            cfg.p_out * (1 - cfg.p_out) * (all_pairs - intra_pairs);
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        auto s = sbm_generate(small_sbm(seed));
        const double edges = s.graph.num_arcs() / 2.0;
        REQUIRE(std::abs(edges - expectation) <= 4.0 * std::sqrt(variance));
    }
}

TEST_CASE("edge and group files round-trip") {
    const auto edges_path = temp_file("faircut_test.edges");
    const auto groups_path = temp_file("faircut_test.groups");
    {
        std::ofstream out(edges_path);
        out << "# comment line\n";
        out << "0 1\n";
        out << "1 2 2.5\n";
        out << "\n";
        out << "0 2 1.0\n";
    }
    auto edges = read_edge_list(edges_path.string());
    REQUIRE(edges.size() == 3);
    REQUIRE(edges[0].w == 1.0);
    REQUIRE(edges[1].w == 2.5);
    Graph g = Graph::build(edges);
    REQUIRE(g.num_nodes() == 3);

    write_groups(groups_path.string(), std::vector<int>{0, 1, 0});
    auto phi = read_groups(groups_path.string(), 3);
    REQUIRE(phi == std::vector<int>{0, 1, 0});

    {
        std::ofstream out(groups_path);
        out << "0 0\n1 1\n";  // node 2 missing
    }
    REQUIRE_THROWS_MATCHES(read_groups(groups_path.string(), 3), Error,
                           Catch::Matchers::Predicate<Error>(
                               [](const Error& e) { return e.code() == Errc::bad_input; }));
    std::filesystem::remove(edges_path);
    std::filesystem::remove(groups_path);
}

TEST_CASE("largest connected component extraction") {
    std::vector<Edge> edges{{0, 1, 1}, {1, 2, 1}, {3, 4, 1}, {4, 5, 1}, {5, 6, 1}, {6, 3, 1}};
    auto lcc = largest_connected_component(edges);
    REQUIRE(lcc.kept_original == std::vector<int>{3, 4, 5, 6});
    REQUIRE(lcc.edges.size() == 4);
    Graph g = Graph::build(lcc.edges);
    REQUIRE(g.num_nodes() == 4);
}

TEST_CASE("pipeline produces a fair report on a small planted graph") {
    auto sample = sbm_generate(small_sbm(21));
    RunConfig cfg;
    cfg.k = 3;
    cfg.sigma = Rational(1, 2);
    cfg.seed = 4;
    cfg.dataset_name = "toy";
    cfg.embed.max_outer = 40;
    RunReport rep = run_partition(sample.graph, sample.groups, cfg);

    REQUIRE(rep.fair);
    REQUIRE(rep.mode == "lp");
    REQUIRE(rep.n == 64);
    REQUIRE(rep.m == 3);
    REQUIRE(static_cast<int>(rep.labels.size()) == 64);

    auto p = PartitionState::build(sample.graph, sample.groups, rep.labels, 3);
    REQUIRE(std::abs(balance(p, sample.groups) - rep.balance) <= 1e-12);
    REQUIRE(std::abs(ncut(sample.graph, p) - rep.ncut) <= 1e-12);
    REQUIRE(rep.fair == is_fair(p, sample.groups, FairnessBounds::from_sigma(sample.groups, cfg.sigma)));
    REQUIRE(balance_at_least(p, sample.groups, Rational(1, 2)));
}

TEST_CASE("single-cell grid search equals the plain run") {
    auto sample = sbm_generate(small_sbm(22));
    RunConfig cfg;
    cfg.k = 3;
    cfg.sigma = Rational(1, 2);
    cfg.seed = 11;
    cfg.embed.max_outer = 30;
    cfg.embed.xi = 6.0;
    cfg.embed.mu0 = 0.01;
    RunReport plain = run_partition(sample.graph, sample.groups, cfg);
    const double xi[] = {6.0};
    const double mu0[] = {0.01};
    RunReport grid = grid_search(sample.graph, sample.groups, cfg, xi, mu0);
    REQUIRE(grid.cells.size() == 1);
    REQUIRE(grid.ncut == plain.ncut);
    REQUIRE(grid.balance == plain.balance);
}

TEST_CASE("grid search keeps every cell and picks the smallest fair Ncut") {
    auto sample = sbm_generate(small_sbm(23));
    RunConfig cfg;
    cfg.k = 3;
    cfg.sigma = Rational(2, 5);
    cfg.seed = 31;
    cfg.embed.max_outer = 25;
    const double xi[] = {2.0, 8.0};
    const double mu0[] = {0.01, 1.0};
    RunReport grid = grid_search(sample.graph, sample.groups, cfg, xi, mu0);
    REQUIRE(grid.cells.size() == 4);
    REQUIRE(grid.chosen_cell >= 0);
    for (const auto& cell : grid.cells)
        if (cell.fair) REQUIRE(grid.ncut <= cell.ncut + 1e-15);
    REQUIRE(grid.xi == grid.cells[grid.chosen_cell].xi);
    REQUIRE(grid.mu0 == grid.cells[grid.chosen_cell].mu0);
}

TEST_CASE("grid search surfaces a failure when no cell can produce a plan") {
    // shares 1/3 and 2/3 with sigma = 0 leave no fair integral counts
    Graph g = Graph::build(std::vector<Edge>{{0, 1, 1}, {1, 2, 1}, {0, 2, 1}});
    auto ga = GroupAssignment::build({0, 1, 1});
    RunConfig cfg;
    cfg.k = 2;
    cfg.sigma = Rational(0, 1);
    cfg.seed = 1;
    const double xi[] = {2.0, 4.0};
    const double mu0[] = {1.0};
    REQUIRE_THROWS_MATCHES(grid_search(g, ga, cfg, xi, mu0), Error,
                           Catch::Matchers::Predicate<Error>(
                               [](const Error& e) { return e.code() == Errc::all_cells_failed; }));
}

TEST_CASE("out-of-range configurations are rejected") {
    auto sample = sbm_generate(small_sbm(26));
    auto fb = FairnessBounds::from_sigma(sample.groups, Rational(1, 2));
    EmbeddingConfig bad;
    bad.xi = 1.0;  // amplification must exceed one
    REQUIRE_THROWS_MATCHES(fair_spectral_embedding(sample.graph, sample.groups, fb, 3, bad), Error,
                           Catch::Matchers::Predicate<Error>(
                               [](const Error& e) { return e.code() == Errc::bad_input; }));
    EmbeddingConfig neg;
    neg.tau0 = 0.0;
    REQUIRE_THROWS_MATCHES(fair_spectral_embedding(sample.graph, sample.groups, fb, 3, neg), Error,
                           Catch::Matchers::Predicate<Error>(
                               [](const Error& e) { return e.code() == Errc::bad_input; }));

    RoundingConfig rbad;
    rbad.max_outer = 0;
    Matrix H = init_orthonormal(sample.graph.num_nodes(), 3, 1);
    REQUIRE_THROWS_MATCHES(fair_rounding(sample.graph, H, sample.groups, fb, rbad), Error,
                           Catch::Matchers::Predicate<Error>(
                               [](const Error& e) { return e.code() == Errc::bad_input; }));
}

TEST_CASE("independent looseness for the embedding phase") {
    auto sample = sbm_generate(small_sbm(27));
    RunConfig cfg;
    cfg.k = 3;
    cfg.sigma = Rational(1, 2);
    cfg.sigma_emb = Rational(1, 1);  // unconstrained embedding, strict rounding gate
    cfg.seed = 6;
    cfg.embed.max_outer = 30;
    RunReport rep = run_partition(sample.graph, sample.groups, cfg);
    REQUIRE(rep.fair);
    auto p = PartitionState::build(sample.graph, sample.groups, rep.labels, 3);
    REQUIRE(balance_at_least(p, sample.groups, Rational(1, 2)));
}

TEST_CASE("shifted bound scheme runs end to end") {
    auto sample = sbm_generate(small_sbm(28));
    RunConfig cfg;
    cfg.k = 3;
    cfg.sigma = Rational(2, 5);
    cfg.scheme = BoundsScheme::shifted;
    cfg.seed = 12;
    cfg.embed.max_outer = 30;
    RunReport rep = run_partition(sample.graph, sample.groups, cfg);
    REQUIRE(rep.fair);
    auto fb = FairnessBounds::from_sigma(sample.groups, cfg.sigma, BoundsScheme::shifted);
    auto p = PartitionState::build(sample.graph, sample.groups, rep.labels, 3);
    REQUIRE(is_fair(p, sample.groups, fb));
}

TEST_CASE("reports round-trip through json and keep a stable csv header") {
    auto sample = sbm_generate(small_sbm(24));
    RunConfig cfg;
    cfg.k = 3;
    cfg.sigma = Rational(1, 5);
    cfg.seed = 8;
    cfg.embed.max_outer = 25;
    RunReport rep = run_partition(sample.graph, sample.groups, cfg);

    RunReport back = report_from_json(to_json(rep).dump());
    REQUIRE(back.dataset == rep.dataset);
    REQUIRE(back.sigma == rep.sigma);
    REQUIRE(back.seed == rep.seed);
    REQUIRE(back.ncut == rep.ncut);
    REQUIRE(back.balance == rep.balance);
    REQUIRE(back.fair == rep.fair);
    REQUIRE(back.violation == rep.violation);
    REQUIRE(back.moves == rep.moves);
    REQUIRE(back.labels == rep.labels);

    REQUIRE(csv_header() ==
            "dataset,n,m,k,sigma,seed,mode,xi,mu0,ncut,balance,fair,embed_seconds,round_seconds,"
            "total_seconds,embed_iters,violation,moves");
    const std::string row = to_csv_row(rep);
    REQUIRE(std::count(row.begin(), row.end(), ',') == 17);
}

TEST_CASE("repeated runs agree except for timing") {
    auto sample = sbm_generate(small_sbm(25));
    RunConfig cfg;
    cfg.k = 3;
    cfg.sigma = Rational(1, 2);
    cfg.seed = 99;
    cfg.embed.max_outer = 25;
    RunReport a = run_partition(sample.graph, sample.groups, cfg);
    RunReport b = run_partition(sample.graph, sample.groups, cfg);
    REQUIRE(a.ncut == b.ncut);
    REQUIRE(a.balance == b.balance);
    REQUIRE(a.labels == b.labels);
    REQUIRE(a.violation == b.violation);
    REQUIRE(a.moves == b.moves);

    auto strip = [](RunReport r) {
        r.embed_seconds = r.round_seconds = r.total_seconds = 0.0;
        return to_json(r).dump();
    };
    REQUIRE(strip(a) == strip(b));
}
