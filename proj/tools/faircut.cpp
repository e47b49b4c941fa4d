#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "faircut/faircut.hpp"

namespace {

using namespace faircut;

// Exit codes: 0 fair result, 2 fair but the embedding did not converge,
// 3 infeasible rounding, 4 input error, 1 anything else.
constexpr int kExitOk = 0;
constexpr int kExitNotConverged = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitInput = 4;

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) fail(Errc::bad_input, "cannot write '" + path + "'");
    out << text;
}

std::vector<double> parse_grid(const std::string& csv) {
    std::vector<double> grid;
    std::string item;
    std::istringstream is(csv);
    while (std::getline(is, item, ',')) grid.push_back(std::stod(item));
    return grid;
}

int run_partition_cmd(const std::string& edges_path, const std::string& groups_path, int k,
                      const std::string& sigma_str, const std::string& sigma_emb_str,
                      std::uint64_t seed, const std::string& mode, bool do_grid,
                      const std::string& xi_csv, const std::string& mu0_csv, double xi, double mu0,
                      const std::string& report_path, const std::string& format,
                      const std::string& labels_path, const std::string& bounds_scheme, bool trace,
                      unsigned threads) {
    auto edges = read_edge_list(edges_path);
    Graph g = Graph::build(edges);
    GroupAssignment ga = GroupAssignment::build(read_groups(groups_path, g.num_nodes()));

    RunConfig cfg;
    cfg.k = k;
    cfg.sigma = Rational::parse(sigma_str);
    if (!sigma_emb_str.empty()) cfg.sigma_emb = Rational::parse(sigma_emb_str);
    cfg.seed = seed;
    cfg.dataset_name = edges_path;
    cfg.embed.xi = xi;
    cfg.embed.mu0 = mu0;
    cfg.embed.record_trace = trace;
    cfg.round.record_trace = trace;
    cfg.scheme = bounds_scheme == "shifted" ? BoundsScheme::shifted : BoundsScheme::scaled;
    if (mode == "lp") cfg.mode = RunConfig::Mode::lp;
    else if (mode == "kr") cfg.mode = RunConfig::Mode::kr;

    RunReport rep = do_grid ? grid_search(g, ga, cfg, parse_grid(xi_csv), parse_grid(mu0_csv), threads)
                            : run_partition(g, ga, cfg);

    if (!labels_path.empty()) write_labels(labels_path, rep.labels);
    RunReport out = rep;
    if (labels_path.empty() && out.n > 10000) out.labels.clear();  // keep reports readable
    write_text(report_path, emit_report(out, format));

    std::fprintf(stderr, "ncut=%.6f balance=%.6f fair=%d mode=%s embed_converged=%d\n", rep.ncut,
                 rep.balance, static_cast<int>(rep.fair), rep.mode.c_str(),
                 static_cast<int>(rep.embed_converged));
    if (!rep.fair) return kExitInfeasible;
    return rep.embed_converged ? kExitOk : kExitNotConverged;
}

int run_sbm_cmd(const std::string& sizes_csv, double p_in, double p_out, double p_same,
                std::uint64_t seed, const std::string& out_prefix) {
    SbmConfig cfg;
    for (double v : parse_grid(sizes_csv)) cfg.cluster_sizes.push_back(static_cast<int>(v));
    cfg.p_in = p_in;
    cfg.p_out = p_out;
    cfg.p_same = p_same;
    cfg.seed = seed;
    SbmSample sample = sbm_generate(cfg);

    std::vector<Edge> edges;
    const Graph& g = sample.graph;
    for (int i = 0; i < g.num_nodes(); ++i) {
        auto cols = g.neighbors(i);
        auto wgts = g.weights(i);
        for (size_t a = 0; a < cols.size(); ++a)
            if (i < cols[a]) edges.push_back({i, cols[a], wgts[a]});
    }
    write_edge_list(out_prefix + ".edges", edges);
    write_groups(out_prefix + ".groups", sample.groups.phi());
    write_labels(out_prefix + ".labels", sample.ground_truth);
    std::fprintf(stderr, "n=%d edges=%zu groups=%d attempts=%d\n", g.num_nodes(), edges.size(),
                 sample.groups.num_groups(), sample.attempts);
    return kExitOk;
}

int run_prep_cmd(const std::string& edges_path, const std::string& groups_path,
                 const std::string& out_prefix) {
    auto edges = read_edge_list(edges_path);
    auto lcc = largest_connected_component(edges);
    write_edge_list(out_prefix + ".edges", lcc.edges);
    if (!groups_path.empty()) {
        int n_orig = 0;
        for (const Edge& e : edges) n_orig = std::max(n_orig, std::max(e.i, e.j) + 1);
        auto phi = read_groups(groups_path, n_orig);
        std::vector<int> kept;
        kept.reserve(lcc.kept_original.size());
        for (int orig : lcc.kept_original) kept.push_back(phi[orig]);
        write_groups(out_prefix + ".groups", kept);
    }
    std::fprintf(stderr, "kept %zu of %s nodes\n", lcc.kept_original.size(), edges_path.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fair normalized-cut graph partitioning"};
    app.require_subcommand(1);

    // partition
    auto* part = app.add_subcommand("partition", "Partition a graph under fairness bounds");
    std::string edges_path, groups_path, sigma_str = "0.2", sigma_emb_str, mode = "auto";
    std::string report_path, format = "json", labels_path, bounds_scheme = "scaled";
    std::string xi_csv = "2,4,6,8,10", mu0_csv = "1e-4,1e-2,1,1e2";
    int k = 5;
    std::uint64_t seed = 0;
    double xi = 4.0, mu0 = 1.0;
    bool do_grid = false, trace = false;
    unsigned threads = 0;
    part->add_option("--edges", edges_path, "edge list file")->required();
    part->add_option("--groups", groups_path, "group file")->required();
    part->add_option("--k", k, "number of clusters")->required();
    part->add_option("--sigma", sigma_str, "fairness looseness in [0,1], rational or decimal");
    part->add_option("--sigma-emb", sigma_emb_str, "embedding-phase sigma (defaults to --sigma)");
    part->add_option("--seed", seed, "run seed");
    part->add_option("--mode", mode, "assignment mode: lp, kr or auto")
        ->check(CLI::IsMember({"lp", "kr", "auto"}));
    part->add_flag("--grid-search", do_grid, "grid search over xi and mu0");
    part->add_option("--xi-grid", xi_csv, "comma-separated xi grid");
    part->add_option("--mu0-grid", mu0_csv, "comma-separated mu0 grid");
    part->add_option("--xi", xi, "penalty amplification (single run)");
    part->add_option("--mu0", mu0, "initial penalty weight (single run)");
    part->add_option("--report", report_path, "report output path ('-' for stdout)");
    part->add_option("--format", format, "report format")->check(CLI::IsMember({"json", "csv"}));
    part->add_option("--labels-out", labels_path, "write final labels to file");
    part->add_option("--bounds-scheme", bounds_scheme, "bound parameterization")
        ->check(CLI::IsMember({"scaled", "shifted"}));
    part->add_flag("--trace", trace, "record per-iteration traces in the report");
    part->add_option("--threads", threads, "grid-search worker threads (0 = auto)");

    // sbm
    auto* sbm = app.add_subcommand("sbm", "Generate a planted-partition benchmark graph");
    std::string sizes_csv = "500,200,100,100,100", out_prefix = "sbm";
    double p_in = 0.25, p_out = 0.05, p_same = 0.6;
    std::uint64_t sbm_seed = 0;
    sbm->add_option("--sizes", sizes_csv, "comma-separated cluster sizes");
    sbm->add_option("--p-in", p_in, "intra-cluster edge probability");
    sbm->add_option("--p-out", p_out, "inter-cluster edge probability");
    sbm->add_option("--p-same", p_same, "probability of keeping the cluster's group");
    sbm->add_option("--seed", sbm_seed, "generator seed");
    sbm->add_option("--out-prefix", out_prefix, "output prefix for .edges/.groups/.labels");

    // prep
    auto* prep = app.add_subcommand("prep", "Extract the largest connected component");
    std::string prep_edges, prep_groups, prep_prefix = "prep";
    prep->add_option("--edges", prep_edges, "edge list file")->required();
    prep->add_option("--groups", prep_groups, "group file (optional)");
    prep->add_option("--out-prefix", prep_prefix, "output prefix");

    CLI11_PARSE(app, argc, argv);

    try {
        if (part->parsed())
            return run_partition_cmd(edges_path, groups_path, k, sigma_str, sigma_emb_str, seed,
                                     mode, do_grid, xi_csv, mu0_csv, xi, mu0, report_path, format,
                                     labels_path, bounds_scheme, trace, threads);
        if (sbm->parsed()) return run_sbm_cmd(sizes_csv, p_in, p_out, p_same, sbm_seed, out_prefix);
        if (prep->parsed()) return run_prep_cmd(prep_edges, prep_groups, prep_prefix);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        switch (e.code()) {
            case Errc::ip2_infeasible:
            case Errc::lp_infeasible:
                return kExitInfeasible;
            case Errc::bad_input:
            case Errc::bad_shape:
            case Errc::self_loop:
            case Errc::negative_weight:
            case Errc::isolated_node:
                return kExitInput;
            default:
                return 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
