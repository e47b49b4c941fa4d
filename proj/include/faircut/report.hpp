#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "embedding.hpp"
#include "rational.hpp"
#include "rounding.hpp"

namespace faircut {

struct CellResult {
    double xi = 0.0;
    double mu0 = 0.0;
    double ncut = 0.0;
    double balance = 0.0;
    double objective = 0.0;  // final embedding trace objective
    double violation = 0.0;
    bool fair = false;
    bool converged = false;
    double seconds = 0.0;
};

struct RunReport {
    std::string dataset;
    int n = 0;
    int m = 0;
    int k = 0;
    Rational sigma{0, 1};
    Rational sigma_emb{0, 1};
    std::uint64_t seed = 0;
    std::string mode;  // "lp" or "kr"
    double xi = 0.0;
    double mu0 = 0.0;
    double ncut = 0.0;
    double balance = 0.0;
    bool fair = false;
    double objective = 0.0;  // embedding trace objective of the selected iterate
    double embed_seconds = 0.0;
    double round_seconds = 0.0;
    double total_seconds = 0.0;
    long embed_iters = 0;  // total inner iterations
    int embed_outer_iters = 0;
    double violation = 0.0;
    long moves = 0;
    bool embed_converged = false;
    std::vector<int> labels;
    std::vector<OuterRecord> embed_trace;
    std::vector<RoundingIterRecord> round_trace;
    std::vector<CellResult> cells;  // grid-search cells, row-major over (xi, mu0)
    int chosen_cell = -1;
    int lowest_objective_cell = -1;
};

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline std::string csv_header() {
    return "dataset,n,m,k,sigma,seed,mode,xi,mu0,ncut,balance,fair,embed_seconds,round_seconds,"
           "total_seconds,embed_iters,violation,moves";
}

inline std::string to_csv_row(const RunReport& r) {
    using detail::fmt_double;
    std::string row = r.dataset;
    row += "," + std::to_string(r.n);
    row += "," + std::to_string(r.m);
    row += "," + std::to_string(r.k);
    row += "," + fmt_double(r.sigma.value());
    row += "," + std::to_string(r.seed);
    row += "," + r.mode;
    row += "," + fmt_double(r.xi);
    row += "," + fmt_double(r.mu0);
    row += "," + fmt_double(r.ncut);
    row += "," + fmt_double(r.balance);
    row += r.fair ? ",1" : ",0";
    row += "," + fmt_double(r.embed_seconds);
    row += "," + fmt_double(r.round_seconds);
    row += "," + fmt_double(r.total_seconds);
    row += "," + std::to_string(r.embed_iters);
    row += "," + fmt_double(r.violation);
    row += "," + std::to_string(r.moves);
    return row;
}

inline nlohmann::json to_json(const RunReport& r) {
    nlohmann::json j{{"dataset", r.dataset},
                     {"n", r.n},
                     {"m", r.m},
                     {"k", r.k},
                     {"sigma", r.sigma.value()},
                     {"sigma_exact", r.sigma.str()},
                     {"sigma_emb_exact", r.sigma_emb.str()},
                     {"seed", r.seed},
                     {"mode", r.mode},
                     {"xi", r.xi},
                     {"mu0", r.mu0},
                     {"ncut", r.ncut},
                     {"balance", r.balance},
                     {"fair", r.fair},
                     {"objective", r.objective},
                     {"embed_seconds", r.embed_seconds},
                     {"round_seconds", r.round_seconds},
                     {"total_seconds", r.total_seconds},
                     {"embed_iters", r.embed_iters},
                     {"embed_outer_iters", r.embed_outer_iters},
                     {"violation", r.violation},
                     {"moves", r.moves},
                     {"embed_converged", r.embed_converged}};
    if (!r.labels.empty()) j["labels"] = r.labels;
    if (!r.embed_trace.empty()) {
        auto& arr = j["embed_trace"] = nlohmann::json::array();
        for (const auto& t : r.embed_trace)
            arr.push_back({{"outer", t.outer},
                           {"inner_iters", t.inner_iters},
                           {"objective", t.objective},
                           {"augmented", t.augmented},
                           {"violation", t.violation},
                           {"tau", t.tau},
                           {"grad_norm", t.grad_norm}});
    }
    if (!r.round_trace.empty()) {
        auto& arr = j["round_trace"] = nlohmann::json::array();
        for (const auto& t : r.round_trace)
            arr.push_back({{"iteration", t.iteration},
                           {"ncut", t.ncut},
                           {"moves", t.moves},
                           {"center_drift", t.center_drift}});
    }
    if (!r.cells.empty()) {
        auto& arr = j["cells"] = nlohmann::json::array();
        for (const auto& c : r.cells)
            arr.push_back({{"xi", c.xi},
                           {"mu0", c.mu0},
                           {"ncut", c.ncut},
                           {"balance", c.balance},
                           {"objective", c.objective},
                           {"violation", c.violation},
                           {"fair", c.fair},
                           {"converged", c.converged},
                           {"seconds", c.seconds}});
        j["chosen_cell"] = r.chosen_cell;
        j["lowest_objective_cell"] = r.lowest_objective_cell;
    }
    return j;
}

inline std::string emit_report(const RunReport& r, const std::string& format) {
    if (format == "csv") return csv_header() + "\n" + to_csv_row(r) + "\n";
    if (format == "json") return to_json(r).dump(2) + "\n";
    fail(Errc::bad_input, "unknown report format '" + format + "'");
}

inline RunReport report_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    RunReport r;
    r.dataset = j.at("dataset").get<std::string>();
    r.n = j.at("n").get<int>();
    r.m = j.at("m").get<int>();
    r.k = j.at("k").get<int>();
    r.sigma = Rational::parse(j.at("sigma_exact").get<std::string>());
    r.sigma_emb = Rational::parse(j.at("sigma_emb_exact").get<std::string>());
    r.seed = j.at("seed").get<std::uint64_t>();
    r.mode = j.at("mode").get<std::string>();
    r.xi = j.at("xi").get<double>();
    r.mu0 = j.at("mu0").get<double>();
    r.ncut = j.at("ncut").get<double>();
    r.balance = j.at("balance").get<double>();
    r.fair = j.at("fair").get<bool>();
    r.objective = j.at("objective").get<double>();
    r.embed_seconds = j.at("embed_seconds").get<double>();
    r.round_seconds = j.at("round_seconds").get<double>();
    r.total_seconds = j.at("total_seconds").get<double>();
    r.embed_iters = j.at("embed_iters").get<long>();
    r.embed_outer_iters = j.at("embed_outer_iters").get<int>();
    r.violation = j.at("violation").get<double>();
    r.moves = j.at("moves").get<long>();
    r.embed_converged = j.at("embed_converged").get<bool>();
    if (j.contains("labels")) r.labels = j.at("labels").get<std::vector<int>>();
    return r;
}

}  // namespace faircut
