#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <string>
#include <vector>

#include "error.hpp"
#include "fairness.hpp"
#include "graph.hpp"
#include "groups.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace faircut {

// Applies the normalized Laplacian I - D^{-1/2} W D^{-1/2} to a node-major
// matrix via sparse row scans; the operator is never formed densely.
inline Matrix normalized_laplacian_apply(const Graph& g, const Matrix& T) {
    const int n = g.num_nodes();
    const int k = static_cast<int>(T.cols());
    Matrix out(n, k);
    for (int i = 0; i < n; ++i) {
        auto cols = g.neighbors(i);
        auto wgts = g.weights(i);
        Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(k);
        for (size_t a = 0; a < cols.size(); ++a)
            acc.noalias() += (wgts[a] * g.inv_sqrt_degree(cols[a])) * T.row(cols[a]);
        out.row(i) = T.row(i) - g.inv_sqrt_degree(i) * acc;
    }
    return out;
}

// trace(T^T D^{-1/2} L D^{-1/2} T)
inline double trace_objective(const Graph& g, const Matrix& T) {
    return (T.array() * normalized_laplacian_apply(g, T).array()).sum();
}

struct EmbeddingConfig {
    int max_outer = 100;          // outer augmented-Lagrangian iterations
    int max_inner = 2000;         // inner manifold-descent iterations
    double violation_tol = 1e-6;  // stop when the fairness violation drops below this
    double grad_tol = 1e-3;       // inner stop on the tangent gradient norm
    double tau0 = 1e-3;           // initial step size
    double mu0 = 1.0;             // initial penalty weight
    double xi = 4.0;              // penalty amplification per outer iteration (> 1)
    double tau_min = 1e-10;
    double tau_max = 1e2;
    std::uint64_t seed = 0;
    bool use_smw = true;          // low-rank update instead of the n-by-n Cayley solve
    int nonmonotone_window = 10;
    double armijo = 1e-4;
    bool record_trace = false;
};

struct EmbeddingState {
    Matrix T;          // orthonormal columns
    MatrixXd Lambda;   // m-by-2k nonnegative multipliers
    double mu = 1.0;
    double tau = 1e-3;
    int outer_iter = 0;
    int inner_iter = 0;
};

struct OuterRecord {
    int outer = 0;
    int inner_iters = 0;
    double objective = 0.0;     // trace term
    double augmented = 0.0;     // trace term plus penalty terms
    double violation = 0.0;
    double tau = 0.0;
    double grad_norm = 0.0;
};

struct EmbeddingResult {
    Matrix H;                   // D^{-1/2} T
    double violation = 0.0;
    double objective = 0.0;     // trace term of the selected iterate
    bool converged = false;
    int outer_iters = 0;
    long inner_iters = 0;
    std::vector<OuterRecord> trace;
};

// Deterministic orthonormal n-by-k matrix: QR of a seeded Gaussian matrix
// with the R diagonal forced positive.
inline Matrix init_orthonormal(int n, int k, std::uint64_t seed) {
    if (k < 1 || k > n) fail(Errc::bad_shape, "need 1 <= k <= n for an orthonormal frame");
    Rng rng(seed);
    Matrix A(n, k);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) A(i, j) = rng.normal();
    Eigen::HouseholderQR<MatrixXd> qr(A);
    MatrixXd Q = qr.householderQ() * MatrixXd::Identity(n, k);
    MatrixXd R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    for (int j = 0; j < k; ++j)
        if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
    return Q;
}

// Penalty-plus-multiplier term for one constraint entry; continuously
// differentiable in p with the kink matched at p = lambda/mu.
inline double rho(double p, double lambda, double mu) {
    if (p - lambda / mu <= 0.0) return -lambda * p + 0.5 * mu * p * p;
    return -lambda * lambda / (2.0 * mu);
}

inline double rho_grad(double p, double lambda, double mu) {
    if (p - lambda / mu <= 0.0) return -lambda + mu * p;
    return 0.0;
}

namespace detail {

inline double augmented_objective_at(const Graph& g, const ConstraintOperator& co, const Matrix& T,
                                     const MatrixXd& Lambda, double mu) {
    double obj = trace_objective(g, T);
    if (co.penalty_active()) {
        const MatrixXd P = co.penalty(T);
        for (Eigen::Index c = 0; c < P.rows(); ++c)
            for (Eigen::Index l = 0; l < P.cols(); ++l) obj += rho(P(c, l), Lambda(c, l), mu);
    }
    return obj;
}

inline Matrix gradient_at(const Graph& g, const ConstraintOperator& co, const Matrix& T,
                          const MatrixXd& Lambda, double mu) {
    Matrix G = 2.0 * normalized_laplacian_apply(g, T);
    if (co.penalty_active()) {
        const MatrixXd P = co.penalty(T);
        MatrixXd grad_rho(P.rows(), P.cols());
        for (Eigen::Index c = 0; c < P.rows(); ++c)
            for (Eigen::Index l = 0; l < P.cols(); ++l)
                grad_rho(c, l) = rho_grad(P(c, l), Lambda(c, l), mu);
        co.add_adjoint(grad_rho, G);
    }
    return G;
}

}  // namespace detail

inline double augmented_objective(const Graph& g, const ConstraintOperator& co,
                                  const EmbeddingState& st) {
    return detail::augmented_objective_at(g, co, st.T, st.Lambda, st.mu);
}

// Euclidean gradient of the augmented objective with respect to T.
inline Matrix gradient(const Graph& g, const ConstraintOperator& co, const EmbeddingState& st) {
    return detail::gradient_at(g, co, st.T, st.Lambda, st.mu);
}

// One curvilinear step on the Stiefel manifold via the low-rank form of the
// Cayley transform: only a 2k-by-2k system is solved and the skew factor is
// never materialized.
inline Matrix stiefel_update_smw(const Matrix& T, const Matrix& G, double tau) {
    const int k = static_cast<int>(T.cols());
    MatrixXd X(T.rows(), 2 * k), Y(T.rows(), 2 * k);
    X.leftCols(k) = G;
    X.rightCols(k) = T;
    Y.leftCols(k) = T;
    Y.rightCols(k) = -G;
    MatrixXd K = MatrixXd::Identity(2 * k, 2 * k) + (tau / 2.0) * (Y.transpose() * X);
    Eigen::PartialPivLU<MatrixXd> lu(K);
    if (lu.rcond() < 1e-14) fail(Errc::singular_update, "curvilinear update system is singular");
    MatrixXd Z = lu.solve(Y.transpose() * T);
    return T - tau * (X * Z);
}

// Reference path: the full n-by-n Cayley transform on Omega = G T^T - T G^T.
inline Matrix stiefel_update_cayley(const Matrix& T, const Matrix& G, double tau) {
    const Eigen::Index n = T.rows();
    MatrixXd omega = MatrixXd(G) * MatrixXd(T).transpose();
    omega -= omega.transpose().eval();
    MatrixXd lhs = MatrixXd::Identity(n, n) + (tau / 2.0) * omega;
    Eigen::PartialPivLU<MatrixXd> lu(lhs);
    if (lu.rcond() < 1e-14) fail(Errc::singular_update, "curvilinear update system is singular");
    return lu.solve((MatrixXd::Identity(n, n) - (tau / 2.0) * omega) * MatrixXd(T));
}

inline Matrix stiefel_update(const EmbeddingState& st, const Matrix& G, bool use_smw = true) {
    return use_smw ? stiefel_update_smw(st.T, G, st.tau) : stiefel_update_cayley(st.T, G, st.tau);
}

// Alternating Barzilai-Borwein step from secant pairs, clamped; degenerate
// inner products fall back to the previous step size.
inline double bb_step(const Matrix& s, const Matrix& y, int inner_iter, double prev_tau,
                      double tau_min, double tau_max) {
    const double ss = (s.array() * s.array()).sum();
    const double sy = (s.array() * y.array()).sum();
    const double yy = (y.array() * y.array()).sum();
    double tau = prev_tau;
    if (inner_iter % 2 == 1) {
        if (sy != 0.0 && ss != 0.0) tau = ss / std::abs(sy);
    } else {
        if (sy != 0.0 && yy != 0.0) tau = std::abs(sy) / yy;
    }
    return std::clamp(tau, tau_min, tau_max);
}

struct SubproblemStats {
    int iters = 0;
    double grad_norm = 0.0;
    double objective = 0.0;  // augmented objective of the returned iterate
};

namespace detail {

inline double orthogonality_drift(const Matrix& T) {
    const int k = static_cast<int>(T.cols());
    return (MatrixXd(T.transpose() * T) - MatrixXd::Identity(k, k)).norm();
}

inline void reorthonormalize(Matrix& T) {
    Eigen::HouseholderQR<MatrixXd> qr{MatrixXd(T)};
    const int k = static_cast<int>(T.cols());
    MatrixXd Q = qr.householderQ() * MatrixXd::Identity(T.rows(), k);
    MatrixXd R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    for (int j = 0; j < k; ++j)
        if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
    T = Q;
}

}  // namespace detail

// Inner loop: minimizes the augmented objective over the Stiefel manifold by
// curvilinear descent with alternating Barzilai-Borwein steps and a
// nonmonotone backtracking safeguard. Leaves the best accepted iterate in
// st.T. `accepted` (optional) records the objective after every accepted step.
inline SubproblemStats solve_subproblem(const Graph& g, const ConstraintOperator& co,
                                        EmbeddingState& st, const EmbeddingConfig& cfg,
                                        std::vector<double>* accepted = nullptr) {
    double f = augmented_objective(g, co, st);
    Matrix G = gradient(g, co, st);
    Matrix tangent = G - st.T * MatrixXd(G.transpose() * st.T);
    double tangent_norm = tangent.norm();

    std::deque<double> window{f};
    double best_f = f;
    Matrix best_T = st.T;

    SubproblemStats stats;
    for (int j = 1; j <= cfg.max_inner; ++j) {
        if (tangent_norm <= cfg.grad_tol) break;

        const double fref = *std::max_element(window.begin(), window.end());
        const double decrement = cfg.armijo * tangent_norm * tangent_norm;
        Matrix Tc;
        double fc = 0.0;
        int halvings = 0;
        for (;;) {
            bool singular = false;
            try {
                Tc = stiefel_update(st, G, cfg.use_smw);
            } catch (const Error& e) {
                if (e.code() != Errc::singular_update) throw;
                singular = true;
            }
            if (!singular) {
                fc = detail::augmented_objective_at(g, co, Tc, st.Lambda, st.mu);
                if (fc <= fref - st.tau * decrement || halvings >= 20) break;
            }
            st.tau /= 2.0;
            if (st.tau < 1e-15) {
                if (singular) fail(Errc::singular_update, "step size underflow in curvilinear update");
                break;
            }
            ++halvings;
        }
        if (st.tau < 1e-15) break;

        if (detail::orthogonality_drift(Tc) > 1e-6) {
            detail::reorthonormalize(Tc);
            fc = detail::augmented_objective_at(g, co, Tc, st.Lambda, st.mu);
        }

        const Matrix s = Tc - st.T;
        st.T = Tc;
        f = fc;
        G = detail::gradient_at(g, co, st.T, st.Lambda, st.mu);
        Matrix tangent_new = G - st.T * MatrixXd(G.transpose() * st.T);
        const Matrix y = tangent_new - tangent;
        tangent = std::move(tangent_new);
        tangent_norm = tangent.norm();

        st.tau = bb_step(s, y, j, st.tau, cfg.tau_min, cfg.tau_max);
        st.inner_iter++;
        stats.iters = j;
        if (accepted) accepted->push_back(f);
        window.push_back(f);
        if (static_cast<int>(window.size()) > cfg.nonmonotone_window) window.pop_front();
        if (f < best_f) {
            best_f = f;
            best_T = st.T;
        }
    }

    st.T = best_T;
    stats.objective = best_f;
    stats.grad_norm = tangent_norm;
    return stats;
}

// Outer augmented-Lagrangian loop. Multipliers follow
// Lambda <- max(Lambda - mu P(T), 0) and mu <- xi mu after each subproblem;
// the loop stops once the fairness violation falls below the tolerance.
// Without convergence the iterate with the smallest violation (ties broken by
// the trace objective) is returned with converged = false. sigma = 1 runs the
// unconstrained descent: there is no constraint to enforce.
inline EmbeddingResult fair_spectral_embedding(const Graph& g, const GroupAssignment& ga,
                                               const FairnessBounds& fb, int k,
                                               const EmbeddingConfig& cfg) {
    if (k < 2) fail(Errc::bad_shape, "need k >= 2 clusters");
    if (cfg.max_outer < 1 || cfg.max_inner < 1 || cfg.violation_tol < 0 || cfg.grad_tol <= 0 ||
        cfg.tau0 <= 0 || cfg.mu0 <= 0 || cfg.xi <= 1.0 || cfg.tau_min <= 0 ||
        cfg.tau_max < cfg.tau_min)
        fail(Errc::bad_input, "embedding configuration out of range (xi must exceed 1, the rest positive)");
    const int n = g.num_nodes();
    const int m = ga.num_groups();
    ConstraintOperator co(g, ga, fb);

    EmbeddingState st;
    st.T = init_orthonormal(n, k, cfg.seed);
    st.Lambda = MatrixXd::Zero(m, 2 * k);
    st.mu = cfg.mu0;
    st.tau = cfg.tau0;

    EmbeddingResult res;
    double best_viol = std::numeric_limits<double>::infinity();
    double best_obj = std::numeric_limits<double>::infinity();
    Matrix best_T;

    for (int t = 0; t < cfg.max_outer; ++t) {
        st.outer_iter = t;
        st.tau = cfg.tau0;
        SubproblemStats stats = solve_subproblem(g, co, st, cfg);
        res.outer_iters = t + 1;
        res.inner_iters += stats.iters;

        double viol = 0.0;
        if (co.penalty_active()) {
            const MatrixXd P = co.penalty(st.T);
            viol = fairness_violation(P);
            st.Lambda = (st.Lambda - st.mu * P).cwiseMax(0.0);
            st.mu *= cfg.xi;
        }
        const double tobj = trace_objective(g, st.T);
        if (cfg.record_trace)
            res.trace.push_back({t, stats.iters, tobj, stats.objective, viol, st.tau, stats.grad_norm});

        if (viol < best_viol || (viol == best_viol && tobj < best_obj)) {
            best_viol = viol;
            best_obj = tobj;
            best_T = st.T;
        }
        if (viol <= cfg.violation_tol) {
            best_viol = viol;
            best_obj = tobj;
            best_T = st.T;
            res.converged = true;
            break;
        }
    }

    res.violation = best_viol;
    res.objective = best_obj;
    res.H = best_T;
    for (int i = 0; i < n; ++i) res.H.row(i) *= g.inv_sqrt_degree(i);
    return res;
}

}  // namespace faircut
