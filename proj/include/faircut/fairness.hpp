#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "groups.hpp"
#include "matrix.hpp"
#include "partition.hpp"
#include "rational.hpp"

namespace faircut {

enum class BoundsScheme {
    scaled,   // alpha_c = min{r_c/(1-sigma), 1}, beta_c = r_c*(1-sigma)
    shifted,  // beta_c = r_c*(1-sigma), alpha_c = min{beta_c + sigma, 1}
};

// Per-group lower/upper cluster-share bounds derived from the looseness
// parameter sigma in [0, 1]. Exact rational forms are kept alongside the
// double views so integral fairness checks have no floating-point boundary
// cases. sigma = 1 means no constraint (beta = 0, alpha = 1).
class FairnessBounds {
  public:
    static FairnessBounds from_sigma(const GroupAssignment& ga, Rational sigma,
                                     BoundsScheme scheme = BoundsScheme::scaled) {
        if (sigma < Rational(0, 1) || Rational(1, 1) < sigma)
            fail(Errc::bad_input, "sigma must lie in [0, 1]");
        FairnessBounds fb;
        fb.sigma_ = sigma;
        fb.scheme_ = scheme;
        const std::int64_t n = ga.num_nodes();
        const Rational one(1, 1);
        const Rational keep = one - sigma;  // 1 - sigma
        for (int c = 0; c < ga.num_groups(); ++c) {
            const Rational rc(ga.count(c), n);
            Rational beta = rc * keep;
            Rational alpha = one;
            if (scheme == BoundsScheme::scaled) {
                if (!(keep == Rational(0, 1)))
                    alpha = std::min(Rational(rc.num * keep.den, rc.den * keep.num), one);
            } else {
                alpha = std::min(beta + sigma, one);
            }
            fb.alpha_.push_back(alpha);
            fb.beta_.push_back(beta);
        }
        return fb;
    }

    int num_groups() const { return static_cast<int>(alpha_.size()); }
    double alpha(int c) const { return alpha_[c].value(); }
    double beta(int c) const { return beta_[c].value(); }
    const Rational& alpha_exact(int c) const { return alpha_[c]; }
    const Rational& beta_exact(int c) const { return beta_[c]; }
    const Rational& sigma() const { return sigma_; }
    BoundsScheme scheme() const { return scheme_; }
    bool unconstrained() const { return sigma_ == Rational(1, 1); }

  private:
    Rational sigma_;
    BoundsScheme scheme_ = BoundsScheme::scaled;
    std::vector<Rational> alpha_;
    std::vector<Rational> beta_;
};

// Exact integral fairness gate: every group's share of every cluster lies in
// [beta_c, alpha_c], decided by integer cross-multiplication.
inline bool is_fair(const PartitionState& p, const GroupAssignment& ga, const FairnessBounds& fb) {
    for (int c = 0; c < ga.num_groups(); ++c) {
        const Rational& a = fb.alpha_exact(c);
        const Rational& b = fb.beta_exact(c);
        for (int l = 0; l < p.k(); ++l) {
            const std::int64_t ncl = p.group_count(c, l);
            const std::int64_t sz = p.cluster_size(l);
            // beta <= ncl/sz <= alpha
            if (!ratio_le(static_cast<__int128>(b.num) * sz, b.den, ncl, 1)) return false;
            if (!ratio_le(ncl, 1, static_cast<__int128>(a.num) * sz, a.den)) return false;
        }
    }
    return true;
}

// balance(p) >= threshold decided in exact integer arithmetic.
inline bool balance_at_least(const PartitionState& p, const GroupAssignment& ga, const Rational& threshold) {
    const std::int64_t n = ga.num_nodes();
    for (int c = 0; c < ga.num_groups(); ++c) {
        const std::int64_t cnt = ga.count(c);
        for (int l = 0; l < p.k(); ++l) {
            const std::int64_t ncl = p.group_count(c, l);
            const std::int64_t sz = p.cluster_size(l);
            // r_cl/r_c = ncl*n / (sz*cnt) and its reciprocal, both >= threshold
            if (!ratio_le(static_cast<__int128>(threshold.num) * sz * cnt, threshold.den,
                          static_cast<__int128>(ncl) * n, 1))
                return false;
            if (!ratio_le(static_cast<__int128>(threshold.num) * ncl * n, threshold.den,
                          static_cast<__int128>(sz) * cnt, 1))
                return false;
        }
    }
    return true;
}

// Applies the fairness rows (upper-bound rows (A - M)^T D^{-1/2} and
// lower-bound rows (M - B)^T D^{-1/2}) to n-by-k matrices without ever
// materializing the rank-one bound matrices: one pass accumulates the
// degree-scaled total and per-group sums, which is O(n k) per product.
// `penalty_active()` is false when sigma = 1, in which case the embedding
// drops the penalty terms entirely (no constraint to enforce).
class ConstraintOperator {
  public:
    ConstraintOperator(const Graph& g, const GroupAssignment& ga, const FairnessBounds& fb)
        : graph_(&g), groups_(&ga), bounds_(&fb), active_(!fb.unconstrained()) {
        if (ga.num_nodes() != g.num_nodes()) fail(Errc::bad_shape, "group assignment does not match graph");
        if (fb.num_groups() != ga.num_groups()) fail(Errc::bad_shape, "bounds do not match group count");
    }

    const Graph& graph() const { return *graph_; }
    const GroupAssignment& groups() const { return *groups_; }
    const FairnessBounds& bounds() const { return *bounds_; }
    int num_groups() const { return groups_->num_groups(); }
    bool penalty_active() const { return active_; }

    // P(T) = [(A - M)^T D^{-1/2} T, (M - B)^T D^{-1/2} T], an m-by-2k matrix.
    MatrixXd penalty(const Matrix& T) const {
        const int n = graph_->num_nodes();
        const int k = static_cast<int>(T.cols());
        const int m = num_groups();
        if (static_cast<int>(T.rows()) != n) fail(Errc::bad_shape, "embedding rows do not match graph");

        Eigen::RowVectorXd total = Eigen::RowVectorXd::Zero(k);
        MatrixXd group_sum = MatrixXd::Zero(m, k);
        for (int i = 0; i < n; ++i) {
            const double u = graph_->inv_sqrt_degree(i);
            total.noalias() += u * T.row(i);
            group_sum.row(groups_->group_of(i)).noalias() += u * T.row(i);
        }
        MatrixXd P(m, 2 * k);
        for (int c = 0; c < m; ++c) {
            P.row(c).head(k) = bounds_->alpha(c) * total - group_sum.row(c);
            P.row(c).tail(k) = group_sum.row(c) - bounds_->beta(c) * total;
        }
        return P;
    }

    // Adds D^{-1/2}(A - M) * GL + D^{-1/2}(M - B) * GR into `out`, where GL
    // and GR are the first/last k columns of an m-by-2k matrix.
    void add_adjoint(const MatrixXd& grad_rho, Matrix& out) const {
        const int n = graph_->num_nodes();
        const int k = static_cast<int>(out.cols());
        const int m = num_groups();
        Eigen::RowVectorXd alpha_mix = Eigen::RowVectorXd::Zero(k);
        Eigen::RowVectorXd beta_mix = Eigen::RowVectorXd::Zero(k);
        for (int c = 0; c < m; ++c) {
            alpha_mix.noalias() += bounds_->alpha(c) * grad_rho.row(c).head(k);
            beta_mix.noalias() += bounds_->beta(c) * grad_rho.row(c).tail(k);
        }
        for (int i = 0; i < n; ++i) {
            const int c = groups_->group_of(i);
            const double u = graph_->inv_sqrt_degree(i);
            out.row(i).noalias() +=
                u * (alpha_mix - grad_rho.row(c).head(k) + grad_rho.row(c).tail(k) - beta_mix);
        }
    }

  private:
    const Graph* graph_;
    const GroupAssignment* groups_;
    const FairnessBounds* bounds_;
    bool active_;
};

// Frobenius norm of the entrywise min with zero: the fairness violation of a
// penalty matrix.
inline double fairness_violation(const MatrixXd& P) {
    double sq = 0.0;
    for (Eigen::Index r = 0; r < P.rows(); ++r)
        for (Eigen::Index c = 0; c < P.cols(); ++c) {
            const double v = std::min(P(r, c), 0.0);
            sq += v * v;
        }
    return std::sqrt(sq);
}

}  // namespace faircut
