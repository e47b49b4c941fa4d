#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "fairness.hpp"
#include "groups.hpp"
#include "matrix.hpp"

namespace faircut {

struct LpRow {
    std::vector<int> idx;
    std::vector<double> coef;
    char rel = 'L';  // 'L' <=, 'G' >=, 'E' =
    double rhs = 0.0;
};

// Box-bounded linear program, minimization form.
struct LpProblem {
    std::vector<double> cost;
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<LpRow> rows;

    int num_vars() const { return static_cast<int>(cost.size()); }
    int num_rows() const { return static_cast<int>(rows.size()); }

    int add_variable(double lower, double upper, double c) {
        lo.push_back(lower);
        hi.push_back(upper);
        cost.push_back(c);
        return num_vars() - 1;
    }

    void add_row(char rel, double rhs, std::vector<int> idx, std::vector<double> coef) {
        if (idx.size() != coef.size()) fail(Errc::bad_shape, "row index/coefficient size mismatch");
        for (int j : idx)
            if (j < 0 || j >= num_vars()) fail(Errc::bad_input, "row references unknown variable");
        rows.push_back({std::move(idx), std::move(coef), rel, rhs});
    }

    // Debug dump in the common LP text format, for cross-checking against
    // external solvers during development.
    std::string to_lp_text() const {
        std::ostringstream os;
        os.precision(17);
        os << "Minimize\n obj:";
        for (int j = 0; j < num_vars(); ++j)
            if (cost[j] != 0.0) os << (cost[j] >= 0 ? " + " : " - ") << std::abs(cost[j]) << " x" << j;
        os << "\nSubject To\n";
        for (int r = 0; r < num_rows(); ++r) {
            os << " r" << r << ":";
            for (size_t t = 0; t < rows[r].idx.size(); ++t) {
                const double a = rows[r].coef[t];
                os << (a >= 0 ? " + " : " - ") << std::abs(a) << " x" << rows[r].idx[t];
            }
            os << (rows[r].rel == 'L' ? " <= " : rows[r].rel == 'G' ? " >= " : " = ") << rows[r].rhs
               << "\n";
        }
        os << "Bounds\n";
        for (int j = 0; j < num_vars(); ++j) os << " " << lo[j] << " <= x" << j << " <= " << hi[j] << "\n";
        os << "End\n";
        return os.str();
    }
};

enum class LpStatus { optimal, infeasible, iteration_limit };

struct LpSolution {
    LpStatus status = LpStatus::iteration_limit;
    std::vector<double> x;
    double objective = 0.0;
    double max_residual = 0.0;  // worst absolute row violation
    double duality_gap = 0.0;   // relative, certified from the final basis
    long iterations = 0;
    int infeasible_row = -1;  // witness row when status == infeasible
};

struct SimplexOptions {
    long max_iterations = 0;  // 0: derived from the problem size
    double feas_tol = 1e-9;
    double opt_tol = 1e-9;
    int refactor_every = 256;
    long stall_limit = 500;  // degenerate pivots before switching to Bland's rule
};

// Opaque warm-start state: the final basis of a previous solve. Reusing it is
// worthwhile when only the costs changed (the rounding loop re-solves the
// same constraint rows with updated distances); anything inconsistent falls
// back to a cold start.
struct SimplexBasis {
    bool valid = false;
    std::vector<std::uint8_t> state;
    std::vector<int> basis;
};

namespace detail {

// Two-phase primal simplex for box-bounded variables with an explicit basis
// inverse. Pricing is Dantzig with lowest-index tie-breaking and an automatic
// switch to Bland's rule after a run of degenerate pivots, which keeps the
// method both fast and cycle-free. Deterministic: no randomness, fixed scan
// order everywhere.
class BoundedSimplex {
  public:
    BoundedSimplex(const LpProblem& p, const SimplexOptions& opt) : prob_(p), opt_(opt) {
        const double inf = std::numeric_limits<double>::infinity();
        nr_ = p.num_rows();
        nv_ = p.num_vars();
        for (int j = 0; j < nv_; ++j) {
            if (!(p.lo[j] <= p.hi[j])) fail(Errc::bad_input, "variable with empty bound interval");
            if (!std::isfinite(p.lo[j]) || !std::isfinite(p.hi[j]))
                fail(Errc::bad_input, "structural variables must have finite bounds");
            add_col(p.lo[j], p.hi[j]);
        }
        cols_.resize(nv_);
        for (int r = 0; r < nr_; ++r)
            for (size_t t = 0; t < p.rows[r].idx.size(); ++t)
                cols_[p.rows[r].idx[t]].push_back({r, p.rows[r].coef[t]});
        b_.resize(nr_);
        for (int r = 0; r < nr_; ++r) {
            b_[r] = p.rows[r].rhs;
            const char rel = p.rows[r].rel;
            const int s = add_col(rel == 'G' ? -inf : 0.0, rel == 'L' ? inf : 0.0);
            cols_.push_back({{r, 1.0}});
            slack_of_row_.push_back(s);
        }
    }

    LpSolution run(SimplexBasis* warm = nullptr) {
        LpSolution sol;
        const long max_iter = opt_.max_iterations > 0
                                  ? opt_.max_iterations
                                  : 20000 + 10L * (nr_ + static_cast<long>(cols_.size()));

        std::vector<double> phase2_cost(cols_.size(), 0.0);
        for (int j = 0; j < nv_; ++j) phase2_cost[j] = prob_.cost[j];

        if (!adopt_basis(warm, phase2_cost)) setup_initial_basis();
        if (!artificial_.empty()) {
            std::vector<double> phase1(cols_.size(), 0.0);
            for (int a : artificial_) phase1[a] = 1.0;
            const bool done = optimize(phase1, max_iter, sol.iterations);
            double infeas = 0.0;
            int witness = -1;
            for (int r = 0; r < nr_; ++r)
                if (is_artificial_[basis_[r]] && xb_[r] > opt_.feas_tol && witness < 0) {
                    infeas += xb_[r];
                    witness = r;
                }
            if (!done && witness < 0) {
                sol.status = LpStatus::iteration_limit;
                return sol;
            }
            if (witness >= 0) {
                sol.status = LpStatus::infeasible;
                sol.infeasible_row = witness;
                return sol;
            }
            expel_artificials();
        }
        for (size_t j = 0; j < cols_.size(); ++j)
            if (is_artificial_[j]) hi_[j] = 0.0;  // never re-enter
        phase2_cost.resize(cols_.size(), 0.0);

        const std::vector<double>& phase2 = phase2_cost;
        const bool done = optimize(phase2, max_iter, sol.iterations);

        factorize(phase2);
        extract(sol, phase2);
        sol.status = done ? LpStatus::optimal : LpStatus::iteration_limit;
        save_basis(warm, done);
        return sol;
    }

  private:
    enum class S : std::uint8_t { at_lo, at_hi, basic };

    // Tries to resume from a previous basis over the same rows; any
    // inconsistency (shape, singular basis, infeasible basic values) rejects.
    bool adopt_basis(const SimplexBasis* warm, const std::vector<double>& cost) {
        if (!warm || !warm->valid) return false;
        if (static_cast<int>(warm->state.size()) != nv_ + nr_ ||
            static_cast<int>(warm->basis.size()) != nr_)
            return false;
        int basics = 0;
        for (std::uint8_t s : warm->state) basics += s == static_cast<std::uint8_t>(S::basic);
        if (basics != nr_) return false;
        for (int b : warm->basis)
            if (b < 0 || b >= nv_ + nr_ || warm->state[b] != static_cast<std::uint8_t>(S::basic))
                return false;

        state_.resize(cols_.size());
        for (size_t j = 0; j < cols_.size(); ++j) state_[j] = static_cast<S>(warm->state[j]);
        basis_ = warm->basis;
        xb_.assign(nr_, 0.0);
        factorize(cost);
        if (!binv_.allFinite()) return false;
        for (int r = 0; r < nr_; ++r) {
            if (!std::isfinite(xb_[r])) return false;
            if (xb_[r] < lo_[basis_[r]] - 1e-7 || xb_[r] > hi_[basis_[r]] + 1e-7) return false;
        }
        return true;
    }

    void save_basis(SimplexBasis* warm, bool optimal) const {
        if (!warm) return;
        warm->valid = false;
        if (!optimal) return;
        for (int r = 0; r < nr_; ++r)
            if (basis_[r] >= nv_ + nr_) return;  // artificial stuck in the basis
        warm->state.resize(nv_ + nr_);
        for (int j = 0; j < nv_ + nr_; ++j) warm->state[j] = static_cast<std::uint8_t>(state_[j]);
        warm->basis = basis_;
        warm->valid = true;
    }

    int add_col(double lower, double upper) {
        lo_.push_back(lower);
        hi_.push_back(upper);
        is_artificial_.push_back(false);
        return static_cast<int>(lo_.size()) - 1;
    }

    double bound_value(int j) const {
        if (state_[j] == S::at_lo) return std::isfinite(lo_[j]) ? lo_[j] : 0.0;
        return std::isfinite(hi_[j]) ? hi_[j] : 0.0;
    }

    void setup_initial_basis() {
        state_.assign(cols_.size(), S::at_lo);
        for (size_t j = 0; j < cols_.size(); ++j)
            if (!std::isfinite(lo_[j])) state_[j] = S::at_hi;
        basis_.assign(nr_, -1);
        xb_.assign(nr_, 0.0);

        std::vector<double> resid = b_;
        for (int j = 0; j < nv_; ++j) {
            const double v = bound_value(j);
            if (v != 0.0)
                for (auto& [r, a] : cols_[j]) resid[r] -= a * v;
        }
        for (int r = 0; r < nr_; ++r) {
            const int s = slack_of_row_[r];
            if (resid[r] >= lo_[s] - opt_.feas_tol && resid[r] <= hi_[s] + opt_.feas_tol) {
                basis_[r] = s;
                xb_[r] = resid[r];
                state_[s] = S::basic;
            } else {
                const double clamped = std::clamp(resid[r], lo_[s], hi_[s]);
                state_[s] = clamped == lo_[s] ? S::at_lo : S::at_hi;
                const double gap = resid[r] - clamped;
                const int a = add_col(0.0, std::numeric_limits<double>::infinity());
                is_artificial_.back() = true;
                cols_.push_back({{r, gap >= 0.0 ? 1.0 : -1.0}});
                state_.push_back(S::basic);
                basis_[r] = a;
                xb_[r] = std::abs(gap);
                artificial_.push_back(a);
            }
        }
        binv_ = MatrixXd::Identity(nr_, nr_);
        for (int r = 0; r < nr_; ++r)
            if (is_artificial_[basis_[r]] && cols_[basis_[r]][0].second < 0.0) binv_(r, r) = -1.0;
        pivots_since_refactor_ = 0;
    }

    void factorize(const std::vector<double>& c) {
        (void)c;
        MatrixXd B = MatrixXd::Zero(nr_, nr_);
        for (int r = 0; r < nr_; ++r)
            for (auto& [rr, a] : cols_[basis_[r]]) B(rr, r) = a;
        binv_ = B.partialPivLu().inverse();
        std::vector<double> resid = b_;
        for (size_t j = 0; j < cols_.size(); ++j) {
            if (state_[j] == S::basic) continue;
            const double v = bound_value(j);
            if (v != 0.0)
                for (auto& [r, a] : cols_[j]) resid[r] -= a * v;
        }
        VectorXd rv = Eigen::Map<VectorXd>(resid.data(), nr_);
        VectorXd xbv = binv_ * rv;
        for (int r = 0; r < nr_; ++r) xb_[r] = xbv[r];
        pivots_since_refactor_ = 0;
    }

    double reduced_cost(const std::vector<double>& c, const VectorXd& y, int j) const {
        double d = c[j];
        for (auto& [r, a] : cols_[j]) d -= y[r] * a;
        return d;
    }

    // Returns true when the current phase reached optimality within the
    // iteration budget.
    bool optimize(const std::vector<double>& c, long max_iter, long& iter_count) {
        bool bland = false;
        long stall = 0;
        while (iter_count < max_iter) {
            if (pivots_since_refactor_ >= opt_.refactor_every) factorize(c);

            VectorXd cb(nr_);
            for (int r = 0; r < nr_; ++r) cb[r] = c[basis_[r]];
            VectorXd y = binv_.transpose() * cb;

            int q = -1, dir = 0;
            double best_score = opt_.opt_tol;
            for (size_t j = 0; j < cols_.size(); ++j) {
                if (state_[j] == S::basic || lo_[j] == hi_[j]) continue;
                const double d = reduced_cost(c, y, j);
                int cand_dir = 0;
                if (state_[j] == S::at_lo && d < -opt_.opt_tol) cand_dir = 1;
                else if (state_[j] == S::at_hi && d > opt_.opt_tol) cand_dir = -1;
                if (cand_dir == 0) continue;
                if (bland) {
                    q = static_cast<int>(j);
                    dir = cand_dir;
                    break;
                }
                if (std::abs(d) > best_score) {
                    best_score = std::abs(d);
                    q = static_cast<int>(j);
                    dir = cand_dir;
                }
            }
            if (q < 0) return true;

            VectorXd w = VectorXd::Zero(nr_);
            for (auto& [r, a] : cols_[q]) w.noalias() += a * binv_.col(r);

            double t = std::numeric_limits<double>::infinity();
            int leave = -1;
            for (int r = 0; r < nr_; ++r) {
                const double delta = dir * w[r];
                double tr;
                if (delta > 1e-11) {
                    if (!std::isfinite(lo_[basis_[r]])) continue;
                    tr = (xb_[r] - lo_[basis_[r]]) / delta;
                } else if (delta < -1e-11) {
                    if (!std::isfinite(hi_[basis_[r]])) continue;
                    tr = (hi_[basis_[r]] - xb_[r]) / (-delta);
                } else {
                    continue;
                }
                tr = std::max(tr, 0.0);
                if (tr < t - 1e-12 || (tr <= t + 1e-12 && leave >= 0 && basis_[r] < basis_[leave])) {
                    t = std::min(tr, t);
                    leave = r;
                } else if (leave < 0 && tr < t) {
                    t = tr;
                    leave = r;
                }
            }
            const double span = hi_[q] - lo_[q];
            ++iter_count;

            if (span <= t) {  // bound flip, basis unchanged
                for (int r = 0; r < nr_; ++r) xb_[r] -= span * dir * w[r];
                state_[q] = state_[q] == S::at_lo ? S::at_hi : S::at_lo;
                stall = 0;
                continue;
            }
            if (leave < 0) return false;  // numerically unbounded direction

            for (int r = 0; r < nr_; ++r) xb_[r] -= t * dir * w[r];
            const int lv = basis_[leave];
            state_[lv] = dir * w[leave] > 0.0 ? S::at_lo : S::at_hi;
            const double enter_value = bound_value(q) + dir * t;
            basis_[leave] = q;
            state_[q] = S::basic;
            xb_[leave] = enter_value;

            const double pe = w[leave];
            Eigen::RowVectorXd piv = binv_.row(leave) / pe;
            for (int r = 0; r < nr_; ++r)
                if (r != leave && w[r] != 0.0) binv_.row(r).noalias() -= w[r] * piv;
            binv_.row(leave) = piv;
            ++pivots_since_refactor_;

            if (t <= 1e-12) {
                if (++stall > opt_.stall_limit) bland = true;
            } else {
                stall = 0;
                bland = false;
            }
        }
        return false;
    }

    // Pivots zero-valued basic artificials out of the basis where a real
    // column is available; rows with no such column are redundant and keep a
    // fixed artificial.
    void expel_artificials() {
        for (int r = 0; r < nr_; ++r) {
            if (!is_artificial_[basis_[r]]) continue;
            for (size_t j = 0; j < cols_.size(); ++j) {
                if (is_artificial_[j] || state_[j] == S::basic || lo_[j] == hi_[j]) continue;
                double val = 0.0;
                for (auto& [rr, a] : cols_[j]) val += binv_(r, rr) * a;
                if (std::abs(val) < 1e-7) continue;
                VectorXd w = VectorXd::Zero(nr_);
                for (auto& [rr, a] : cols_[j]) w.noalias() += a * binv_.col(rr);
                const int lv = basis_[r];
                state_[lv] = S::at_lo;
                basis_[r] = static_cast<int>(j);
                state_[j] = S::basic;
                xb_[r] = bound_value(j);
                Eigen::RowVectorXd piv = binv_.row(r) / val;
                for (int rr = 0; rr < nr_; ++rr)
                    if (rr != r && w[rr] != 0.0) binv_.row(rr).noalias() -= w[rr] * piv;
                binv_.row(r) = piv;
                break;
            }
        }
    }

    void extract(LpSolution& sol, const std::vector<double>& c) {
        sol.x.assign(nv_, 0.0);
        for (int j = 0; j < nv_; ++j)
            if (state_[j] != S::basic) sol.x[j] = bound_value(j);
        for (int r = 0; r < nr_; ++r)
            if (basis_[r] < nv_) sol.x[basis_[r]] = xb_[r];

        sol.objective = 0.0;
        for (int j = 0; j < nv_; ++j) sol.objective += prob_.cost[j] * sol.x[j];

        sol.max_residual = 0.0;
        for (int r = 0; r < nr_; ++r) {
            double ax = 0.0;
            for (size_t t = 0; t < prob_.rows[r].idx.size(); ++t)
                ax += prob_.rows[r].coef[t] * sol.x[prob_.rows[r].idx[t]];
            const char rel = prob_.rows[r].rel;
            double v = 0.0;
            if (rel == 'L') v = std::max(0.0, ax - prob_.rows[r].rhs);
            else if (rel == 'G') v = std::max(0.0, prob_.rows[r].rhs - ax);
            else v = std::abs(ax - prob_.rows[r].rhs);
            sol.max_residual = std::max(sol.max_residual, v);
        }
        for (int j = 0; j < nv_; ++j) {
            sol.max_residual = std::max(sol.max_residual, prob_.lo[j] - sol.x[j]);
            sol.max_residual = std::max(sol.max_residual, sol.x[j] - prob_.hi[j]);
        }

        VectorXd cb(nr_);
        for (int r = 0; r < nr_; ++r) cb[r] = c[basis_[r]];
        VectorXd y = binv_.transpose() * cb;
        double dual = 0.0;
        for (int r = 0; r < nr_; ++r) dual += y[r] * b_[r];
        for (size_t j = 0; j < cols_.size(); ++j) {
            if (state_[j] == S::basic) continue;
            double d = reduced_cost(c, y, j);
            const double bound = bound_value(j);
            if (d >= 0.0) {
                if (std::isfinite(lo_[j])) dual += d * lo_[j];
                // else: sign is within tolerance of feasible, contributes 0
            } else {
                if (std::isfinite(hi_[j])) dual += d * hi_[j];
            }
            (void)bound;
        }
        sol.duality_gap = std::abs(sol.objective - dual) / (1.0 + std::abs(sol.objective));
    }

    const LpProblem& prob_;
    SimplexOptions opt_;
    int nr_ = 0, nv_ = 0;
    std::vector<std::vector<std::pair<int, double>>> cols_;
    std::vector<double> lo_, hi_, b_;
    std::vector<int> slack_of_row_;
    std::vector<int> artificial_;
    std::vector<bool> is_artificial_;
    std::vector<S> state_;
    std::vector<int> basis_;
    std::vector<double> xb_;
    MatrixXd binv_;
    int pivots_since_refactor_ = 0;
};

}  // namespace detail

inline LpSolution solve_lp(const LpProblem& p, const SimplexOptions& opt = {},
                           SimplexBasis* warm = nullptr) {
    detail::BoundedSimplex simplex(p, opt);
    return simplex.run(warm);
}

// Fair-assignment LP: variables S_il in [0,1] minimizing sum C_il S_il with
// one row per node (assignments sum to one), one >=1 row per cluster, and per
// (group, cluster) upper/lower share rows in homogeneous form
//   sum_{i in group} S_il - alpha_c sum_i S_il <= 0
//   sum_{i in group} S_il - beta_c  sum_i S_il >= 0.
inline LpProblem build_lp1(const Matrix& C, const GroupAssignment& ga, const FairnessBounds& fb) {
    const int n = static_cast<int>(C.rows());
    const int k = static_cast<int>(C.cols());
    const int m = ga.num_groups();
    if (ga.num_nodes() != n) fail(Errc::bad_shape, "cost matrix rows do not match group assignment");
    if (n < k) fail(Errc::bad_shape, "need at least as many points as clusters");

    LpProblem p;
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < k; ++l) p.add_variable(0.0, 1.0, C(i, l));

    for (int i = 0; i < n; ++i) {
        std::vector<int> idx(k);
        for (int l = 0; l < k; ++l) idx[l] = i * k + l;
        p.add_row('E', 1.0, std::move(idx), std::vector<double>(k, 1.0));
    }
    for (int l = 0; l < k; ++l) {
        std::vector<int> idx(n);
        for (int i = 0; i < n; ++i) idx[i] = i * k + l;
        p.add_row('G', 1.0, std::move(idx), std::vector<double>(n, 1.0));
    }
    for (int c = 0; c < m; ++c) {
        const double ac = fb.alpha(c);
        for (int l = 0; l < k; ++l) {
            std::vector<int> idx(n);
            std::vector<double> coef(n);
            for (int i = 0; i < n; ++i) {
                idx[i] = i * k + l;
                coef[i] = (ga.group_of(i) == c ? 1.0 : 0.0) - ac;
            }
            p.add_row('L', 0.0, std::move(idx), std::move(coef));
        }
    }
    for (int c = 0; c < m; ++c) {
        const double bc = fb.beta(c);
        for (int l = 0; l < k; ++l) {
            std::vector<int> idx(n);
            std::vector<double> coef(n);
            for (int i = 0; i < n; ++i) {
                idx[i] = i * k + l;
                coef[i] = (ga.group_of(i) == c ? 1.0 : 0.0) - bc;
            }
            p.add_row('G', 0.0, std::move(idx), std::move(coef));
        }
    }
    return p;
}

}  // namespace faircut
