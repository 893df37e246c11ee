#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace otdual::lp {

// Dense two-phase primal simplex with Bland's rule.
//
// Sign conventions (minimization):
//   duals y_i:          >= 0 on GreaterEqual rows, <= 0 on LessEqual rows, free on Equal rows
//   reduced costs d_j:  c_j - (A^T y)_j; >= 0 at a lower bound, <= 0 at an upper bound
//   Farkas ray y:       <= 0 on GreaterEqual rows, >= 0 on LessEqual rows, and
//                       y.b - min_{l<=x<=u} (A^T y).x < 0 proves infeasibility

enum class Sense { LessEqual, Equal, GreaterEqual };
enum class Status { Optimal, Infeasible, Unbounded };

inline const char* to_string(Status s) {
    switch (s) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::Unbounded: return "unbounded";
    }
    return "unknown";
}

struct Constraint {
    std::vector<double> coeffs;
    Sense sense = Sense::Equal;
    double rhs = 0.0;

    friend bool operator==(const Constraint&, const Constraint&) = default;
};

/// min objective.x  s.t.  rows, lower <= x <= upper (defaults: 0 and +inf).
struct Instance {
    std::vector<double> objective;
    std::vector<Constraint> rows;
    std::vector<double> lower;
    std::vector<double> upper;

    [[nodiscard]] std::size_t num_vars() const { return objective.size(); }
    [[nodiscard]] double lower_bound(std::size_t j) const { return lower.empty() ? 0.0 : lower[j]; }
    [[nodiscard]] double upper_bound(std::size_t j) const {
        return upper.empty() ? std::numeric_limits<double>::infinity() : upper[j];
    }

    void validate() const {
        const std::size_t n = objective.size();
        for (double c : objective) {
            if (!std::isfinite(c)) throw std::invalid_argument("lp: objective entries must be finite");
        }
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].coeffs.size() != n) {
                throw std::invalid_argument("lp: row " + std::to_string(i) + " length differs from variable count");
            }
            for (double a : rows[i].coeffs) {
                if (!std::isfinite(a)) throw std::invalid_argument("lp: matrix entries must be finite");
            }
            if (!std::isfinite(rows[i].rhs)) throw std::invalid_argument("lp: right-hand sides must be finite");
        }
        if (!lower.empty() && lower.size() != n) throw std::invalid_argument("lp: lower bound length mismatch");
        if (!upper.empty() && upper.size() != n) throw std::invalid_argument("lp: upper bound length mismatch");
        for (std::size_t j = 0; j < n; ++j) {
            const double l = lower_bound(j), u = upper_bound(j);
            if (std::isnan(l) || std::isnan(u) || l == std::numeric_limits<double>::infinity() ||
                u == -std::numeric_limits<double>::infinity()) {
                throw std::invalid_argument("lp: invalid variable bound");
            }
            if (l > u) throw std::invalid_argument("lp: lower bound exceeds upper bound");
        }
    }
};

struct FarkasRay {
    std::vector<double> multipliers;  // one per row
    double value = 0.0;               // y.b - min over the box of (A^T y).x; negative
};

struct Solution {
    Status status = Status::Infeasible;
    std::vector<double> primal;
    std::vector<double> duals;
    std::vector<double> reduced_costs;
    double objective = 0.0;
    std::optional<FarkasRay> farkas;
    std::vector<std::size_t> basis;  // standard-form columns, one per standard row
    std::size_t iterations = 0;
};

struct Tolerances {
    double feasibility = 1e-8;  // relative to 1 + |b|_inf
    double optimality = 1e-9;   // reduced costs
    double pivot = 1e-11;
};

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// min c.x, A x = b, x >= 0, b >= 0, built from an Instance by shifting,
// mirroring or splitting variables and adding slacks.
struct StandardForm {
    enum class Map { Shift, Mirror, Split };

    std::size_t m = 0;  // rows
    std::size_t n = 0;  // columns (structural + slack), artificials excluded
    std::vector<double> a;  // m x n, row-major
    std::vector<double> b;
    std::vector<double> c;
    std::size_t orig_rows = 0;
    std::vector<double> row_sign;  // +-1 per standard row
    std::vector<Map> map;
    std::vector<std::size_t> col;  // first standard column of each original variable
    std::vector<double> anchor;    // l_j (Shift) or u_j (Mirror)

    double& at(std::size_t i, std::size_t j) { return a[i * n + j]; }
    [[nodiscard]] double at(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

inline StandardForm to_standard(const Instance& p) {
    StandardForm sf;
    const std::size_t nv = p.num_vars();
    sf.map.resize(nv);
    sf.col.resize(nv);
    sf.anchor.assign(nv, 0.0);

    std::size_t ncols = 0;
    std::vector<std::size_t> ub_vars;
    for (std::size_t j = 0; j < nv; ++j) {
        const double l = p.lower_bound(j), u = p.upper_bound(j);
        sf.col[j] = ncols;
        if (std::isfinite(l)) {
            sf.map[j] = StandardForm::Map::Shift;
            sf.anchor[j] = l;
            ncols += 1;
            if (std::isfinite(u)) ub_vars.push_back(j);
        } else if (std::isfinite(u)) {
            sf.map[j] = StandardForm::Map::Mirror;
            sf.anchor[j] = u;
            ncols += 1;
        } else {
            sf.map[j] = StandardForm::Map::Split;
            ncols += 2;
        }
    }
    std::size_t nslack = ub_vars.size();
    for (const auto& r : p.rows) {
        if (r.sense != Sense::Equal) ++nslack;
    }
    sf.orig_rows = p.rows.size();
    sf.m = p.rows.size() + ub_vars.size();
    sf.n = ncols + nslack;
    sf.a.assign(sf.m * sf.n, 0.0);
    sf.b.assign(sf.m, 0.0);
    sf.c.assign(sf.n, 0.0);
    sf.row_sign.assign(sf.m, 1.0);

    for (std::size_t j = 0; j < nv; ++j) {
        const double cj = p.objective[j];
        switch (sf.map[j]) {
            case StandardForm::Map::Shift: sf.c[sf.col[j]] = cj; break;
            case StandardForm::Map::Mirror: sf.c[sf.col[j]] = -cj; break;
            case StandardForm::Map::Split:
                sf.c[sf.col[j]] = cj;
                sf.c[sf.col[j] + 1] = -cj;
                break;
        }
    }

    std::size_t slack = ncols;
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
        const auto& r = p.rows[i];
        double rhs = r.rhs;
        for (std::size_t j = 0; j < nv; ++j) {
            const double aij = r.coeffs[j];
            if (aij == 0.0) continue;
            switch (sf.map[j]) {
                case StandardForm::Map::Shift:
                    sf.at(i, sf.col[j]) = aij;
                    rhs -= aij * sf.anchor[j];
                    break;
                case StandardForm::Map::Mirror:
                    sf.at(i, sf.col[j]) = -aij;
                    rhs -= aij * sf.anchor[j];
                    break;
                case StandardForm::Map::Split:
                    sf.at(i, sf.col[j]) = aij;
                    sf.at(i, sf.col[j] + 1) = -aij;
                    break;
            }
        }
        if (r.sense == Sense::LessEqual) sf.at(i, slack++) = 1.0;
        if (r.sense == Sense::GreaterEqual) sf.at(i, slack++) = -1.0;
        if (rhs < 0.0) {
            sf.row_sign[i] = -1.0;
            rhs = -rhs;
            for (std::size_t j = 0; j < sf.n; ++j) sf.at(i, j) = -sf.at(i, j);
        }
        sf.b[i] = rhs;
    }
    for (std::size_t k = 0; k < ub_vars.size(); ++k) {
        const std::size_t j = ub_vars[k];
        const std::size_t i = p.rows.size() + k;
        sf.at(i, sf.col[j]) = 1.0;
        sf.at(i, slack++) = 1.0;
        sf.b[i] = p.upper_bound(j) - p.lower_bound(j);
    }
    return sf;
}

// Dense LU with partial pivoting for the basis matrix.
class DenseLu {
public:
    DenseLu(std::vector<double> m, std::size_t n) : lu_(std::move(m)), n_(n), perm_(n) {
        for (std::size_t i = 0; i < n_; ++i) perm_[i] = i;
        for (std::size_t k = 0; k < n_; ++k) {
            std::size_t p = k;
            double best = std::abs(lu_[k * n_ + k]);
            for (std::size_t i = k + 1; i < n_; ++i) {
                const double v = std::abs(lu_[i * n_ + k]);
                if (v > best) {
                    best = v;
                    p = i;
                }
            }
            if (best < 1e-14) throw std::runtime_error("lp: singular basis matrix");
            if (p != k) {
                for (std::size_t j = 0; j < n_; ++j) std::swap(lu_[k * n_ + j], lu_[p * n_ + j]);
                std::swap(perm_[k], perm_[p]);
            }
            for (std::size_t i = k + 1; i < n_; ++i) {
                const double f = lu_[i * n_ + k] / lu_[k * n_ + k];
                lu_[i * n_ + k] = f;
                if (f == 0.0) continue;
                for (std::size_t j = k + 1; j < n_; ++j) lu_[i * n_ + j] -= f * lu_[k * n_ + j];
            }
        }
    }

    // Solves M x = rhs.
    [[nodiscard]] std::vector<double> solve(std::span<const double> rhs) const {
        std::vector<double> x(n_);
        for (std::size_t i = 0; i < n_; ++i) x[i] = rhs[perm_[i]];
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < i; ++j) x[i] -= lu_[i * n_ + j] * x[j];
        }
        for (std::size_t i = n_; i-- > 0;) {
            for (std::size_t j = i + 1; j < n_; ++j) x[i] -= lu_[i * n_ + j] * x[j];
            x[i] /= lu_[i * n_ + i];
        }
        return x;
    }

    // Solves M^T y = rhs.
    [[nodiscard]] std::vector<double> solve_transpose(std::span<const double> rhs) const {
        std::vector<double> w(rhs.begin(), rhs.end());
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < i; ++j) w[i] -= lu_[j * n_ + i] * w[j];
            w[i] /= lu_[i * n_ + i];
        }
        for (std::size_t i = n_; i-- > 0;) {
            for (std::size_t j = i + 1; j < n_; ++j) w[i] -= lu_[j * n_ + i] * w[j];
        }
        std::vector<double> y(n_);
        for (std::size_t i = 0; i < n_; ++i) y[perm_[i]] = w[i];
        return y;
    }

private:
    std::vector<double> lu_;
    std::size_t n_;
    std::vector<std::size_t> perm_;
};

// Column j of [A | I] (artificials occupy indices n..n+m-1).
inline double column_entry(const StandardForm& sf, std::size_t i, std::size_t j) {
    if (j < sf.n) return sf.at(i, j);
    return (j - sf.n) == i ? 1.0 : 0.0;
}

inline DenseLu factor_basis(const StandardForm& sf, std::span<const std::size_t> basis) {
    std::vector<double> bm(sf.m * sf.m);
    for (std::size_t i = 0; i < sf.m; ++i) {
        for (std::size_t k = 0; k < sf.m; ++k) bm[i * sf.m + k] = column_entry(sf, i, basis[k]);
    }
    return DenseLu(std::move(bm), sf.m);
}

class Tableau {
public:
    Tableau(const StandardForm& sf, const Tolerances& tol)
        : sf_(sf), tol_(tol), m_(sf.m), w_(sf.n + sf.m + 1), t_(m_ * w_, 0.0), obj_(w_, 0.0), basis_(m_) {
        for (std::size_t i = 0; i < m_; ++i) {
            for (std::size_t j = 0; j < sf.n; ++j) t_[i * w_ + j] = sf.at(i, j);
            t_[i * w_ + sf.n + i] = 1.0;
            t_[i * w_ + w_ - 1] = sf.b[i];
            basis_[i] = sf.n + i;
        }
    }

    // Loads reduced costs for the given column costs (size n + m).
    void set_costs(std::span<const double> cost) {
        for (std::size_t j = 0; j + 1 < w_; ++j) obj_[j] = cost[j];
        obj_[w_ - 1] = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
            const double cb = cost[basis_[i]];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j < w_; ++j) obj_[j] -= cb * t_[i * w_ + j];
        }
    }

    enum class Outcome { Optimal, Unbounded };

    // Bland's rule: lowest-index improving column enters; ratio ties leave by lowest basic index.
    Outcome run(std::size_t enterable, std::size_t& iterations) {
        const std::size_t cap = 50'000 + 200 * (m_ + w_);
        while (true) {
            std::size_t enter = enterable;
            for (std::size_t j = 0; j < enterable; ++j) {
                if (obj_[j] < -tol_.optimality) {
                    enter = j;
                    break;
                }
            }
            if (enter == enterable) return Outcome::Optimal;
            std::size_t leave = m_;
            double best = kInf;
            for (std::size_t i = 0; i < m_; ++i) {
                const double a = t_[i * w_ + enter];
                if (a <= tol_.pivot) continue;
                const double ratio = t_[i * w_ + w_ - 1] / a;
                if (leave == m_) {
                    leave = i;
                    best = ratio;
                    continue;
                }
                const double slack = 1e-12 * (1.0 + std::abs(best));
                if (ratio < best - slack) {
                    leave = i;
                    best = ratio;
                } else if (ratio <= best + slack && basis_[i] < basis_[leave]) {
                    leave = i;
                    best = std::min(best, ratio);
                }
            }
            if (leave == m_) return Outcome::Unbounded;
            pivot(leave, enter);
            if (++iterations > cap) throw std::runtime_error("lp: simplex iteration limit exceeded");
        }
    }

    void pivot(std::size_t r, std::size_t j) {
        double* row = &t_[r * w_];
        const double p = row[j];
        for (std::size_t k = 0; k < w_; ++k) row[k] /= p;
        row[j] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) continue;
            double* other = &t_[i * w_];
            const double f = other[j];
            if (f == 0.0) continue;
            for (std::size_t k = 0; k < w_; ++k) other[k] -= f * row[k];
            other[j] = 0.0;
        }
        const double f = obj_[j];
        if (f != 0.0) {
            for (std::size_t k = 0; k < w_; ++k) obj_[k] -= f * row[k];
            obj_[j] = 0.0;
        }
        basis_[r] = j;
    }

    // Pivots basic artificials out where a structural/slack column allows it.
    void expel_artificials() {
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < sf_.n) continue;
            for (std::size_t j = 0; j < sf_.n; ++j) {
                if (std::abs(t_[i * w_ + j]) > 1e-9) {
                    pivot(i, j);
                    break;
                }
            }
        }
    }

    [[nodiscard]] double objective_value() const { return -obj_[w_ - 1]; }
    [[nodiscard]] const std::vector<std::size_t>& basis() const { return basis_; }

private:
    const StandardForm& sf_;
    Tolerances tol_;
    std::size_t m_;
    std::size_t w_;
    std::vector<double> t_;
    std::vector<double> obj_;
    std::vector<std::size_t> basis_;
};

inline double box_min(const Instance& p, std::span<const double> r, double zero_tol) {
    double acc = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) {
        if (std::abs(r[j]) <= zero_tol) continue;
        const double bound = r[j] > 0.0 ? p.lower_bound(j) : p.upper_bound(j);
        if (!std::isfinite(bound)) return -kInf;
        acc += r[j] * bound;
    }
    return acc;
}

inline std::vector<double> row_combination(const Instance& p, std::span<const double> y) {
    std::vector<double> r(p.num_vars(), 0.0);
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
        if (y[i] == 0.0) continue;
        for (std::size_t j = 0; j < r.size(); ++j) r[j] += y[i] * p.rows[i].coeffs[j];
    }
    return r;
}

// Recomputes primal and dual values from a basis with a fresh factorization.
inline Solution from_basis(const Instance& p, const StandardForm& sf, std::vector<std::size_t> basis,
                           const Tolerances& tol) {
    Solution sol;
    sol.status = Status::Optimal;
    const DenseLu lu = factor_basis(sf, basis);
    std::vector<double> xb = lu.solve(sf.b);
    std::vector<double> cb(sf.m);
    for (std::size_t k = 0; k < sf.m; ++k) cb[k] = basis[k] < sf.n ? sf.c[basis[k]] : 0.0;
    const std::vector<double> ys = lu.solve_transpose(cb);

    double bnorm = 0.0;
    for (double v : sf.b) bnorm = std::max(bnorm, std::abs(v));
    std::vector<double> xs(sf.n, 0.0);
    for (std::size_t k = 0; k < sf.m; ++k) {
        double v = xb[k];
        if (v < 0.0 && v > -tol.feasibility * (1.0 + bnorm)) v = 0.0;
        if (basis[k] < sf.n) xs[basis[k]] = v;
    }

    const std::size_t nv = p.num_vars();
    sol.primal.assign(nv, 0.0);
    for (std::size_t j = 0; j < nv; ++j) {
        const std::size_t c = sf.col[j];
        switch (sf.map[j]) {
            case StandardForm::Map::Shift: sol.primal[j] = sf.anchor[j] + xs[c]; break;
            case StandardForm::Map::Mirror: sol.primal[j] = sf.anchor[j] - xs[c]; break;
            case StandardForm::Map::Split: sol.primal[j] = xs[c] - xs[c + 1]; break;
        }
    }
    sol.duals.assign(p.rows.size(), 0.0);
    for (std::size_t i = 0; i < p.rows.size(); ++i) sol.duals[i] = sf.row_sign[i] * ys[i];
    const std::vector<double> aty = row_combination(p, sol.duals);
    sol.reduced_costs.resize(nv);
    sol.objective = 0.0;
    for (std::size_t j = 0; j < nv; ++j) {
        sol.reduced_costs[j] = p.objective[j] - aty[j];
        sol.objective += p.objective[j] * sol.primal[j];
    }
    sol.basis = std::move(basis);
    return sol;
}

}  // namespace detail

/**
 * Solves a dense LP. Deterministic for a fixed instance: Bland's rule with
 * lowest-index tie breaking in both phases. Optimal primal and dual values
 * are recomputed from the final basis by a fresh LU factorization.
 */
inline Solution solve_lp(const Instance& p, const Tolerances& tol = {}) {
    p.validate();
    const detail::StandardForm sf = detail::to_standard(p);
    detail::Tableau tab(sf, tol);
    std::size_t iterations = 0;

    std::vector<double> cost(sf.n + sf.m, 0.0);
    for (std::size_t i = 0; i < sf.m; ++i) cost[sf.n + i] = 1.0;
    tab.set_costs(cost);
    tab.run(sf.n, iterations);

    double bnorm = 0.0;
    for (double v : sf.b) bnorm = std::max(bnorm, std::abs(v));
    if (tab.objective_value() > tol.feasibility * (1.0 + bnorm)) {
        Solution sol;
        sol.status = Status::Infeasible;
        sol.iterations = iterations;
        sol.basis = tab.basis();
        const detail::DenseLu lu = detail::factor_basis(sf, sol.basis);
        std::vector<double> cb(sf.m);
        for (std::size_t k = 0; k < sf.m; ++k) cb[k] = sol.basis[k] >= sf.n ? 1.0 : 0.0;
        const std::vector<double> w = lu.solve_transpose(cb);
        FarkasRay ray;
        ray.multipliers.resize(p.rows.size());
        for (std::size_t i = 0; i < p.rows.size(); ++i) ray.multipliers[i] = -sf.row_sign[i] * w[i];
        const std::vector<double> r = detail::row_combination(p, ray.multipliers);
        double yb = 0.0;
        for (std::size_t i = 0; i < p.rows.size(); ++i) yb += ray.multipliers[i] * p.rows[i].rhs;
        ray.value = yb - detail::box_min(p, r, 1e-9);
        sol.farkas = std::move(ray);
        return sol;
    }

    tab.expel_artificials();
    std::fill(cost.begin(), cost.end(), 0.0);
    std::copy(sf.c.begin(), sf.c.end(), cost.begin());
    tab.set_costs(cost);
    if (tab.run(sf.n, iterations) == detail::Tableau::Outcome::Unbounded) {
        Solution sol;
        sol.status = Status::Unbounded;
        sol.iterations = iterations;
        sol.basis = tab.basis();
        return sol;
    }
    Solution sol = detail::from_basis(p, sf, tab.basis(), tol);
    sol.iterations = iterations;
    return sol;
}

/// Re-evaluates the solution attached to a basis returned by solve_lp.
inline Solution solve_from_basis(const Instance& p, std::vector<std::size_t> basis, const Tolerances& tol = {}) {
    p.validate();
    const detail::StandardForm sf = detail::to_standard(p);
    if (basis.size() != sf.m) throw std::invalid_argument("lp: basis size does not match the instance");
    for (std::size_t j : basis) {
        if (j >= sf.n + sf.m) throw std::invalid_argument("lp: basis column out of range");
    }
    return detail::from_basis(p, sf, std::move(basis), tol);
}

/// Farkas ray of an infeasible instance.
inline FarkasRay farkas_certificate(const Instance& p, const Tolerances& tol = {}) {
    Solution sol = solve_lp(p, tol);
    if (sol.status != Status::Infeasible || !sol.farkas) {
        throw std::logic_error("farkas_certificate: instance is not infeasible");
    }
    return *sol.farkas;
}

/// b.y plus the bound terms: the dual objective attained by (duals, reduced costs).
inline double dual_objective(const Instance& p, const Solution& s, double zero_tol = 1e-9) {
    double v = 0.0;
    for (std::size_t i = 0; i < p.rows.size(); ++i) v += s.duals[i] * p.rows[i].rhs;
    for (std::size_t j = 0; j < p.num_vars(); ++j) {
        const double d = s.reduced_costs[j];
        if (std::abs(d) <= zero_tol) continue;
        v += d * (d > 0.0 ? p.lower_bound(j) : p.upper_bound(j));
    }
    return v;
}

/// Residuals of an optimal solution, in the units used by the tolerances.
struct Residuals {
    double primal = 0.0;         // max violation of rows and bounds
    double dual = 0.0;           // max sign violation of duals and reduced costs
    double complementary = 0.0;  // max |y_i * slack_i| and |d_j * (x_j - bound)|
};

inline Residuals residuals(const Instance& p, const Solution& s, double zero_tol = 1e-9) {
    Residuals r;
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
        const auto& row = p.rows[i];
        double ax = 0.0;
        for (std::size_t j = 0; j < p.num_vars(); ++j) ax += row.coeffs[j] * s.primal[j];
        const double slack = row.rhs - ax;
        const double y = s.duals[i];
        switch (row.sense) {
            case Sense::LessEqual:
                r.primal = std::max(r.primal, -slack);
                r.dual = std::max(r.dual, y);
                break;
            case Sense::GreaterEqual:
                r.primal = std::max(r.primal, slack);
                r.dual = std::max(r.dual, -y);
                break;
            case Sense::Equal: r.primal = std::max(r.primal, std::abs(slack)); break;
        }
        r.complementary = std::max(r.complementary, std::abs(y * slack));
    }
    for (std::size_t j = 0; j < p.num_vars(); ++j) {
        const double x = s.primal[j], l = p.lower_bound(j), u = p.upper_bound(j), d = s.reduced_costs[j];
        r.primal = std::max({r.primal, l - x, x - u});
        const bool at_lower = std::isfinite(l) && std::abs(x - l) <= zero_tol * (1.0 + std::abs(l));
        const bool at_upper = std::isfinite(u) && std::abs(x - u) <= zero_tol * (1.0 + std::abs(u));
        double sign_violation = 0.0;
        if (at_lower && at_upper) {
            sign_violation = 0.0;
        } else if (at_lower) {
            sign_violation = std::max(0.0, -d);
        } else if (at_upper) {
            sign_violation = std::max(0.0, d);
        } else {
            sign_violation = std::abs(d);
        }
        r.dual = std::max(r.dual, sign_violation);
        double gap_to_bound = 0.0;
        if (d > zero_tol) gap_to_bound = std::isfinite(l) ? d * (x - l) : d;
        if (d < -zero_tol) gap_to_bound = std::isfinite(u) ? -d * (u - x) : -d;
        r.complementary = std::max(r.complementary, std::abs(gap_to_bound));
    }
    return r;
}

}  // namespace otdual::lp
