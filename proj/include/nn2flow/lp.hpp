// Exact rational linear systems and a phase-I simplex feasibility engine.
//
// Feasibility answers are proofs: a Feasible result carries a rational point
// that satisfies every constraint exactly, an Infeasible result carries a
// Farkas certificate (a nonnegative combination of constraints and bounds
// that sums to a positive constant). Bland's rule guarantees termination;
// there is no tolerance parameter anywhere.
#pragma once

#include <algorithm>
#include <cassert>
#include <optional>
#include <string>
#include <vector>

#include "nn2flow/model.hpp"
#include "nn2flow/rational.hpp"
#include "nn2flow/util.hpp"

namespace nn2flow {

enum class Rel { Le, Ge, Eq };

struct ConstraintTag {
    enum Kind { Structural, PathSign, ClassCompare, Box } kind = Structural;
    SignConstraint sign;  // meaningful for PathSign
    int rival = -1;       // meaningful for ClassCompare
};

struct LinearConstraint {
    std::vector<Rational> coeffs;  // dense over the system's variables
    Rel rel = Rel::Le;
    Rational rhs;
    ConstraintTag tag;
    std::string label;
};

struct Variable {
    std::string name;
    Rational lo, hi;  // finite on both sides
    bool integral = false;
};

struct LinearSystem {
    std::vector<Variable> vars;
    std::vector<LinearConstraint> rows;
    bool trivially_infeasible = false;
    std::string trivial_reason;

    int add_var(std::string name, Rational lo, Rational hi, bool integral) {
        vars.push_back({std::move(name), std::move(lo), std::move(hi), integral});
        return static_cast<int>(vars.size()) - 1;
    }

    // All-zero rows never enter the system: satisfied ones are tautologies
    // and are dropped, violated ones mark the whole system infeasible.
    void add_row(LinearConstraint row) {
        assert(row.coeffs.size() == vars.size());
        bool all_zero = true;
        for (const auto& c : row.coeffs)
            if (!c.is_zero()) {
                all_zero = false;
                break;
            }
        if (all_zero) {
            bool ok = row.rel == Rel::Le   ? !(Rational(0) > row.rhs)
                      : row.rel == Rel::Ge ? !(Rational(0) < row.rhs)
                                           : row.rhs.is_zero();
            if (!ok) {
                trivially_infeasible = true;
                trivial_reason = "constraint '" + row.label + "' is identically false";
            }
            return;
        }
        rows.push_back(std::move(row));
    }
};

// One term of a Farkas combination. Row terms multiply the constraint in its
// stored orientation; bound terms multiply (lo - v), (v - hi) or (v - value)
// for fixed variables.
struct FarkasTerm {
    enum Source { Row, LowerBound, UpperBound, FixedVar } source = Row;
    int index = 0;  // row index or variable index
    Rational multiplier;
};

struct FarkasCertificate {
    std::vector<FarkasTerm> terms;
    Rational constant;  // the derived positive constant
};

struct LpResult {
    bool feasible = false;
    std::vector<Rational> point;  // per variable, when feasible
    FarkasCertificate certificate;  // when infeasible
};

using Bounds = std::vector<std::pair<Rational, Rational>>;

inline Bounds default_bounds(const LinearSystem& sys) {
    Bounds b;
    b.reserve(sys.vars.size());
    for (const auto& v : sys.vars) b.push_back({v.lo, v.hi});
    return b;
}

// Exact audit of a Farkas certificate: every multiplier must respect its
// term's orientation, the variable coefficients must cancel, and the constant
// must be strictly positive.
inline bool verify_farkas(const LinearSystem& sys, const Bounds& bounds,
                          const FarkasCertificate& cert) {
    std::size_t n = sys.vars.size();
    std::vector<Rational> coeff(n, Rational(0));
    Rational constant(0);
    for (const FarkasTerm& t : cert.terms) {
        switch (t.source) {
            case FarkasTerm::Row: {
                if (t.index < 0 || t.index >= static_cast<int>(sys.rows.size())) return false;
                const LinearConstraint& row = sys.rows[static_cast<std::size_t>(t.index)];
                // orient as expr <= 0: Le: a.v - b; Ge: b - a.v; Eq: a.v - b, sign-free
                int dir = row.rel == Rel::Ge ? -1 : 1;
                if (row.rel != Rel::Eq && t.multiplier.sign() < 0) return false;
                for (std::size_t j = 0; j < n; ++j)
                    coeff[j] += t.multiplier * Rational(dir) * row.coeffs[j];
                constant -= t.multiplier * Rational(dir) * row.rhs;
                break;
            }
            case FarkasTerm::LowerBound: {
                if (t.multiplier.sign() < 0) return false;  // term: lo - v <= 0
                coeff[static_cast<std::size_t>(t.index)] -= t.multiplier;
                constant += t.multiplier * bounds[static_cast<std::size_t>(t.index)].first;
                break;
            }
            case FarkasTerm::UpperBound: {
                if (t.multiplier.sign() < 0) return false;  // term: v - hi <= 0
                coeff[static_cast<std::size_t>(t.index)] += t.multiplier;
                constant -= t.multiplier * bounds[static_cast<std::size_t>(t.index)].second;
                break;
            }
            case FarkasTerm::FixedVar: {
                // v == value: sign-free, value is the folded bound
                coeff[static_cast<std::size_t>(t.index)] += t.multiplier;
                constant -= t.multiplier * bounds[static_cast<std::size_t>(t.index)].first;
                break;
            }
        }
    }
    for (const auto& c : coeff)
        if (!c.is_zero()) return false;
    return constant > Rational(0);
}

namespace lpdetail {

struct BoundState {
    Rational lo, hi;
    // provenance: -1 declared bound, otherwise folded row index; scale is the
    // multiplier that turns that source into a unit bound on the variable
    int lo_src = -1, hi_src = -1;
    Rational lo_scale{1}, hi_scale{1};
};

inline FarkasTerm bound_term(const BoundState& b, bool upper, int var, const Rational& amount) {
    if (upper) {
        if (b.hi_src >= 0) return {FarkasTerm::Row, b.hi_src, b.hi_scale * amount};
        return {FarkasTerm::UpperBound, var, amount};
    }
    if (b.lo_src >= 0) return {FarkasTerm::Row, b.lo_src, b.lo_scale * amount};
    return {FarkasTerm::LowerBound, var, amount};
}

// Accumulates terms with the exact rules verify_farkas uses, then cancels any
// residual variable coefficients against the folded bounds. The finished
// certificate therefore verifies by construction, and a non-positive constant
// can only mean an internal simplex bug.
struct CertBuilder {
    const LinearSystem& sys;
    const std::vector<BoundState>& bound;
    std::vector<FarkasTerm> terms;

    void add_row_term(int idx, Rational multiplier) {
        if (multiplier.is_zero()) return;
        terms.push_back({FarkasTerm::Row, idx, std::move(multiplier)});
    }
    void add_upper_term(int var, const Rational& amount) {
        if (amount.is_zero()) return;
        terms.push_back(bound_term(bound[static_cast<std::size_t>(var)], true, var, amount));
    }

    FarkasCertificate finish() {
        std::size_t n = sys.vars.size();
        std::vector<Rational> coeff(n, Rational(0));
        Rational constant(0);
        auto accumulate = [&](const FarkasTerm& t) {
            switch (t.source) {
                case FarkasTerm::Row: {
                    const LinearConstraint& row = sys.rows[static_cast<std::size_t>(t.index)];
                    Rational dir(row.rel == Rel::Ge ? -1 : 1);
                    for (std::size_t j = 0; j < n; ++j)
                        if (!row.coeffs[j].is_zero()) coeff[j] += t.multiplier * dir * row.coeffs[j];
                    constant -= t.multiplier * dir * row.rhs;
                    break;
                }
                case FarkasTerm::LowerBound:
                    coeff[static_cast<std::size_t>(t.index)] -= t.multiplier;
                    constant += t.multiplier * bound[static_cast<std::size_t>(t.index)].lo;
                    break;
                case FarkasTerm::UpperBound:
                    coeff[static_cast<std::size_t>(t.index)] += t.multiplier;
                    constant -= t.multiplier * bound[static_cast<std::size_t>(t.index)].hi;
                    break;
                case FarkasTerm::FixedVar:
                    coeff[static_cast<std::size_t>(t.index)] += t.multiplier;
                    constant -= t.multiplier * bound[static_cast<std::size_t>(t.index)].lo;
                    break;
            }
        };
        for (const FarkasTerm& t : terms) accumulate(t);
        std::vector<FarkasTerm> absorbed;
        for (std::size_t j = 0; j < n; ++j) {
            if (coeff[j].is_zero()) continue;
            bool upper = coeff[j].sign() < 0;  // negative residue cancels against v - hi
            Rational amount = upper ? -coeff[j] : coeff[j];
            FarkasTerm t = bound_term(bound[j], upper, static_cast<int>(j), amount);
            absorbed.push_back(t);
            accumulate(t);
            coeff[j] = Rational(0);
        }
        for (auto& t : absorbed) terms.push_back(std::move(t));
        if (!(constant > Rational(0)))
            throw Error("internal: simplex produced an invalid infeasibility certificate");
        FarkasCertificate cert;
        cert.terms = std::move(terms);
        cert.constant = std::move(constant);
        return cert;
    }
};

}  // namespace lpdetail

// Phase-I simplex on the system with the given variable bounds (defaults to
// the declared ones). Single-variable rows are folded into bounds first;
// variables whose bounds meet are substituted out.
inline LpResult lp_feasible(const LinearSystem& sys, const Bounds& bounds_in) {
    using lpdetail::BoundState;
    LpResult result;
    std::size_t n = sys.vars.size();

    if (sys.trivially_infeasible)
        throw DomainError("lp_feasible: system marked trivially infeasible at construction: " +
                          sys.trivial_reason);

    // 1. fold single-variable rows into bounds
    std::vector<BoundState> bound(n);
    for (std::size_t j = 0; j < n; ++j)
        bound[j] = {bounds_in[j].first, bounds_in[j].second, -1, -1, Rational(1), Rational(1)};

    std::vector<int> main_rows;
    for (int idx = 0; idx < static_cast<int>(sys.rows.size()); ++idx) {
        const LinearConstraint& row = sys.rows[static_cast<std::size_t>(idx)];
        int nz = -1;
        int nz_count = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (!row.coeffs[j].is_zero()) {
                nz = static_cast<int>(j);
                if (++nz_count > 1) break;
            }
        if (nz_count != 1) {
            main_rows.push_back(idx);
            continue;
        }
        const Rational& a = row.coeffs[static_cast<std::size_t>(nz)];
        Rational v = row.rhs / a;
        // multiplier that turns the oriented row into exactly (v - hi) or
        // (lo - v); negative only for equality rows, which are sign-free
        Rational dirq(row.rel == Rel::Ge ? -1 : 1);
        Rational hi_scale = Rational(1) / (dirq * a);
        Rational lo_scale = Rational(-1) / (dirq * a);
        bool sets_hi = (row.rel == Rel::Le && a.sign() > 0) || (row.rel == Rel::Ge && a.sign() < 0);
        bool sets_lo = (row.rel == Rel::Ge && a.sign() > 0) || (row.rel == Rel::Le && a.sign() < 0);
        if (row.rel == Rel::Eq) sets_hi = sets_lo = true;
        BoundState& b = bound[static_cast<std::size_t>(nz)];
        if (sets_hi && v < b.hi) {
            b.hi = v;
            b.hi_src = idx;
            b.hi_scale = hi_scale;
        }
        if (sets_lo && v > b.lo) {
            b.lo = v;
            b.lo_src = idx;
            b.lo_scale = lo_scale;
        }
    }

    // 2. crossed bounds are already a two-term certificate
    for (std::size_t j = 0; j < n; ++j) {
        if (bound[j].lo > bound[j].hi) {
            result.feasible = false;
            lpdetail::CertBuilder cb{sys, bound, {}};
            cb.terms.push_back(lpdetail::bound_term(bound[j], false, static_cast<int>(j), Rational(1)));
            result.certificate = cb.finish();
            return result;
        }
    }

    // 3. substitute fixed variables, shift the rest to v' = v - lo >= 0
    std::vector<bool> fixed(n, false);
    std::vector<int> col_of(n, -1);
    std::vector<int> var_of;
    for (std::size_t j = 0; j < n; ++j) {
        if (bound[j].lo == bound[j].hi) {
            fixed[j] = true;
        } else {
            col_of[j] = static_cast<int>(var_of.size());
            var_of.push_back(static_cast<int>(j));
        }
    }
    std::size_t nf = var_of.size();

    struct TabRow {
        std::vector<Rational> a;  // over free shifted vars
        Rational b;
        bool is_eq = false;
        int flip = 1;              // -1 when the whole equality was negated
        int src_row = -1;          // original row index, or
        int src_ub_var = -1;       // variable whose upper bound this row is
    };
    std::vector<TabRow> tab;

    auto push_main_row = [&](int idx) -> std::optional<LpResult> {
        const LinearConstraint& row = sys.rows[static_cast<std::size_t>(idx)];
        int dir = row.rel == Rel::Ge ? -1 : 1;  // normalize Ge to Le
        TabRow tr;
        tr.a.assign(nf, Rational(0));
        tr.b = Rational(dir) * row.rhs;
        tr.is_eq = row.rel == Rel::Eq;
        tr.src_row = idx;
        bool any_free = false;
        for (std::size_t j = 0; j < n; ++j) {
            if (row.coeffs[j].is_zero()) continue;
            Rational c = Rational(dir) * row.coeffs[j];
            tr.b -= c * bound[j].lo;  // shift/substitution are the same move
            if (!fixed[j]) {
                tr.a[static_cast<std::size_t>(col_of[j])] = c;
                any_free = true;
            }
        }
        if (!any_free) {
            bool ok = tr.is_eq ? tr.b.is_zero() : !(tr.b < Rational(0));
            if (ok) return std::nullopt;  // row holds identically given the pinned values, drop
            LpResult res;
            res.feasible = false;
            lpdetail::CertBuilder cb{sys, bound, {}};
            // multiplier chosen so that fixing every variable leaves a positive constant
            cb.add_row_term(idx, Rational(tr.b < Rational(0) ? 1 : -1));
            res.certificate = cb.finish();
            return res;
        }
        if (tr.b < Rational(0)) {
            tr.flip = -1;
            tr.b = -tr.b;
            for (auto& c : tr.a) c = -c;
        }
        tab.push_back(std::move(tr));
        return std::nullopt;
    };

    for (int idx : main_rows)
        if (auto early = push_main_row(idx)) return *early;

    for (std::size_t f = 0; f < nf; ++f) {
        int j = var_of[f];
        TabRow tr;
        tr.a.assign(nf, Rational(0));
        tr.a[f] = Rational(1);
        tr.b = bound[static_cast<std::size_t>(j)].hi - bound[static_cast<std::size_t>(j)].lo;
        tr.src_ub_var = j;
        tab.push_back(std::move(tr));
    }

    // 4. tableau assembly: columns are v' then one slack per Le row then one
    // artificial per row that needs one
    std::size_t m = tab.size();
    std::vector<int> slack_col(m, -1), art_col(m, -1);
    std::size_t cols = nf;
    for (std::size_t i = 0; i < m; ++i)
        if (!tab[i].is_eq) slack_col[i] = static_cast<int>(cols++);
    for (std::size_t i = 0; i < m; ++i) {
        bool slack_ok = slack_col[i] >= 0 && tab[i].flip == 1;
        if (!slack_ok) art_col[i] = static_cast<int>(cols++);
    }

    std::vector<std::vector<Rational>> T(m, std::vector<Rational>(cols, Rational(0)));
    std::vector<Rational> rhs(m);
    std::vector<int> basis(m);
    std::vector<Rational> wrow(cols, Rational(0));
    std::vector<bool> dead(cols, false);  // artificials that left the basis

    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t f = 0; f < nf; ++f) T[i][f] = tab[i].a[f];
        rhs[i] = tab[i].b;
        if (slack_col[i] >= 0) T[i][static_cast<std::size_t>(slack_col[i])] = Rational(tab[i].flip);
        if (art_col[i] >= 0) {
            T[i][static_cast<std::size_t>(art_col[i])] = Rational(1);
            basis[i] = art_col[i];
        } else {
            basis[i] = slack_col[i];
        }
    }
    // price out the artificial basis: w = sum of artificial rows
    for (std::size_t i = 0; i < m; ++i) {
        if (art_col[i] < 0) continue;
        for (std::size_t c = 0; c < cols; ++c) wrow[c] -= T[i][c];
    }
    for (std::size_t i = 0; i < m; ++i)
        if (art_col[i] >= 0) wrow[static_cast<std::size_t>(art_col[i])] += Rational(1);
    for (std::size_t i = 0; i < m; ++i) wrow[static_cast<std::size_t>(basis[i])] = Rational(0);

    // 5. phase-I iterations, Bland's rule
    while (true) {
        int enter = -1;
        for (std::size_t c = 0; c < cols; ++c) {
            if (dead[c]) continue;
            if (wrow[c] < Rational(0)) {
                enter = static_cast<int>(c);
                break;
            }
        }
        if (enter < 0) break;
        int leave = -1;
        Rational best;
        for (std::size_t i = 0; i < m; ++i) {
            const Rational& a = T[i][static_cast<std::size_t>(enter)];
            if (!(a > Rational(0))) continue;
            Rational ratio = rhs[i] / a;
            if (leave < 0 || ratio < best ||
                (ratio == best && basis[i] < basis[static_cast<std::size_t>(leave)])) {
                best = ratio;
                leave = static_cast<int>(i);
            }
        }
        assert(leave >= 0 && "phase-I objective is bounded below");
        std::size_t r = static_cast<std::size_t>(leave);
        int old_basic = basis[r];
        Rational piv = T[r][static_cast<std::size_t>(enter)];
        for (auto& c : T[r]) c /= piv;
        rhs[r] /= piv;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == r) continue;
            Rational f = T[i][static_cast<std::size_t>(enter)];
            if (f.is_zero()) continue;
            for (std::size_t c = 0; c < cols; ++c) T[i][c] -= f * T[r][c];
            rhs[i] -= f * rhs[r];
        }
        {
            Rational f = wrow[static_cast<std::size_t>(enter)];
            for (std::size_t c = 0; c < cols; ++c) wrow[c] -= f * T[r][c];
        }
        basis[r] = enter;
        // an artificial that leaves never re-enters
        for (std::size_t i = 0; i < m; ++i)
            if (art_col[i] == old_basic) dead[static_cast<std::size_t>(old_basic)] = true;
    }

    Rational objective(0);
    for (std::size_t i = 0; i < m; ++i) {
        bool is_art = false;
        for (std::size_t k = 0; k < m; ++k)
            if (art_col[k] == basis[i]) is_art = true;
        if (is_art) objective += rhs[i];
    }

    if (objective.is_zero()) {
        result.feasible = true;
        result.point.assign(n, Rational(0));
        std::vector<Rational> vfree(nf, Rational(0));
        for (std::size_t i = 0; i < m; ++i)
            if (basis[i] < static_cast<int>(nf)) vfree[static_cast<std::size_t>(basis[i])] = rhs[i];
        for (std::size_t j = 0; j < n; ++j)
            result.point[j] =
                fixed[j] ? bound[j].lo : bound[j].lo + vfree[static_cast<std::size_t>(col_of[j])];
        return result;
    }

    // 6. Farkas extraction. For rows with a slack column the multiplier on
    // the Le-normalized row is the slack's final reduced cost (nonnegative at
    // optimality); equality rows read theirs off the artificial column.
    result.feasible = false;
    lpdetail::CertBuilder cb{sys, bound, {}};
    for (std::size_t i = 0; i < m; ++i) {
        Rational lambda;
        if (slack_col[i] >= 0)
            lambda = wrow[static_cast<std::size_t>(slack_col[i])];
        else
            lambda = -(Rational(1) - wrow[static_cast<std::size_t>(art_col[i])]) *
                     Rational(tab[i].flip);
        if (lambda.is_zero()) continue;
        if (tab[i].src_ub_var >= 0)
            cb.add_upper_term(tab[i].src_ub_var, lambda);
        else
            cb.add_row_term(tab[i].src_row, lambda);
    }
    result.certificate = cb.finish();
    return result;
}

inline LpResult lp_feasible(const LinearSystem& sys) {
    return lp_feasible(sys, default_bounds(sys));
}

// Exact row evaluation helpers used by tests and witness replay.
inline Rational row_lhs(const LinearConstraint& row, const std::vector<Rational>& point) {
    Rational acc(0);
    for (std::size_t j = 0; j < point.size(); ++j)
        if (!row.coeffs[j].is_zero()) acc += row.coeffs[j] * point[j];
    return acc;
}

inline bool row_satisfied(const LinearConstraint& row, const std::vector<Rational>& point) {
    Rational lhs = row_lhs(row, point);
    switch (row.rel) {
        case Rel::Le: return lhs <= row.rhs;
        case Rel::Ge: return lhs >= row.rhs;
        default: return lhs == row.rhs;
    }
}

inline bool point_satisfies(const LinearSystem& sys, const Bounds& bounds,
                            const std::vector<Rational>& point) {
    for (std::size_t j = 0; j < sys.vars.size(); ++j)
        if (point[j] < bounds[j].first || point[j] > bounds[j].second) return false;
    for (const auto& row : sys.rows)
        if (!row_satisfied(row, point)) return false;
    return true;
}

}  // namespace nn2flow
