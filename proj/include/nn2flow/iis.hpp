// Irreducible infeasible subsystems of a constant leaf's sign conditions.
//
// Only sign conditions are removable; the structural network encoding and the
// domain box always stay. That is what makes the surviving subset sound as a
// standalone runtime check: structure holds on every real execution anyway.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nn2flow/feas.hpp"
#include "nn2flow/lp.hpp"
#include "nn2flow/mip.hpp"
#include "nn2flow/model.hpp"
#include "nn2flow/util.hpp"

namespace nn2flow {

struct IisResult {
    std::vector<SignConstraint> kept;  // subset of the path's sign conditions
    int rival = -1;                    // class these conditions rule out
    bool up_to_budget = false;         // a filtering solve hit the node budget
    // Farkas proof when the final system's relaxation is already infeasible;
    // otherwise infeasibility was established by search (final_solve_nodes).
    std::optional<FarkasCertificate> certificate;
    std::int64_t final_solve_nodes = 0;
    std::int64_t nodes_used = 0;
};

namespace iisdetail {

enum class Answer { Feasible, Infeasible, Budget };

// Deletion scan over n soft members. Scans deepest-first so the surviving set
// biases toward early neurons, which are the cheapest to compute at runtime;
// any fixed order yields a correct IIS.
template <typename SolveFn>
inline std::pair<std::vector<bool>, bool> deletion_scan(int n, SolveFn&& solve) {
    std::vector<bool> active(static_cast<std::size_t>(n), true);
    bool budget_hit = false;
    for (int i = n - 1; i >= 0; --i) {
        active[static_cast<std::size_t>(i)] = false;
        Answer a = solve(active);
        if (a == Answer::Infeasible) continue;  // still blocked, drop permanently
        active[static_cast<std::size_t>(i)] = true;
        if (a == Answer::Budget) budget_hit = true;
    }
    return {active, budget_hit};
}

}  // namespace iisdetail

// IIS of {network structure} + {path signs} + {rival beats leaf_class}.
// Requires the full system infeasible; throws otherwise.
inline IisResult deletion_filter(const QuantizedMLP& net, const MipProblem& base,
                                 const std::vector<SignConstraint>& path, int rival,
                                 int leaf_class, std::int64_t node_budget = kDefaultNodeBudget) {
    IisResult res;
    res.rival = rival;
    auto solve_subset = [&](const std::vector<bool>& active) {
        MipProblem prob = base;
        for (std::size_t i = 0; i < path.size(); ++i)
            if (active[i]) add_sign_row(prob, net, path[i]);
        add_class_compare(prob, rival, leaf_class);
        FeasOutcome out = bb_feasible(prob, net, node_budget);
        res.nodes_used += out.nodes;
        return out;
    };

    {
        std::vector<bool> all(path.size(), true);
        FeasOutcome full = solve_subset(all);
        if (full.kind != FeasOutcome::Infeasible)
            throw DomainError("deletion_filter: the full system must be infeasible");
    }
    auto [active, budget_hit] = iisdetail::deletion_scan(
        static_cast<int>(path.size()), [&](const std::vector<bool>& a) {
            FeasOutcome out = solve_subset(a);
            if (out.kind == FeasOutcome::Infeasible) return iisdetail::Answer::Infeasible;
            if (out.kind == FeasOutcome::Feasible) return iisdetail::Answer::Feasible;
            return iisdetail::Answer::Budget;
        });
    res.up_to_budget = budget_hit;
    for (std::size_t i = 0; i < path.size(); ++i)
        if (active[i]) res.kept.push_back(path[i]);
    // final solve records the proof for audit
    std::vector<bool> final_mask(path.size(), false);
    for (std::size_t i = 0; i < path.size(); ++i)
        final_mask[i] = active[i];
    FeasOutcome final_out = solve_subset(final_mask);
    if (final_out.kind != FeasOutcome::Infeasible)
        throw Error("internal: deletion filter lost infeasibility");
    res.certificate = final_out.root_certificate;
    res.final_solve_nodes = final_out.nodes;
    return res;
}

// Deletion filter over plain soft rows of a linear system, used where no
// network is involved.
inline std::vector<int> deletion_filter_rows(const LinearSystem& base,
                                             const std::vector<LinearConstraint>& soft) {
    auto solve_subset = [&](const std::vector<bool>& active) {
        LinearSystem sys = base;
        for (std::size_t i = 0; i < soft.size(); ++i)
            if (active[i]) sys.add_row(soft[i]);
        if (sys.trivially_infeasible) return iisdetail::Answer::Infeasible;
        return lp_feasible(sys).feasible ? iisdetail::Answer::Feasible
                                         : iisdetail::Answer::Infeasible;
    };
    {
        std::vector<bool> all(soft.size(), true);
        if (solve_subset(all) != iisdetail::Answer::Infeasible)
            throw DomainError("deletion_filter: the full system must be infeasible");
    }
    auto [active, budget_hit] =
        iisdetail::deletion_scan(static_cast<int>(soft.size()), solve_subset);
    (void)budget_hit;
    std::vector<int> kept;
    for (std::size_t i = 0; i < soft.size(); ++i)
        if (active[i]) kept.push_back(static_cast<int>(i));
    return kept;
}

struct IrreducibilityReport {
    enum Status { Pass, Fail, BudgetSoftFail } status = Pass;
    int violating = -1;  // index into kept: removable member, or -1
    std::string message;

    bool pass() const { return status == Pass; }
};

// (a) the kept set together with the structure is infeasible and (b) removing
// any single member makes it feasible.
inline IrreducibilityReport verify_irreducible(const QuantizedMLP& net, const MipProblem& base,
                                               const IisResult& iis, int leaf_class,
                                               std::int64_t node_budget = kDefaultNodeBudget) {
    IrreducibilityReport report;
    auto solve_without = [&](int skip) {
        MipProblem prob = base;
        for (std::size_t i = 0; i < iis.kept.size(); ++i)
            if (static_cast<int>(i) != skip) add_sign_row(prob, net, iis.kept[i]);
        add_class_compare(prob, iis.rival, leaf_class);
        return bb_feasible(prob, net, node_budget);
    };
    FeasOutcome full = solve_without(-1);
    if (full.kind == FeasOutcome::BudgetExceeded) {
        report.status = IrreducibilityReport::BudgetSoftFail;
        report.message = "budget exhausted while re-proving the kept set";
        return report;
    }
    if (full.kind != FeasOutcome::Infeasible) {
        report.status = IrreducibilityReport::Fail;
        report.message = "kept set is not infeasible";
        return report;
    }
    for (std::size_t i = 0; i < iis.kept.size(); ++i) {
        FeasOutcome out = solve_without(static_cast<int>(i));
        if (out.kind == FeasOutcome::BudgetExceeded) {
            report.status = IrreducibilityReport::BudgetSoftFail;
            report.violating = static_cast<int>(i);
            report.message = "budget exhausted while testing member removal";
            return report;
        }
        if (out.kind == FeasOutcome::Infeasible) {
            report.status = IrreducibilityReport::Fail;
            report.violating = static_cast<int>(i);
            report.message = "member '" + condition_text(net, iis.kept[i]) + "' is removable";
            return report;
        }
    }
    return report;
}

struct RivalUnion {
    std::vector<SignConstraint> merged;  // canonical order, deduplicated
    std::vector<IisResult> per_rival;    // ascending rival class
};

// Multi-class leaves need one IIS per rival; the runtime check is their union.
inline RivalUnion per_rival_union(const QuantizedMLP& net, const MipProblem& base,
                                  const std::vector<SignConstraint>& path, int leaf_class,
                                  std::int64_t node_budget = kDefaultNodeBudget) {
    RivalUnion u;
    for (int rival = 0; rival < net.class_count(); ++rival) {
        if (rival == leaf_class) continue;
        u.per_rival.push_back(deletion_filter(net, base, path, rival, leaf_class, node_budget));
    }
    std::vector<SignConstraint> all;
    for (const IisResult& r : u.per_rival)
        for (const SignConstraint& sc : r.kept) all.push_back(sc);
    std::sort(all.begin(), all.end(), [&](const SignConstraint& a, const SignConstraint& b) {
        int ka = net.canonical_index(a.neuron), kb = net.canonical_index(b.neuron);
        if (ka != kb) return ka < kb;
        return a.active < b.active;
    });
    all.erase(std::unique(all.begin(), all.end()), all.end());
    u.merged = std::move(all);
    return u;
}

}  // namespace nn2flow
