// Constancy decisions for decision-path leaves: a leaf is constant when, for
// every rival class, the network encoding plus the path's sign conditions
// plus "rival beats the leaf class" admits no integer solution.
#pragma once

#include <cstdint>
#include <vector>

#include "nn2flow/mip.hpp"
#include "nn2flow/model.hpp"
#include "nn2flow/tree.hpp"
#include "nn2flow/util.hpp"

namespace nn2flow {

struct ConstancyResult {
    Verdict verdict;
    std::vector<std::int64_t> witness;  // an input where some rival wins
    int witness_rival = -1;
    std::vector<int> unknown_rivals;  // rivals whose solve hit the node budget
    std::int64_t nodes_used = 0;
};

inline MipProblem problem_for_rival(const MipProblem& base, const QuantizedMLP& net,
                                    const std::vector<SignConstraint>& path, int rival,
                                    int leaf_class) {
    MipProblem prob = base;
    for (const SignConstraint& sc : path) add_sign_row(prob, net, sc);
    add_class_compare(prob, rival, leaf_class);
    return prob;
}

// Budget exhaustion is conservative: the leaf is reported Unknown and never
// extracted, so a tight budget can only cost savings, not correctness.
inline ConstancyResult check_constant_leaf(const QuantizedMLP& net, const MipProblem& base,
                                           const std::vector<SignConstraint>& path, int leaf_class,
                                           std::int64_t node_budget = kDefaultNodeBudget) {
    ConstancyResult res;
    for (int rival = 0; rival < net.class_count(); ++rival) {
        if (rival == leaf_class) continue;
        MipProblem prob = problem_for_rival(base, net, path, rival, leaf_class);
        FeasOutcome out = bb_feasible(prob, net, node_budget);
        res.nodes_used += out.nodes;
        if (out.kind == FeasOutcome::Feasible) {
            res.verdict = Verdict::not_constant();
            res.witness = out.witness;
            res.witness_rival = rival;
            return res;
        }
        if (out.kind == FeasOutcome::BudgetExceeded) res.unknown_rivals.push_back(rival);
    }
    if (!res.unknown_rivals.empty()) {
        res.verdict = {VerdictKind::Unverified, -1};
        return res;
    }
    res.verdict = Verdict::constant(leaf_class);
    return res;
}

inline ConstancyResult check_constant_leaf(const QuantizedMLP& net,
                                           const std::vector<SignConstraint>& path, int leaf_class,
                                           std::int64_t node_budget = kDefaultNodeBudget) {
    MipProblem base = encode_network(net);
    return check_constant_leaf(net, base, path, leaf_class, node_budget);
}

// A constant leaf's class can only be the class its training samples predict,
// so that is the candidate tested against every rival. Leaves are independent;
// results land in leaf-id order whatever the job count.
inline std::vector<ConstancyResult> analyze_leaves(const QuantizedMLP& net,
                                                   const DecisionTree& tree,
                                                   std::int64_t node_budget = kDefaultNodeBudget,
                                                   unsigned jobs = 1) {
    MipProblem base = encode_network(net);
    std::vector<ConstancyResult> results(tree.leaves.size());
    parallel_for(tree.leaves.size(), jobs, [&](std::size_t i) {
        const Leaf& leaf = tree.leaves[i];
        int candidate = 0;
        for (std::size_t c = 0; c < leaf.class_histogram.size(); ++c)
            if (leaf.class_histogram[c] > 0) {
                candidate = static_cast<int>(c);
                break;
            }
        auto path = path_sign_constraints(net, tree, leaf);
        results[i] = check_constant_leaf(net, base, path, candidate, node_budget);
    });
    return results;
}

}  // namespace nn2flow
