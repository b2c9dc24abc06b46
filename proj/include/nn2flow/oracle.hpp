// Exhaustive-enumeration feasibility oracle. Independent of the MIP encoding
// path on purpose: it shares only forward(), so it can referee the solver.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nn2flow/mip.hpp"
#include "nn2flow/model.hpp"
#include "nn2flow/util.hpp"

namespace nn2flow {

struct ClassCompareSpec {
    int rival = 0;  // class that must win
    int base = 0;   // class it must beat under the tie rule
};

inline constexpr std::int64_t kDefaultDomainCap = 1000000;

inline BigInt domain_size(const QuantizedMLP& net) {
    BigInt size(1);
    for (const auto& [lo, hi] : net.input_domain) size *= BigInt(hi - lo + 1);
    return size;
}

inline bool satisfies_signs(const ForwardResult& res, const QuantizedMLP& net,
                            const std::vector<SignConstraint>& signs) {
    for (const SignConstraint& sc : signs) {
        std::int64_t z = res.preacts[static_cast<std::size_t>(net.canonical_index(sc.neuron))];
        if (sc.active ? z < 1 : z > 0) return false;
    }
    return true;
}

inline bool satisfies_compare(const ForwardResult& res, const ClassCompareSpec& cmp) {
    std::int64_t margin = cmp.rival > cmp.base ? 1 : 0;
    return res.logits[static_cast<std::size_t>(cmp.rival)] >=
           res.logits[static_cast<std::size_t>(cmp.base)] + margin;
}

// Walks the integer grid in lexicographic order (x0 most significant) and
// returns the first input satisfying every sign condition and the optional
// class comparison. Refuses domains larger than the cap.
inline FeasOutcome brute_force_feasible(const QuantizedMLP& net,
                                        const std::vector<SignConstraint>& signs,
                                        const std::optional<ClassCompareSpec>& compare,
                                        std::int64_t cap = kDefaultDomainCap) {
    if (domain_size(net) > BigInt(cap))
        throw DomainTooLarge("brute force: domain has " + domain_size(net).to_string() +
                             " points, cap is " + std::to_string(cap));
    FeasOutcome out;
    std::vector<std::int64_t> x;
    x.reserve(static_cast<std::size_t>(net.input_dim));
    for (const auto& [lo, hi] : net.input_domain) x.push_back(lo);
    while (true) {
        ForwardResult res = forward(net, x);
        ++out.nodes;
        if (satisfies_signs(res, net, signs) && (!compare || satisfies_compare(res, *compare))) {
            out.kind = FeasOutcome::Feasible;
            out.witness = x;
            return out;
        }
        int i = net.input_dim - 1;
        while (i >= 0 &&
               x[static_cast<std::size_t>(i)] == net.input_domain[static_cast<std::size_t>(i)].second) {
            x[static_cast<std::size_t>(i)] = net.input_domain[static_cast<std::size_t>(i)].first;
            --i;
        }
        if (i < 0) break;
        ++x[static_cast<std::size_t>(i)];
    }
    out.kind = FeasOutcome::Infeasible;
    return out;
}

// Visits every input of the grid; fn may stop the scan by returning false.
template <typename Fn>
inline void for_each_input(const QuantizedMLP& net, Fn&& fn) {
    std::vector<std::int64_t> x;
    for (const auto& [lo, hi] : net.input_domain) x.push_back(lo);
    while (true) {
        if (!fn(static_cast<const std::vector<std::int64_t>&>(x))) return;
        int i = net.input_dim - 1;
        while (i >= 0 &&
               x[static_cast<std::size_t>(i)] == net.input_domain[static_cast<std::size_t>(i)].second) {
            x[static_cast<std::size_t>(i)] = net.input_domain[static_cast<std::size_t>(i)].first;
            --i;
        }
        if (i < 0) return;
        ++x[static_cast<std::size_t>(i)];
    }
}

}  // namespace nn2flow
