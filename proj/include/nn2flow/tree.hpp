// Training-data-guided decision tree over hidden-neuron signs.
//
// Internal nodes decide one hidden neuron each, in canonical order, so the
// structure is a trie over activation patterns: the pattern->leaf map is the
// source of truth and the node list exists for export and inspection. Only
// branches traversed by at least one training sample are present.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nn2flow/dataset.hpp"
#include "nn2flow/model.hpp"
#include "nn2flow/util.hpp"

namespace nn2flow {

enum class VerdictKind { Unverified, Constant, NotConstant };

struct Verdict {
    VerdictKind kind = VerdictKind::Unverified;
    int constant_class = -1;  // set when kind == Constant

    static Verdict constant(int cls) { return {VerdictKind::Constant, cls}; }
    static Verdict not_constant() { return {VerdictKind::NotConstant, -1}; }
};

struct Leaf {
    int id = 0;
    ActivationPattern pattern;
    std::vector<std::int64_t> class_histogram;  // network-predicted classes of the samples here
    Verdict verdict;

    std::int64_t total() const {
        std::int64_t t = 0;
        for (auto v : class_histogram) t += v;
        return t;
    }
};

// Child slots hold either another node, a leaf, or nothing (branch never
// traversed in training).
struct TreeChild {
    enum Kind { None, Node, LeafRef } kind = None;
    int index = -1;

    static TreeChild none() { return {}; }
    static TreeChild node(int i) { return {Node, i}; }
    static TreeChild leaf(int i) { return {LeafRef, i}; }
};

struct DecisionNode {
    NeuronId neuron;
    TreeChild true_child;   // preact >= 1
    TreeChild false_child;  // preact <= 0
    std::int64_t true_visits = 0;
    std::int64_t false_visits = 0;
};

struct DecisionTree {
    std::vector<DecisionNode> nodes;  // nodes[0] is the root when present
    std::vector<Leaf> leaves;         // ordered by pattern, lexicographically
    std::map<ActivationPattern, int> leaf_by_pattern;
    int hidden_count = 0;
    std::string model_hash;
};

// One leaf per distinct activation pattern observed in training. Histograms
// count the network's predicted class for each sample, not the dataset label.
// Row order never matters: patterns are merged associatively and leaf ids are
// assigned by sorting patterns.
inline DecisionTree build_tree(const QuantizedMLP& net, const Dataset& train, unsigned jobs = 1) {
    DecisionTree tree;
    tree.hidden_count = net.hidden_count();
    tree.model_hash = model_hash(net);

    unsigned workers = jobs <= 1 ? 1u : jobs;
    std::vector<std::map<ActivationPattern, std::vector<std::int64_t>>> partial(workers);
    parallel_for(workers, workers, [&](std::size_t w) {
        auto& local = partial[w];
        for (std::size_t r = w; r < train.rows.size(); r += workers) {
            const auto& row = train.rows[r];
            ForwardResult res = forward(net, row.x);
            int cls = argmax_class(res.logits);
            auto& hist = local[res.pattern];
            if (hist.empty()) hist.assign(static_cast<std::size_t>(net.class_count()), 0);
            ++hist[static_cast<std::size_t>(cls)];
        }
    });

    std::map<ActivationPattern, std::vector<std::int64_t>> merged;
    for (auto& part : partial)
        for (auto& [pattern, hist] : part) {
            auto& dst = merged[pattern];
            if (dst.empty()) dst.assign(hist.size(), 0);
            for (std::size_t c = 0; c < hist.size(); ++c) dst[c] += hist[c];
        }

    for (auto& [pattern, hist] : merged) {
        Leaf leaf;
        leaf.id = static_cast<int>(tree.leaves.size());
        leaf.pattern = pattern;
        leaf.class_histogram = hist;
        tree.leaf_by_pattern.emplace(pattern, leaf.id);
        tree.leaves.push_back(std::move(leaf));
    }

    // Explicit trie for export: depth k decides canonical hidden neuron k.
    if (net.hidden_count() > 0) {
        tree.nodes.push_back({net.hidden_neuron(0), TreeChild::none(), TreeChild::none(), 0, 0});
        for (const Leaf& leaf : tree.leaves) {
            int node = 0;
            for (int depth = 0; depth < tree.hidden_count; ++depth) {
                bool bit = leaf.pattern[static_cast<std::size_t>(depth)];
                {
                    DecisionNode& dn = tree.nodes[static_cast<std::size_t>(node)];
                    (bit ? dn.true_visits : dn.false_visits) += leaf.total();
                }
                if (depth + 1 == tree.hidden_count) {
                    DecisionNode& dn = tree.nodes[static_cast<std::size_t>(node)];
                    (bit ? dn.true_child : dn.false_child) = TreeChild::leaf(leaf.id);
                    break;
                }
                TreeChild slot = bit ? tree.nodes[static_cast<std::size_t>(node)].true_child
                                     : tree.nodes[static_cast<std::size_t>(node)].false_child;
                if (slot.kind == TreeChild::None) {
                    slot = TreeChild::node(static_cast<int>(tree.nodes.size()));
                    (bit ? tree.nodes[static_cast<std::size_t>(node)].true_child
                         : tree.nodes[static_cast<std::size_t>(node)].false_child) = slot;
                    tree.nodes.push_back({net.hidden_neuron(depth + 1), TreeChild::none(),
                                          TreeChild::none(), 0, 0});
                }
                node = slot.index;
            }
        }
    }
    return tree;
}

// The root-to-leaf sign conditions, one per hidden neuron, canonical order.
inline std::vector<SignConstraint> path_sign_constraints(const QuantizedMLP& net,
                                                         const DecisionTree& tree,
                                                         const Leaf& leaf) {
    if (leaf.id < 0 || leaf.id >= static_cast<int>(tree.leaves.size()) ||
        tree.leaves[static_cast<std::size_t>(leaf.id)].pattern != leaf.pattern)
        throw DomainError("path_sign_constraints: leaf does not belong to this tree");
    std::vector<SignConstraint> path;
    path.reserve(leaf.pattern.size());
    for (int k = 0; k < static_cast<int>(leaf.pattern.size()); ++k)
        path.push_back({net.hidden_neuron(k), bool(leaf.pattern[static_cast<std::size_t>(k)])});
    return path;
}

// Leaf whose pattern matches x's activation pattern, if training ever saw it.
inline std::optional<int> leaf_of(const QuantizedMLP& net, const DecisionTree& tree,
                                  std::span<const std::int64_t> x) {
    ForwardResult res = forward(net, x);
    auto it = tree.leaf_by_pattern.find(res.pattern);
    if (it == tree.leaf_by_pattern.end()) return std::nullopt;
    return it->second;
}

inline std::string pattern_string(const ActivationPattern& p) {
    std::string s;
    s.reserve(p.size());
    for (bool b : p) s += b ? 'T' : 'F';
    return s;
}

inline std::string verdict_string(const Verdict& v) {
    switch (v.kind) {
        case VerdictKind::Constant: return "constant(c" + std::to_string(v.constant_class) + ")";
        case VerdictKind::NotConstant: return "not-constant";
        default: return "unverified";
    }
}

inline std::string tree_to_dot(const QuantizedMLP& net, const DecisionTree& tree) {
    std::string out = "digraph \"" + net.name + "_tree\" {\n";
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const DecisionNode& n = tree.nodes[i];
        out += "  n" + std::to_string(i) + " [label=\"" +
               condition_text(net, {n.neuron, true}) + "\"];\n";
        auto edge = [&](const TreeChild& c, const char* lbl, std::int64_t visits) {
            if (c.kind == TreeChild::None) return;
            std::string target =
                (c.kind == TreeChild::Node ? "n" : "l") + std::to_string(c.index);
            out += "  n" + std::to_string(i) + " -> " + target + " [label=\"" + lbl + " (" +
                   std::to_string(visits) + ")\"];\n";
        };
        edge(n.true_child, "T", n.true_visits);
        edge(n.false_child, "F", n.false_visits);
    }
    for (const Leaf& leaf : tree.leaves) {
        out += "  l" + std::to_string(leaf.id) + " [shape=box,label=\"leaf " +
               std::to_string(leaf.id) + "\\npattern " + pattern_string(leaf.pattern) + "\\n" +
               verdict_string(leaf.verdict) + "\"];\n";
    }
    out += "}\n";
    return out;
}

inline nlohmann::json tree_to_json(const QuantizedMLP& net, const DecisionTree& tree) {
    nlohmann::json doc;
    doc["model_name"] = net.name;
    doc["model_hash"] = tree.model_hash;
    auto leaves = nlohmann::json::array();
    for (const Leaf& leaf : tree.leaves) {
        nlohmann::json jl;
        jl["id"] = leaf.id;
        jl["pattern"] = pattern_string(leaf.pattern);
        jl["histogram"] = leaf.class_histogram;
        jl["verdict"] = verdict_string(leaf.verdict);
        if (leaf.verdict.kind == VerdictKind::Constant) jl["class"] = leaf.verdict.constant_class;
        leaves.push_back(jl);
    }
    doc["leaves"] = leaves;
    return doc;
}

}  // namespace nn2flow
