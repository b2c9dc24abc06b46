// Logic flows and hybrid execution plans.
//
// A flow is a small set of hidden-neuron sign conditions that provably pins
// the network's output class. The plan computes the union of all condition
// neurons once (the prologue), tests flows cheapest-first, and falls back to
// the full network — reusing the prologue values — when nothing matches.
#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "nn2flow/feas.hpp"
#include "nn2flow/iis.hpp"
#include "nn2flow/model.hpp"
#include "nn2flow/tree.hpp"
#include "nn2flow/util.hpp"

namespace nn2flow {

struct LogicFlow {
    int id = 0;
    std::vector<SignConstraint> conditions;  // canonical order
    int output_class = 0;
    int source_leaf = -1;
};

struct SubsumptionEntry {
    int dropped_leaf = -1;
    int kept_leaf = -1;
    std::string reason;  // "duplicate", "subsumed" or "over-budget"
};

struct FlowExtraction {
    std::vector<LogicFlow> flows;
    std::vector<SubsumptionEntry> log;
};

// One flow per Constant leaf, then duplicates merged, subsumed condition
// supersets dropped, the rest sorted fewest-conditions-first and truncated to
// the flow budget.
inline FlowExtraction extract_flows(const QuantizedMLP& net, const DecisionTree& tree,
                                    const std::vector<ConstancyResult>& verdicts,
                                    const std::vector<RivalUnion>& unions, int max_flows) {
    (void)net;
    FlowExtraction out;
    std::vector<LogicFlow> candidates;
    for (const Leaf& leaf : tree.leaves) {
        const ConstancyResult& v = verdicts[static_cast<std::size_t>(leaf.id)];
        if (v.verdict.kind != VerdictKind::Constant) continue;
        LogicFlow flow;
        flow.conditions = unions[static_cast<std::size_t>(leaf.id)].merged;
        flow.output_class = v.verdict.constant_class;
        flow.source_leaf = leaf.id;
        candidates.push_back(std::move(flow));
    }

    // duplicates: identical condition sets force identical classes
    std::vector<LogicFlow> unique;
    for (LogicFlow& f : candidates) {
        bool dup = false;
        for (const LogicFlow& kept : unique)
            if (kept.conditions == f.conditions) {
                out.log.push_back({f.source_leaf, kept.source_leaf, "duplicate"});
                dup = true;
                break;
            }
        if (!dup) unique.push_back(std::move(f));
    }

    // subsumption: a strict superset with the same class can never fire first
    auto is_subset = [](const std::vector<SignConstraint>& small,
                        const std::vector<SignConstraint>& big) {
        for (const SignConstraint& sc : small)
            if (std::find(big.begin(), big.end(), sc) == big.end()) return false;
        return true;
    };
    std::vector<LogicFlow> survivors;
    for (std::size_t i = 0; i < unique.size(); ++i) {
        bool dropped = false;
        for (std::size_t j = 0; j < unique.size(); ++j) {
            if (i == j || unique[j].output_class != unique[i].output_class) continue;
            if (unique[j].conditions.size() < unique[i].conditions.size() &&
                is_subset(unique[j].conditions, unique[i].conditions)) {
                out.log.push_back(
                    {unique[i].source_leaf, unique[j].source_leaf, "subsumed"});
                dropped = true;
                break;
            }
        }
        if (!dropped) survivors.push_back(unique[i]);
    }

    std::sort(survivors.begin(), survivors.end(), [](const LogicFlow& a, const LogicFlow& b) {
        if (a.conditions.size() != b.conditions.size())
            return a.conditions.size() < b.conditions.size();
        return a.source_leaf < b.source_leaf;
    });
    if (max_flows >= 0 && static_cast<int>(survivors.size()) > max_flows) {
        for (std::size_t i = static_cast<std::size_t>(max_flows); i < survivors.size(); ++i)
            out.log.push_back({survivors[i].source_leaf, -1, "over-budget"});
        survivors.resize(static_cast<std::size_t>(max_flows));
    }
    for (std::size_t i = 0; i < survivors.size(); ++i) survivors[i].id = static_cast<int>(i);
    out.flows = std::move(survivors);
    return out;
}

struct ExecutionPlan {
    std::vector<NeuronId> prologue;          // canonical order, layer-closed
    std::vector<SignConstraint> slots;       // one per (neuron, polarity) pair
    std::vector<LogicFlow> flows;            // match order
    std::vector<std::vector<int>> flow_slots;  // slot indices per flow
    std::vector<std::string> warnings;
    std::vector<SubsumptionEntry> subsumption_log;
    std::string model_name;
    std::string model_hash;
};

// Prologue closure plus slot layout. A condition neuron in layer l > 0 pulls
// in every previous-layer neuron feeding it with a nonzero weight, so its
// value is computable before any fallback code runs.
inline ExecutionPlan schedule(const QuantizedMLP& net, const std::vector<LogicFlow>& flows) {
    ExecutionPlan plan;
    plan.model_name = net.name;
    plan.model_hash = model_hash(net);
    plan.flows = flows;

    std::set<int> closure;  // canonical indices
    auto add_with_inputs = [&](auto&& self, const NeuronId& n) -> void {
        if (!net.is_hidden(n) || n.index >= net.layers[static_cast<std::size_t>(n.layer)].out_width())
            throw SchemaError("plan references unknown hidden neuron (layer " +
                              std::to_string(n.layer) + ", index " + std::to_string(n.index) + ")");
        if (!closure.insert(net.canonical_index(n)).second) return;
        if (n.layer == 0) return;
        const auto& w = net.layers[static_cast<std::size_t>(n.layer)]
                            .weights[static_cast<std::size_t>(n.index)];
        for (std::size_t j = 0; j < w.size(); ++j)
            if (w[j] != 0) self(self, NeuronId{n.layer - 1, static_cast<int>(j)});
    };
    std::set<std::pair<int, bool>> slot_keys;
    for (const LogicFlow& f : plan.flows)
        for (const SignConstraint& sc : f.conditions) {
            add_with_inputs(add_with_inputs, sc.neuron);
            slot_keys.insert({net.canonical_index(sc.neuron), sc.active});
        }
    for (int k : closure) plan.prologue.push_back(net.hidden_neuron(k));
    for (const auto& [k, active] : slot_keys) plan.slots.push_back({net.hidden_neuron(k), active});

    for (const LogicFlow& f : plan.flows) {
        std::vector<int> idx;
        for (const SignConstraint& sc : f.conditions) {
            auto it = std::find(plan.slots.begin(), plan.slots.end(), sc);
            idx.push_back(static_cast<int>(it - plan.slots.begin()));
        }
        plan.flow_slots.push_back(std::move(idx));
    }

    if (!plan.flows.empty() && static_cast<int>(closure.size()) == net.hidden_count() &&
        net.hidden_count() > 0)
        plan.warnings.push_back(
            "prologue covers every hidden neuron; flows save only the output layer");
    return plan;
}

enum class ExitKind { Flow, FullNetwork };

struct EvalTrace {
    std::int64_t macs = 0;
    std::int64_t compares = 0;  // ReLU signs + slot tests + argmax
    std::int64_t branches = 0;  // taken early exits
    std::int64_t flow_tests = 0;
    std::int64_t slot_compares = 0;  // subset of compares: tracking-bit writes
    std::vector<std::int64_t> layer_macs;
    std::vector<std::int64_t> layer_compares;
    int computed_neurons = 0;
};

struct HybridResult {
    int cls = 0;
    ExitKind exit = ExitKind::FullNetwork;
    int flow_id = -1;
    EvalTrace trace;
};

// Evaluates the plan exactly as the emitted C code does: prologue neurons
// once, tracking slots, flow tests in order with early exit, then the
// remaining network reusing every already-computed value.
inline HybridResult hybrid_eval(const QuantizedMLP& net, const ExecutionPlan& plan,
                                std::span<const std::int64_t> x) {
    if (!net.in_domain(x)) throw DomainError("hybrid_eval: input out of declared domain");
    HybridResult res;
    EvalTrace& t = res.trace;
    t.layer_macs.assign(static_cast<std::size_t>(net.layer_count()), 0);
    t.layer_compares.assign(static_cast<std::size_t>(net.layer_count()), 0);

    int hidden = net.hidden_count();
    std::vector<std::int64_t> z(static_cast<std::size_t>(hidden), 0);
    std::vector<std::int64_t> r(static_cast<std::size_t>(hidden), 0);
    std::vector<bool> computed(static_cast<std::size_t>(hidden), false);

    auto compute_hidden = [&](int k) {
        if (computed[static_cast<std::size_t>(k)]) return;
        NeuronId id = net.hidden_neuron(k);
        const DenseLayer& layer = net.layers[static_cast<std::size_t>(id.layer)];
        const auto& w = layer.weights[static_cast<std::size_t>(id.index)];
        std::int64_t acc = layer.biases[static_cast<std::size_t>(id.index)];
        for (std::size_t j = 0; j < w.size(); ++j)
            acc += w[j] * (id.layer == 0
                               ? x[j]
                               : r[static_cast<std::size_t>(
                                     net.canonical_index({id.layer - 1, static_cast<int>(j)}))]);
        z[static_cast<std::size_t>(k)] = acc;
        r[static_cast<std::size_t>(k)] = acc >= 1 ? acc : 0;
        computed[static_cast<std::size_t>(k)] = true;
        t.macs += static_cast<std::int64_t>(w.size());
        t.layer_macs[static_cast<std::size_t>(id.layer)] += static_cast<std::int64_t>(w.size());
        t.compares += 1;  // the ReLU sign test
        t.layer_compares[static_cast<std::size_t>(id.layer)] += 1;
        t.computed_neurons += 1;
    };

    for (const NeuronId& n : plan.prologue) compute_hidden(net.canonical_index(n));

    std::vector<bool> slot_val(plan.slots.size(), false);
    for (std::size_t s = 0; s < plan.slots.size(); ++s) {
        const SignConstraint& sc = plan.slots[s];
        std::int64_t zz = z[static_cast<std::size_t>(net.canonical_index(sc.neuron))];
        slot_val[s] = sc.active ? zz >= 1 : zz <= 0;
        t.compares += 1;
        t.slot_compares += 1;
    }

    for (std::size_t f = 0; f < plan.flows.size(); ++f) {
        t.flow_tests += 1;
        bool all = true;
        for (int s : plan.flow_slots[f])
            if (!slot_val[static_cast<std::size_t>(s)]) {
                all = false;
                break;
            }
        if (all) {
            t.branches += 1;
            res.cls = plan.flows[f].output_class;
            res.exit = ExitKind::Flow;
            res.flow_id = plan.flows[f].id;
            return res;
        }
    }

    for (int k = 0; k < hidden; ++k) compute_hidden(k);
    const DenseLayer& out_layer = net.layers.back();
    int last = net.layer_count() - 1;
    std::vector<std::int64_t> logits(static_cast<std::size_t>(out_layer.out_width()));
    for (int c = 0; c < out_layer.out_width(); ++c) {
        const auto& w = out_layer.weights[static_cast<std::size_t>(c)];
        std::int64_t acc = out_layer.biases[static_cast<std::size_t>(c)];
        for (std::size_t j = 0; j < w.size(); ++j)
            acc += w[j] * (last == 0 ? x[j]
                                     : r[static_cast<std::size_t>(net.canonical_index(
                                           {last - 1, static_cast<int>(j)}))]);
        logits[static_cast<std::size_t>(c)] = acc;
        t.macs += static_cast<std::int64_t>(w.size());
        t.layer_macs[static_cast<std::size_t>(last)] += static_cast<std::int64_t>(w.size());
    }
    t.compares += net.class_count() - 1;
    t.layer_compares[static_cast<std::size_t>(last)] += net.class_count() - 1;
    res.cls = argmax_class(logits);
    res.exit = ExitKind::FullNetwork;
    return res;
}

// The reference program is the same machinery with no flows.
inline HybridResult reference_eval(const QuantizedMLP& net, std::span<const std::int64_t> x) {
    static const ExecutionPlan empty_plan;
    return hybrid_eval(net, empty_plan, x);
}

inline const char* polarity_string(bool active) { return active ? "ge1" : "le0"; }

inline nlohmann::json plan_to_json(const QuantizedMLP& net, const ExecutionPlan& plan) {
    nlohmann::json doc;
    doc["format"] = "nn2flow-plan-v1";
    doc["tool_version"] = kToolVersion;
    doc["model_name"] = plan.model_name;
    doc["model_hash"] = plan.model_hash;
    auto neuron_json = [](const NeuronId& n) {
        return nlohmann::json{{"layer", n.layer}, {"index", n.index}};
    };
    auto prologue = nlohmann::json::array();
    for (const NeuronId& n : plan.prologue) prologue.push_back(neuron_json(n));
    doc["prologue"] = prologue;
    auto slots = nlohmann::json::array();
    for (const SignConstraint& sc : plan.slots) {
        nlohmann::json js = neuron_json(sc.neuron);
        js["polarity"] = polarity_string(sc.active);
        slots.push_back(js);
    }
    doc["slots"] = slots;
    auto flows = nlohmann::json::array();
    for (std::size_t f = 0; f < plan.flows.size(); ++f) {
        const LogicFlow& flow = plan.flows[f];
        nlohmann::json jf;
        jf["id"] = flow.id;
        jf["class"] = flow.output_class;
        jf["source_leaf"] = flow.source_leaf;
        auto conds = nlohmann::json::array();
        for (const SignConstraint& sc : flow.conditions) {
            nlohmann::json jc = neuron_json(sc.neuron);
            jc["polarity"] = polarity_string(sc.active);
            jc["text"] = condition_text(net, sc);
            conds.push_back(jc);
        }
        jf["conditions"] = conds;
        jf["slots"] = plan.flow_slots[f];
        flows.push_back(jf);
    }
    doc["flows"] = flows;
    doc["warnings"] = plan.warnings;
    auto log = nlohmann::json::array();
    for (const SubsumptionEntry& e : plan.subsumption_log)
        log.push_back({{"dropped_leaf", e.dropped_leaf},
                       {"kept_leaf", e.kept_leaf},
                       {"reason", e.reason}});
    doc["subsumption_log"] = log;
    return doc;
}

inline std::string plan_hash(const nlohmann::json& plan_doc) {
    return hash_hex(fnv1a64(plan_doc.dump()));
}

// Rebuilds a plan from its JSON form, re-deriving the schedule so imported
// plans obey the same closure and slot invariants. Corrupt condition data
// surfaces here or in oracle checks, not at execution time.
inline ExecutionPlan plan_from_json(const QuantizedMLP& net, const nlohmann::json& doc) {
    if (!doc.is_object() || doc.value("format", "") != std::string("nn2flow-plan-v1"))
        throw SchemaError("plan: not a nn2flow-plan-v1 document");
    std::vector<LogicFlow> flows;
    for (const auto& jf : doc.at("flows")) {
        LogicFlow flow;
        flow.id = jf.at("id").get<int>();
        flow.output_class = jf.at("class").get<int>();
        flow.source_leaf = jf.value("source_leaf", -1);
        if (flow.output_class < 0 || flow.output_class >= net.class_count())
            throw SchemaError("plan: flow class out of range");
        for (const auto& jc : jf.at("conditions")) {
            SignConstraint sc;
            sc.neuron = {jc.at("layer").get<int>(), jc.at("index").get<int>()};
            std::string pol = jc.at("polarity").get<std::string>();
            if (pol != "ge1" && pol != "le0") throw SchemaError("plan: bad polarity '" + pol + "'");
            sc.active = pol == "ge1";
            flow.conditions.push_back(sc);
        }
        flows.push_back(std::move(flow));
    }
    ExecutionPlan plan = schedule(net, flows);
    plan.model_hash = doc.value("model_hash", plan.model_hash);
    plan.model_name = doc.value("model_name", plan.model_name);
    if (doc.contains("subsumption_log"))
        for (const auto& je : doc["subsumption_log"])
            plan.subsumption_log.push_back({je.value("dropped_leaf", -1), je.value("kept_leaf", -1),
                                            je.value("reason", std::string())});
    return plan;
}

}  // namespace nn2flow
