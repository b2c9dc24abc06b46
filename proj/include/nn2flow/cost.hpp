// Abstract operation-cost benchmark comparing the reference network against
// the hybrid program: min/avg/max per-sample cost, a per-layer breakdown, the
// fraction of samples resolved by flows, and accuracy against labels. Costs
// are integer op counts times configurable weights; averages and percentages
// stay exact rationals all the way to rendering.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "nn2flow/dataset.hpp"
#include "nn2flow/flow.hpp"
#include "nn2flow/model.hpp"
#include "nn2flow/rational.hpp"
#include "nn2flow/util.hpp"

namespace nn2flow {

struct CostModel {
    std::int64_t mac = 1;
    std::int64_t compare = 1;
    std::int64_t branch = 1;
    std::int64_t flow_test = 1;
};

inline void validate(const CostModel& m) {
    if (m.mac <= 0 || m.compare <= 0 || m.branch <= 0 || m.flow_test <= 0)
        throw UsageError("cost model: all op costs must be positive integers");
}

inline std::int64_t trace_cost(const EvalTrace& t, const CostModel& m) {
    return m.mac * t.macs + m.compare * t.compares + m.branch * t.branches +
           m.flow_test * t.flow_tests;
}

// Neuron work attributed to one dense layer: its MACs plus its ReLU signs
// (argmax lands on the last layer). Slot compares, mask tests and branches
// are checking overhead, kept in their own bucket.
inline std::int64_t layer_cost(const EvalTrace& t, int layer, const CostModel& m) {
    return m.mac * t.layer_macs[static_cast<std::size_t>(layer)] +
           m.compare * t.layer_compares[static_cast<std::size_t>(layer)];
}

inline std::int64_t overhead_cost(const EvalTrace& t, const CostModel& m) {
    return m.compare * t.slot_compares + m.flow_test * t.flow_tests + m.branch * t.branches;
}

struct CostReport {
    std::string model_hash;
    std::int64_t sample_count = 0;
    std::int64_t min = 0, max = 0, total = 0;
    Rational avg;
    std::vector<std::int64_t> per_sample;
    std::vector<int> exit_ids;              // flow id or -1 (full network)
    std::vector<std::int64_t> layer_totals;  // summed neuron work per layer
    std::int64_t overhead_total = 0;
    Rational exit_fraction;
    Rational accuracy;
};

struct BenchResult {
    CostReport reference;
    CostReport hybrid;
};

// Per-sample traces for both programs; the reference is the same evaluator
// with flows disabled, so the comparison cannot drift.
inline BenchResult bench(const QuantizedMLP& net, const ExecutionPlan& plan,
                         const Dataset& dataset, const CostModel& model, unsigned jobs = 1) {
    validate(model);
    if (dataset.empty()) throw DomainError("bench: empty dataset");
    static const ExecutionPlan no_flows;
    BenchResult out;
    std::string hash = model_hash(net);

    for (CostReport* rep : {&out.reference, &out.hybrid}) {
        rep->model_hash = hash;
        rep->sample_count = static_cast<std::int64_t>(dataset.size());
        rep->per_sample.assign(dataset.size(), 0);
        rep->exit_ids.assign(dataset.size(), -1);
        rep->layer_totals.assign(static_cast<std::size_t>(net.layer_count()), 0);
    }
    std::vector<HybridResult> ref_runs(dataset.size()), hyb_runs(dataset.size());
    parallel_for(dataset.size(), jobs, [&](std::size_t i) {
        ref_runs[i] = hybrid_eval(net, no_flows, dataset.rows[i].x);
        hyb_runs[i] = hybrid_eval(net, plan, dataset.rows[i].x);
    });

    auto fold = [&](CostReport& rep, const std::vector<HybridResult>& runs) {
        std::int64_t correct = 0, exits = 0;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const HybridResult& r = runs[i];
            std::int64_t c = trace_cost(r.trace, model);
            rep.per_sample[i] = c;
            rep.exit_ids[i] = r.exit == ExitKind::Flow ? r.flow_id : -1;
            rep.total += c;
            if (i == 0 || c < rep.min) rep.min = c;
            if (i == 0 || c > rep.max) rep.max = c;
            for (int l = 0; l < net.layer_count(); ++l)
                rep.layer_totals[static_cast<std::size_t>(l)] += layer_cost(r.trace, l, model);
            rep.overhead_total += overhead_cost(r.trace, model);
            if (r.cls == dataset.rows[i].label) ++correct;
            if (r.exit == ExitKind::Flow) ++exits;
        }
        rep.avg = Rational(BigInt(rep.total), BigInt(rep.sample_count));
        rep.exit_fraction = Rational(BigInt(exits), BigInt(rep.sample_count));
        rep.accuracy = Rational(BigInt(correct), BigInt(rep.sample_count));
    };
    fold(out.reference, ref_runs);
    fold(out.hybrid, hyb_runs);
    return out;
}

struct CostDeltas {
    Rational min_pct, avg_pct, max_pct;  // savings: (ref - hybrid) / ref * 100
    Rational layer23_pct;                // savings with the first hidden layer excluded
    Rational exit_fraction;
    Rational reference_accuracy, hybrid_accuracy;
};

inline Rational savings_pct(const Rational& ref, const Rational& hyb) {
    if (ref.is_zero()) return Rational(0);
    return (ref - hyb) / ref * Rational(100);
}

inline CostDeltas compare(const CostReport& ref, const CostReport& hyb) {
    if (ref.sample_count != hyb.sample_count)
        throw UsageError("compare: reports cover different datasets");
    if (ref.model_hash != hyb.model_hash)
        throw UsageError("compare: reports come from different models");
    CostDeltas d;
    d.min_pct = savings_pct(Rational(ref.min), Rational(hyb.min));
    d.avg_pct = savings_pct(ref.avg, hyb.avg);
    d.max_pct = savings_pct(Rational(ref.max), Rational(hyb.max));
    Rational ref23(ref.total - ref.layer_totals[0]);
    Rational hyb23(hyb.total - hyb.layer_totals[0]);
    d.layer23_pct = savings_pct(ref23, hyb23);
    d.exit_fraction = hyb.exit_fraction;
    d.reference_accuracy = ref.accuracy;
    d.hybrid_accuracy = hyb.accuracy;
    return d;
}

namespace costdetail {

inline std::string pad_left(const std::string& s, std::size_t width) {
    if (s.size() >= width) return s;
    return std::string(width - s.size(), ' ') + s;
}

}  // namespace costdetail

// Aligned text table in the style of a latency-comparison row: reference and
// hybrid min/avg/max, percentage savings, layer 2+3 savings, exit fraction.
inline std::string render_comparison(const CostReport& ref, const CostReport& hyb,
                                     const CostDeltas& d) {
    using costdetail::pad_left;
    std::string out;
    auto line = [&](const std::string& name, const std::string& a, const std::string& b,
                    const std::string& c) {
        out += pad_left(name, 12) + pad_left(a, 14) + pad_left(b, 14) + pad_left(c, 12) + "\n";
    };
    line("", "reference", "hybrid", "saving");
    line("min", std::to_string(ref.min), std::to_string(hyb.min), d.min_pct.to_decimal(1) + " %");
    line("avg", ref.avg.to_decimal(2), hyb.avg.to_decimal(2), d.avg_pct.to_decimal(1) + " %");
    line("max", std::to_string(ref.max), std::to_string(hyb.max), d.max_pct.to_decimal(1) + " %");
    line("layer 2+3", std::to_string(ref.total - ref.layer_totals[0]),
         std::to_string(hyb.total - hyb.layer_totals[0]), d.layer23_pct.to_decimal(1) + " %");
    line("exit by tree", "-", d.exit_fraction.to_decimal(3), "");
    line("accuracy", d.reference_accuracy.to_decimal(3), d.hybrid_accuracy.to_decimal(3), "");
    return out;
}

inline nlohmann::json report_json(const CostReport& rep) {
    nlohmann::json j;
    j["samples"] = rep.sample_count;
    j["min"] = rep.min;
    j["max"] = rep.max;
    j["total"] = rep.total;
    j["avg"] = rep.avg.to_string();
    j["avg_text"] = rep.avg.to_decimal(2);
    j["layer_totals"] = rep.layer_totals;
    j["overhead_total"] = rep.overhead_total;
    j["exit_fraction"] = rep.exit_fraction.to_string();
    j["accuracy"] = rep.accuracy.to_string();
    j["per_sample"] = rep.per_sample;
    j["exits"] = rep.exit_ids;
    return j;
}

inline nlohmann::json bench_json(const BenchResult& res, const CostModel& model,
                                 const CostDeltas& d) {
    nlohmann::json j;
    j["model_hash"] = res.reference.model_hash;
    j["cost_model"] = {{"mac", model.mac},
                       {"compare", model.compare},
                       {"branch", model.branch},
                       {"flow_test", model.flow_test}};
    j["reference"] = report_json(res.reference);
    j["hybrid"] = report_json(res.hybrid);
    j["deltas"] = {{"min_pct", d.min_pct.to_string()},
                   {"avg_pct", d.avg_pct.to_string()},
                   {"max_pct", d.max_pct.to_string()},
                   {"layer23_pct", d.layer23_pct.to_string()},
                   {"exit_fraction", d.exit_fraction.to_string()},
                   {"reference_accuracy", d.reference_accuracy.to_string()},
                   {"hybrid_accuracy", d.hybrid_accuracy.to_string()}};
    return j;
}

}  // namespace nn2flow
