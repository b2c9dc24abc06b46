// Quantized fully-connected ReLU networks with exact integer evaluation.
//
// All weights, biases and inputs are integers. A network is validated at load
// time so that every intermediate accumulation provably fits a signed 64-bit
// accumulator for every input in the declared domain; after that, forward
// evaluation is plain int64 arithmetic with no overflow checks needed.
#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nn2flow/bigint.hpp"
#include "nn2flow/util.hpp"

namespace nn2flow {

struct NeuronId {
    int layer = 0;  // dense-layer index: 0 = first hidden layer
    int index = 0;  // output row within that layer

    friend bool operator==(const NeuronId& a, const NeuronId& b) {
        return a.layer == b.layer && a.index == b.index;
    }
    friend auto operator<=>(const NeuronId& a, const NeuronId& b) = default;
};

// One sign condition on a hidden neuron's pre-activation: active means
// preact >= 1, inactive means preact <= 0.
struct SignConstraint {
    NeuronId neuron;
    bool active = false;

    friend bool operator==(const SignConstraint&, const SignConstraint&) = default;
    friend auto operator<=>(const SignConstraint&, const SignConstraint&) = default;
};

struct DenseLayer {
    std::vector<std::vector<std::int64_t>> weights;  // row-major, one row per output
    std::vector<std::int64_t> biases;

    int out_width() const { return static_cast<int>(weights.size()); }
    int in_width() const { return weights.empty() ? 0 : static_cast<int>(weights[0].size()); }
};

// Hidden-neuron on/off signs in canonical order (layer-major, index-minor).
// Bit is true iff the pre-activation is >= 1.
using ActivationPattern = std::vector<bool>;

struct Interval {
    BigInt lo, hi;
};

class QuantizedMLP {
public:
    std::string name;
    int input_dim = 0;
    std::vector<std::pair<std::int64_t, std::int64_t>> input_domain;  // [lo, hi] per feature
    std::vector<DenseLayer> layers;

    int layer_count() const { return static_cast<int>(layers.size()); }
    int class_count() const { return layers.empty() ? 0 : layers.back().out_width(); }
    int hidden_layer_count() const { return layer_count() - 1; }

    int hidden_count() const {
        int n = 0;
        for (int l = 0; l + 1 < layer_count(); ++l) n += layers[l].out_width();
        return n;
    }

    bool is_hidden(const NeuronId& n) const { return n.layer < hidden_layer_count(); }

    // Canonical hidden-neuron numbering: layer-major, then index.
    int canonical_index(const NeuronId& n) const {
        int idx = 0;
        for (int l = 0; l < n.layer; ++l) idx += layers[l].out_width();
        return idx + n.index;
    }

    NeuronId hidden_neuron(int canonical) const {
        int l = 0;
        while (canonical >= layers[l].out_width()) {
            canonical -= layers[l].out_width();
            ++l;
        }
        return NeuronId{l, canonical};
    }

    bool in_domain(std::span<const std::int64_t> x) const {
        if (static_cast<int>(x.size()) != input_dim) return false;
        for (int i = 0; i < input_dim; ++i)
            if (x[i] < input_domain[i].first || x[i] > input_domain[i].second) return false;
        return true;
    }
};

struct ForwardResult {
    std::vector<std::int64_t> logits;
    ActivationPattern pattern;
    std::vector<std::int64_t> preacts;  // per hidden neuron, canonical order
};

// Argmax with ties broken toward the lower class index.
inline int argmax_class(std::span<const std::int64_t> logits) {
    int best = 0;
    for (int c = 1; c < static_cast<int>(logits.size()); ++c)
        if (logits[c] > logits[best]) best = c;
    return best;
}

inline ForwardResult forward(const QuantizedMLP& net, std::span<const std::int64_t> x) {
    if (static_cast<int>(x.size()) != net.input_dim)
        throw DomainError("forward: input has " + std::to_string(x.size()) +
                          " features, expected " + std::to_string(net.input_dim));
    if (!net.in_domain(x))
        throw DomainError("forward: input out of declared domain");

    ForwardResult res;
    res.preacts.reserve(static_cast<std::size_t>(net.hidden_count()));
    res.pattern.reserve(static_cast<std::size_t>(net.hidden_count()));
    std::vector<std::int64_t> cur(x.begin(), x.end());
    for (int l = 0; l < net.layer_count(); ++l) {
        const DenseLayer& layer = net.layers[static_cast<std::size_t>(l)];
        std::vector<std::int64_t> next(static_cast<std::size_t>(layer.out_width()));
        for (int i = 0; i < layer.out_width(); ++i) {
            std::int64_t acc = layer.biases[static_cast<std::size_t>(i)];
            const auto& row = layer.weights[static_cast<std::size_t>(i)];
            for (std::size_t j = 0; j < row.size(); ++j) acc += row[j] * cur[j];
            if (l + 1 < net.layer_count()) {
                res.preacts.push_back(acc);
                res.pattern.push_back(acc >= 1);
                next[static_cast<std::size_t>(i)] = acc >= 1 ? acc : 0;
            } else {
                next[static_cast<std::size_t>(i)] = acc;
            }
        }
        cur = std::move(next);
    }
    res.logits = std::move(cur);
    return res;
}

inline int predict(const QuantizedMLP& net, std::span<const std::int64_t> x) {
    return argmax_class(forward(net, x).logits);
}

struct OpCounts {
    std::vector<std::int64_t> layer_macs;  // out*in per dense layer
    std::int64_t hidden_compares = 0;      // one ReLU sign test per hidden neuron
    std::int64_t argmax_compares = 0;      // class_count - 1
};

inline OpCounts neuron_cost_counts(const QuantizedMLP& net) {
    OpCounts c;
    for (int l = 0; l < net.layer_count(); ++l) {
        const DenseLayer& layer = net.layers[static_cast<std::size_t>(l)];
        c.layer_macs.push_back(static_cast<std::int64_t>(layer.out_width()) * layer.in_width());
        if (l + 1 < net.layer_count()) c.hidden_compares += layer.out_width();
    }
    c.argmax_compares = std::max(0, net.class_count() - 1);
    return c;
}

// Sound [lo, hi] interval for every pre-activation plus a proof that no
// accumulation prefix (bias first, then ascending input index — the order
// forward uses) can leave int64. Throws SchemaError when a prefix may.
struct NetIntervals {
    std::vector<Interval> hidden;  // pre-activation bounds, canonical order
    std::vector<Interval> output;  // logit bounds per class
};

inline NetIntervals activation_intervals(const QuantizedMLP& net, bool check_overflow = true) {
    const BigInt i64_min(std::numeric_limits<std::int64_t>::min());
    const BigInt i64_max(std::numeric_limits<std::int64_t>::max());
    NetIntervals out;
    std::vector<Interval> cur;
    cur.reserve(static_cast<std::size_t>(net.input_dim));
    for (const auto& [lo, hi] : net.input_domain) cur.push_back({BigInt(lo), BigInt(hi)});

    for (int l = 0; l < net.layer_count(); ++l) {
        const DenseLayer& layer = net.layers[static_cast<std::size_t>(l)];
        std::vector<Interval> next;
        next.reserve(static_cast<std::size_t>(layer.out_width()));
        for (int i = 0; i < layer.out_width(); ++i) {
            BigInt lo(layer.biases[static_cast<std::size_t>(i)]);
            BigInt hi = lo;
            const auto& row = layer.weights[static_cast<std::size_t>(i)];
            for (std::size_t j = 0; j < row.size(); ++j) {
                BigInt w(row[j]);
                BigInt a = w * cur[j].lo, b = w * cur[j].hi;
                lo += (a < b ? a : b);
                hi += (a < b ? b : a);
                if (check_overflow && (lo < i64_min || hi > i64_max))
                    throw SchemaError("model '" + net.name + "': layer " + std::to_string(l) +
                                      " neuron " + std::to_string(i) +
                                      " may overflow a 64-bit accumulator on the declared domain");
            }
            Interval z{lo, hi};
            if (l + 1 < net.layer_count()) {
                out.hidden.push_back(z);
                BigInt zero(0);
                next.push_back({z.lo < zero ? zero : z.lo, z.hi < zero ? zero : z.hi});
            } else {
                out.output.push_back(z);
            }
        }
        cur = std::move(next);
    }
    return out;
}

inline void validate(const QuantizedMLP& net) {
    if (net.name.empty()) throw SchemaError("model: empty name");
    if (net.input_dim <= 0) throw SchemaError("model '" + net.name + "': input_dim must be positive");
    if (static_cast<int>(net.input_domain.size()) != net.input_dim)
        throw SchemaError("model '" + net.name + "': input_domain size differs from input_dim");
    for (int i = 0; i < net.input_dim; ++i)
        if (net.input_domain[static_cast<std::size_t>(i)].first >
            net.input_domain[static_cast<std::size_t>(i)].second)
            throw SchemaError("model '" + net.name + "': empty domain for feature " +
                              std::to_string(i));
    if (net.layers.empty()) throw SchemaError("model '" + net.name + "': no layers");
    int prev = net.input_dim;
    for (int l = 0; l < net.layer_count(); ++l) {
        const DenseLayer& layer = net.layers[static_cast<std::size_t>(l)];
        if (layer.out_width() == 0)
            throw SchemaError("model '" + net.name + "': layer " + std::to_string(l) + " is empty");
        if (static_cast<int>(layer.biases.size()) != layer.out_width())
            throw SchemaError("model '" + net.name + "': layer " + std::to_string(l) +
                              " bias count differs from row count");
        for (const auto& row : layer.weights)
            if (static_cast<int>(row.size()) != prev)
                throw SchemaError("model '" + net.name + "': layer " + std::to_string(l) +
                                  " expects input width " + std::to_string(prev) + ", got a row of " +
                                  std::to_string(row.size()));
        prev = layer.out_width();
    }
    if (net.class_count() < 2)
        throw SchemaError("model '" + net.name + "': last layer needs at least 2 outputs");
    activation_intervals(net);  // throws on potential accumulator overflow
}

namespace detail {

inline std::int64_t require_int(const nlohmann::json& j, const std::string& where) {
    if (!j.is_number_integer())
        throw SchemaError("model: " + where + " must be an integer, got " + j.dump());
    return j.get<std::int64_t>();
}

}  // namespace detail

// Model file schema:
//   {"name": str, "input_dim": int, "input_domain": [[lo,hi],...],
//    "layers": [{"weights": [[...]], "biases": [...]}, ...]}
inline QuantizedMLP model_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw SchemaError("model: document is not a JSON object");
    for (const char* key : {"name", "input_dim", "input_domain", "layers"})
        if (!doc.contains(key)) throw SchemaError(std::string("model: missing key '") + key + "'");

    QuantizedMLP net;
    if (!doc["name"].is_string()) throw SchemaError("model: 'name' must be a string");
    net.name = doc["name"].get<std::string>();
    net.input_dim = static_cast<int>(detail::require_int(doc["input_dim"], "input_dim"));
    if (!doc["input_domain"].is_array()) throw SchemaError("model: 'input_domain' must be an array");
    for (const auto& pair : doc["input_domain"]) {
        if (!pair.is_array() || pair.size() != 2)
            throw SchemaError("model: each input_domain entry must be [lo, hi]");
        net.input_domain.emplace_back(detail::require_int(pair[0], "domain lo"),
                                      detail::require_int(pair[1], "domain hi"));
    }
    if (!doc["layers"].is_array()) throw SchemaError("model: 'layers' must be an array");
    for (const auto& jl : doc["layers"]) {
        if (!jl.is_object() || !jl.contains("weights") || !jl.contains("biases"))
            throw SchemaError("model: each layer needs 'weights' and 'biases'");
        DenseLayer layer;
        for (const auto& jrow : jl["weights"]) {
            if (!jrow.is_array()) throw SchemaError("model: weight rows must be arrays");
            std::vector<std::int64_t> row;
            for (const auto& w : jrow) row.push_back(detail::require_int(w, "weight"));
            layer.weights.push_back(std::move(row));
        }
        for (const auto& b : jl["biases"]) layer.biases.push_back(detail::require_int(b, "bias"));
        net.layers.push_back(std::move(layer));
    }
    validate(net);
    return net;
}

inline QuantizedMLP load_model(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw SchemaError("model: invalid JSON");
    return model_from_json(doc);
}

// Canonical JSON serialization; the fingerprint embedded in every derived
// artifact hashes exactly this text.
inline nlohmann::json model_to_json(const QuantizedMLP& net) {
    nlohmann::json doc;
    doc["name"] = net.name;
    doc["input_dim"] = net.input_dim;
    auto domain = nlohmann::json::array();
    for (const auto& [lo, hi] : net.input_domain) domain.push_back({lo, hi});
    doc["input_domain"] = domain;
    auto layers = nlohmann::json::array();
    for (const auto& layer : net.layers) {
        nlohmann::json jl;
        jl["weights"] = layer.weights;
        jl["biases"] = layer.biases;
        layers.push_back(jl);
    }
    doc["layers"] = layers;
    return doc;
}

inline std::string model_hash(const QuantizedMLP& net) {
    return hash_hex(fnv1a64(model_to_json(net).dump()));
}

// Human-readable affine form of a neuron's pre-activation, e.g. "2*x0 - 1".
// Inputs are x{i}; deeper layers read the previous layer's rectified outputs
// r{layer-1}_{i}.
inline std::string affine_text(const QuantizedMLP& net, const NeuronId& n) {
    const DenseLayer& layer = net.layers[static_cast<std::size_t>(n.layer)];
    const auto& row = layer.weights[static_cast<std::size_t>(n.index)];
    std::int64_t bias = layer.biases[static_cast<std::size_t>(n.index)];
    std::string out;
    auto append_term = [&out](std::int64_t coef, const std::string& sym) {
        if (coef == 0) return;
        if (out.empty())
            out += (coef < 0 ? "-" : "");
        else
            out += coef < 0 ? " - " : " + ";
        std::int64_t mag = coef < 0 ? -coef : coef;
        out += std::to_string(mag);
        if (!sym.empty()) out += "*" + sym;
    };
    for (std::size_t j = 0; j < row.size(); ++j) {
        std::string sym = n.layer == 0 ? "x" + std::to_string(j)
                                       : "r" + std::to_string(n.layer - 1) + "_" + std::to_string(j);
        append_term(row[j], sym);
    }
    append_term(bias, "");
    if (out.empty()) out = "0";
    return out;
}

inline std::string condition_text(const QuantizedMLP& net, const SignConstraint& c) {
    return affine_text(net, c.neuron) + (c.active ? " >= 1" : " <= 0");
}

}  // namespace nn2flow
