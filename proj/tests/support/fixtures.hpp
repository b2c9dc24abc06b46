// Shared test fixtures and generators. Everything here is deterministic.
#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "nn2flow/dataset.hpp"
#include "nn2flow/model.hpp"

namespace testsupport {

// 2 inputs on [0,7]^2, hidden h0 = 2*x0 - 1 and h1 = 3*x1 - 2,
// outputs o0 = r0 - r1 and o1 = -r0 + r1 + 1. Every input with x0 = 0
// predicts class 1; pattern (T,T) mixes both classes.
inline nn2flow::QuantizedMLP fixture_a() {
    nn2flow::QuantizedMLP net;
    net.name = "fixture_a";
    net.input_dim = 2;
    net.input_domain = {{0, 7}, {0, 7}};
    net.layers = {
        {{{2, 0}, {0, 3}}, {-1, -2}},
        {{{1, -1}, {-1, 1}}, {0, 1}},
    };
    return net;
}

// 1 input on [0,5], 3 classes. Hidden h0 = x - 1, h1 = x - 3;
// outputs o0 = 2 - r0, o1 = r0 - r1, o2 = 2*r1 - 2.
// Classes: x <= 2 -> c0, x >= 3 -> c1 (c2 never wins under the tie rule).
inline nn2flow::QuantizedMLP fixture_c() {
    nn2flow::QuantizedMLP net;
    net.name = "fixture_c";
    net.input_dim = 1;
    net.input_domain = {{0, 5}};
    net.layers = {
        {{{1}, {1}}, {-1, -3}},
        {{{-1, 0}, {1, -1}, {0, 2}}, {2, 0, -2}},
    };
    return net;
}

// Two hidden layers: g0 = x0 - 1 and g1 = x1 - 1, then h0 = q0 + q1 - 2
// over the rectified q; outputs o0 = s0, o1 = 1 - s0. The deep neuron h0's
// sign is not determined by the layer-0 signs, so IIS extraction can land on
// it and exercise prologue layer closure.
inline nn2flow::QuantizedMLP fixture_d() {
    nn2flow::QuantizedMLP net;
    net.name = "fixture_d";
    net.input_dim = 2;
    net.input_domain = {{0, 3}, {0, 3}};
    net.layers = {
        {{{1, 0}, {0, 1}}, {-1, -1}},
        {{{1, 1}}, {-2}},
        {{{1}, {-1}}, {0, 1}},
    };
    return net;
}

// Training rows for fixture_a covering patterns FF, FT and TT (never TF, so
// the only extractable flow is the x0 = 0 region).
inline nn2flow::Dataset fixture_a_train() {
    nn2flow::Dataset d;
    d.role = nn2flow::DatasetRole::Train;
    d.rows = {
        {{0, 0}, 1},
        {{0, 1}, 1},
        {{1, 1}, 1},
        {{7, 1}, 0},
    };
    return d;
}

// Every input of a small-domain network, labeled with its own prediction.
inline nn2flow::Dataset exhaustive_dataset(const nn2flow::QuantizedMLP& net) {
    nn2flow::Dataset d;
    d.role = nn2flow::DatasetRole::Infer;
    std::vector<std::int64_t> x(static_cast<std::size_t>(net.input_dim));
    for (int i = 0; i < net.input_dim; ++i) x[static_cast<std::size_t>(i)] = net.input_domain[static_cast<std::size_t>(i)].first;
    while (true) {
        d.rows.push_back({x, nn2flow::predict(net, x)});
        int i = net.input_dim - 1;
        while (i >= 0 && x[static_cast<std::size_t>(i)] == net.input_domain[static_cast<std::size_t>(i)].second) {
            x[static_cast<std::size_t>(i)] = net.input_domain[static_cast<std::size_t>(i)].first;
            --i;
        }
        if (i < 0) break;
        ++x[static_cast<std::size_t>(i)];
    }
    return d;
}

// Uniform integer in [lo, hi] from raw engine output; avoids
// std::uniform_int_distribution so sequences are identical everywhere.
inline std::int64_t rand_range(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

// Random small network: <=3 inputs, <=4 hidden neurons over 1-2 hidden
// layers, 2-3 classes, per-feature domain within [0,7]. Weights are kept
// small so exhaustive oracles stay cheap.
inline nn2flow::QuantizedMLP random_net(std::mt19937_64& rng, int id) {
    nn2flow::QuantizedMLP net;
    net.name = "random_" + std::to_string(id);
    net.input_dim = static_cast<int>(rand_range(rng, 1, 3));
    for (int i = 0; i < net.input_dim; ++i)
        net.input_domain.push_back({0, rand_range(rng, 1, 7)});
    int hidden_layers = static_cast<int>(rand_range(rng, 1, 2));
    int total_hidden = static_cast<int>(rand_range(rng, hidden_layers, 4));
    std::vector<int> widths;
    if (hidden_layers == 1) {
        widths = {total_hidden};
    } else {
        int first = static_cast<int>(rand_range(rng, 1, total_hidden - 1));
        widths = {first, total_hidden - first};
    }
    widths.push_back(static_cast<int>(rand_range(rng, 2, 3)));  // classes
    int prev = net.input_dim;
    for (int w : widths) {
        nn2flow::DenseLayer layer;
        for (int i = 0; i < w; ++i) {
            std::vector<std::int64_t> row;
            for (int j = 0; j < prev; ++j) row.push_back(rand_range(rng, -4, 4));
            layer.weights.push_back(std::move(row));
            layer.biases.push_back(rand_range(rng, -6, 6));
        }
        net.layers.push_back(std::move(layer));
        prev = w;
    }
    nn2flow::validate(net);
    return net;
}

// Random training rows drawn from the domain grid.
inline nn2flow::Dataset random_train(std::mt19937_64& rng, const nn2flow::QuantizedMLP& net,
                                     int rows) {
    nn2flow::Dataset d;
    d.role = nn2flow::DatasetRole::Train;
    for (int r = 0; r < rows; ++r) {
        std::vector<std::int64_t> x;
        for (int i = 0; i < net.input_dim; ++i)
            x.push_back(rand_range(rng, net.input_domain[static_cast<std::size_t>(i)].first,
                                   net.input_domain[static_cast<std::size_t>(i)].second));
        int label = nn2flow::predict(net, x);
        d.rows.push_back({std::move(x), label});
    }
    return d;
}

}  // namespace testsupport
