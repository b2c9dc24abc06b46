#include "doctest.h"

#include <vector>

#include "nn2flow/model.hpp"
#include "support/fixtures.hpp"

using namespace nn2flow;
using testsupport::fixture_a;

namespace {

QuantizedMLP net_2_3_2() {
    QuantizedMLP net;
    net.name = "n232";
    net.input_dim = 2;
    net.input_domain = {{0, 7}, {0, 7}};
    net.layers = {
        {{{1, 0}, {0, 1}, {1, 1}}, {0, 0, -3}},
        {{{1, 0, -1}, {0, 1, 1}}, {0, 0}},
    };
    return net;
}

QuantizedMLP topology_net(std::vector<int> widths, int input_dim) {
    QuantizedMLP net;
    net.name = "topo";
    net.input_dim = input_dim;
    net.input_domain.assign(static_cast<std::size_t>(input_dim), {0, 1});
    int prev = input_dim;
    for (int w : widths) {
        DenseLayer layer;
        layer.weights.assign(static_cast<std::size_t>(w),
                             std::vector<std::int64_t>(static_cast<std::size_t>(prev), 1));
        layer.biases.assign(static_cast<std::size_t>(w), 0);
        net.layers.push_back(std::move(layer));
        prev = w;
    }
    return net;
}

}  // namespace

TEST_CASE("load_model accepts the canonical fixture document") {
    std::string doc = R"({
        "name": "fixture_a",
        "input_dim": 2,
        "input_domain": [[0,7],[0,7]],
        "layers": [
            {"weights": [[2,0],[0,3]], "biases": [-1,-2]},
            {"weights": [[1,-1],[-1,1]], "biases": [0,1]}
        ]
    })";
    QuantizedMLP net = load_model(doc);
    CHECK(net.input_dim == 2);
    CHECK(net.hidden_count() == 2);
    CHECK(net.class_count() == 2);
    CHECK(net.name == "fixture_a");
    // round-trips through the canonical serialization
    CHECK(model_from_json(model_to_json(net)).layers[0].weights == net.layers[0].weights);
    CHECK(model_hash(net) == model_hash(fixture_a()));
}

TEST_CASE("load_model rejects inconsistent layer widths") {
    std::string doc = R"({
        "name": "bad",
        "input_dim": 2,
        "input_domain": [[0,1],[0,1]],
        "layers": [
            {"weights": [[1,0],[0,1],[1,1]], "biases": [0,0,0]},
            {"weights": [[1,0,0,0],[0,1,0,0]], "biases": [0,0]}
        ]
    })";
    CHECK_THROWS_AS(load_model(doc), SchemaError);
}

TEST_CASE("load_model rejects non-integer weights") {
    std::string doc = R"({
        "name": "bad",
        "input_dim": 1,
        "input_domain": [[0,1]],
        "layers": [
            {"weights": [[1.5]], "biases": [0]},
            {"weights": [[1],[1]], "biases": [0,0]}
        ]
    })";
    CHECK_THROWS_AS(load_model(doc), SchemaError);
}

TEST_CASE("load_model rejects potential accumulator overflow") {
    QuantizedMLP net;
    net.name = "wide";
    net.input_dim = 2;
    std::int64_t big = std::int64_t(1) << 31;
    net.input_domain = {{0, big}, {0, big}};
    net.layers = {
        {{{big, big}}, {0}},
        {{{1}, {-1}}, {0, 0}},
    };
    CHECK_THROWS_AS(validate(net), SchemaError);
}

TEST_CASE("degenerate domain with zero weights is a constant classifier") {
    std::string doc = R"({
        "name": "const",
        "input_dim": 2,
        "input_domain": [[0,0],[0,0]],
        "layers": [
            {"weights": [[0,0],[0,0]], "biases": [0,0]},
            {"weights": [[0,0],[0,0]], "biases": [3,7]}
        ]
    })";
    QuantizedMLP net = load_model(doc);
    std::vector<std::int64_t> x{0, 0};
    auto res = forward(net, x);
    CHECK(res.logits == std::vector<std::int64_t>{3, 7});
    CHECK(predict(net, x) == 1);
}

TEST_CASE("forward computes the narrative pre-activations") {
    QuantizedMLP net = fixture_a();
    std::vector<std::int64_t> x{0, 1};
    auto res = forward(net, x);
    CHECK(res.preacts == std::vector<std::int64_t>{-1, 1});
    CHECK(res.pattern == ActivationPattern{false, true});
    CHECK(res.logits == std::vector<std::int64_t>{-1, 2});
}

TEST_CASE("forward on an all-zero-weight network returns the biases") {
    QuantizedMLP net = fixture_a();
    for (auto& layer : net.layers)
        for (auto& row : layer.weights) row.assign(row.size(), 0);
    for (std::int64_t x0 = 0; x0 <= 7; ++x0)
        for (std::int64_t x1 = 0; x1 <= 7; ++x1) {
            auto res = forward(net, std::vector<std::int64_t>{x0, x1});
            CHECK(res.logits == std::vector<std::int64_t>{0, 1});
        }
}

TEST_CASE("every fixture input with x0 = 0 predicts class 1") {
    QuantizedMLP net = fixture_a();
    for (std::int64_t x1 = 0; x1 <= 7; ++x1)
        CHECK(predict(net, std::vector<std::int64_t>{0, x1}) == 1);
    // and pattern bits agree with preact >= 1 over the whole grid
    for (std::int64_t x0 = 0; x0 <= 7; ++x0)
        for (std::int64_t x1 = 0; x1 <= 7; ++x1) {
            auto res = forward(net, std::vector<std::int64_t>{x0, x1});
            for (std::size_t n = 0; n < res.pattern.size(); ++n)
                CHECK(res.pattern[n] == (res.preacts[n] >= 1));
        }
}

TEST_CASE("predict breaks ties toward the lower class") {
    CHECK(argmax_class(std::vector<std::int64_t>{3, 3}) == 0);
    CHECK(argmax_class(std::vector<std::int64_t>{-1, 5}) == 1);
    CHECK(argmax_class(std::vector<std::int64_t>{2, 9, 9}) == 1);
    QuantizedMLP net = fixture_a();
    CHECK(predict(net, std::vector<std::int64_t>{0, 7}) == 1);
}

TEST_CASE("forward rejects out-of-domain and mis-sized inputs") {
    QuantizedMLP net = fixture_a();
    CHECK_THROWS_AS(forward(net, std::vector<std::int64_t>{8, 0}), DomainError);
    CHECK_THROWS_AS(forward(net, std::vector<std::int64_t>{1}), DomainError);
}

TEST_CASE("neuron_cost_counts from layer shapes") {
    auto c = neuron_cost_counts(net_2_3_2());
    CHECK(c.layer_macs == std::vector<std::int64_t>{6, 6});
    CHECK(c.hidden_compares == 3);
    CHECK(c.argmax_compares == 1);

    auto mnist = neuron_cost_counts(topology_net({30, 2}, 25));
    CHECK(mnist.layer_macs == std::vector<std::int64_t>{750, 60});

    auto occupancy = neuron_cost_counts(topology_net({20, 2}, 10));
    CHECK(occupancy.layer_macs == std::vector<std::int64_t>{200, 40});
}

TEST_CASE("canonical neuron order is layer-major") {
    QuantizedMLP net = testsupport::fixture_d();
    CHECK(net.hidden_count() == 3);
    CHECK(net.canonical_index({0, 0}) == 0);
    CHECK(net.canonical_index({0, 1}) == 1);
    CHECK(net.canonical_index({1, 0}) == 2);
    CHECK(net.hidden_neuron(2) == NeuronId{1, 0});
}

TEST_CASE("affine condition text") {
    QuantizedMLP net = fixture_a();
    CHECK(condition_text(net, {{0, 0}, true}) == "2*x0 - 1 >= 1");
    CHECK(condition_text(net, {{0, 1}, false}) == "3*x1 - 2 <= 0");
    QuantizedMLP d = testsupport::fixture_d();
    CHECK(condition_text(d, {{1, 0}, true}) == "1*r0_0 + 1*r0_1 - 2 >= 1");
}

TEST_CASE("activation intervals clamp through ReLU") {
    auto iv = activation_intervals(fixture_a());
    REQUIRE(iv.hidden.size() == 2);
    CHECK(iv.hidden[0].lo == BigInt(-1));
    CHECK(iv.hidden[0].hi == BigInt(13));
    CHECK(iv.hidden[1].lo == BigInt(-2));
    CHECK(iv.hidden[1].hi == BigInt(19));
    REQUIRE(iv.output.size() == 2);
    CHECK(iv.output[0].lo == BigInt(-19));
    CHECK(iv.output[0].hi == BigInt(13));
}
