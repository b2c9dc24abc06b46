#include "doctest.h"

#include <algorithm>
#include <random>

#include "nn2flow/tree.hpp"
#include "support/fixtures.hpp"

using namespace nn2flow;
using testsupport::fixture_a;

namespace {

Dataset rows_of(std::vector<std::vector<std::int64_t>> xs, const QuantizedMLP& net) {
    Dataset d;
    d.role = DatasetRole::Train;
    for (auto& x : xs) d.rows.push_back({x, predict(net, x)});
    return d;
}

}  // namespace

TEST_CASE("build_tree creates one leaf per observed pattern") {
    QuantizedMLP net = fixture_a();
    Dataset train = rows_of({{0, 1}, {1, 1}, {4, 0}}, net);
    DecisionTree tree = build_tree(net, train);
    REQUIRE(tree.leaves.size() == 3);
    // lexicographic pattern order: FT < TF < TT
    CHECK(pattern_string(tree.leaves[0].pattern) == "FT");
    CHECK(pattern_string(tree.leaves[1].pattern) == "TF");
    CHECK(pattern_string(tree.leaves[2].pattern) == "TT");
    for (const Leaf& leaf : tree.leaves) CHECK(leaf.total() == 1);
}

TEST_CASE("the root decides the first hidden neuron's sign") {
    QuantizedMLP net = fixture_a();
    DecisionTree tree = build_tree(net, rows_of({{0, 1}, {1, 1}}, net));
    REQUIRE(!tree.nodes.empty());
    CHECK(tree.nodes[0].neuron == NeuronId{0, 0});
    CHECK(condition_text(net, {tree.nodes[0].neuron, true}) == "2*x0 - 1 >= 1");
}

TEST_CASE("one training sample gives one full-depth path") {
    QuantizedMLP net = fixture_a();
    DecisionTree tree = build_tree(net, rows_of({{0, 1}}, net));
    REQUIRE(tree.leaves.size() == 1);
    CHECK(tree.nodes.size() == 2);  // one decision per hidden neuron
    CHECK(tree.nodes[0].false_child.kind == TreeChild::Node);
    CHECK(tree.nodes[0].true_child.kind == TreeChild::None);
    CHECK(tree.nodes[1].true_child.kind == TreeChild::LeafRef);
    CHECK(tree.nodes[1].false_child.kind == TreeChild::None);
}

TEST_CASE("empty training set yields a root with no leaves") {
    QuantizedMLP net = fixture_a();
    Dataset empty;
    DecisionTree tree = build_tree(net, empty);
    CHECK(tree.leaves.empty());
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].true_child.kind == TreeChild::None);
    CHECK(tree.nodes[0].false_child.kind == TreeChild::None);
}

TEST_CASE("histograms count predicted classes, not labels") {
    QuantizedMLP net = fixture_a();
    Dataset train;
    train.rows = {{{0, 1}, 0}, {{0, 2}, 0}};  // deliberately wrong labels
    DecisionTree tree = build_tree(net, train);
    REQUIRE(tree.leaves.size() == 1);
    CHECK(tree.leaves[0].class_histogram == std::vector<std::int64_t>{0, 2});
}

TEST_CASE("path constraints transcribe the pattern in canonical order") {
    QuantizedMLP net = fixture_a();
    DecisionTree tree = build_tree(net, rows_of({{0, 1}}, net));
    auto path = path_sign_constraints(net, tree, tree.leaves[0]);
    REQUIRE(path.size() == 2);  // depth equals hidden-neuron count
    CHECK(path[0] == SignConstraint{{0, 0}, false});
    CHECK(path[1] == SignConstraint{{0, 1}, true});

    Leaf foreign;
    foreign.id = 99;
    CHECK_THROWS_AS(path_sign_constraints(net, tree, foreign), DomainError);
}

TEST_CASE("leaf_of finds trained patterns and rejects unseen ones") {
    QuantizedMLP net = fixture_a();
    // patterns with x0 >= 1 only
    Dataset train = rows_of({{1, 1}, {4, 0}, {7, 1}}, net);
    DecisionTree tree = build_tree(net, train);
    for (const auto& row : train.rows) {
        auto leaf = leaf_of(net, tree, row.x);
        REQUIRE(leaf.has_value());
        CHECK(tree.leaves[static_cast<std::size_t>(*leaf)].pattern ==
              forward(net, row.x).pattern);
    }
    CHECK(!leaf_of(net, tree, std::vector<std::int64_t>{0, 0}).has_value());
}

TEST_CASE("build_tree is independent of row order and job count") {
    QuantizedMLP net = fixture_a();
    Dataset train = testsupport::exhaustive_dataset(net);
    std::mt19937_64 rng(3);
    DecisionTree reference = build_tree(net, train);
    for (int round = 0; round < 5; ++round) {
        Dataset shuffled = train;
        std::shuffle(shuffled.rows.begin(), shuffled.rows.end(), rng);
        DecisionTree got = build_tree(net, shuffled, round % 2 ? 4u : 1u);
        REQUIRE(got.leaves.size() == reference.leaves.size());
        for (std::size_t i = 0; i < got.leaves.size(); ++i) {
            CHECK(got.leaves[i].pattern == reference.leaves[i].pattern);
            CHECK(got.leaves[i].class_histogram == reference.leaves[i].class_histogram);
        }
    }
}

TEST_CASE("pattern bijection: leaves match the distinct trace patterns") {
    std::mt19937_64 rng(17);
    for (int round = 0; round < 5; ++round) {
        QuantizedMLP net = testsupport::random_net(rng, round);
        Dataset train = testsupport::random_train(rng, net, 50);
        DecisionTree tree = build_tree(net, train);
        std::map<ActivationPattern, int> seen;
        for (const auto& row : train.rows) seen[forward(net, row.x).pattern] = 1;
        REQUIRE(tree.leaves.size() == seen.size());
        for (const Leaf& leaf : tree.leaves) {
            CHECK(seen.count(leaf.pattern) == 1);
            CHECK(leaf.total() >= 1);
            // conservativity: any row mapped to this leaf has this exact pattern
        }
        for (const auto& row : train.rows) {
            auto leaf = leaf_of(net, tree, row.x);
            REQUIRE(leaf.has_value());
            CHECK(tree.leaves[static_cast<std::size_t>(*leaf)].pattern ==
                  forward(net, row.x).pattern);
        }
    }
}

TEST_CASE("dot export names conditions and visit counts") {
    QuantizedMLP net = fixture_a();
    DecisionTree tree = build_tree(net, rows_of({{0, 1}, {0, 2}, {1, 1}}, net));
    std::string dot = tree_to_dot(net, tree);
    CHECK(dot.find("2*x0 - 1 >= 1") != std::string::npos);
    CHECK(dot.find("3*x1 - 2 >= 1") != std::string::npos);
    CHECK(dot.find("F (2)") != std::string::npos);  // two samples took the false branch
    CHECK(dot.find("shape=box") != std::string::npos);
}
