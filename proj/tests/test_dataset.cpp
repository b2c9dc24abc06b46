#include "doctest.h"

#include <random>
#include <sstream>

#include "nn2flow/dataset.hpp"
#include "support/fixtures.hpp"

using namespace nn2flow;
using testsupport::fixture_a;

TEST_CASE("parse_csv reads feature columns then a label") {
    std::istringstream in("0,1,1\n7,0,0\n");
    Dataset ds = parse_csv(in, fixture_a(), DatasetRole::Train);
    REQUIRE(ds.size() == 2);
    CHECK(ds.rows[0].x == std::vector<std::int64_t>{0, 1});
    CHECK(ds.rows[0].label == 1);
    CHECK(ds.rows[1].x == std::vector<std::int64_t>{7, 0});
    CHECK(ds.rows[1].label == 0);
}

TEST_CASE("out-of-domain features are rejected with the line number") {
    std::istringstream in("8,0,0\n");
    try {
        parse_csv(in, fixture_a(), DatasetRole::Train);
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
}

TEST_CASE("bad labels and malformed cells are rejected with line numbers") {
    std::istringstream bad_label("0,0,2\n");
    CHECK_THROWS_AS(parse_csv(bad_label, fixture_a(), DatasetRole::Train), DomainError);
    std::istringstream non_int("0,zero,1\n");
    try {
        parse_csv(non_int, fixture_a(), DatasetRole::Train);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
    std::istringstream wrong_cols("0,1\n0,1,1,4\n");
    CHECK_THROWS_AS(parse_csv(wrong_cols, fixture_a(), DatasetRole::Train), SchemaError);
}

TEST_CASE("empty file gives an empty dataset") {
    std::istringstream in("");
    Dataset ds = parse_csv(in, fixture_a(), DatasetRole::Train);
    CHECK(ds.empty());
}

TEST_CASE("--header skips the first line") {
    std::istringstream in("x0,x1,label\n0,1,1\n");
    Dataset ds = parse_csv(in, fixture_a(), DatasetRole::Train, /*skip_header=*/true);
    CHECK(ds.size() == 1);
}

TEST_CASE("write_csv then parse_csv is the identity") {
    std::mt19937_64 rng(21);
    for (int round = 0; round < 20; ++round) {
        QuantizedMLP net = fixture_a();
        Dataset ds;
        ds.role = DatasetRole::Train;
        int n = static_cast<int>(rng() % 30);
        for (int i = 0; i < n; ++i)
            ds.rows.push_back({{static_cast<std::int64_t>(rng() % 8),
                                static_cast<std::int64_t>(rng() % 8)},
                               static_cast<int>(rng() % 2)});
        std::istringstream in(write_csv(ds));
        Dataset back = parse_csv(in, net, DatasetRole::Train);
        REQUIRE(back.size() == ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) {
            CHECK(back.rows[i].x == ds.rows[i].x);
            CHECK(back.rows[i].label == ds.rows[i].label);
        }
    }
}

TEST_CASE("infer_input_box") {
    Dataset ds;
    ds.rows = {{{0, 1}, 0}, {{7, 0}, 0}};
    auto box = infer_input_box(ds);
    CHECK(box == std::vector<std::pair<std::int64_t, std::int64_t>>{{0, 7}, {0, 1}});

    Dataset single;
    single.rows = {{{3, 3}, 0}};
    auto sbox = infer_input_box(single);
    CHECK(sbox == std::vector<std::pair<std::int64_t, std::int64_t>>{{3, 3}, {3, 3}});

    // rows spanning the full domain reproduce the declared domain
    Dataset full = testsupport::exhaustive_dataset(fixture_a());
    CHECK(infer_input_box(full) == fixture_a().input_domain);

    Dataset empty;
    CHECK_THROWS_AS(infer_input_box(empty), DomainError);
}
