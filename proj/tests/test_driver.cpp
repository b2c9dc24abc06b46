#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nn2flow/driver.hpp"
#include "support/compile.hpp"
#include "support/fixtures.hpp"

using namespace nn2flow;
namespace fs = std::filesystem;

namespace {

std::string fixture_dir() { return std::string(NN2FLOW_REPO_DIR) + "/fixtures/fixture_a"; }

RunConfig fixture_config(const fs::path& out_dir) {
    RunConfig cfg;
    merge_config_file(cfg, fixture_dir() + "/project.json");
    cfg.out_dir = out_dir.string();
    return cfg;
}

struct Run {
    int code;
    std::string out, err;
};

Run run(Command cmd, const RunConfig& cfg) {
    std::ostringstream out, err;
    int code = run_command(cmd, cfg, out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("convert writes plan, IIS report and tree, and prints the summary") {
    fs::path dir = testsupport::fresh_dir("convert");
    RunConfig cfg = fixture_config(dir);
    Run r = run(Command::Convert, cfg);
    CHECK(r.code == 0);
    CHECK(r.out == "leaves: 3, constant: 2, flows: 1\n");
    CHECK(fs::exists(dir / "fixture_a_plan.json"));
    CHECK(fs::exists(dir / "fixture_a_iis.json"));
    CHECK(fs::exists(dir / "fixture_a_tree.dot"));

    nlohmann::json plan = nlohmann::json::parse(testsupport::read_file(dir / "fixture_a_plan.json"));
    CHECK(plan["flows"].size() == 1);
    CHECK(plan["flows"][0]["class"] == 1);
    CHECK(plan["flows"][0]["conditions"][0]["text"] == "2*x0 - 1 <= 0");
    CHECK(plan["model_hash"].get<std::string>().rfind("fnv1a:", 0) == 0);

    nlohmann::json iis = nlohmann::json::parse(testsupport::read_file(dir / "fixture_a_iis.json"));
    CHECK(iis["leaves"].size() == 2);  // FF and FT are constant
    std::string dot = testsupport::read_file(dir / "fixture_a_tree.dot");
    CHECK(dot.find("2*x0 - 1 >= 1") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("convert with certificates exports verifiable audit data") {
    fs::path dir = testsupport::fresh_dir("certs");
    RunConfig cfg = fixture_config(dir);
    cfg.emit_certificates = true;
    Run r = run(Command::Convert, cfg);
    CHECK(r.code == 0);
    REQUIRE(fs::exists(dir / "fixture_a_certs.json"));
    nlohmann::json certs =
        nlohmann::json::parse(testsupport::read_file(dir / "fixture_a_certs.json"));
    CHECK(!certs.empty());
    for (const auto& [key, cert] : certs.items()) {
        std::string kind = cert["kind"].get<std::string>();
        if (kind == "farkas") {
            CHECK(cert.contains("terms"));
            CHECK(cert["constant"].get<std::string>().front() != '-');
        } else {
            CHECK(kind == "search");
            CHECK(cert["nodes"].get<std::int64_t>() >= 1);
        }
    }
    fs::remove_all(dir);
}

TEST_CASE("empty training CSV converts cleanly with zero flows") {
    fs::path dir = testsupport::fresh_dir("empty");
    fs::path empty_csv = dir / "empty.csv";
    fs::create_directories(dir);
    std::ofstream(empty_csv) << "";
    RunConfig cfg = fixture_config(dir);
    cfg.train_path = empty_csv.string();
    Run r = run(Command::Convert, cfg);
    CHECK(r.code == 0);
    CHECK(r.out == "leaves: 0, constant: 0, flows: 0\n");
    CHECK(r.err.find("warning") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("unreadable model path exits 2 and names the file") {
    fs::path dir = testsupport::fresh_dir("noent");
    RunConfig cfg = fixture_config(dir);
    cfg.model_path = "/no/such/model.json";
    Run r = run(Command::Convert, cfg);
    CHECK(r.code == 2);
    CHECK(r.err.find("/no/such/model.json") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("emit runs convert implicitly and writes the three C files") {
    fs::path dir = testsupport::fresh_dir("emit");
    RunConfig cfg = fixture_config(dir);
    Run r = run(Command::Emit, cfg);
    CHECK(r.code == 0);
    CHECK(r.err.find("running convert first") != std::string::npos);
    for (const char* name : {"fixture_a_ref.c", "fixture_a_hybrid.c", "fixture_a_harness.c"})
        CHECK(fs::exists(dir / name));
    // emitted files match the library emitters byte for byte
    QuantizedMLP net = testsupport::fixture_a();
    CHECK(testsupport::read_file(dir / "fixture_a_ref.c") == emit_reference(net).source);
    fs::remove_all(dir);
}

TEST_CASE("emit refuses a plan built for a different model") {
    fs::path dir = testsupport::fresh_dir("stale");
    RunConfig cfg = fixture_config(dir);
    REQUIRE(run(Command::Convert, cfg).code == 0);
    // tamper with the stored hash
    fs::path plan_path = dir / "fixture_a_plan.json";
    nlohmann::json plan = nlohmann::json::parse(testsupport::read_file(plan_path));
    plan["model_hash"] = "fnv1a:0000000000000000";
    std::ofstream(plan_path) << plan.dump(2) << "\n";
    Run r = run(Command::Emit, cfg);
    CHECK(r.code == 2);
    CHECK(r.err.find("re-run convert") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("bench prints the comparison table and writes the JSON dump") {
    fs::path dir = testsupport::fresh_dir("bench");
    RunConfig cfg = fixture_config(dir);
    cfg.bench_json_dump = true;
    REQUIRE(run(Command::Convert, cfg).code == 0);
    Run r = run(Command::Bench, cfg);
    CHECK(r.code == 0);
    CHECK(r.out.find("reference") != std::string::npos);
    CHECK(r.out.find("min") != std::string::npos);
    CHECK(r.out.find("45.5 %") != std::string::npos);
    CHECK(fs::exists(dir / "fixture_a_bench.json"));
    nlohmann::json dump =
        nlohmann::json::parse(testsupport::read_file(dir / "fixture_a_bench.json"));
    CHECK(dump["hybrid"]["per_sample"].size() == 64);
    CHECK(dump["deltas"]["exit_fraction"] == "1/8");
    fs::remove_all(dir);
}

TEST_CASE("inspect reports exhaustive coverage") {
    fs::path dir = testsupport::fresh_dir("inspect");
    RunConfig cfg = fixture_config(dir);
    Run r = run(Command::Inspect, cfg);
    CHECK(r.code == 0);
    CHECK(r.out.find("leaves: 3") != std::string::npos);
    CHECK(r.out.find("coverage: 57/64") != std::string::npos);
    CHECK(fs::exists(dir / "fixture_a_tree.json"));
    nlohmann::json tree = nlohmann::json::parse(testsupport::read_file(dir / "fixture_a_tree.json"));
    CHECK(tree["leaves"][0]["verdict"] == "constant(c1)");
    fs::remove_all(dir);
}

TEST_CASE("oracle-check passes on the fixture project") {
    fs::path dir = testsupport::fresh_dir("oracle");
    RunConfig cfg = fixture_config(dir);
    REQUIRE(run(Command::Convert, cfg).code == 0);
    Run r = run(Command::OracleCheck, cfg);
    CHECK(r.code == 0);
    CHECK(r.out.find("pass  equivalence") != std::string::npos);
    CHECK(r.out.find("FAIL") == std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("oracle-check fails with a counterexample on a corrupted plan") {
    fs::path dir = testsupport::fresh_dir("corrupt");
    RunConfig cfg = fixture_config(dir);
    REQUIRE(run(Command::Convert, cfg).code == 0);
    fs::path plan_path = dir / "fixture_a_plan.json";
    nlohmann::json plan = nlohmann::json::parse(testsupport::read_file(plan_path));
    plan["flows"][0]["conditions"][0]["polarity"] = "ge1";  // flipped
    std::ofstream(plan_path) << plan.dump(2) << "\n";
    Run r = run(Command::OracleCheck, cfg);
    CHECK(r.code == 1);
    CHECK(r.out.find("FAIL") != std::string::npos);
    CHECK(r.out.find("input") != std::string::npos);  // names a counterexample
    fs::remove_all(dir);
}

TEST_CASE("oracle-check samples when the domain is too large") {
    fs::path dir = testsupport::fresh_dir("large");
    fs::create_directories(dir);
    nlohmann::json model = {
        {"name", "wide_domain"},
        {"input_dim", 4},
        {"input_domain", {{0, 999}, {0, 999}, {0, 999}, {0, 999}}},
        {"layers",
         {{{"weights", {{1, 1, 1, 1}, {1, -1, 1, -1}}}, {"biases", {-2000, 0}}},
          {{"weights", {{1, 0}, {0, 1}}}, {"biases", {0, 0}}}}}};
    std::ofstream(dir / "model.json") << model.dump(2);
    std::ofstream(dir / "train.csv") << "0,0,0,0,1\n999,999,999,999,0\n500,1,2,3,1\n";
    RunConfig cfg;
    cfg.model_path = (dir / "model.json").string();
    cfg.train_path = (dir / "train.csv").string();
    cfg.out_dir = (dir / "out").string();
    cfg.sample_count = 2000;
    Run r = run(Command::OracleCheck, cfg);
    CHECK(r.code == 0);
    CHECK(r.err.find("domain too large, skipping exhaustive checks") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("repeated convert runs are byte-identical, any job count") {
    fs::path dir1 = testsupport::fresh_dir("det1");
    fs::path dir2 = testsupport::fresh_dir("det2");
    RunConfig a = fixture_config(dir1);
    RunConfig b = fixture_config(dir2);
    b.jobs = 8;
    REQUIRE(run(Command::Convert, a).code == 0);
    REQUIRE(run(Command::Convert, b).code == 0);
    for (const char* name : {"fixture_a_plan.json", "fixture_a_iis.json", "fixture_a_tree.dot"})
        CHECK(testsupport::read_file(dir1 / name) == testsupport::read_file(dir2 / name));
    // and a second run into the same directory reproduces itself
    std::string before = testsupport::read_file(dir1 / "fixture_a_plan.json");
    REQUIRE(run(Command::Convert, a).code == 0);
    CHECK(testsupport::read_file(dir1 / "fixture_a_plan.json") == before);
    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

TEST_CASE("config file values are overridable the way flags do it") {
    RunConfig cfg;
    merge_config_file(cfg, fixture_dir() + "/project.json");
    CHECK(cfg.bb_budget == 10000);
    CHECK(cfg.max_flows == 64);
    CHECK(cfg.model_path.find("model.json") != std::string::npos);
    // paths resolve relative to the config file
    CHECK(fs::exists(cfg.model_path));
    CHECK(fs::exists(cfg.train_path));
    cfg.max_flows = 0;
    CHECK_THROWS_AS(validate(cfg), UsageError);
}
