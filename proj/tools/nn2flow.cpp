// nn2flow command line: convert quantized ReLU networks into early-exit
// logic-flow programs, emit C code, and benchmark the result.
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "nn2flow/driver.hpp"

namespace {

struct CliState {
    std::string config;
    std::string model, train, infer, plan, out_dir;
    std::int64_t bb_budget = 0;
    int max_flows = 0;
    unsigned jobs = 0;
    bool header = false, emit_certs = false, emit_plan = false, json_dump = false;
    std::int64_t cost_mac = 0, cost_compare = 0, cost_branch = 0, cost_flowtest = 0;
    std::int64_t domain_cap = 0, samples = 0;

    CLI::Option *o_model = nullptr, *o_train = nullptr, *o_infer = nullptr, *o_plan = nullptr,
                *o_out = nullptr, *o_budget = nullptr, *o_flows = nullptr, *o_jobs = nullptr,
                *o_header = nullptr, *o_certs = nullptr, *o_emit_plan = nullptr,
                *o_json = nullptr, *o_mac = nullptr, *o_cmp = nullptr, *o_br = nullptr,
                *o_ft = nullptr, *o_cap = nullptr, *o_samples = nullptr;
};

void add_common(CLI::App* cmd, CliState& s) {
    cmd->add_option("--config", s.config, "JSON project config; flags override its values");
    s.o_model = cmd->add_option("--model", s.model, "model JSON file");
    s.o_train = cmd->add_option("--train", s.train, "training CSV");
    s.o_infer = cmd->add_option("--infer", s.infer, "inference CSV");
    s.o_plan = cmd->add_option("--plan", s.plan, "plan JSON path (default <out>/<model>_plan.json)");
    s.o_out = cmd->add_option("--out", s.out_dir, "artifact output directory");
    s.o_budget = cmd->add_option("--bb-budget", s.bb_budget, "branch-and-bound node budget");
    s.o_flows = cmd->add_option("--max-flows", s.max_flows, "maximum number of logic flows");
    s.o_jobs = cmd->add_option("--jobs", s.jobs, "worker threads");
    s.o_header = cmd->add_flag("--header", s.header, "CSV files carry a header line");
    s.o_certs = cmd->add_flag("--emit-certificates", s.emit_certs,
                              "export infeasibility certificates for audit");
    s.o_emit_plan = cmd->add_flag("--emit-plan", s.emit_plan, "also print the plan JSON to stdout");
    s.o_json = cmd->add_flag("--json", s.json_dump, "write the per-sample bench dump");
    s.o_mac = cmd->add_option("--cost-mac", s.cost_mac, "cost of one MAC");
    s.o_cmp = cmd->add_option("--cost-compare", s.cost_compare, "cost of one compare");
    s.o_br = cmd->add_option("--cost-branch", s.cost_branch, "cost of one taken exit branch");
    s.o_ft = cmd->add_option("--cost-flowtest", s.cost_flowtest, "cost of one flow mask test");
    s.o_cap = cmd->add_option("--domain-cap", s.domain_cap,
                              "largest input grid enumerated exhaustively");
    s.o_samples = cmd->add_option("--samples", s.samples,
                                  "random samples when the grid is too large");
}

nn2flow::RunConfig build_config(const CliState& s) {
    nn2flow::RunConfig cfg;
    if (!s.config.empty()) nn2flow::merge_config_file(cfg, s.config);
    if (s.o_model->count()) cfg.model_path = s.model;
    if (s.o_train->count()) cfg.train_path = s.train;
    if (s.o_infer->count()) cfg.infer_path = s.infer;
    if (s.o_plan->count()) cfg.plan_path = s.plan;
    if (s.o_out->count()) cfg.out_dir = s.out_dir;
    if (s.o_budget->count()) cfg.bb_budget = s.bb_budget;
    if (s.o_flows->count()) cfg.max_flows = s.max_flows;
    if (s.o_jobs->count()) cfg.jobs = s.jobs;
    if (s.o_header->count()) cfg.csv_header = s.header;
    if (s.o_certs->count()) cfg.emit_certificates = s.emit_certs;
    if (s.o_emit_plan->count()) cfg.emit_plan_stdout = s.emit_plan;
    if (s.o_json->count()) cfg.bench_json_dump = s.json_dump;
    if (s.o_mac->count()) cfg.cost_model.mac = s.cost_mac;
    if (s.o_cmp->count()) cfg.cost_model.compare = s.cost_compare;
    if (s.o_br->count()) cfg.cost_model.branch = s.cost_branch;
    if (s.o_ft->count()) cfg.cost_model.flow_test = s.cost_flowtest;
    if (s.o_cap->count()) cfg.domain_cap = s.domain_cap;
    if (s.o_samples->count()) cfg.sample_count = s.samples;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nn2flow: compile quantized ReLU networks into early-exit logic-flow programs"};
    app.require_subcommand(1);

    CliState convert_s, emit_s, bench_s, inspect_s, oracle_s;
    CLI::App* convert = app.add_subcommand(
        "convert", "build the tree, prove constant leaves, extract flows, write the plan");
    add_common(convert, convert_s);
    CLI::App* emit = app.add_subcommand("emit", "generate reference, hybrid and harness C files");
    add_common(emit, emit_s);
    CLI::App* bench_cmd =
        app.add_subcommand("bench", "compare reference and hybrid operation costs");
    add_common(bench_cmd, bench_s);
    CLI::App* inspect =
        app.add_subcommand("inspect", "export the decision tree and coverage statistics");
    add_common(inspect, inspect_s);
    CLI::App* oracle = app.add_subcommand(
        "oracle-check", "run the exhaustive equivalence, soundness and IIS suites");
    add_common(oracle, oracle_s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        using nn2flow::Command;
        if (convert->parsed())
            return nn2flow::run_command(Command::Convert, build_config(convert_s), std::cout,
                                        std::cerr);
        if (emit->parsed())
            return nn2flow::run_command(Command::Emit, build_config(emit_s), std::cout, std::cerr);
        if (bench_cmd->parsed())
            return nn2flow::run_command(Command::Bench, build_config(bench_s), std::cout,
                                        std::cerr);
        if (inspect->parsed())
            return nn2flow::run_command(Command::Inspect, build_config(inspect_s), std::cout,
                                        std::cerr);
        if (oracle->parsed())
            return nn2flow::run_command(Command::OracleCheck, build_config(oracle_s), std::cout,
                                        std::cerr);
    } catch (const nn2flow::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
