// Pipeline orchestration behind the CLI subcommands: convert, emit, bench,
// inspect and oracle-check. Every artifact embeds the model fingerprint and
// downstream commands refuse mismatched compositions.
#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nn2flow/codegen.hpp"
#include "nn2flow/cost.hpp"
#include "nn2flow/dataset.hpp"
#include "nn2flow/feas.hpp"
#include "nn2flow/flow.hpp"
#include "nn2flow/iis.hpp"
#include "nn2flow/model.hpp"
#include "nn2flow/oracle.hpp"
#include "nn2flow/tree.hpp"
#include "nn2flow/util.hpp"

namespace nn2flow {

struct RunConfig {
    std::string model_path;
    std::string train_path;
    std::string infer_path;
    std::string plan_path;  // defaults to <out_dir>/<model>_plan.json
    std::string out_dir = "out";
    std::int64_t bb_budget = kDefaultNodeBudget;
    int max_flows = 64;
    CostModel cost_model;
    bool emit_certificates = false;
    bool emit_plan_stdout = false;
    bool bench_json_dump = false;
    bool csv_header = false;
    unsigned jobs = 1;
    std::int64_t domain_cap = kDefaultDomainCap;
    std::int64_t sample_count = 100000;  // sampled checks for oversized domains
};

namespace driverdetail {

inline std::string read_text_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw IoError(std::string(what) + ": cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
}

template <typename Fn>
inline auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const UsageError&) {
        throw;
    } catch (const IoError& e) {
        throw IoError(std::string(name) + ": " + e.what());
    } catch (const Error& e) {
        throw UsageError(std::string(name) + ": " + e.what());
    }
}

}  // namespace driverdetail

inline void merge_config_file(RunConfig& cfg, const std::string& config_path) {
    using driverdetail::read_text_file;
    nlohmann::json doc = nlohmann::json::parse(read_text_file(config_path, "config"), nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw SchemaError("config: '" + config_path + "' is not a JSON object");
    std::filesystem::path base = std::filesystem::path(config_path).parent_path();
    auto rel = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
    };
    if (doc.contains("model")) cfg.model_path = rel(doc["model"].get<std::string>());
    if (doc.contains("train")) cfg.train_path = rel(doc["train"].get<std::string>());
    if (doc.contains("infer")) cfg.infer_path = rel(doc["infer"].get<std::string>());
    if (doc.contains("plan")) cfg.plan_path = rel(doc["plan"].get<std::string>());
    if (doc.contains("out_dir")) cfg.out_dir = rel(doc["out_dir"].get<std::string>());
    if (doc.contains("bb_budget")) cfg.bb_budget = doc["bb_budget"].get<std::int64_t>();
    if (doc.contains("max_flows")) cfg.max_flows = doc["max_flows"].get<int>();
    if (doc.contains("jobs")) cfg.jobs = doc["jobs"].get<unsigned>();
    if (doc.contains("header")) cfg.csv_header = doc["header"].get<bool>();
    if (doc.contains("emit_certificates")) cfg.emit_certificates = doc["emit_certificates"].get<bool>();
    if (doc.contains("emit_plan")) cfg.emit_plan_stdout = doc["emit_plan"].get<bool>();
    if (doc.contains("domain_cap")) cfg.domain_cap = doc["domain_cap"].get<std::int64_t>();
    if (doc.contains("samples")) cfg.sample_count = doc["samples"].get<std::int64_t>();
    if (doc.contains("cost_model")) {
        const auto& cm = doc["cost_model"];
        if (cm.contains("mac")) cfg.cost_model.mac = cm["mac"].get<std::int64_t>();
        if (cm.contains("compare")) cfg.cost_model.compare = cm["compare"].get<std::int64_t>();
        if (cm.contains("branch")) cfg.cost_model.branch = cm["branch"].get<std::int64_t>();
        if (cm.contains("flow_test")) cfg.cost_model.flow_test = cm["flow_test"].get<std::int64_t>();
    }
}

inline void validate(const RunConfig& cfg) {
    if (cfg.bb_budget <= 0) throw UsageError("config: bb budget must be positive");
    if (cfg.max_flows <= 0) throw UsageError("config: max flows must be positive");
    if (cfg.jobs == 0) throw UsageError("config: jobs must be positive");
    validate(cfg.cost_model);
}

// Everything convert produces, kept in memory for the commands that compose.
struct PipelineResult {
    QuantizedMLP net;
    DecisionTree tree;
    std::vector<ConstancyResult> verdicts;
    std::vector<RivalUnion> unions;  // populated for constant leaves
    ExecutionPlan plan;
    bool empty_training = false;
};

inline QuantizedMLP load_model_file(const RunConfig& cfg) {
    return driverdetail::stage("model", [&] {
        if (cfg.model_path.empty()) throw UsageError("no model file given");
        return load_model(driverdetail::read_text_file(cfg.model_path, "model"));
    });
}

inline PipelineResult run_pipeline(const RunConfig& cfg) {
    using driverdetail::stage;
    PipelineResult r;
    r.net = load_model_file(cfg);
    Dataset train = stage("train", [&] {
        if (cfg.train_path.empty()) throw UsageError("no training csv given");
        return load_csv(cfg.train_path, r.net, DatasetRole::Train, cfg.csv_header);
    });
    r.empty_training = train.empty();
    r.tree = stage("tree", [&] { return build_tree(r.net, train, cfg.jobs); });
    r.verdicts = stage("verify", [&] {
        return analyze_leaves(r.net, r.tree, cfg.bb_budget, cfg.jobs);
    });
    for (const Leaf& leaf : r.tree.leaves) {
        const ConstancyResult& v = r.verdicts[static_cast<std::size_t>(leaf.id)];
        r.tree.leaves[static_cast<std::size_t>(leaf.id)].verdict = v.verdict;
    }
    r.unions.resize(r.tree.leaves.size());
    stage("iis", [&] {
        MipProblem base = encode_network(r.net);
        std::vector<int> constant_leaves;
        for (const Leaf& leaf : r.tree.leaves)
            if (r.verdicts[static_cast<std::size_t>(leaf.id)].verdict.kind == VerdictKind::Constant)
                constant_leaves.push_back(leaf.id);
        parallel_for(constant_leaves.size(), cfg.jobs, [&](std::size_t i) {
            int id = constant_leaves[i];
            const Leaf& leaf = r.tree.leaves[static_cast<std::size_t>(id)];
            auto path = path_sign_constraints(r.net, r.tree, leaf);
            r.unions[static_cast<std::size_t>(id)] =
                per_rival_union(r.net, base, path,
                                r.verdicts[static_cast<std::size_t>(id)].verdict.constant_class,
                                cfg.bb_budget);
        });
        return 0;
    });
    FlowExtraction fx = stage("flows", [&] {
        return extract_flows(r.net, r.tree, r.verdicts, r.unions, cfg.max_flows);
    });
    r.plan = stage("schedule", [&] { return schedule(r.net, fx.flows); });
    r.plan.subsumption_log = fx.log;
    return r;
}

inline nlohmann::json certificate_json(const LinearSystem& sys, const FarkasCertificate& cert) {
    nlohmann::json jt = nlohmann::json::array();
    for (const FarkasTerm& t : cert.terms) {
        nlohmann::json e;
        switch (t.source) {
            case FarkasTerm::Row:
                e["source"] = "row";
                e["label"] = sys.rows[static_cast<std::size_t>(t.index)].label;
                break;
            case FarkasTerm::LowerBound: e["source"] = "lower_bound"; break;
            case FarkasTerm::UpperBound: e["source"] = "upper_bound"; break;
            case FarkasTerm::FixedVar: e["source"] = "fixed_var"; break;
        }
        e["index"] = t.index;
        e["multiplier"] = t.multiplier.to_string();
        jt.push_back(e);
    }
    return nlohmann::json{{"constant", cert.constant.to_string()}, {"terms", jt}};
}

inline nlohmann::json iis_report_json(const PipelineResult& r) {
    nlohmann::json doc;
    doc["model_name"] = r.net.name;
    doc["model_hash"] = model_hash(r.net);
    doc["tool_version"] = kToolVersion;
    auto leaves = nlohmann::json::array();
    for (const Leaf& leaf : r.tree.leaves) {
        const ConstancyResult& v = r.verdicts[static_cast<std::size_t>(leaf.id)];
        if (v.verdict.kind != VerdictKind::Constant) continue;
        nlohmann::json jl;
        jl["leaf"] = leaf.id;
        jl["pattern"] = pattern_string(leaf.pattern);
        jl["class"] = v.verdict.constant_class;
        auto rivals = nlohmann::json::array();
        for (const IisResult& iis : r.unions[static_cast<std::size_t>(leaf.id)].per_rival) {
            nlohmann::json jr;
            jr["rival"] = iis.rival;
            auto kept = nlohmann::json::array();
            for (const SignConstraint& sc : iis.kept)
                kept.push_back({{"layer", sc.neuron.layer},
                                {"index", sc.neuron.index},
                                {"polarity", polarity_string(sc.active)},
                                {"text", condition_text(r.net, sc)}});
            jr["kept"] = kept;
            jr["status"] = iis.up_to_budget ? "irreducible-up-to-budget" : "irreducible";
            if (iis.certificate)
                jr["certificate"] = "cert_l" + std::to_string(leaf.id) + "_r" +
                                    std::to_string(iis.rival);
            else
                jr["certificate"] = nullptr;
            rivals.push_back(jr);
        }
        jl["rivals"] = rivals;
        leaves.push_back(jl);
    }
    doc["leaves"] = leaves;
    return doc;
}

inline std::filesystem::path artifact_path(const RunConfig& cfg, const QuantizedMLP& net,
                                           const char* suffix) {
    return std::filesystem::path(cfg.out_dir) / (net.name + suffix);
}

inline std::filesystem::path plan_file_path(const RunConfig& cfg, const QuantizedMLP& net) {
    if (!cfg.plan_path.empty()) return cfg.plan_path;
    return artifact_path(cfg, net, "_plan.json");
}

inline int cmd_convert(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    validate(cfg);
    PipelineResult r = run_pipeline(cfg);
    if (r.empty_training) err << "warning: empty training set, nothing to extract\n";
    for (const std::string& w : r.plan.warnings) err << "warning: " << w << "\n";

    nlohmann::json plan_doc = plan_to_json(r.net, r.plan);
    driverdetail::write_text_file(plan_file_path(cfg, r.net), plan_doc.dump(2) + "\n");
    driverdetail::write_text_file(artifact_path(cfg, r.net, "_iis.json"),
                                  iis_report_json(r).dump(2) + "\n");
    driverdetail::write_text_file(artifact_path(cfg, r.net, "_tree.dot"),
                                  tree_to_dot(r.net, r.tree));
    if (cfg.emit_certificates) {
        MipProblem base = encode_network(r.net);
        nlohmann::json certs = nlohmann::json::object();
        for (const Leaf& leaf : r.tree.leaves)
            for (const IisResult& iis : r.unions[static_cast<std::size_t>(leaf.id)].per_rival) {
                std::string key =
                    "cert_l" + std::to_string(leaf.id) + "_r" + std::to_string(iis.rival);
                if (iis.certificate) {
                    // labels refer to the rival problem: base + kept signs + compare
                    MipProblem prob = base;
                    for (const SignConstraint& sc : iis.kept) add_sign_row(prob, r.net, sc);
                    add_class_compare(prob, iis.rival,
                                      r.verdicts[static_cast<std::size_t>(leaf.id)]
                                          .verdict.constant_class);
                    nlohmann::json entry = certificate_json(prob.sys, *iis.certificate);
                    entry["kind"] = "farkas";
                    certs[key] = entry;
                } else {
                    certs[key] = {{"kind", "search"}, {"nodes", iis.final_solve_nodes}};
                }
            }
        driverdetail::write_text_file(artifact_path(cfg, r.net, "_certs.json"),
                                      certs.dump(2) + "\n");
    }
    if (cfg.emit_plan_stdout) out << plan_doc.dump(2) << "\n";

    int constant = 0;
    for (const auto& v : r.verdicts)
        if (v.verdict.kind == VerdictKind::Constant) ++constant;
    out << "leaves: " << r.tree.leaves.size() << ", constant: " << constant
        << ", flows: " << r.plan.flows.size() << "\n";
    return 0;
}

// Loads the plan artifact and refuses one built for a different model.
inline ExecutionPlan load_plan_file(const RunConfig& cfg, const QuantizedMLP& net) {
    std::filesystem::path path = plan_file_path(cfg, net);
    nlohmann::json doc = nlohmann::json::parse(
        driverdetail::read_text_file(path.string(), "plan"), nullptr, false);
    if (doc.is_discarded()) throw SchemaError("plan: '" + path.string() + "' is not valid JSON");
    ExecutionPlan plan = driverdetail::stage("plan", [&] { return plan_from_json(net, doc); });
    if (plan.model_hash != model_hash(net))
        throw UsageError("plan '" + path.string() + "' was built for a different model (" +
                         plan.model_hash + " vs " + model_hash(net) + "): re-run convert");
    return plan;
}

inline int cmd_emit(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    validate(cfg);
    QuantizedMLP net = load_model_file(cfg);
    if (!std::filesystem::exists(plan_file_path(cfg, net))) {
        err << "no plan found, running convert first\n";
        int rc = cmd_convert(cfg, out, err);
        if (rc != 0) return rc;
    }
    ExecutionPlan plan = load_plan_file(cfg, net);
    driverdetail::write_text_file(artifact_path(cfg, net, "_ref.c"), emit_reference(net).source);
    driverdetail::write_text_file(artifact_path(cfg, net, "_hybrid.c"),
                                  emit_hybrid(net, plan).source);
    driverdetail::write_text_file(artifact_path(cfg, net, "_harness.c"), emit_test_harness(net));
    out << "wrote " << artifact_path(cfg, net, "_ref.c").string() << ", "
        << artifact_path(cfg, net, "_hybrid.c").string() << ", "
        << artifact_path(cfg, net, "_harness.c").string() << "\n";
    return 0;
}

inline int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    (void)err;
    validate(cfg);
    QuantizedMLP net = load_model_file(cfg);
    ExecutionPlan plan = load_plan_file(cfg, net);
    Dataset infer = driverdetail::stage("infer", [&] {
        if (cfg.infer_path.empty()) throw UsageError("no inference csv given");
        return load_csv(cfg.infer_path, net, DatasetRole::Infer, cfg.csv_header);
    });
    BenchResult res = driverdetail::stage(
        "bench", [&] { return bench(net, plan, infer, cfg.cost_model, cfg.jobs); });
    CostDeltas d = compare(res.reference, res.hybrid);
    out << render_comparison(res.reference, res.hybrid, d);
    if (cfg.bench_json_dump)
        driverdetail::write_text_file(artifact_path(cfg, net, "_bench.json"),
                                      bench_json(res, cfg.cost_model, d).dump(2) + "\n");
    return 0;
}

inline int cmd_inspect(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    (void)err;
    validate(cfg);
    PipelineResult r = run_pipeline(cfg);
    driverdetail::write_text_file(artifact_path(cfg, r.net, "_tree.dot"),
                                  tree_to_dot(r.net, r.tree));
    driverdetail::write_text_file(artifact_path(cfg, r.net, "_tree.json"),
                                  tree_to_json(r.net, r.tree).dump(2) + "\n");
    int constant = 0;
    for (const auto& v : r.verdicts)
        if (v.verdict.kind == VerdictKind::Constant) ++constant;
    out << "leaves: " << r.tree.leaves.size() << ", constant: " << constant << "\n";

    if (domain_size(r.net) <= BigInt(cfg.domain_cap)) {
        std::int64_t mapped = 0, total = 0;
        for_each_input(r.net, [&](const std::vector<std::int64_t>& x) {
            ++total;
            if (leaf_of(r.net, r.tree, x)) ++mapped;
            return true;
        });
        out << "coverage: " << mapped << "/" << total << " inputs map to trained leaves (exhaustive)\n";
    } else {
        std::mt19937_64 rng(1234);
        std::int64_t mapped = 0;
        for (std::int64_t s = 0; s < cfg.sample_count; ++s) {
            std::vector<std::int64_t> x;
            for (const auto& [lo, hi] : r.net.input_domain)
                x.push_back(lo + static_cast<std::int64_t>(
                                     rng() % static_cast<std::uint64_t>(hi - lo + 1)));
            if (leaf_of(r.net, r.tree, x)) ++mapped;
        }
        out << "coverage: " << mapped << "/" << cfg.sample_count
            << " sampled inputs map to trained leaves (sampled)\n";
    }
    return 0;
}

// Equivalence, exit-soundness, constancy-soundness and IIS-irreducibility
// suites. When a plan artifact exists it is the one under test, so a corrupt
// plan file fails here with a counterexample.
inline int cmd_oracle_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    validate(cfg);
    PipelineResult r = run_pipeline(cfg);
    ExecutionPlan plan = r.plan;
    if (std::filesystem::exists(plan_file_path(cfg, r.net)))
        plan = load_plan_file(cfg, r.net);

    bool all_pass = true;
    auto report = [&](const char* name, bool pass, const std::string& detail) {
        out << (pass ? "pass" : "FAIL") << "  " << name;
        if (!detail.empty()) out << " (" << detail << ")";
        out << "\n";
        all_pass = all_pass && pass;
    };

    bool exhaustive = domain_size(r.net) <= BigInt(cfg.domain_cap);
    if (!exhaustive)
        err << "domain too large, skipping exhaustive checks (sampling " << cfg.sample_count
            << " inputs)\n";

    // equivalence + exit soundness over the grid or a fixed-seed sample
    std::string counterexample;
    std::string exit_violation;
    std::int64_t checked = 0;
    auto check_one = [&](const std::vector<std::int64_t>& x) {
        ++checked;
        int want = predict(r.net, x);
        HybridResult h = hybrid_eval(r.net, plan, x);
        if (h.cls != want && counterexample.empty()) {
            counterexample = "input";
            for (auto v : x) counterexample += " " + std::to_string(v);
            counterexample += ": hybrid " + std::to_string(h.cls) + " vs network " +
                              std::to_string(want);
        }
        if (h.exit == ExitKind::Flow && exit_violation.empty()) {
            ForwardResult res = forward(r.net, x);
            const LogicFlow& f = plan.flows[static_cast<std::size_t>(h.flow_id)];
            if (!satisfies_signs(res, r.net, f.conditions) || f.output_class != want) {
                exit_violation = "flow " + std::to_string(h.flow_id) + " fired wrongly";
            }
        }
        return true;
    };
    if (exhaustive) {
        for_each_input(r.net, check_one);
    } else {
        std::mt19937_64 rng(98765);
        for (std::int64_t s = 0; s < cfg.sample_count; ++s) {
            std::vector<std::int64_t> x;
            for (const auto& [lo, hi] : r.net.input_domain)
                x.push_back(lo + static_cast<std::int64_t>(
                                     rng() % static_cast<std::uint64_t>(hi - lo + 1)));
            check_one(x);
        }
    }
    report("equivalence: hybrid class == network class", counterexample.empty(),
           counterexample.empty() ? std::to_string(checked) + " inputs" : counterexample);
    report("exit soundness: fired flows hold and agree", exit_violation.empty(), exit_violation);

    // constancy soundness: no Constant leaf admits a counterexample
    std::string constancy_detail;
    bool constancy_pass = true;
    if (exhaustive) {
        for (const Leaf& leaf : r.tree.leaves) {
            const ConstancyResult& v = r.verdicts[static_cast<std::size_t>(leaf.id)];
            if (v.verdict.kind != VerdictKind::Constant) continue;
            auto path = path_sign_constraints(r.net, r.tree, leaf);
            for (int rival = 0; rival < r.net.class_count(); ++rival) {
                if (rival == v.verdict.constant_class) continue;
                FeasOutcome o = brute_force_feasible(r.net, path,
                                                     ClassCompareSpec{rival, v.verdict.constant_class},
                                                     cfg.domain_cap);
                if (!o.infeasible()) {
                    constancy_pass = false;
                    constancy_detail = "leaf " + std::to_string(leaf.id) + " rival " +
                                       std::to_string(rival) + " has a counterexample";
                }
            }
        }
    } else {
        constancy_detail = "skipped: domain too large for the exhaustive oracle";
    }
    report("constancy soundness: verdicts match the oracle", constancy_pass, constancy_detail);

    // irreducibility of every emitted IIS
    bool iis_pass = true;
    std::string iis_detail;
    MipProblem base = encode_network(r.net);
    for (const Leaf& leaf : r.tree.leaves) {
        const ConstancyResult& v = r.verdicts[static_cast<std::size_t>(leaf.id)];
        if (v.verdict.kind != VerdictKind::Constant) continue;
        for (const IisResult& iis : r.unions[static_cast<std::size_t>(leaf.id)].per_rival) {
            IrreducibilityReport rep =
                verify_irreducible(r.net, base, iis, v.verdict.constant_class, cfg.bb_budget);
            if (!rep.pass()) {
                iis_pass = false;
                iis_detail = "leaf " + std::to_string(leaf.id) + ": " + rep.message;
            }
        }
    }
    report("iis irreducibility: deletion filter output is minimal", iis_pass, iis_detail);

    return all_pass ? 0 : 1;
}

enum class Command { Convert, Emit, Bench, Inspect, OracleCheck };

// Exit codes: 0 ok, 1 property failure, 2 usage or I/O error.
inline int run_command(Command cmd, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        switch (cmd) {
            case Command::Convert: return cmd_convert(cfg, out, err);
            case Command::Emit: return cmd_emit(cfg, out, err);
            case Command::Bench: return cmd_bench(cfg, out, err);
            case Command::Inspect: return cmd_inspect(cfg, out, err);
            case Command::OracleCheck: return cmd_oracle_check(cfg, out, err);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const SchemaError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace nn2flow
