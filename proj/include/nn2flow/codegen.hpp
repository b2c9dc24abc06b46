// Freestanding C99 emission of the reference network and the hybrid program.
//
// Both programs expose `int predict(const int32_t *x)`, include nothing
// beyond <stdint.h>, compute in 64-bit signed accumulators, and share the
// same neuron emission routine and canonical ordering, so operation counts
// compare one-to-one. Output text is a pure function of model and plan.
#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "nn2flow/flow.hpp"
#include "nn2flow/model.hpp"
#include "nn2flow/util.hpp"

namespace nn2flow {

struct EmittedProgram {
    enum Kind { Reference, Hybrid };
    Kind kind = Reference;
    std::string entry = "predict";
    std::string source;
};

namespace cgdetail {

inline constexpr int kUnrollLimit = 16;  // inputs per neuron; looped at or above

inline std::string z_name(const NeuronId& n) {
    return "z" + std::to_string(n.layer) + "_" + std::to_string(n.index);
}

inline std::string input_expr(int layer, int j) {
    if (layer == 0) return "x[" + std::to_string(j) + "]";
    return "r" + std::to_string(layer - 1) + "[" + std::to_string(j) + "]";
}

inline bool fits_i32(std::int64_t v) {
    return v >= INT32_MIN && v <= INT32_MAX;
}

// File-scope weight table for a loop-form neuron.
inline std::string weight_table(const QuantizedMLP& net, const NeuronId& n,
                                const std::string& var) {
    const auto& w = net.layers[static_cast<std::size_t>(n.layer)]
                        .weights[static_cast<std::size_t>(n.index)];
    bool narrow = true;
    for (std::int64_t v : w) narrow = narrow && fits_i32(v);
    std::string out = "static const ";
    out += narrow ? "int32_t " : "int64_t ";
    out += var + "[" + std::to_string(w.size()) + "] = {";
    for (std::size_t j = 0; j < w.size(); ++j) {
        if (j) out += ", ";
        out += std::to_string(w[j]);
    }
    out += "};\n";
    return out;
}

// The dot product lines for one neuron: unrolled below the limit, a loop over
// the file-scope table otherwise. `target` is the int64 local receiving the
// pre-activation (or logit).
inline void emit_dot(const QuantizedMLP& net, const NeuronId& n, const std::string& target,
                     const std::string& table_var, std::string& body) {
    const DenseLayer& layer = net.layers[static_cast<std::size_t>(n.layer)];
    const auto& w = layer.weights[static_cast<std::size_t>(n.index)];
    std::int64_t bias = layer.biases[static_cast<std::size_t>(n.index)];
    if (static_cast<int>(w.size()) < kUnrollLimit) {
        body += "    int64_t " + target + " = (int64_t)" + std::to_string(bias);
        for (std::size_t j = 0; j < w.size(); ++j)
            body += " + (int64_t)" + std::to_string(w[j]) + " * " +
                    input_expr(n.layer, static_cast<int>(j));
        body += ";\n";
    } else {
        body += "    int64_t " + target + " = (int64_t)" + std::to_string(bias) + ";\n";
        body += "    for (int i = 0; i < " + std::to_string(w.size()) + "; ++i) " + target +
                " += (int64_t)" + table_var + "[i] * " +
                (n.layer == 0 ? "x[i]" : "r" + std::to_string(n.layer - 1) + "[i]") + ";\n";
    }
}

// z and rectified value for one hidden neuron.
inline void emit_hidden(const QuantizedMLP& net, const NeuronId& n, const std::string& table_var,
                        std::string& body) {
    std::string z = z_name(n);
    emit_dot(net, n, z, table_var, body);
    body += "    r" + std::to_string(n.layer) + "[" + std::to_string(n.index) + "] = (" + z +
            " >= 1) ? " + z + " : 0;\n";
}

inline std::string table_var(const NeuronId& n) {
    return "nn_w" + std::to_string(n.layer) + "_" + std::to_string(n.index);
}

inline std::string header_comment(const QuantizedMLP& net, const char* kind,
                                  const std::string& plan_note) {
    std::string out;
    out += "/* " + net.name + "_" + kind + ".c\n";
    out += " * generated by nn2flow " + std::string(kToolVersion) + "\n";
    out += " * model: " + net.name + " (" + model_hash(net) + ")\n";
    out += " * plan: " + plan_note + "\n";
    out += " * kind: " + std::string(kind) + "\n";
    out += " */\n";
    return out;
}

inline std::string trace_global() {
    return "#ifdef NN2FLOW_TRACE_EXIT\nint nn2flow_exit_kind = -2;\n#endif\n\n";
}

inline std::string trace_set(const std::string& value, const char* indent) {
    std::string out;
    out += std::string("#ifdef NN2FLOW_TRACE_EXIT\n");
    out += std::string(indent) + "nn2flow_exit_kind = " + value + ";\n";
    out += "#endif\n";
    return out;
}

// Declarations of the per-layer rectified-value arrays.
inline std::string r_decls(const QuantizedMLP& net) {
    std::string out;
    for (int l = 0; l + 1 < net.layer_count(); ++l)
        out += "    int64_t r" + std::to_string(l) + "[" +
               std::to_string(net.layers[static_cast<std::size_t>(l)].out_width()) + "];\n";
    return out;
}

inline std::string tables_for(const QuantizedMLP& net, const std::vector<NeuronId>& neurons) {
    std::string out;
    for (const NeuronId& n : neurons) {
        const auto& w = net.layers[static_cast<std::size_t>(n.layer)]
                            .weights[static_cast<std::size_t>(n.index)];
        if (static_cast<int>(w.size()) >= kUnrollLimit) out += weight_table(net, n, table_var(n));
    }
    return out;
}

inline std::string argmax_lines(const QuantizedMLP& net) {
    std::string out;
    out += "    int best = 0;\n";
    out += "    int64_t best_v = o_0;\n";
    for (int c = 1; c < net.class_count(); ++c) {
        std::string o = "o_" + std::to_string(c);
        out += "    if (" + o + " > best_v) { best = " + std::to_string(c) + "; best_v = " + o +
               "; }\n";
    }
    return out;
}

inline std::vector<NeuronId> all_neurons(const QuantizedMLP& net) {
    std::vector<NeuronId> out;
    for (int k = 0; k < net.hidden_count(); ++k) out.push_back(net.hidden_neuron(k));
    for (int c = 0; c < net.class_count(); ++c) out.push_back({net.layer_count() - 1, c});
    return out;
}

}  // namespace cgdetail

inline EmittedProgram emit_reference(const QuantizedMLP& net) {
    using namespace cgdetail;
    EmittedProgram prog;
    prog.kind = EmittedProgram::Reference;
    std::string out = header_comment(net, "ref", "none");
    out += "#include <stdint.h>\n\n";
    out += trace_global();
    out += tables_for(net, all_neurons(net));
    out += "int predict(const int32_t *x) {\n";
    out += r_decls(net);
    for (int k = 0; k < net.hidden_count(); ++k) {
        NeuronId n = net.hidden_neuron(k);
        emit_hidden(net, n, table_var(n), out);
    }
    int last = net.layer_count() - 1;
    for (int c = 0; c < net.class_count(); ++c) {
        NeuronId n{last, c};
        emit_dot(net, n, "o_" + std::to_string(c), table_var(n), out);
    }
    out += argmax_lines(net);
    out += trace_set("-1", "    ");
    out += "    return best;\n";
    out += "}\n";
    prog.source = std::move(out);
    return prog;
}

inline EmittedProgram emit_hybrid(const QuantizedMLP& net, const ExecutionPlan& plan) {
    using namespace cgdetail;
    for (const LogicFlow& f : plan.flows)
        for (const SignConstraint& sc : f.conditions)
            if (!net.is_hidden(sc.neuron) ||
                sc.neuron.index >=
                    net.layers[static_cast<std::size_t>(sc.neuron.layer)].out_width())
                throw SchemaError("emit_hybrid: plan references an unknown neuron");

    EmittedProgram prog;
    prog.kind = EmittedProgram::Hybrid;
    nlohmann::json plan_doc = plan_to_json(net, plan);
    std::string out =
        header_comment(net, "hybrid",
                       plan_hash(plan_doc) + " (" + std::to_string(plan.flows.size()) + " flows)");
    out += "#include <stdint.h>\n\n";
    out += trace_global();
    out += tables_for(net, all_neurons(net));
    out += "int predict(const int32_t *x) {\n";
    out += r_decls(net);

    std::size_t words = (plan.slots.size() + 63) / 64;
    for (std::size_t w = 0; w < words; ++w)
        out += "    uint64_t track" + std::to_string(w) + " = 0u;\n";

    std::vector<bool> in_prologue(static_cast<std::size_t>(net.hidden_count()), false);
    for (const NeuronId& n : plan.prologue) {
        emit_hidden(net, n, table_var(n), out);
        in_prologue[static_cast<std::size_t>(net.canonical_index(n))] = true;
    }
    for (std::size_t s = 0; s < plan.slots.size(); ++s) {
        const SignConstraint& sc = plan.slots[s];
        std::string z = z_name(sc.neuron);
        out += "    if (" + z + (sc.active ? " >= 1" : " <= 0") + ") track" +
               std::to_string(s / 64) + " |= UINT64_C(1) << " + std::to_string(s % 64) + ";\n";
    }

    for (std::size_t f = 0; f < plan.flows.size(); ++f) {
        const LogicFlow& flow = plan.flows[f];
        std::vector<std::uint64_t> mask(words, 0);
        for (int s : plan.flow_slots[f])
            mask[static_cast<std::size_t>(s) / 64] |= std::uint64_t(1)
                                                      << (static_cast<std::size_t>(s) % 64);
        std::string cond;
        for (std::size_t w = 0; w < words; ++w) {
            if (mask[w] == 0) continue;
            char buf[32];
            std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(mask[w]));
            std::string m = std::string("UINT64_C(") + buf + ")";
            if (!cond.empty()) cond += " && ";
            cond += "(track" + std::to_string(w) + " & " + m + ") == " + m;
        }
        if (cond.empty()) cond = "1";  // a flow with no conditions always fires
        out += "    if (" + cond + ") {\n";
        out += trace_set(std::to_string(flow.id), "        ");
        out += "        return " + std::to_string(flow.output_class) + ";\n";
        out += "    }\n";
    }

    for (int k = 0; k < net.hidden_count(); ++k) {
        if (in_prologue[static_cast<std::size_t>(k)]) continue;
        NeuronId n = net.hidden_neuron(k);
        emit_hidden(net, n, table_var(n), out);
    }
    int last = net.layer_count() - 1;
    for (int c = 0; c < net.class_count(); ++c) {
        NeuronId n{last, c};
        emit_dot(net, n, "o_" + std::to_string(c), table_var(n), out);
    }
    out += argmax_lines(net);
    out += trace_set("-1", "    ");
    out += "    return best;\n";
    out += "}\n";
    prog.source = std::move(out);
    return prog;
}

// A main() that reads CSV rows from stdin (input_dim integer features; any
// extra columns such as labels are ignored) and prints one class per line.
// Compiled with NN2FLOW_TRACE_EXIT it prints "class,exit" instead.
inline std::string emit_test_harness(const QuantizedMLP& net) {
    using namespace cgdetail;
    std::string out = header_comment(net, "harness", "none");
    out += "#include <stdint.h>\n#include <stdio.h>\n#include <stdlib.h>\n\n";
    out += "extern int predict(const int32_t *x);\n";
    out += "#ifdef NN2FLOW_TRACE_EXIT\nextern int nn2flow_exit_kind;\n#endif\n\n";
    out += "int main(void) {\n";
    out += "    char line[65536];\n";
    out += "    int32_t x[" + std::to_string(net.input_dim) + "];\n";
    out += "    long line_no = 0;\n";
    out += "    while (fgets(line, sizeof line, stdin)) {\n";
    out += "        line_no++;\n";
    out += "        const char *p = line;\n";
    out += "        int only_space = 1;\n";
    out += "        for (const char *q = line; *q; ++q)\n";
    out += "            if (*q != ' ' && *q != '\\t' && *q != '\\r' && *q != '\\n') only_space = 0;\n";
    out += "        if (only_space) continue;\n";
    out += "        for (int i = 0; i < " + std::to_string(net.input_dim) + "; ++i) {\n";
    out += "            char *end = NULL;\n";
    out += "            long long v = strtoll(p, &end, 10);\n";
    out += "            if (end == p || v < INT32_MIN || v > INT32_MAX) {\n";
    out += "                fprintf(stderr, \"harness: bad row at line %ld\\n\", line_no);\n";
    out += "                return 1;\n";
    out += "            }\n";
    out += "            x[i] = (int32_t)v;\n";
    out += "            p = end;\n";
    out += "            if (i + 1 < " + std::to_string(net.input_dim) + ") {\n";
    out += "                if (*p != ',') {\n";
    out += "                    fprintf(stderr, \"harness: bad row at line %ld\\n\", line_no);\n";
    out += "                    return 1;\n";
    out += "                }\n";
    out += "                p++;\n";
    out += "            }\n";
    out += "        }\n";
    out += "        int cls = predict(x);\n";
    out += "#ifdef NN2FLOW_TRACE_EXIT\n";
    out += "        printf(\"%d,%d\\n\", cls, nn2flow_exit_kind);\n";
    out += "#else\n";
    out += "        printf(\"%d\\n\", cls);\n";
    out += "#endif\n";
    out += "    }\n";
    out += "    return 0;\n";
    out += "}\n";
    return out;
}

}  // namespace nn2flow
