// Exact big-M MIP encoding of a quantized ReLU network, plus a depth-first
// branch-and-bound feasibility search on top of the rational simplex.
//
// The integer-feasible points of encode_network's system are exactly the
// execution traces (x, z, r, d, o) of the network on domain inputs: z holds
// pre-activations, r the rectified values, d the phase binaries and o the
// output logits. Sign conditions and class comparisons are added as tagged
// rows on top of that structural core.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nn2flow/lp.hpp"
#include "nn2flow/model.hpp"
#include "nn2flow/rational.hpp"
#include "nn2flow/util.hpp"

namespace nn2flow {

struct NeuronRange {
    std::int64_t lo = 0, hi = 0;
};

struct BigMBounds {
    std::vector<NeuronRange> hidden;  // pre-activation bounds, canonical order
    std::vector<NeuronRange> output;  // logit bounds per class
};

// Interval-arithmetic bounds on every pre-activation; the load-time overflow
// check guarantees these fit int64.
inline BigMBounds big_m_bounds(const QuantizedMLP& net) {
    NetIntervals iv = activation_intervals(net);
    BigMBounds b;
    for (const auto& z : iv.hidden) b.hidden.push_back({z.lo.to_int64(), z.hi.to_int64()});
    for (const auto& z : iv.output) b.output.push_back({z.lo.to_int64(), z.hi.to_int64()});
    return b;
}

struct MipProblem {
    LinearSystem sys;
    int input_count = 0;
    int hidden_count = 0;
    int class_count = 0;
    int x_base = 0, z_base = 0, r_base = 0, d_base = 0, o_base = 0;

    int var_x(int i) const { return x_base + i; }
    int var_z(int k) const { return z_base + k; }
    int var_r(int k) const { return r_base + k; }
    int var_d(int k) const { return d_base + k; }
    int var_o(int c) const { return o_base + c; }
};

// Structural system: box-bounded integer inputs, one (z, r, d) triple per
// hidden neuron with the big-M ReLU linking rows, and output logit variables
// defined by equalities.
inline MipProblem encode_network(const QuantizedMLP& net) {
    BigMBounds mb = big_m_bounds(net);
    MipProblem p;
    p.input_count = net.input_dim;
    p.hidden_count = net.hidden_count();
    p.class_count = net.class_count();

    p.x_base = 0;
    for (int i = 0; i < net.input_dim; ++i)
        p.sys.add_var("x" + std::to_string(i),
                      Rational(net.input_domain[static_cast<std::size_t>(i)].first),
                      Rational(net.input_domain[static_cast<std::size_t>(i)].second), true);
    p.z_base = static_cast<int>(p.sys.vars.size());
    for (int k = 0; k < p.hidden_count; ++k)
        p.sys.add_var("z" + std::to_string(k), Rational(mb.hidden[static_cast<std::size_t>(k)].lo),
                      Rational(mb.hidden[static_cast<std::size_t>(k)].hi), true);
    p.r_base = static_cast<int>(p.sys.vars.size());
    for (int k = 0; k < p.hidden_count; ++k) {
        std::int64_t hi = std::max<std::int64_t>(0, mb.hidden[static_cast<std::size_t>(k)].hi);
        p.sys.add_var("r" + std::to_string(k), Rational(0), Rational(hi), true);
    }
    p.d_base = static_cast<int>(p.sys.vars.size());
    for (int k = 0; k < p.hidden_count; ++k)
        p.sys.add_var("d" + std::to_string(k), Rational(0), Rational(1), true);
    p.o_base = static_cast<int>(p.sys.vars.size());
    for (int c = 0; c < p.class_count; ++c)
        p.sys.add_var("o" + std::to_string(c), Rational(mb.output[static_cast<std::size_t>(c)].lo),
                      Rational(mb.output[static_cast<std::size_t>(c)].hi), true);

    std::size_t nvars = p.sys.vars.size();
    auto blank = [&]() {
        LinearConstraint row;
        row.coeffs.assign(nvars, Rational(0));
        row.tag.kind = ConstraintTag::Structural;
        return row;
    };

    // input column index of a layer's j-th input in variable space
    auto input_var = [&](int layer, int j) {
        return layer == 0 ? p.var_x(j)
                          : p.var_r(net.canonical_index({layer - 1, j}));
    };

    for (int k = 0; k < p.hidden_count; ++k) {
        NeuronId id = net.hidden_neuron(k);
        const DenseLayer& layer = net.layers[static_cast<std::size_t>(id.layer)];
        const auto& w = layer.weights[static_cast<std::size_t>(id.index)];
        std::int64_t L = mb.hidden[static_cast<std::size_t>(k)].lo;
        std::int64_t U = mb.hidden[static_cast<std::size_t>(k)].hi;
        std::int64_t m_neg = std::max<std::int64_t>(0, -L);  // slack below zero
        std::int64_t m_pos = std::max<std::int64_t>(0, U);   // reach above zero

        {  // z_k = w . input + b
            LinearConstraint row = blank();
            row.coeffs[static_cast<std::size_t>(p.var_z(k))] = Rational(1);
            for (std::size_t j = 0; j < w.size(); ++j)
                row.coeffs[static_cast<std::size_t>(input_var(id.layer, static_cast<int>(j)))] -=
                    Rational(w[j]);
            row.rel = Rel::Eq;
            row.rhs = Rational(layer.biases[static_cast<std::size_t>(id.index)]);
            row.label = "z_def_" + std::to_string(k);
            p.sys.add_row(row);
        }
        {  // r >= z
            LinearConstraint row = blank();
            row.coeffs[static_cast<std::size_t>(p.var_r(k))] = Rational(1);
            row.coeffs[static_cast<std::size_t>(p.var_z(k))] = Rational(-1);
            row.rel = Rel::Ge;
            row.rhs = Rational(0);
            row.label = "relu_ge_" + std::to_string(k);
            p.sys.add_row(row);
        }
        {  // r <= z + m_neg * (1 - d)
            LinearConstraint row = blank();
            row.coeffs[static_cast<std::size_t>(p.var_r(k))] = Rational(1);
            row.coeffs[static_cast<std::size_t>(p.var_z(k))] = Rational(-1);
            row.coeffs[static_cast<std::size_t>(p.var_d(k))] = Rational(m_neg);
            row.rel = Rel::Le;
            row.rhs = Rational(m_neg);
            row.label = "relu_off_" + std::to_string(k);
            p.sys.add_row(row);
        }
        {  // r <= m_pos * d
            LinearConstraint row = blank();
            row.coeffs[static_cast<std::size_t>(p.var_r(k))] = Rational(1);
            row.coeffs[static_cast<std::size_t>(p.var_d(k))] = Rational(-m_pos);
            row.rel = Rel::Le;
            row.rhs = Rational(0);
            row.label = "relu_cap_" + std::to_string(k);
            p.sys.add_row(row);
        }
        {  // d = 1 implies z >= 1:  z >= L + (1 - L) d
            LinearConstraint row = blank();
            row.coeffs[static_cast<std::size_t>(p.var_z(k))] = Rational(1);
            row.coeffs[static_cast<std::size_t>(p.var_d(k))] = Rational(L - 1);
            row.rel = Rel::Ge;
            row.rhs = Rational(L);
            row.label = "phase_on_" + std::to_string(k);
            p.sys.add_row(row);
        }
        {  // d = 0 implies z <= 0:  z <= U d
            LinearConstraint row = blank();
            row.coeffs[static_cast<std::size_t>(p.var_z(k))] = Rational(1);
            row.coeffs[static_cast<std::size_t>(p.var_d(k))] = Rational(-U);
            row.rel = Rel::Le;
            row.rhs = Rational(0);
            row.label = "phase_off_" + std::to_string(k);
            p.sys.add_row(row);
        }
    }

    int last = net.layer_count() - 1;
    const DenseLayer& out_layer = net.layers[static_cast<std::size_t>(last)];
    for (int c = 0; c < p.class_count; ++c) {
        LinearConstraint row = blank();
        row.coeffs[static_cast<std::size_t>(p.var_o(c))] = Rational(1);
        const auto& w = out_layer.weights[static_cast<std::size_t>(c)];
        for (std::size_t j = 0; j < w.size(); ++j)
            row.coeffs[static_cast<std::size_t>(input_var(last, static_cast<int>(j)))] -=
                Rational(w[j]);
        row.rel = Rel::Eq;
        row.rhs = Rational(out_layer.biases[static_cast<std::size_t>(c)]);
        row.label = "o_def_" + std::to_string(c);
        p.sys.add_row(row);
    }
    return p;
}

// preact >= 1 (active) or preact <= 0 (inactive) on one hidden neuron.
inline void add_sign_row(MipProblem& p, const QuantizedMLP& net, const SignConstraint& sc) {
    LinearConstraint row;
    row.coeffs.assign(p.sys.vars.size(), Rational(0));
    int k = net.canonical_index(sc.neuron);
    row.coeffs[static_cast<std::size_t>(p.var_z(k))] = Rational(1);
    row.rel = sc.active ? Rel::Ge : Rel::Le;
    row.rhs = Rational(sc.active ? 1 : 0);
    row.tag.kind = ConstraintTag::PathSign;
    row.tag.sign = sc;
    row.label = "sign_z" + std::to_string(k) + (sc.active ? "_pos" : "_neg");
    p.sys.add_row(row);
}

// "rival beats base" under the lowest-index tie rule: a strictly positive
// integer margin is required only when the rival has the higher index.
inline void add_class_compare(MipProblem& p, int rival, int base) {
    LinearConstraint row;
    row.coeffs.assign(p.sys.vars.size(), Rational(0));
    row.coeffs[static_cast<std::size_t>(p.var_o(rival))] = Rational(1);
    row.coeffs[static_cast<std::size_t>(p.var_o(base))] = Rational(-1);
    row.rel = Rel::Ge;
    row.rhs = Rational(rival > base ? 1 : 0);
    row.tag.kind = ConstraintTag::ClassCompare;
    row.tag.rival = rival;
    row.label = "c" + std::to_string(rival) + "_beats_c" + std::to_string(base);
    p.sys.add_row(row);
}

// The full variable assignment induced by running the network on x.
inline std::vector<Rational> execution_point(const MipProblem& p, const QuantizedMLP& net,
                                             std::span<const std::int64_t> x) {
    ForwardResult res = forward(net, x);
    std::vector<Rational> v(p.sys.vars.size(), Rational(0));
    for (int i = 0; i < p.input_count; ++i)
        v[static_cast<std::size_t>(p.var_x(i))] = Rational(x[static_cast<std::size_t>(i)]);
    for (int k = 0; k < p.hidden_count; ++k) {
        std::int64_t z = res.preacts[static_cast<std::size_t>(k)];
        v[static_cast<std::size_t>(p.var_z(k))] = Rational(z);
        v[static_cast<std::size_t>(p.var_r(k))] = Rational(z >= 1 ? z : 0);
        v[static_cast<std::size_t>(p.var_d(k))] = Rational(z >= 1 ? 1 : 0);
    }
    for (int c = 0; c < p.class_count; ++c)
        v[static_cast<std::size_t>(p.var_o(c))] = Rational(res.logits[static_cast<std::size_t>(c)]);
    return v;
}

struct FeasOutcome {
    enum Kind { Feasible, Infeasible, BudgetExceeded } kind = Infeasible;
    std::vector<std::int64_t> witness;  // integer input vector when Feasible
    std::int64_t nodes = 0;
    // audit data: present when the root relaxation already proved infeasibility
    std::optional<FarkasCertificate> root_certificate;

    bool feasible() const { return kind == Feasible; }
    bool infeasible() const { return kind == Infeasible; }
};

inline constexpr std::int64_t kDefaultNodeBudget = 10000;

// Depth-first search branching on phase binaries first (most fractional,
// ties by canonical order), then on integer inputs. A node is pruned when its
// LP relaxation is infeasible; a witness requires an all-integer point that
// replays through forward.
inline FeasOutcome bb_feasible(const MipProblem& p, const QuantizedMLP& net,
                               std::int64_t node_budget = kDefaultNodeBudget) {
    FeasOutcome out;
    if (p.sys.trivially_infeasible) {
        out.kind = FeasOutcome::Infeasible;
        return out;
    }
    std::vector<Bounds> stack;
    stack.push_back(default_bounds(p.sys));

    auto frac_of = [](const Rational& v) {
        return v - Rational(v.floor());
    };

    while (!stack.empty()) {
        if (out.nodes >= node_budget) {
            out.kind = FeasOutcome::BudgetExceeded;
            return out;
        }
        Bounds bounds = std::move(stack.back());
        stack.pop_back();
        ++out.nodes;

        LpResult lp = lp_feasible(p.sys, bounds);
        if (!lp.feasible) {
            if (out.nodes == 1) out.root_certificate = lp.certificate;
            continue;
        }

        // most fractional phase binary, then most fractional input
        int branch_var = -1;
        Rational best_dist(0);
        auto consider = [&](int var) {
            Rational f = frac_of(lp.point[static_cast<std::size_t>(var)]);
            Rational dist = f <= Rational(1) - f ? f : Rational(1) - f;
            if (dist > best_dist) {
                best_dist = dist;
                branch_var = var;
            }
        };
        for (int k = 0; k < p.hidden_count; ++k) consider(p.var_d(k));
        if (branch_var < 0)
            for (int i = 0; i < p.input_count; ++i) consider(p.var_x(i));

        if (branch_var < 0) {
            // integral point: extract and replay-verify the witness
            std::vector<std::int64_t> x;
            for (int i = 0; i < p.input_count; ++i) {
                const Rational& v = lp.point[static_cast<std::size_t>(p.var_x(i))];
                x.push_back(v.floor().to_int64());
            }
            std::vector<Rational> replay = execution_point(p, net, x);
            for (const auto& row : p.sys.rows)
                if (!row_satisfied(row, replay))
                    throw Error("internal: witness replay violates '" + row.label + "'");
            out.kind = FeasOutcome::Feasible;
            out.witness = std::move(x);
            return out;
        }

        const Rational& v = lp.point[static_cast<std::size_t>(branch_var)];
        BigInt fl = v.floor();
        Bounds low = bounds, high = bounds;
        low[static_cast<std::size_t>(branch_var)].second = Rational(fl);
        high[static_cast<std::size_t>(branch_var)].first = Rational(fl) + Rational(1);
        bool near_high = frac_of(v) >= Rational(BigInt(1), BigInt(2));
        // push the far side first so the near side is explored next
        if (near_high) {
            stack.push_back(std::move(low));
            stack.push_back(std::move(high));
        } else {
            stack.push_back(std::move(high));
            stack.push_back(std::move(low));
        }
    }
    out.kind = FeasOutcome::Infeasible;
    return out;
}

}  // namespace nn2flow
