#include "autolinc/loss_expr.hpp"

#include <algorithm>
#include <cmath>

#include "autolinc/rng.hpp"

namespace autolinc {

int build_loss_graph(CompGraph& g, const ExprTree& tree, int yhat_id, int y_id, int n_id) {
    switch (tree.rule) {
        case Rule::Y: return y_id;
        case Rule::Yhat: return yhat_id;
        case Rule::N: return n_id;
        case Rule::Const1: return g.scalar(1.0);
        case Rule::Const2: return g.scalar(2.0);
        default: break;
    }
    int a = build_loss_graph(g, tree.children[0], yhat_id, y_id, n_id);
    switch (tree.rule) {
        case Rule::Add: return g.add(a, build_loss_graph(g, tree.children[1], yhat_id, y_id, n_id));
        case Rule::Mul: return g.mul(a, build_loss_graph(g, tree.children[1], yhat_id, y_id, n_id));
        case Rule::Neg: return g.neg(a);
        case Rule::Abs: return g.abs(a);
        case Rule::Inv: return g.inv(a);
        case Rule::Log: return g.log(a);
        case Rule::Exp: return g.exp(a);
        case Rule::Tanh: return g.tanh(a);
        case Rule::Square: return g.square(a);
        case Rule::Sqrt: return g.sqrt(a);
        default: throw std::logic_error("build_loss_graph: unreachable");
    }
}

namespace {

struct EvalGraph {
    CompGraph g;
    int yhat, root;

    EvalGraph(const ExprTree& tree, const LossInputs& in, double eps) : g(eps) {
        yhat = g.input("yhat");
        int y = g.constant(in.y);
        int n = g.constant(in.nmat);
        root = g.mean(build_loss_graph(g, tree, yhat, y, n));
        g.bind("yhat", in.yhat);
        g.forward();
    }
};

}  // namespace

EvalResult eval_loss(const ExprTree& tree, const LossInputs& in, double eps) {
    EvalGraph eg(tree, in, eps);
    double v = eg.g.value(eg.root).item();
    return {v, std::isfinite(v)};
}

GradResult grad_yhat(const ExprTree& tree, const LossInputs& in, double eps) {
    EvalGraph eg(tree, in, eps);
    eg.g.backward(eg.root);
    GradResult out;
    out.grad = eg.g.grad(eg.yhat);
    if (out.grad.size() == 0) out.grad = Tensor(in.yhat.rows(), in.yhat.cols());
    out.finite = out.grad.all_finite() && eg.g.value(eg.root).all_finite();
    out.all_zero = out.grad.all_zero();
    return out;
}

std::string canonical(const ExprTree& tree) {
    std::vector<std::string> kids;
    kids.reserve(tree.children.size());
    for (const auto& c : tree.children) kids.push_back(canonical(c));
    if (tree.rule == Rule::Add || tree.rule == Rule::Mul) std::sort(kids.begin(), kids.end());
    std::string s = rule_name(tree.rule);
    if (!kids.empty()) {
        s += "(";
        for (size_t i = 0; i < kids.size(); ++i) {
            if (i) s += ",";
            s += kids[i];
        }
        s += ")";
    }
    return s;
}

std::vector<LossInputs> probe_inputs(uint64_t seed) {
    constexpr int kProbes = 4, C = 8, K = 4;
    std::vector<LossInputs> probes;
    probes.reserve(kProbes);
    auto rng = make_rng(seed, "loss-probes");
    auto unif = [&] { return (rng() >> 11) * 0x1.0p-53; };
    for (int p = 0; p < kProbes; ++p) {
        LossInputs in;
        in.yhat = Tensor(C, K);
        in.y = Tensor(C, K);
        in.nmat = Tensor(C, K);
        std::vector<double> counts(K);
        for (int k = 0; k < K; ++k) counts[k] = 1.0 + static_cast<double>(rng() % 20);
        for (int i = 0; i < C; ++i) {
            double s = 0;
            for (int k = 0; k < K; ++k) {
                double u = unif() + 1e-3;
                in.yhat(i, k) = u;
                s += u;
            }
            for (int k = 0; k < K; ++k) in.yhat(i, k) /= s;
            in.y(i, static_cast<int>(rng() % K)) = 1.0;
            for (int k = 0; k < K; ++k) in.nmat(i, k) = counts[k];
        }
        probes.push_back(std::move(in));
    }
    return probes;
}

Fingerprint fingerprint(const ExprTree& tree, uint64_t probe_seed, double eps) {
    Fingerprint fp;
    fp.all_zero = true;
    uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& in : probe_inputs(probe_seed)) {
        GradResult g = grad_yhat(tree, in, eps);
        if (!g.finite) fp.finite = false;
        if (!g.all_zero) fp.all_zero = false;
        for (double v : g.grad.data()) {
            // quantize to 1e-6 so f64 noise cannot split equal gradients
            double q = std::isfinite(v) ? std::round(v * 1e6) : 1e18;
            int64_t qi = static_cast<int64_t>(q);
            h = fnv1a(&qi, sizeof(qi), h);
        }
    }
    fp.hash = h;
    return fp;
}

}  // namespace autolinc
