#include "autolinc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace autolinc {
namespace {

double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

// Supported broadcast patterns: equal shapes, scalar (1x1) vs any,
// row vector (1xK) vs (RxK). That is all the grammar and the GCN need.
bool bcast_ok(const Tensor& a, const Tensor& b) {
    if (a.same_shape(b)) return true;
    if (a.size() == 1 || b.size() == 1) return true;
    if (a.rows() == 1 && a.cols() == b.cols()) return true;
    if (b.rows() == 1 && b.cols() == a.cols()) return true;
    return false;
}

std::pair<int, int> bcast_shape(const Tensor& a, const Tensor& b) {
    return {std::max(a.rows(), b.rows()), std::max(a.cols(), b.cols())};
}

double bcast_get(const Tensor& t, int r, int c) {
    if (t.size() == 1) return t.at(0);
    return t(t.rows() == 1 ? 0 : r, c);
}

// Sums gradient g down to the shape of operand t (reverse of broadcast).
Tensor reduce_to(const Tensor& g, const Tensor& t) {
    if (g.same_shape(t)) return g;
    Tensor out(t.rows(), t.cols());
    for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c) {
            if (t.size() == 1)
                out.at(0) += g(r, c);
            else
                out(0, c) += g(r, c);
        }
    return out;
}

}  // namespace

int CompGraph::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

void CompGraph::check_id(int id) const {
    if (id < 0 || id >= static_cast<int>(nodes_.size()))
        throw std::out_of_range("CompGraph: bad node id");
}

int CompGraph::input(const std::string& name) {
    Node n;
    n.op = OpKind::Input;
    n.name = name;
    int id = push(std::move(n));
    inputs_[name] = id;
    return id;
}

int CompGraph::constant(Tensor value) {
    Node n;
    n.op = OpKind::Const;
    n.value = std::move(value);
    n.value_set = true;
    return push(std::move(n));
}

int CompGraph::unary(OpKind op, int a) {
    check_id(a);
    Node n;
    n.op = op;
    n.a = a;
    return push(std::move(n));
}

int CompGraph::binary(OpKind op, int a, int b) {
    check_id(a);
    check_id(b);
    Node n;
    n.op = op;
    n.a = a;
    n.b = b;
    return push(std::move(n));
}

int CompGraph::matmul(int a, int b) { return binary(OpKind::MatMul, a, b); }

int CompGraph::spmm(const SparseMat* m, int dense) {
    check_id(dense);
    Node n;
    n.op = OpKind::SpMM;
    n.a = dense;
    n.sp = m;
    return push(std::move(n));
}

int CompGraph::gather_rows(int a, std::vector<int> rows) {
    check_id(a);
    Node n;
    n.op = OpKind::GatherRows;
    n.a = a;
    n.rows_sel = std::move(rows);
    return push(std::move(n));
}

int CompGraph::softmax_xent(int logits, XentSpec spec) {
    check_id(logits);
    Node n;
    n.op = OpKind::SoftmaxXent;
    n.a = logits;
    n.xent = std::move(spec);
    return push(std::move(n));
}

void CompGraph::bind(const std::string& name, Tensor value) {
    auto it = inputs_.find(name);
    if (it == inputs_.end()) throw std::invalid_argument("CompGraph::bind: unknown input " + name);
    nodes_[it->second].value = std::move(value);
    nodes_[it->second].value_set = true;
}

void CompGraph::eval_node(Node& n) {
    switch (n.op) {
        case OpKind::Input:
            if (!n.value_set) throw std::logic_error("CompGraph: unbound input " + n.name);
            break;
        case OpKind::Const:
            break;
        case OpKind::Add:
        case OpKind::Mul: {
            const Tensor& a = nodes_[n.a].value;
            const Tensor& b = nodes_[n.b].value;
            if (!bcast_ok(a, b)) throw std::invalid_argument("CompGraph: shape mismatch in add/mul");
            auto [r, c] = bcast_shape(a, b);
            n.value = Tensor(r, c);
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < c; ++j) {
                    double x = bcast_get(a, i, j), y = bcast_get(b, i, j);
                    n.value(i, j) = n.op == OpKind::Add ? x + y : x * y;
                }
            break;
        }
        case OpKind::Neg:
        case OpKind::Abs:
        case OpKind::Inv:
        case OpKind::Log:
        case OpKind::Exp:
        case OpKind::Tanh:
        case OpKind::Square:
        case OpKind::Sqrt:
        case OpKind::Relu: {
            const Tensor& a = nodes_[n.a].value;
            n.value = Tensor(a.rows(), a.cols());
            for (size_t i = 0; i < a.size(); ++i) {
                double x = a.at(i), v = 0;
                switch (n.op) {
                    case OpKind::Neg: v = -x; break;
                    case OpKind::Abs: v = std::fabs(x); break;
                    case OpKind::Inv: v = 1.0 / (x + eps_); break;
                    case OpKind::Log: v = sign(x) * std::log(std::fabs(x) + eps_); break;
                    case OpKind::Exp: v = std::exp(x); break;
                    case OpKind::Tanh: v = std::tanh(x); break;
                    case OpKind::Square: v = x * x; break;
                    case OpKind::Sqrt: v = sign(x) * std::sqrt(std::fabs(x) + eps_); break;
                    case OpKind::Relu: v = x > 0 ? x : 0.0; break;
                    default: break;
                }
                n.value.at(i) = v;
            }
            break;
        }
        case OpKind::MatMul: {
            const Tensor& a = nodes_[n.a].value;
            const Tensor& b = nodes_[n.b].value;
            if (a.cols() != b.rows()) throw std::invalid_argument("CompGraph: matmul shape mismatch");
            n.value = Tensor(a.rows(), b.cols());
            for (int i = 0; i < a.rows(); ++i)
                for (int k = 0; k < a.cols(); ++k) {
                    double av = a(i, k);
                    if (av == 0.0) continue;
                    for (int j = 0; j < b.cols(); ++j) n.value(i, j) += av * b(k, j);
                }
            break;
        }
        case OpKind::SpMM: {
            const Tensor& d = nodes_[n.a].value;
            if (n.sp->cols != d.rows()) throw std::invalid_argument("CompGraph: spmm shape mismatch");
            n.value = Tensor(n.sp->rows, d.cols());
            for (const auto& e : n.sp->entries)
                for (int j = 0; j < d.cols(); ++j) n.value(e.row, j) += e.w * d(e.col, j);
            break;
        }
        case OpKind::Mean: {
            const Tensor& a = nodes_[n.a].value;
            if (a.size() == 0) throw std::invalid_argument("CompGraph: mean of empty tensor");
            double s = 0;
            for (double v : a.data()) s += v;
            n.value = Tensor::scalar(s / static_cast<double>(a.size()));
            break;
        }
        case OpKind::RowSoftmax: {
            const Tensor& a = nodes_[n.a].value;
            n.value = Tensor(a.rows(), a.cols());
            for (int i = 0; i < a.rows(); ++i) {
                double mx = a(i, 0);
                for (int j = 1; j < a.cols(); ++j) mx = std::max(mx, a(i, j));
                double s = 0;
                for (int j = 0; j < a.cols(); ++j) {
                    double e = std::exp(a(i, j) - mx);
                    n.value(i, j) = e;
                    s += e;
                }
                for (int j = 0; j < a.cols(); ++j) n.value(i, j) /= s;
            }
            break;
        }
        case OpKind::GatherRows: {
            const Tensor& a = nodes_[n.a].value;
            n.value = Tensor(static_cast<int>(n.rows_sel.size()), a.cols());
            for (size_t i = 0; i < n.rows_sel.size(); ++i)
                for (int j = 0; j < a.cols(); ++j)
                    n.value(static_cast<int>(i), j) = a(n.rows_sel[i], j);
            break;
        }
        case OpKind::SoftmaxXent: {
            const Tensor& z = nodes_[n.a].value;
            const auto& xs = n.xent;
            if (static_cast<int>(xs.labels.size()) != z.rows() ||
                static_cast<int>(xs.offsets.size()) != z.cols() ||
                static_cast<int>(xs.weights.size()) != z.cols())
                throw std::invalid_argument("CompGraph: xent spec mismatch");
            double total = 0;
            for (int i = 0; i < z.rows(); ++i) {
                double mx = z(i, 0) + xs.offsets[0];
                for (int j = 1; j < z.cols(); ++j) mx = std::max(mx, z(i, j) + xs.offsets[j]);
                double s = 0;
                for (int j = 0; j < z.cols(); ++j) s += std::exp(z(i, j) + xs.offsets[j] - mx);
                double lse = mx + std::log(s);
                int y = xs.labels[i];
                total += xs.weights[y] * (lse - (z(i, y) + xs.offsets[y]));
            }
            n.value = Tensor::scalar(total / static_cast<double>(z.rows()));
            break;
        }
    }
}

void CompGraph::forward() {
    for (auto& n : nodes_) eval_node(n);
}

const Tensor& CompGraph::grad(int id) {
    check_id(id);
    Node& n = nodes_[id];
    if (!n.grad_set) {
        n.grad = Tensor(n.value.rows(), n.value.cols());
        n.grad_set = true;
    }
    return n.grad;
}

void CompGraph::back_node(int id) {
    Node& n = nodes_[id];
    if (!n.grad_set) return;
    const Tensor& g = n.grad;
    auto accum = [&](int target, Tensor contrib) {
        Node& t = nodes_[target];
        if (!t.grad_set) {
            t.grad = std::move(contrib);
            t.grad_set = true;
        } else {
            for (size_t i = 0; i < t.grad.size(); ++i) t.grad.at(i) += contrib.at(i);
        }
    };
    switch (n.op) {
        case OpKind::Input:
        case OpKind::Const:
            break;
        case OpKind::Add: {
            accum(n.a, reduce_to(g, nodes_[n.a].value));
            accum(n.b, reduce_to(g, nodes_[n.b].value));
            break;
        }
        case OpKind::Mul: {
            const Tensor& a = nodes_[n.a].value;
            const Tensor& b = nodes_[n.b].value;
            Tensor ga(g.rows(), g.cols()), gb(g.rows(), g.cols());
            for (int i = 0; i < g.rows(); ++i)
                for (int j = 0; j < g.cols(); ++j) {
                    ga(i, j) = g(i, j) * bcast_get(b, i, j);
                    gb(i, j) = g(i, j) * bcast_get(a, i, j);
                }
            accum(n.a, reduce_to(ga, a));
            accum(n.b, reduce_to(gb, b));
            break;
        }
        case OpKind::Neg:
        case OpKind::Abs:
        case OpKind::Inv:
        case OpKind::Log:
        case OpKind::Exp:
        case OpKind::Tanh:
        case OpKind::Square:
        case OpKind::Sqrt:
        case OpKind::Relu: {
            const Tensor& a = nodes_[n.a].value;
            Tensor ga(a.rows(), a.cols());
            for (size_t i = 0; i < a.size(); ++i) {
                double x = a.at(i), d = 0;
                switch (n.op) {
                    case OpKind::Neg: d = -1.0; break;
                    case OpKind::Abs: d = sign(x); break;
                    case OpKind::Inv: {
                        double t = x + eps_;
                        d = -1.0 / (t * t);
                        break;
                    }
                    case OpKind::Log: d = 1.0 / (std::fabs(x) + eps_); break;
                    case OpKind::Exp: d = std::exp(x); break;
                    case OpKind::Tanh: {
                        double t = std::tanh(x);
                        d = 1.0 - t * t;
                        break;
                    }
                    case OpKind::Square: d = 2.0 * x; break;
                    case OpKind::Sqrt: d = 0.5 / std::sqrt(std::fabs(x) + eps_); break;
                    case OpKind::Relu: d = x > 0 ? 1.0 : 0.0; break;
                    default: break;
                }
                ga.at(i) = g.at(i) * d;
            }
            accum(n.a, std::move(ga));
            break;
        }
        case OpKind::MatMul: {
            const Tensor& a = nodes_[n.a].value;
            const Tensor& b = nodes_[n.b].value;
            Tensor ga(a.rows(), a.cols()), gb(b.rows(), b.cols());
            for (int i = 0; i < a.rows(); ++i)
                for (int j = 0; j < b.cols(); ++j) {
                    double gij = g(i, j);
                    if (gij == 0.0) continue;
                    for (int k = 0; k < a.cols(); ++k) {
                        ga(i, k) += gij * b(k, j);
                        gb(k, j) += gij * a(i, k);
                    }
                }
            accum(n.a, std::move(ga));
            accum(n.b, std::move(gb));
            break;
        }
        case OpKind::SpMM: {
            const Tensor& d = nodes_[n.a].value;
            Tensor ga(d.rows(), d.cols());
            for (const auto& e : n.sp->entries)
                for (int j = 0; j < d.cols(); ++j) ga(e.col, j) += e.w * g(e.row, j);
            accum(n.a, std::move(ga));
            break;
        }
        case OpKind::Mean: {
            const Tensor& a = nodes_[n.a].value;
            double scale = g.at(0) / static_cast<double>(a.size());
            Tensor ga(a.rows(), a.cols(), scale);
            accum(n.a, std::move(ga));
            break;
        }
        case OpKind::RowSoftmax: {
            const Tensor& p = n.value;
            Tensor ga(p.rows(), p.cols());
            for (int i = 0; i < p.rows(); ++i) {
                double dot = 0;
                for (int j = 0; j < p.cols(); ++j) dot += g(i, j) * p(i, j);
                for (int j = 0; j < p.cols(); ++j) ga(i, j) = p(i, j) * (g(i, j) - dot);
            }
            accum(n.a, std::move(ga));
            break;
        }
        case OpKind::GatherRows: {
            const Tensor& a = nodes_[n.a].value;
            Tensor ga(a.rows(), a.cols());
            for (size_t i = 0; i < n.rows_sel.size(); ++i)
                for (int j = 0; j < a.cols(); ++j)
                    ga(n.rows_sel[i], j) += g(static_cast<int>(i), j);
            accum(n.a, std::move(ga));
            break;
        }
        case OpKind::SoftmaxXent: {
            const Tensor& z = nodes_[n.a].value;
            const auto& xs = n.xent;
            double scale = g.at(0) / static_cast<double>(z.rows());
            Tensor ga(z.rows(), z.cols());
            for (int i = 0; i < z.rows(); ++i) {
                double mx = z(i, 0) + xs.offsets[0];
                for (int j = 1; j < z.cols(); ++j) mx = std::max(mx, z(i, j) + xs.offsets[j]);
                double s = 0;
                for (int j = 0; j < z.cols(); ++j) s += std::exp(z(i, j) + xs.offsets[j] - mx);
                int y = xs.labels[i];
                for (int j = 0; j < z.cols(); ++j) {
                    double p = std::exp(z(i, j) + xs.offsets[j] - mx) / s;
                    ga(i, j) = scale * xs.weights[y] * (p - (j == y ? 1.0 : 0.0));
                }
            }
            accum(n.a, std::move(ga));
            break;
        }
    }
}

void CompGraph::backward(int root) {
    check_id(root);
    if (nodes_[root].value.size() != 1)
        throw std::logic_error("CompGraph::backward: root is not scalar");
    for (auto& n : nodes_) {
        n.grad = Tensor();
        n.grad_set = false;
    }
    nodes_[root].grad = Tensor::scalar(1.0);
    nodes_[root].grad_set = true;
    for (int id = root; id >= 0; --id) back_node(id);
}

}  // namespace autolinc
