#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "autolinc/tensor.hpp"

namespace autolinc {

// Sparse matrix in coordinate form. Used for the normalized adjacency;
// it is a constant in the computation graph (no gradient flows into it).
struct SparseMat {
    struct Entry {
        int row, col;
        double w;
    };
    int rows = 0, cols = 0;
    std::vector<Entry> entries;
};

enum class OpKind {
    Input,
    Const,
    Add,
    Mul,
    Neg,
    Abs,
    Inv,      // 1/(x+eps)
    Log,      // sign(x)*log(|x|+eps)
    Exp,
    Tanh,
    Square,
    Sqrt,     // sign(x)*sqrt(|x|+eps)
    Relu,
    MatMul,
    SpMM,     // constant sparse matrix times dense input
    Mean,     // mean over all entries -> 1x1
    RowSoftmax,
    GatherRows,
    SoftmaxXent,  // per-row cross entropy on offset logits, weighted mean
};

// Class-weighted cross entropy over logits with per-class additive
// offsets; covers CE (zero offsets, unit weights), re-weight
// (class weights) and balanced softmax (offsets = log N_k).
struct XentSpec {
    std::vector<int> labels;       // one label per input row
    std::vector<double> offsets;   // length K
    std::vector<double> weights;   // length K
};

// Reverse-mode autodiff tape over dense tensors. Nodes are appended in
// topological order by construction; forward() recomputes everything
// from the currently bound inputs, backward() accumulates gradients
// from a scalar root. One graph instance is single-threaded; distinct
// graphs are independent.
class CompGraph {
public:
    explicit CompGraph(double eps = 1e-6) : eps_(eps) {}

    int input(const std::string& name);
    int constant(Tensor value);
    int scalar(double v) { return constant(Tensor::scalar(v)); }

    int add(int a, int b) { return binary(OpKind::Add, a, b); }
    int mul(int a, int b) { return binary(OpKind::Mul, a, b); }
    int neg(int a) { return unary(OpKind::Neg, a); }
    int abs(int a) { return unary(OpKind::Abs, a); }
    int inv(int a) { return unary(OpKind::Inv, a); }
    int log(int a) { return unary(OpKind::Log, a); }
    int exp(int a) { return unary(OpKind::Exp, a); }
    int tanh(int a) { return unary(OpKind::Tanh, a); }
    int square(int a) { return unary(OpKind::Square, a); }
    int sqrt(int a) { return unary(OpKind::Sqrt, a); }
    int relu(int a) { return unary(OpKind::Relu, a); }
    int matmul(int a, int b);
    int spmm(const SparseMat* m, int dense);
    int mean(int a) { return unary(OpKind::Mean, a); }
    int row_softmax(int a) { return unary(OpKind::RowSoftmax, a); }
    int gather_rows(int a, std::vector<int> rows);
    int softmax_xent(int logits, XentSpec spec);

    void bind(const std::string& name, Tensor value);

    // Recomputes every node from bound inputs. Shape errors throw;
    // non-finite values propagate as values.
    void forward();
    // dRoot/dNode for every node reachable from root; root must be 1x1.
    void backward(int root);

    const Tensor& value(int id) const { return nodes_[id].value; }
    // Zero tensor of the node's shape when the node was not reached.
    const Tensor& grad(int id);

    size_t num_nodes() const { return nodes_.size(); }
    double eps() const { return eps_; }

private:
    struct Node {
        OpKind op;
        int a = -1, b = -1;
        std::string name;            // Input only
        const SparseMat* sp = nullptr;
        std::vector<int> rows_sel;   // GatherRows only
        XentSpec xent;               // SoftmaxXent only
        Tensor value;
        Tensor grad;
        bool grad_set = false;
        bool value_set = false;      // Input binding / Const
    };

    int unary(OpKind op, int a);
    int binary(OpKind op, int a, int b);
    int push(Node n);
    void check_id(int id) const;
    void eval_node(Node& n);
    void back_node(int id);

    std::vector<Node> nodes_;
    std::unordered_map<std::string, int> inputs_;
    double eps_;
};

}  // namespace autolinc
