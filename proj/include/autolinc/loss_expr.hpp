#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "autolinc/grammar.hpp"
#include "autolinc/graph.hpp"
#include "autolinc/tensor.hpp"

namespace autolinc {

// One evaluation batch for a loss expression: softmax probabilities (or
// raw logits), one-hot labels, and the per-class training counts
// broadcast to the same shape (row-constant columns).
struct LossInputs {
    Tensor yhat;
    Tensor y;
    Tensor nmat;
};

struct EvalResult {
    double value = 0;
    bool finite = true;
};

struct GradResult {
    Tensor grad;
    bool finite = true;
    bool all_zero = false;
};

// Hash of the quantized d(loss)/d(yhat) on a fixed probe set; two
// expressions with equal gradients collide by construction.
struct Fingerprint {
    uint64_t hash = 0;
    bool all_zero = false;
    bool finite = true;

    bool operator==(const Fingerprint& o) const = default;
};

// Appends the tree's ops to `g`, mapping terminals to the given node
// ids. Returns the id of the tree's root value (pre-Mean).
int build_loss_graph(CompGraph& g, const ExprTree& tree, int yhat_id, int y_id, int n_id);

// Mean over all entries of the element-wise tree value; eps applies to
// Inv/Log/Sqrt.
EvalResult eval_loss(const ExprTree& tree, const LossInputs& in, double eps = 1e-6);

GradResult grad_yhat(const ExprTree& tree, const LossInputs& in, double eps = 1e-6);

// Serialization with commutative (add/mul) argument lists sorted by
// canonical subtree text; idempotent.
std::string canonical(const ExprTree& tree);

// The fixed probe batches used by fingerprinting and the basic check:
// 4 batches at C=8, K=4 with seeded yhat simplex rows, random one-hot
// labels, and integer class counts in [1,20].
std::vector<LossInputs> probe_inputs(uint64_t seed = 0);

Fingerprint fingerprint(const ExprTree& tree, uint64_t probe_seed = 0, double eps = 1e-6);

}  // namespace autolinc
