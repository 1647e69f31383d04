#pragma once

#include <optional>
#include <string>
#include <vector>

#include "autolinc/archive.hpp"
#include "autolinc/graph_data.hpp"
#include "autolinc/grammar.hpp"
#include "autolinc/loss_check.hpp"
#include "autolinc/loss_zoo.hpp"
#include "autolinc/tensor.hpp"

namespace autolinc {

struct GcnModel {
    Tensor w0, b0, w1, b1;  // d x h, 1 x h, h x K, 1 x K
};

struct TrainConfig {
    int epochs = 100;
    double lr = 0.1;
    int lr_patience = 100;       // epochs of no val-loss improvement before halving
    double weight_decay = 5e-4;  // applied to w0/b0 only
    int hidden = 64;
    bool full_mode = false;  // model selection by (val bAcc + val macroF1)/2
    bool raw_logits = false; // feed logits to loss trees without softmax
    uint64_t seed = 0;
    double eps = 1e-6;
};

struct Metrics {
    double bacc = 0;
    double macro_f1 = 0;
    std::vector<double> recall;
};

struct EpochStats {
    double train_loss = 0, train_bacc = 0, val_bacc = 0, val_loss = 0;
};

// What to train with: an expression tree or a native baseline.
struct LossSpec {
    bool is_tree = false;
    ExprTree tree;
    NativeLoss native = NativeLoss::CE;

    static LossSpec from_tree(ExprTree t) { return {true, std::move(t), NativeLoss::CE}; }
    static LossSpec from_native(NativeLoss n) { return {false, {}, n}; }
    static LossSpec from_preset(const Preset& p);
    // PC softmax trains as CE and adjusts logits at evaluation time.
    bool pc_adjust() const { return !is_tree && native == NativeLoss::PCSoftmax; }
};

struct TrainResult {
    GcnModel model;
    std::vector<EpochStats> history;
    double reward = 0;  // best val bAcc observed (partial if early-rejected)
    bool rejected = false;
    RejectReason reason = RejectReason::NonFinite;
};

// Full-batch training of the 2-layer GCN with Adam, lr plateau halving
// and optional early-rejection monitoring against the archive's top-10.
TrainResult train(const Dataset& data, const LossSpec& loss, const TrainConfig& cfg,
                  TrainMonitor* monitor = nullptr, const Archive* archive = nullptr);

Tensor compute_logits(const GcnModel& model, const Dataset& data);

Metrics metrics_from_predictions(const std::vector<int>& pred, const std::vector<int>& truth,
                                 int num_classes);

// split is "train", "val" or "test".
Metrics evaluate(const GcnModel& model, const Dataset& data, const std::string& split,
                 bool pc_adjust = false);

}  // namespace autolinc
