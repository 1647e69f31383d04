#pragma once

#include <optional>
#include <string>
#include <vector>

#include "autolinc/archive.hpp"
#include "autolinc/grammar.hpp"
#include "autolinc/loss_expr.hpp"

namespace autolinc {

enum class RejectReason {
    MissingTerminal,
    NonFinite,
    ZeroGradient,
    Duplicate,
    Monotonicity,
    PoorPerformance,
};

const char* reject_reason_name(RejectReason r);

struct CheckVerdict {
    enum class Kind { Accept, Reject, Cached };
    Kind kind = Kind::Accept;
    RejectReason reason = RejectReason::MissingTerminal;
    double cached_reward = 0;
    std::string detail;

    static CheckVerdict accept() { return {}; }
    static CheckVerdict reject(RejectReason r, std::string d = {}) {
        return {Kind::Reject, r, 0, std::move(d)};
    }
    static CheckVerdict cached(double reward) { return {Kind::Cached, RejectReason::Duplicate, reward, {}}; }
};

// Accept iff yhat, y and N all appear somewhere in the tree.
CheckVerdict legality(const ExprTree& tree);

// NaN/Inf probing, zero-gradient detection and reward caching against
// the archive. On accept, the fingerprint is handed back so the caller
// can register it with the final record.
CheckVerdict basic_check(const ExprTree& tree, const Archive& archive, Fingerprint* fp_out,
                         double eps = 1e-6, uint64_t probe_seed = 0);

struct MonitorConfig {
    int probe_interval = 5;     // epochs between samples
    int warmup_samples = 5;     // minimum samples before monotonicity fires
    double mono_threshold = 0;  // reject when correlation < threshold
    double beta = 0.6;          // poor-performance factor
    std::vector<double> checkpoint_fracs{0.25, 0.5, 0.75};
    bool monotonicity_enabled = true;
    bool poor_performance_enabled = true;
};

// Per-training-run early-rejection monitor. The trainer feeds it probe
// samples; it answers whether the run should stop.
class TrainMonitor {
public:
    explicit TrainMonitor(MonitorConfig cfg = {}) : cfg_(std::move(cfg)) {}

    const MonitorConfig& config() const { return cfg_; }

    void record(int epoch, double train_loss, double train_bacc, double val_bacc);

    // Pearson correlation between -train_loss and train_bacc; reject iff
    // it drops below the threshold once warmed up. Zero-variance series
    // carry no evidence and continue.
    bool monotonicity_reject() const;

    // Reject iff best val bAcc so far < beta * (10th-best archive reward).
    // Inactive while the archive holds fewer than 10 finished rewards.
    bool poor_performance_reject(std::optional<double> tenth_best) const;

    double best_val_bacc() const { return best_val_bacc_; }
    size_t sample_count() const { return samples_.size(); }

private:
    struct Sample {
        int epoch;
        double train_loss, train_bacc, val_bacc;
    };
    MonitorConfig cfg_;
    std::vector<Sample> samples_;
    double best_val_bacc_ = 0;
};

}  // namespace autolinc
