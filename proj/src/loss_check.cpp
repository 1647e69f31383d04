#include "autolinc/loss_check.hpp"

#include <cmath>

namespace autolinc {

const char* reject_reason_name(RejectReason r) {
    switch (r) {
        case RejectReason::MissingTerminal: return "missing-terminal";
        case RejectReason::NonFinite: return "non-finite";
        case RejectReason::ZeroGradient: return "zero-gradient";
        case RejectReason::Duplicate: return "duplicate";
        case RejectReason::Monotonicity: return "monotonicity";
        case RejectReason::PoorPerformance: return "poor-performance";
    }
    return "?";
}

namespace {

void collect_terminals(const ExprTree& t, bool& has_y, bool& has_yhat, bool& has_n) {
    if (t.rule == Rule::Y) has_y = true;
    if (t.rule == Rule::Yhat) has_yhat = true;
    if (t.rule == Rule::N) has_n = true;
    for (const auto& c : t.children) collect_terminals(c, has_y, has_yhat, has_n);
}

}  // namespace

CheckVerdict legality(const ExprTree& tree) {
    bool has_y = false, has_yhat = false, has_n = false;
    collect_terminals(tree, has_y, has_yhat, has_n);
    std::string missing;
    if (!has_yhat) missing = "yhat";
    else if (!has_y) missing = "y";
    else if (!has_n) missing = "N";
    if (!missing.empty())
        return CheckVerdict::reject(RejectReason::MissingTerminal, missing);
    return CheckVerdict::accept();
}

CheckVerdict basic_check(const ExprTree& tree, const Archive& archive, Fingerprint* fp_out,
                         double eps, uint64_t probe_seed) {
    for (const auto& in : probe_inputs(probe_seed)) {
        EvalResult v = eval_loss(tree, in, eps);
        if (!v.finite) return CheckVerdict::reject(RejectReason::NonFinite, "value");
    }
    Fingerprint fp = fingerprint(tree, probe_seed, eps);
    if (!fp.finite) return CheckVerdict::reject(RejectReason::NonFinite, "gradient");
    if (fp.all_zero) return CheckVerdict::reject(RejectReason::ZeroGradient);
    if (fp_out) *fp_out = fp;
    if (auto r = archive.lookup(canonical(tree), fp)) return CheckVerdict::cached(*r);
    return CheckVerdict::accept();
}

void TrainMonitor::record(int epoch, double train_loss, double train_bacc, double val_bacc) {
    samples_.push_back({epoch, train_loss, train_bacc, val_bacc});
    if (val_bacc > best_val_bacc_) best_val_bacc_ = val_bacc;
}

bool TrainMonitor::monotonicity_reject() const {
    if (!cfg_.monotonicity_enabled) return false;
    if (samples_.size() < static_cast<size_t>(cfg_.warmup_samples)) return false;
    double n = static_cast<double>(samples_.size());
    double mx = 0, my = 0;
    for (const auto& s : samples_) {
        mx += -s.train_loss;
        my += s.train_bacc;
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (const auto& s : samples_) {
        double dx = -s.train_loss - mx, dy = s.train_bacc - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0 || syy == 0) return false;
    double corr = sxy / std::sqrt(sxx * syy);
    return corr < cfg_.mono_threshold;
}

bool TrainMonitor::poor_performance_reject(std::optional<double> tenth_best) const {
    if (!cfg_.poor_performance_enabled || !tenth_best) return false;
    return best_val_bacc_ < cfg_.beta * *tenth_best;
}

}  // namespace autolinc
