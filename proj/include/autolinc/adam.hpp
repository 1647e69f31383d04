#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "autolinc/tensor.hpp"

namespace autolinc {

// Bias-corrected Adam over a fixed list of parameter tensors.
// Weight decay is decoupled (multiplicative shrink, independent of lr)
// and controlled per-parameter via the decay mask.
class AdamState {
public:
    AdamState(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        if (lr < 0) throw std::invalid_argument("AdamState: negative lr");
    }

    double lr() const { return lr_; }
    void set_lr(double lr) { lr_ = lr; }
    long step_count() const { return step_; }

    // Returns false if any gradient entry is non-finite; parameters are
    // left untouched in that case so the caller can classify the run.
    bool step(std::vector<Tensor*> params, const std::vector<const Tensor*>& grads,
              const std::vector<double>& decay = {}) {
        if (params.size() != grads.size())
            throw std::invalid_argument("AdamState::step: size mismatch");
        for (const Tensor* g : grads)
            if (!g->all_finite()) return false;
        if (m_.empty()) {
            for (Tensor* p : params) {
                m_.emplace_back(p->rows(), p->cols());
                v_.emplace_back(p->rows(), p->cols());
            }
        }
        ++step_;
        double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
        double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
        for (size_t k = 0; k < params.size(); ++k) {
            Tensor& p = *params[k];
            const Tensor& g = *grads[k];
            if (!p.same_shape(m_[k]) || !p.same_shape(g))
                throw std::invalid_argument("AdamState::step: shape mismatch");
            double wd = k < decay.size() ? decay[k] : 0.0;
            for (size_t i = 0; i < p.size(); ++i) {
                double gi = g.at(i);
                m_[k].at(i) = beta1_ * m_[k].at(i) + (1 - beta1_) * gi;
                v_[k].at(i) = beta2_ * v_[k].at(i) + (1 - beta2_) * gi * gi;
                double mhat = m_[k].at(i) / bc1;
                double vhat = v_[k].at(i) / bc2;
                p.at(i) -= lr_ * mhat / (std::sqrt(vhat) + eps_);
                if (wd > 0) p.at(i) *= (1.0 - wd);
            }
        }
        return true;
    }

private:
    double lr_, beta1_, beta2_, eps_;
    long step_ = 0;
    std::vector<Tensor> m_, v_;
};

}  // namespace autolinc
