#include "autolinc/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "autolinc/adam.hpp"
#include "autolinc/loss_expr.hpp"
#include "autolinc/rng.hpp"

namespace autolinc {

namespace {

Tensor glorot(int rows, int cols, std::mt19937_64& rng) {
    double limit = std::sqrt(6.0 / (rows + cols));
    Tensor t(rows, cols);
    for (size_t i = 0; i < t.size(); ++i)
        t.at(i) = limit * (2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0);
    return t;
}

Tensor one_hot(const Dataset& d, const std::vector<int>& ids) {
    Tensor y(static_cast<int>(ids.size()), d.num_classes);
    for (size_t i = 0; i < ids.size(); ++i) y(static_cast<int>(i), d.labels[ids[i]]) = 1.0;
    return y;
}

Tensor count_matrix(const Dataset& d, int rows) {
    Tensor n(rows, d.num_classes);
    for (int i = 0; i < rows; ++i)
        for (int k = 0; k < d.num_classes; ++k)
            n(i, k) = static_cast<double>(d.train_class_counts[k]);
    return n;
}

XentSpec make_xent(const Dataset& d, const std::vector<int>& ids, NativeLoss kind) {
    XentSpec xs;
    for (int id : ids) xs.labels.push_back(d.labels[id]);
    int K = d.num_classes;
    xs.offsets.assign(K, 0.0);
    xs.weights.assign(K, 1.0);
    if (kind == NativeLoss::ReWeight) {
        double inv_sum = 0;
        for (int k = 0; k < K; ++k) inv_sum += 1.0 / d.train_class_counts[k];
        for (int k = 0; k < K; ++k)
            xs.weights[k] = (1.0 / d.train_class_counts[k]) * K / inv_sum;
    } else if (kind == NativeLoss::BalancedSoftmax) {
        for (int k = 0; k < K; ++k) xs.offsets[k] = std::log(static_cast<double>(d.train_class_counts[k]));
    }
    return xs;
}

std::vector<int> argmax_rows(const Tensor& logits, const std::vector<int>& ids,
                             const std::vector<double>& adjust) {
    std::vector<int> pred(ids.size());
    for (size_t i = 0; i < ids.size(); ++i) {
        int best = 0;
        double bv = logits(ids[i], 0) - adjust[0];
        for (int k = 1; k < logits.cols(); ++k) {
            double v = logits(ids[i], k) - adjust[k];
            if (v > bv) {
                bv = v;
                best = k;
            }
        }
        pred[i] = best;
    }
    return pred;
}

std::vector<double> pc_adjustment(const Dataset& d, bool enabled) {
    std::vector<double> adj(d.num_classes, 0.0);
    if (!enabled) return adj;
    double total = 0;
    for (int c : d.train_class_counts) total += c;
    for (int k = 0; k < d.num_classes; ++k)
        adj[k] = std::log(d.train_class_counts[k] / total);
    return adj;
}

double bacc_of(const Tensor& logits, const Dataset& d, const std::vector<int>& ids) {
    auto pred = argmax_rows(logits, ids, std::vector<double>(d.num_classes, 0.0));
    std::vector<int> truth(ids.size());
    for (size_t i = 0; i < ids.size(); ++i) truth[i] = d.labels[ids[i]];
    return metrics_from_predictions(pred, truth, d.num_classes).bacc;
}

}  // namespace

LossSpec LossSpec::from_preset(const Preset& p) {
    if (p.is_native) return from_native(p.native);
    return from_tree(parse(p.expression));
}

Metrics metrics_from_predictions(const std::vector<int>& pred, const std::vector<int>& truth,
                                 int num_classes) {
    std::vector<int> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0), support(num_classes, 0);
    for (size_t i = 0; i < pred.size(); ++i) {
        ++support[truth[i]];
        if (pred[i] == truth[i])
            ++tp[pred[i]];
        else {
            ++fp[pred[i]];
            ++fn[truth[i]];
        }
    }
    Metrics m;
    int present = 0;
    for (int k = 0; k < num_classes; ++k) {
        double rec = support[k] > 0 ? static_cast<double>(tp[k]) / support[k] : 0.0;
        m.recall.push_back(rec);
        if (support[k] > 0) {
            m.bacc += rec;
            ++present;
        }
        double denom = 2.0 * tp[k] + fp[k] + fn[k];
        m.macro_f1 += denom > 0 ? 2.0 * tp[k] / denom : 0.0;  // empty class -> F1 = 0
    }
    if (present > 0) m.bacc /= present;
    m.macro_f1 /= num_classes;
    return m;
}

Tensor compute_logits(const GcnModel& model, const Dataset& data) {
    SparseMat adj = norm_adj(data);
    CompGraph g;
    int x = g.constant(data.features);
    int h1 = g.relu(g.add(g.spmm(&adj, g.matmul(x, g.constant(model.w0))), g.constant(model.b0)));
    int logits = g.add(g.spmm(&adj, g.matmul(h1, g.constant(model.w1))), g.constant(model.b1));
    g.forward();
    return g.value(logits);
}

Metrics evaluate(const GcnModel& model, const Dataset& data, const std::string& split,
                 bool pc_adjust) {
    const std::vector<int>* ids;
    if (split == "train")
        ids = &data.train;
    else if (split == "val")
        ids = &data.val;
    else if (split == "test")
        ids = &data.test;
    else
        throw std::invalid_argument("evaluate: split must be train/val/test");
    Tensor logits = compute_logits(model, data);
    auto pred = argmax_rows(logits, *ids, pc_adjustment(data, pc_adjust));
    std::vector<int> truth(ids->size());
    for (size_t i = 0; i < ids->size(); ++i) truth[i] = data.labels[(*ids)[i]];
    return metrics_from_predictions(pred, truth, data.num_classes);
}

TrainResult train(const Dataset& data, const LossSpec& loss, const TrainConfig& cfg,
                  TrainMonitor* monitor, const Archive* archive) {
    if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    data.validate();

    auto rng = make_rng(cfg.seed, "gcn-init");
    GcnModel model{glorot(data.num_features, cfg.hidden, rng), Tensor(1, cfg.hidden),
                   glorot(cfg.hidden, data.num_classes, rng), Tensor(1, data.num_classes)};

    SparseMat adj = norm_adj(data);
    CompGraph g(cfg.eps);
    int w0 = g.input("w0"), b0 = g.input("b0"), w1 = g.input("w1"), b1 = g.input("b1");
    int x = g.constant(data.features);
    int h1 = g.relu(g.add(g.spmm(&adj, g.matmul(x, w0)), b0));
    int logits = g.add(g.spmm(&adj, g.matmul(h1, w1)), b1);
    int train_logits = g.gather_rows(logits, data.train);
    int val_logits = g.gather_rows(logits, data.val);

    int train_loss_id, val_loss_id;
    if (loss.is_tree) {
        int train_in = cfg.raw_logits ? train_logits : g.row_softmax(train_logits);
        int val_in = cfg.raw_logits ? val_logits : g.row_softmax(val_logits);
        int y_tr = g.constant(one_hot(data, data.train));
        int y_va = g.constant(one_hot(data, data.val));
        int n_tr = g.constant(count_matrix(data, static_cast<int>(data.train.size())));
        int n_va = g.constant(count_matrix(data, static_cast<int>(data.val.size())));
        train_loss_id = g.mean(build_loss_graph(g, loss.tree, train_in, y_tr, n_tr));
        val_loss_id = g.mean(build_loss_graph(g, loss.tree, val_in, y_va, n_va));
    } else {
        NativeLoss kind = loss.native == NativeLoss::PCSoftmax ? NativeLoss::CE : loss.native;
        train_loss_id = g.softmax_xent(train_logits, make_xent(data, data.train, kind));
        val_loss_id = g.softmax_xent(val_logits, make_xent(data, data.val, kind));
    }

    AdamState adam(cfg.lr);
    std::vector<double> decay{cfg.weight_decay, cfg.weight_decay, 0.0, 0.0};  // w1/b1 exempt

    TrainResult res;
    double best_val_loss = std::numeric_limits<double>::infinity();
    int patience = 0;
    double best_select = -1;
    GcnModel best_model = model;
    int probe_interval = monitor ? monitor->config().probe_interval : 0;
    std::vector<int> checkpoints;
    if (monitor)
        for (double f : monitor->config().checkpoint_fracs)
            checkpoints.push_back(std::max(1, static_cast<int>(f * cfg.epochs)));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        g.bind("w0", model.w0);
        g.bind("b0", model.b0);
        g.bind("w1", model.w1);
        g.bind("b1", model.b1);
        g.forward();

        EpochStats st;
        st.train_loss = g.value(train_loss_id).item();
        st.val_loss = g.value(val_loss_id).item();
        const Tensor& lg = g.value(logits);
        st.train_bacc = bacc_of(lg, data, data.train);
        st.val_bacc = bacc_of(lg, data, data.val);

        if (!std::isfinite(st.train_loss)) {
            res.rejected = true;
            res.reason = RejectReason::NonFinite;
            res.reward = 0;
            res.history.push_back(st);
            return res;
        }

        g.backward(train_loss_id);
        bool ok = adam.step({&model.w0, &model.b0, &model.w1, &model.b1},
                            {&g.grad(w0), &g.grad(b0), &g.grad(w1), &g.grad(b1)}, decay);
        if (!ok) {
            res.rejected = true;
            res.reason = RejectReason::NonFinite;
            res.reward = 0;
            res.history.push_back(st);
            return res;
        }

        res.history.push_back(st);
        res.reward = std::max(res.reward, st.val_bacc);

        if (cfg.full_mode) {
            Metrics vm = [&] {
                auto pred = argmax_rows(lg, data.val, pc_adjustment(data, loss.pc_adjust()));
                std::vector<int> truth(data.val.size());
                for (size_t i = 0; i < data.val.size(); ++i) truth[i] = data.labels[data.val[i]];
                return metrics_from_predictions(pred, truth, data.num_classes);
            }();
            double sel = (vm.bacc + vm.macro_f1) / 2;
            if (sel > best_select) {
                best_select = sel;
                best_model = model;
            }
        }

        if (std::isfinite(st.val_loss) && st.val_loss < best_val_loss) {
            best_val_loss = st.val_loss;
            patience = 0;
        } else if (++patience >= cfg.lr_patience) {
            adam.set_lr(adam.lr() / 2);
            patience = 0;
        }

        if (monitor) {
            if (probe_interval > 0 && (epoch + 1) % probe_interval == 0) {
                monitor->record(epoch, st.train_loss, st.train_bacc, st.val_bacc);
                if (monitor->monotonicity_reject()) {
                    res.rejected = true;
                    res.reason = RejectReason::Monotonicity;
                    return res;
                }
            }
            if (std::find(checkpoints.begin(), checkpoints.end(), epoch + 1) != checkpoints.end()) {
                std::optional<double> tenth;
                if (archive && archive->finished_count() >= 10) tenth = archive->kth_best(10);
                if (monitor->poor_performance_reject(tenth)) {
                    res.rejected = true;
                    res.reason = RejectReason::PoorPerformance;
                    return res;
                }
            }
        }
    }

    res.model = cfg.full_mode ? best_model : model;
    return res;
}

}  // namespace autolinc
