#include "autolinc/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

#include "autolinc/loss_expr.hpp"
#include "autolinc/rng.hpp"

namespace autolinc {

double uct_score(double q, int state_visits, int action_visits, double c) {
    if (action_visits == 0) return std::numeric_limits<double>::infinity();
    return q + c * std::sqrt(std::log(static_cast<double>(state_visits)) / action_visits);
}

namespace {

using Clock = std::chrono::steady_clock;

struct TreeNode {
    int visits = 1;  // root-style initialization; W(s)
    std::vector<Rule> untried;
    struct Edge {
        int count = 0;   // W(s,a)
        double q = 0;    // max reward seen through (s,a)
        std::unique_ptr<TreeNode> child;
    };
    std::map<Rule, Edge> edges;
    bool expanded_init = false;
};

class Engine {
public:
    Engine(const Dataset& data, const SearchConfig& cfg, Archive& archive, SearchStats& stats)
        : data_(data), cfg_(cfg), archive_(archive), stats_(stats), start_(Clock::now()) {
        if (cfg_.toy_target) {
            for (const auto& in : probe_inputs()) {
                target_grads_.push_back(grad_yhat(*cfg_.toy_target, in, cfg_.proxy.eps).grad);
            }
        }
    }

    bool over_budget() const {
        if (cfg_.time_budget_sec <= 0) return false;
        return std::chrono::duration<double>(Clock::now() - start_) .count() > cfg_.time_budget_sec;
    }

    long elapsed_ms() const {
        return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start_).count();
    }

    // Reward used for MCTS backpropagation. Rejected candidates give 0;
    // early-rejected runs are archived with their partial best val bAcc.
    double evaluate_candidate(const std::vector<Rule>& actions, int episode, int trial) {
        ExprTree tree = build_tree(actions);
        if (legality(tree).kind != CheckVerdict::Kind::Accept) {
            ++stats_.rejections;
            return 0;  // not archived: never undergoes evaluation
        }
        std::string canon = canonical(tree);
        Fingerprint fp;
        if (cfg_.basic_check_enabled) {
            CheckVerdict v = basic_check(tree, archive_, &fp, cfg_.proxy.eps);
            if (v.kind == CheckVerdict::Kind::Cached) {
                ++stats_.cache_hits;
                return v.cached_reward;
            }
            if (v.kind == CheckVerdict::Kind::Reject) {
                ++stats_.rejections;
                archive_.insert({serialize(tree), canon, 0.0,
                                 std::string("rejected(") + reject_reason_name(v.reason) + ")",
                                 episode, trial, elapsed_ms()},
                                std::nullopt);
                return 0;
            }
        } else if (archive_.contains(canon)) {
            // Even with the basic check disabled the archive cannot hold
            // two records for one canonical text; retrain and rewrite.
            ++stats_.cache_hits;
        }

        double reward;
        std::string status;
        bool rejected_early = false;
        if (cfg_.toy_target) {
            reward = toy_reward(tree);
            status = "finished";
            ++stats_.proxy_trainings;
        } else {
            MonitorConfig mc = cfg_.monitor;
            mc.monotonicity_enabled = mc.monotonicity_enabled && cfg_.early_rejection_enabled;
            mc.poor_performance_enabled =
                mc.poor_performance_enabled && cfg_.early_rejection_enabled;
            TrainMonitor monitor(mc);
            TrainConfig tc = cfg_.proxy;
            tc.seed = derive_seed(cfg_.seed, "proxy-train", archive_.size());
            TrainResult tr = train(data_, LossSpec::from_tree(tree), tc, &monitor, &archive_);
            if (tr.rejected) {
                ++stats_.rejections;
                rejected_early = true;
                reward = tr.reward;  // partial best val bAcc (0 for non-finite)
                status = std::string("rejected(") + reject_reason_name(tr.reason) + ")";
            } else {
                ++stats_.proxy_trainings;
                reward = tr.reward;
                status = "finished";
            }
        }
        archive_.insert({serialize(tree), canon, reward, status, episode, trial, elapsed_ms()},
                        cfg_.basic_check_enabled ? std::optional<Fingerprint>(fp) : std::nullopt);
        return rejected_early ? 0 : reward;
    }

    void run_trial(int trial) {
        TreeNode root;
        for (int ep = 0; ep < cfg_.episodes && !over_budget(); ++ep) {
            run_episode(root, ep, trial);
            ++stats_.episodes_run;
            if (!cfg_.archive_path.empty() && (ep + 1) % 200 == 0)
                archive_.save_jsonl(cfg_.archive_path);
        }
        if (!cfg_.archive_path.empty()) archive_.save_jsonl(cfg_.archive_path);
    }

private:
    double toy_reward(const ExprTree& tree) {
        double acc = 0;
        size_t n = 0;
        auto probes = probe_inputs();
        for (size_t p = 0; p < probes.size(); ++p) {
            GradResult g = grad_yhat(tree, probes[p], cfg_.proxy.eps);
            for (size_t i = 0; i < g.grad.size(); ++i) {
                double diff = g.grad.at(i) - target_grads_[p].at(i);
                acc += std::isfinite(diff) ? std::fabs(diff) : 1e6;
                ++n;
            }
        }
        return 1.0 / (1.0 + acc / static_cast<double>(n));
    }

    void ensure_init(TreeNode& node, const SearchState& st, std::mt19937_64& rng) {
        if (node.expanded_init) return;
        node.untried = available_actions(st);
        std::shuffle(node.untried.begin(), node.untried.end(), rng);
        node.expanded_init = true;
    }

    void run_episode(TreeNode& root, int episode, int trial) {
        auto rng = make_rng(cfg_.seed, "episode", (static_cast<uint64_t>(trial) << 32) | episode);
        SearchState st;
        st.t_max = cfg_.t_max;
        TreeNode* node = &root;
        std::vector<std::pair<TreeNode*, Rule>> path;

        // Selection
        ensure_init(*node, st, rng);
        while (!st.terminal() && node->untried.empty() && !node->edges.empty()) {
            double best = -std::numeric_limits<double>::infinity();
            std::vector<Rule> best_actions;
            for (const auto& [a, e] : node->edges) {
                double s = uct_score(e.q, node->visits, e.count, cfg_.c);
                if (s > best + 1e-12) {
                    best = s;
                    best_actions = {a};
                } else if (s > best - 1e-12) {
                    best_actions.push_back(a);
                }
            }
            Rule a = best_actions[rng() % best_actions.size()];
            path.emplace_back(node, a);
            st = apply_action(st, a);
            node = node->edges[a].child.get();
            if (!st.terminal()) ensure_init(*node, st, rng);
        }

        double reward;
        if (st.terminal()) {
            // re-descended into an already-evaluated terminal; the checks
            // resolve it from the cache
            reward = evaluate_candidate(st.actions, episode, trial);
        } else {
            // Expansion
            Rule a = node->untried.back();
            node->untried.pop_back();
            auto& edge = node->edges[a];
            edge.child = std::make_unique<TreeNode>();
            path.emplace_back(node, a);
            st = apply_action(st, a);

            if (st.terminal()) {
                reward = evaluate_candidate(st.actions, episode, trial);
            } else {
                // Simulation: B random rollouts from the frozen state
                reward = 0;
                for (int b = 0; b < cfg_.sims && !over_budget(); ++b) {
                    SearchState roll = st;
                    while (!roll.terminal() && roll.t() < roll.t_max) {
                        auto acts = available_actions(roll);
                        if (acts.empty()) break;
                        roll = apply_action(roll, acts[rng() % acts.size()]);
                    }
                    if (!roll.terminal()) continue;  // dead-ended rollout: no evaluation
                    reward = std::max(reward, evaluate_candidate(roll.actions, episode, trial));
                }
            }
        }

        // Backpropagation: visit counts and max-reward Q along the path
        for (auto& [n, a] : path) {
            n->visits += 1;
            auto& e = n->edges[a];
            e.count += 1;
            e.q = std::max(e.q, reward);
        }
    }

    const Dataset& data_;
    const SearchConfig& cfg_;
    Archive& archive_;
    SearchStats& stats_;
    Clock::time_point start_;
    std::vector<Tensor> target_grads_;
};

}  // namespace

SearchResult run_search(const Dataset& data, const SearchConfig& cfg) {
    SearchResult res;
    Engine engine(data, cfg, res.archive, res.stats);
    for (int trial = 0; trial < cfg.trials; ++trial) engine.run_trial(trial);
    return res;
}

FinalReport finalize(const Archive& archive, const Dataset& data, const SearchConfig& cfg) {
    auto top = archive.top(10);
    if (top.empty()) throw std::runtime_error("finalize: archive has no finished records");
    FinalReport report;
    double best_val = -1;
    for (size_t i = 0; i < top.size(); ++i) {
        LossSpec spec = LossSpec::from_tree(parse(top[i].expr));
        TrainConfig tc = cfg.full;
        tc.full_mode = true;
        tc.seed = derive_seed(cfg.seed, "full-train", i);
        TrainResult tr = train(data, spec, tc);
        FinalEntry entry;
        entry.record = top[i];
        entry.val = evaluate(tr.model, data, "val");
        entry.test = evaluate(tr.model, data, "test");
        if (entry.val.bacc > best_val) {
            best_val = entry.val.bacc;
            report.best_expr = top[i].expr;
            report.best_index = static_cast<int>(i);
        }
        report.top.push_back(std::move(entry));
    }
    return report;
}

}  // namespace autolinc
