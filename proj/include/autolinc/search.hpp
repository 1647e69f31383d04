#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "autolinc/archive.hpp"
#include "autolinc/graph_data.hpp"
#include "autolinc/loss_check.hpp"
#include "autolinc/trainer.hpp"

namespace autolinc {

struct SearchConfig {
    int trials = 1;
    int episodes = 2000;
    int sims = 10;          // rollouts per simulation phase
    double c = 1.4142135623730951;
    int t_max = 10;
    uint64_t seed = 0;
    TrainConfig proxy;      // proxy-task training
    TrainConfig full;       // complete-task training (finalization)
    MonitorConfig monitor;
    bool basic_check_enabled = true;
    bool early_rejection_enabled = true;
    double time_budget_sec = 0;  // stop early when > 0 and exceeded
    // Toy oracle: reward = 1/(1 + mean |grad - grad(target)|) on the
    // fixed probes, bypassing GNN training. Test harness only.
    std::optional<ExprTree> toy_target;
    std::string archive_path;  // persisted incrementally when non-empty
};

// UCT selection score; unvisited actions score +infinity.
double uct_score(double q, int state_visits, int action_visits, double c);

struct SearchStats {
    int episodes_run = 0;
    int proxy_trainings = 0;  // completed (not early-rejected) trainings
    int cache_hits = 0;
    int rejections = 0;
};

struct SearchResult {
    Archive archive;
    SearchStats stats;
};

SearchResult run_search(const Dataset& data, const SearchConfig& cfg);

struct FinalEntry {
    ArchiveRecord record;
    Metrics val, test;
};

struct FinalReport {
    std::vector<FinalEntry> top;
    std::string best_expr;
    int best_index = -1;
};

// Full-task retraining of the archive's top-10 and selection of the
// best by validation bAcc. Never reads test labels before this stage.
FinalReport finalize(const Archive& archive, const Dataset& data, const SearchConfig& cfg);

}  // namespace autolinc
