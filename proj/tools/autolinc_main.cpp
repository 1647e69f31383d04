#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "autolinc/graph_data.hpp"
#include "autolinc/loss_check.hpp"
#include "autolinc/loss_expr.hpp"
#include "autolinc/loss_zoo.hpp"
#include "autolinc/rng.hpp"
#include "autolinc/search.hpp"
#include "autolinc/trainer.hpp"

using json = nlohmann::json;
using namespace autolinc;

namespace {

struct MeanStderr {
    double mean = 0, stderr_ = 0;
};

MeanStderr mean_stderr(const std::vector<double>& xs) {
    MeanStderr m;
    if (xs.empty()) return m;
    for (double x : xs) m.mean += x;
    m.mean /= xs.size();
    if (xs.size() > 1) {
        double ss = 0;
        for (double x : xs) ss += (x - m.mean) * (x - m.mean);
        m.stderr_ = std::sqrt(ss / (xs.size() - 1)) / std::sqrt(static_cast<double>(xs.size()));
    }
    return m;
}

void write_report(const std::string& path, const json& j) {
    if (path.empty()) {
        std::cout << j.dump(2) << std::endl;
    } else {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path);
        out << j.dump(2) << "\n";
        std::cout << "report written to " << path << std::endl;
    }
}

LossSpec resolve_loss(const std::string& name_or_expr, bool* pc_adjust = nullptr) {
    if (is_preset(name_or_expr)) {
        Preset p = preset(name_or_expr);
        LossSpec s = LossSpec::from_preset(p);
        if (pc_adjust) *pc_adjust = s.pc_adjust();
        return s;
    }
    ExprTree tree = parse(name_or_expr);
    CheckVerdict v = legality(tree);
    if (v.kind != CheckVerdict::Kind::Accept)
        throw std::runtime_error("illegal loss expression: missing terminal " + v.detail);
    if (pc_adjust) *pc_adjust = false;
    return LossSpec::from_tree(std::move(tree));
}

json train_repeats(const Dataset& data, const std::string& loss_name, const TrainConfig& base,
                   int repeats, uint64_t seed) {
    bool pc = false;
    LossSpec spec = resolve_loss(loss_name, &pc);
    std::vector<double> baccs, f1s;
    for (int r = 0; r < repeats; ++r) {
        TrainConfig tc = base;
        tc.seed = seed + r;
        TrainResult tr = train(data, spec, tc);
        if (tr.rejected)
            throw std::runtime_error(std::string("training rejected: ") +
                                     reject_reason_name(tr.reason));
        Metrics m = evaluate(tr.model, data, "test", pc);
        baccs.push_back(m.bacc);
        f1s.push_back(m.macro_f1);
    }
    auto b = mean_stderr(baccs), f = mean_stderr(f1s);
    return json{{"loss", loss_name},
                {"repeats", repeats},
                {"test_bacc", {{"mean", b.mean}, {"stderr", b.stderr_}, {"values", baccs}}},
                {"test_macro_f1", {{"mean", f.mean}, {"stderr", f.stderr_}, {"values", f1s}}}};
}

json config_echo(const TrainConfig& tc) {
    return json{{"epochs", tc.epochs},       {"lr", tc.lr},
                {"lr_patience", tc.lr_patience}, {"weight_decay", tc.weight_decay},
                {"hidden", tc.hidden},       {"raw_logits", tc.raw_logits}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AutoLINC: symbolic loss function search for class-imbalanced node classification"};
    app.require_subcommand(1);

    // ---- gen-data ----
    auto* gen = app.add_subcommand("gen-data", "generate a dataset directory");
    auto* sbm = gen->add_subcommand("sbm", "stochastic block model generator");
    SbmConfig sbm_cfg;
    double gen_rho = 1.0;
    std::string gen_out;
    uint64_t gen_seed = 0;
    sbm->add_option("--classes", sbm_cfg.num_classes);
    sbm->add_option("--nodes-per-class", sbm_cfg.nodes_per_class);
    sbm->add_option("--p-in", sbm_cfg.p_in);
    sbm->add_option("--p-out", sbm_cfg.p_out);
    sbm->add_option("--feature-dim", sbm_cfg.feature_dim);
    sbm->add_option("--shift", sbm_cfg.feature_shift);
    sbm->add_option("--train-per-class", sbm_cfg.train_per_class);
    sbm->add_option("--val-per-class", sbm_cfg.val_per_class);
    sbm->add_option("--rho", gen_rho);
    sbm->add_option("--seed", gen_seed);
    sbm->add_option("--out", gen_out)->required();

    // ---- shared training flags ----
    auto add_train_flags = [](CLI::App* cmd, TrainConfig& tc) {
        cmd->add_option("--epochs", tc.epochs);
        cmd->add_option("--hidden", tc.hidden);
        cmd->add_option("--lr", tc.lr);
        cmd->add_option("--weight-decay", tc.weight_decay);
        cmd->add_option("--lr-patience", tc.lr_patience);
        cmd->add_flag("--raw-logits", tc.raw_logits);
    };

    // ---- train ----
    auto* tr_cmd = app.add_subcommand("train", "train a GCN with a preset or expression loss");
    std::string tr_data, tr_loss, tr_report;
    int tr_repeats = 1;
    uint64_t tr_seed = 0;
    TrainConfig tr_cfg;
    tr_cfg.epochs = 200;
    tr_cfg.full_mode = true;
    tr_cmd->add_option("--data", tr_data)->required();
    tr_cmd->add_option("--loss", tr_loss)->required();
    tr_cmd->add_option("--repeats", tr_repeats);
    tr_cmd->add_option("--seed", tr_seed);
    tr_cmd->add_option("--report", tr_report);
    add_train_flags(tr_cmd, tr_cfg);

    // ---- search ----
    auto* se_cmd = app.add_subcommand("search", "MCTS loss function search");
    std::string se_data, se_archive = "archive.jsonl", se_report, se_oracle, se_oracle_target;
    SearchConfig se_cfg;
    se_cfg.proxy.epochs = 100;
    se_cfg.proxy.hidden = 64;
    se_cfg.full.epochs = 2000;
    se_cfg.full.hidden = 256;
    bool no_basic = false, no_early = false;
    se_cmd->add_option("--data", se_data)->required();
    se_cmd->add_option("--episodes", se_cfg.episodes);
    se_cmd->add_option("--trials", se_cfg.trials);
    se_cmd->add_option("--sims", se_cfg.sims);
    se_cmd->add_option("--c", se_cfg.c);
    se_cmd->add_option("--tmax", se_cfg.t_max);
    se_cmd->add_option("--seed", se_cfg.seed);
    se_cmd->add_option("--proxy-epochs", se_cfg.proxy.epochs);
    se_cmd->add_option("--proxy-hidden", se_cfg.proxy.hidden);
    se_cmd->add_option("--epochs", se_cfg.full.epochs)->description("full-task epochs");
    se_cmd->add_option("--hidden", se_cfg.full.hidden)->description("full-task hidden dim");
    se_cmd->add_option("--beta", se_cfg.monitor.beta);
    se_cmd->add_option("--mono-threshold", se_cfg.monitor.mono_threshold);
    se_cmd->add_option("--time-budget", se_cfg.time_budget_sec);
    se_cmd->add_flag("--no-basic-check", no_basic);
    se_cmd->add_flag("--no-early-rejection", no_early);
    se_cmd->add_option("--oracle", se_oracle)->description("'toy' enables the gradient-match oracle");
    se_cmd->add_option("--oracle-target", se_oracle_target);
    se_cmd->add_option("--archive", se_archive);
    se_cmd->add_option("--report", se_report);
    se_cmd->add_flag("--raw-logits", se_cfg.proxy.raw_logits);

    // ---- verify-loss ----
    auto* ve_cmd = app.add_subcommand("verify-loss", "run the check pipeline on one expression");
    std::string ve_expr;
    ve_cmd->add_option("--expr", ve_expr)->required();

    // ---- eval-zoo ----
    auto* zoo_cmd = app.add_subcommand("eval-zoo", "evaluate every preset on a dataset");
    std::string zoo_data, zoo_report;
    int zoo_repeats = 3;
    uint64_t zoo_seed = 0;
    TrainConfig zoo_cfg;
    zoo_cfg.epochs = 200;
    zoo_cfg.full_mode = true;
    zoo_cmd->add_option("--data", zoo_data)->required();
    zoo_cmd->add_option("--repeats", zoo_repeats);
    zoo_cmd->add_option("--seed", zoo_seed);
    zoo_cmd->add_option("--report", zoo_report);
    add_train_flags(zoo_cmd, zoo_cfg);

    CLI11_PARSE(app, argc, argv);

    auto t0 = std::chrono::steady_clock::now();
    auto wall_ms = [&] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - t0)
            .count();
    };

    try {
        if (sbm->parsed()) {
            sbm_cfg.seed = gen_seed;
            Dataset d = gen_sbm(sbm_cfg);
            if (gen_rho > 1.0) d = step_imbalance(d, gen_rho, derive_seed(gen_seed, "imbalance"));
            save_dataset(d, gen_out);
            std::cout << json{{"command", "gen-data"},
                              {"out", gen_out},
                              {"num_nodes", d.num_nodes},
                              {"train_class_counts", d.train_class_counts},
                              {"seed", gen_seed}}
                             .dump(2)
                      << std::endl;
        } else if (tr_cmd->parsed()) {
            Dataset d = load_dataset(tr_data);
            json rep = train_repeats(d, tr_loss, tr_cfg, tr_repeats, tr_seed);
            rep["command"] = "train";
            rep["data"] = tr_data;
            rep["seed"] = tr_seed;
            rep["config"] = config_echo(tr_cfg);
            rep["wall_ms"] = wall_ms();
            write_report(tr_report, rep);
        } else if (se_cmd->parsed()) {
            Dataset d = load_dataset(se_data);
            se_cfg.basic_check_enabled = !no_basic;
            se_cfg.early_rejection_enabled = !no_early;
            se_cfg.archive_path = se_archive;
            se_cfg.monitor.probe_interval = std::max(1, se_cfg.proxy.epochs / 20);
            if (se_oracle == "toy") {
                std::string target = se_oracle_target.empty()
                                         ? "square(add(yhat,neg(mul(inv(N),y))))"
                                         : se_oracle_target;
                se_cfg.toy_target = parse(target);
            } else if (!se_oracle.empty()) {
                throw std::runtime_error("unknown oracle '" + se_oracle + "'");
            }
            SearchResult res = run_search(d, se_cfg);
            json rep{{"command", "search"},
                     {"seed", se_cfg.seed},
                     {"episodes", res.stats.episodes_run},
                     {"proxy_trainings", res.stats.proxy_trainings},
                     {"cache_hits", res.stats.cache_hits},
                     {"rejections", res.stats.rejections},
                     {"unique_records", res.archive.size()},
                     {"unique_finished", res.archive.finished_count()},
                     {"max_reward", res.archive.max_reward()},
                     {"archive", se_archive}};
            if (!se_cfg.toy_target) {
                FinalReport fin = finalize(res.archive, d, se_cfg);
                json top = json::array();
                for (const auto& e : fin.top)
                    top.push_back({{"expr", e.record.expr},
                                   {"proxy_reward", e.record.reward},
                                   {"episode", e.record.episode},
                                   {"full_val_bacc", e.val.bacc},
                                   {"full_val_macro_f1", e.val.macro_f1},
                                   {"full_test_bacc", e.test.bacc},
                                   {"full_test_macro_f1", e.test.macro_f1}});
                rep["top10"] = top;
                rep["best"] = {{"expr", fin.best_expr}, {"index", fin.best_index}};
            }
            rep["wall_ms"] = wall_ms();
            write_report(se_report, rep);
        } else if (ve_cmd->parsed()) {
            ExprTree tree = parse(ve_expr);
            json rep{{"command", "verify-loss"}, {"expr", serialize(tree)},
                     {"canonical", canonical(tree)}};
            CheckVerdict lv = legality(tree);
            if (lv.kind != CheckVerdict::Kind::Accept) {
                rep["verdict"] = "reject";
                rep["reason"] = std::string(reject_reason_name(lv.reason)) + ":" + lv.detail;
            } else {
                Archive empty;
                Fingerprint fp;
                CheckVerdict bv = basic_check(tree, empty, &fp);
                json probes = json::array();
                for (const auto& in : probe_inputs()) probes.push_back(eval_loss(tree, in).value);
                rep["probe_values"] = probes;
                rep["fingerprint"] = fp.hash;
                rep["all_zero_gradient"] = fp.all_zero;
                rep["non_finite"] = !fp.finite;
                rep["verdict"] = bv.kind == CheckVerdict::Kind::Accept ? "accept"
                                 : bv.kind == CheckVerdict::Kind::Cached
                                     ? "cached"
                                     : std::string("reject(") + reject_reason_name(bv.reason) + ")";
            }
            write_report("", rep);
        } else if (zoo_cmd->parsed()) {
            Dataset d = load_dataset(zoo_data);
            json rows = json::array();
            printf("%-18s %14s %14s\n", "loss", "test bAcc", "test macro-F1");
            for (const auto& name : list_presets()) {
                json r = train_repeats(d, name, zoo_cfg, zoo_repeats, zoo_seed);
                printf("%-18s %7.4f±%.4f %7.4f±%.4f\n", name.c_str(),
                       r["test_bacc"]["mean"].get<double>(),
                       r["test_bacc"]["stderr"].get<double>(),
                       r["test_macro_f1"]["mean"].get<double>(),
                       r["test_macro_f1"]["stderr"].get<double>());
                rows.push_back(std::move(r));
            }
            json rep{{"command", "eval-zoo"}, {"data", zoo_data},        {"seed", zoo_seed},
                     {"repeats", zoo_repeats}, {"config", config_echo(zoo_cfg)},
                     {"results", rows},        {"wall_ms", wall_ms()}};
            write_report(zoo_report, rep);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
