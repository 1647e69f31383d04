#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "autolinc/search.hpp"

using namespace autolinc;

namespace {

Dataset tiny_sbm() {
    SbmConfig cfg;
    cfg.num_classes = 3;
    cfg.nodes_per_class = 30;
    cfg.feature_dim = 8;
    cfg.p_in = 0.2;
    cfg.train_per_class = 8;
    cfg.val_per_class = 8;
    return gen_sbm(cfg);
}

SearchConfig toy_config(int episodes, uint64_t seed = 0) {
    SearchConfig cfg;
    cfg.episodes = episodes;
    cfg.sims = 5;
    cfg.seed = seed;
    cfg.toy_target = parse("square(add(yhat,neg(mul(inv(N),y))))");
    return cfg;
}

}  // namespace

TEST_CASE("uct score arithmetic") {
    // q=0.5, W(s)=10, W(s,a)=2, c=sqrt(2): 0.5 + sqrt(2*ln 10/2) ~ 1.5730
    double s = uct_score(0.5, 10, 2, std::sqrt(2.0));
    CHECK(s == doctest::Approx(0.5 + std::sqrt(2.0) * std::sqrt(std::log(10.0) / 2.0)));
    CHECK(uct_score(0.9, 10, 0, 1.0) == std::numeric_limits<double>::infinity());
    CHECK(uct_score(0.7, 10, 3, 0.0) == doctest::Approx(0.7));  // greedy at c=0
}

TEST_CASE("toy oracle search closes in on the target gradient") {
    Dataset d = tiny_sbm();
    for (uint64_t seed : {0, 1, 2}) {
        SearchConfig cfg = toy_config(2000, seed);
        SearchResult r = run_search(d, cfg);
        CHECK(r.stats.episodes_run == 2000);
        CHECK(r.archive.max_reward() >= 0.99);
    }
}

TEST_CASE("search is deterministic in the seed") {
    Dataset d = tiny_sbm();
    SearchResult a = run_search(d, toy_config(40, 11));
    SearchResult b = run_search(d, toy_config(40, 11));
    auto ra = a.archive.records(), rb = b.archive.records();
    REQUIRE(ra.size() == rb.size());
    for (size_t i = 0; i < ra.size(); ++i) {
        CHECK(ra[i].expr == rb[i].expr);
        CHECK(ra[i].reward == rb[i].reward);
    }
    SearchResult c = run_search(d, toy_config(40, 12));
    bool differs = c.archive.records().size() != ra.size();
    for (size_t i = 0; !differs && i < ra.size(); ++i)
        differs = c.archive.records()[i].expr != ra[i].expr;
    CHECK(differs);
}

TEST_CASE("archive max reward never decreases across episode budgets") {
    Dataset d = tiny_sbm();
    double prev = 0;
    for (int episodes : {20, 60, 150}) {
        SearchResult r = run_search(d, toy_config(episodes, 4));
        CHECK(r.archive.max_reward() >= prev - 1e-12);
        prev = r.archive.max_reward();
    }
}

TEST_CASE("duplicates come from the cache instead of re-evaluating") {
    Dataset d = tiny_sbm();
    SearchResult r = run_search(d, toy_config(200, 2));
    CHECK(r.stats.cache_hits > 0);
    // one archive record per canonical form
    std::set<std::string> canon;
    for (const auto& rec : r.archive.records()) CHECK(canon.insert(rec.canonical).second);
}

TEST_CASE("every archived record round-trips through the parser") {
    Dataset d = tiny_sbm();
    SearchResult r = run_search(d, toy_config(60, 5));
    CHECK(r.archive.size() > 0);
    for (const auto& rec : r.archive.records()) {
        ExprTree t = parse(rec.expr);
        CHECK(preorder(t).size() <= 10);
        CHECK(canonical(t) == rec.canonical);
        CHECK(legality(t).kind == CheckVerdict::Kind::Accept);
    }
}

TEST_CASE("proxy search with real training runs end to end") {
    Dataset d = step_imbalance(tiny_sbm(), 5, 1);
    SearchConfig cfg;
    cfg.episodes = 150;
    cfg.sims = 5;
    cfg.proxy.epochs = 10;
    cfg.proxy.hidden = 8;
    cfg.monitor.probe_interval = 2;
    SearchResult r = run_search(d, cfg);
    CHECK(r.stats.episodes_run == 150);
    CHECK(r.archive.size() > 0);
    for (const auto& rec : r.archive.records()) {
        CHECK(rec.reward >= 0.0);
        CHECK(rec.reward <= 1.0);
    }
}

TEST_CASE("time budget stops the search early") {
    Dataset d = tiny_sbm();
    SearchConfig cfg = toy_config(1000000, 0);
    cfg.time_budget_sec = 0.3;
    SearchResult r = run_search(d, cfg);
    CHECK(r.stats.episodes_run < 1000000);
}

TEST_CASE("finalize retrains the top candidates and picks by val bAcc") {
    Dataset d = step_imbalance(tiny_sbm(), 5, 1);
    SearchConfig cfg;
    cfg.episodes = 150;
    cfg.sims = 5;
    cfg.proxy.epochs = 8;
    cfg.proxy.hidden = 8;
    cfg.full.epochs = 15;
    cfg.full.hidden = 8;
    cfg.full.full_mode = true;
    SearchResult r = run_search(d, cfg);
    FinalReport rep = finalize(r.archive, d, cfg);
    REQUIRE(!rep.top.empty());
    CHECK(rep.top.size() <= 10);
    CHECK(rep.best_index >= 0);
    double best = rep.top[rep.best_index].val.bacc;
    for (const auto& e : rep.top) CHECK(e.val.bacc <= best + 1e-12);
    CHECK(rep.best_expr == rep.top[rep.best_index].record.expr);
}

TEST_CASE("archive persists to jsonl and reloads") {
    Dataset d = tiny_sbm();
    SearchConfig cfg = toy_config(50, 3);
    cfg.archive_path = "/tmp/autolinc_test_archive.jsonl";
    SearchResult r = run_search(d, cfg);
    Archive back = Archive::load_jsonl(cfg.archive_path);
    CHECK(back.size() == r.archive.size());
    CHECK(back.max_reward() == doctest::Approx(r.archive.max_reward()));
}
