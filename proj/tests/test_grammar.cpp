#include <doctest.h>

#include <random>

#include "autolinc/grammar.hpp"
#include "autolinc/loss_zoo.hpp"
#include "autolinc/rng.hpp"

using namespace autolinc;

TEST_CASE("fresh state offers all 15 rules") {
    SearchState s;
    CHECK(available_actions(s).size() == 15);
}

TEST_CASE("one slot and one remaining action leaves terminals only") {
    SearchState s;
    s.open_slots = 1;
    s.actions.assign(9, Rule::Neg);  // t = 9, t_max = 10
    auto acts = available_actions(s);
    CHECK(acts.size() == 5);
    for (Rule r : acts) CHECK(rule_is_terminal(r));
}

TEST_CASE("two slots and two remaining actions leaves terminals only") {
    // operator rules would strand a slot: enumerate the arithmetic
    SearchState s;
    s.open_slots = 2;
    s.actions.assign(8, Rule::Neg);
    auto acts = available_actions(s);
    CHECK(acts.size() == 5);
    for (Rule r : acts) CHECK(rule_is_terminal(r));
}

TEST_CASE("available_actions on terminal state is a structural error") {
    SearchState s;
    s.open_slots = 0;
    CHECK_THROWS_AS(available_actions(s), std::logic_error);
}

TEST_CASE("apply_action bookkeeping") {
    SearchState s;
    SearchState after_add = apply_action(s, Rule::Add);
    CHECK(after_add.open_slots == 2);
    CHECK(after_add.t() == 1);

    SearchState one;
    SearchState done = apply_action(one, Rule::Yhat);
    CHECK(done.terminal());

    SearchState seq;
    for (Rule r : {Rule::Add, Rule::Yhat, Rule::N}) seq = apply_action(seq, r);
    CHECK(seq.terminal());
    ExprTree t = build_tree(seq.actions);
    CHECK(serialize(t) == "add(yhat,N)");
}

TEST_CASE("build_tree pre-order decode") {
    ExprTree t = build_tree({Rule::Square, Rule::Add, Rule::Yhat, Rule::Neg, Rule::Y});
    CHECK(serialize(t) == "square(add(yhat,neg(y)))");
    CHECK(preorder(t) == std::vector<Rule>{Rule::Square, Rule::Add, Rule::Yhat, Rule::Neg, Rule::Y});
}

TEST_CASE("build_tree decodes loss A action sequence") {
    ExprTree t = build_tree({Rule::Exp, Rule::Square, Rule::Tanh, Rule::Add, Rule::Mul, Rule::Inv,
                             Rule::N, Rule::Neg, Rule::Y, Rule::Yhat});
    CHECK(serialize(t) == preset("A").expression);
}

TEST_CASE("build_tree rejects incomplete and over-long sequences") {
    CHECK_THROWS_AS(build_tree({Rule::Add, Rule::Yhat}), std::invalid_argument);
    CHECK_THROWS_AS(build_tree({Rule::Yhat, Rule::Y}), std::invalid_argument);
}

TEST_CASE("serialize/parse basics") {
    CHECK(serialize(parse("add(yhat,N)")) == "add(yhat,N)");
    CHECK(serialize(parse(" add ( yhat , N ) ")) == "add(yhat,N)");
    ExprTree b = parse("square(add(neg(mul(N,yhat)),y))");
    CHECK(serialize(b) == preset("B").expression);
}

TEST_CASE("parse diagnostics carry byte offsets") {
    try {
        parse("add(yhat");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset == 8);
    }
    CHECK_THROWS_AS(parse("frob(y)"), ParseError);
    CHECK_THROWS_AS(parse("add(y)"), ParseError);
    CHECK_THROWS_AS(parse("neg(y,N)"), ParseError);
    CHECK_THROWS_AS(parse("Y"), ParseError);  // tokens are case-sensitive
}

TEST_CASE("round trip is a fixed point on 1000 random complete sequences") {
    auto rng = make_rng(5, "grammar-roundtrip");
    for (int i = 0; i < 1000; ++i) {
        SearchState s;
        while (!s.terminal()) {
            auto acts = available_actions(s);
            s = apply_action(s, acts[rng() % acts.size()]);
        }
        ExprTree t = build_tree(s.actions);
        std::string once = serialize(t);
        CHECK(serialize(parse(once)) == once);
        CHECK(preorder(t) == s.actions);
    }
}

namespace {

// exhaustively follows every available action from a state
void walk_all(const SearchState& s, int& leaves) {
    if (s.terminal()) {
        CHECK(s.t() <= s.t_max);
        ++leaves;
        return;
    }
    for (Rule r : available_actions(s)) walk_all(apply_action(s, r), leaves);
}

}  // namespace

TEST_CASE("budget soundness, exhaustive for small t_max") {
    for (int tmax = 1; tmax <= 5; ++tmax) {
        SearchState s;
        s.t_max = tmax;
        int leaves = 0;
        walk_all(s, leaves);
        CHECK(leaves > 0);
    }
}

TEST_CASE("budget soundness, randomized at t_max 10") {
    auto rng = make_rng(9, "grammar-budget");
    for (int i = 0; i < 1000; ++i) {
        SearchState s;
        int guard = 0;
        while (!s.terminal()) {
            auto acts = available_actions(s);
            REQUIRE(!acts.empty());
            s = apply_action(s, acts[rng() % acts.size()]);
            REQUIRE(++guard <= 10);
        }
        CHECK(s.t() <= 10);
        CHECK_NOTHROW(build_tree(s.actions));
    }
}

TEST_CASE("every preset A..O parses within 10 rules") {
    for (char c = 'A'; c <= 'O'; ++c) {
        std::string name(1, c);
        ExprTree t = parse(preset(name).expression);
        CHECK(preorder(t).size() <= 10);
    }
}
