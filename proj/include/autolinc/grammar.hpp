#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace autolinc {

// Production rules of the loss-expression grammar: two binary and eight
// unary element-wise operators plus five terminals. Applying a rule
// consumes one open slot and opens `arity` new ones.
enum class Rule : uint8_t {
    Add,
    Mul,
    Neg,
    Abs,
    Inv,
    Log,
    Exp,
    Tanh,
    Square,
    Sqrt,
    Y,
    Yhat,
    N,
    Const1,
    Const2,
};

inline constexpr int kNumRules = 15;

int rule_arity(Rule r);
bool rule_is_terminal(Rule r);
const char* rule_name(Rule r);
std::vector<Rule> all_rules();

// Action-sequence state: the ordered rule applications so far plus the
// count of pending non-terminal slots. The grammar has a single
// non-terminal kind, so the LIFO stack reduces to its depth; slots are
// filled left-first (pre-order).
struct SearchState {
    std::vector<Rule> actions;
    int open_slots = 1;
    int t_max = 10;

    int t() const { return static_cast<int>(actions.size()); }
    bool terminal() const { return open_slots == 0; }
};

// Rules applicable to the top slot under the remaining action budget:
// rule r is allowed iff the slot count after applying it can still be
// closed by terminals within the budget, i.e.
// open_slots - 1 + arity(r) <= t_max - t - 1.
std::vector<Rule> available_actions(const SearchState& s);

SearchState apply_action(const SearchState& s, Rule r);

struct ExprTree {
    Rule rule;
    std::vector<ExprTree> children;
};

// Pre-order decode; throws on incomplete or over-long sequences.
ExprTree build_tree(const std::vector<Rule>& actions);
std::vector<Rule> preorder(const ExprTree& tree);

std::string serialize(const ExprTree& tree);

struct ParseError : std::runtime_error {
    size_t offset;
    ParseError(const std::string& msg, size_t off)
        : std::runtime_error(msg + " at offset " + std::to_string(off)), offset(off) {}
};

ExprTree parse(const std::string& text);

}  // namespace autolinc
