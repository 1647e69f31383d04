#include "autolinc/grammar.hpp"

#include <cctype>

namespace autolinc {

int rule_arity(Rule r) {
    switch (r) {
        case Rule::Add:
        case Rule::Mul:
            return 2;
        case Rule::Neg:
        case Rule::Abs:
        case Rule::Inv:
        case Rule::Log:
        case Rule::Exp:
        case Rule::Tanh:
        case Rule::Square:
        case Rule::Sqrt:
            return 1;
        default:
            return 0;
    }
}

bool rule_is_terminal(Rule r) { return rule_arity(r) == 0; }

const char* rule_name(Rule r) {
    switch (r) {
        case Rule::Add: return "add";
        case Rule::Mul: return "mul";
        case Rule::Neg: return "neg";
        case Rule::Abs: return "abs";
        case Rule::Inv: return "inv";
        case Rule::Log: return "log";
        case Rule::Exp: return "exp";
        case Rule::Tanh: return "tanh";
        case Rule::Square: return "square";
        case Rule::Sqrt: return "sqrt";
        case Rule::Y: return "y";
        case Rule::Yhat: return "yhat";
        case Rule::N: return "N";
        case Rule::Const1: return "1";
        case Rule::Const2: return "2";
    }
    return "?";
}

std::vector<Rule> all_rules() {
    std::vector<Rule> out;
    out.reserve(kNumRules);
    for (int i = 0; i < kNumRules; ++i) out.push_back(static_cast<Rule>(i));
    return out;
}

std::vector<Rule> available_actions(const SearchState& s) {
    if (s.terminal()) throw std::logic_error("available_actions: state is terminal");
    std::vector<Rule> out;
    int remaining_after = s.t_max - s.t() - 1;
    for (Rule r : all_rules()) {
        int open_after = s.open_slots - 1 + rule_arity(r);
        if (open_after <= remaining_after) out.push_back(r);
    }
    return out;
}

SearchState apply_action(const SearchState& s, Rule r) {
    if (s.terminal()) throw std::logic_error("apply_action: state is terminal");
    if (s.t() >= s.t_max) throw std::logic_error("apply_action: action budget exhausted");
    SearchState next = s;
    next.actions.push_back(r);
    next.open_slots += rule_arity(r) - 1;
    return next;
}

namespace {

ExprTree decode(const std::vector<Rule>& actions, size_t& pos) {
    if (pos >= actions.size()) throw std::invalid_argument("build_tree: incomplete action sequence");
    ExprTree node{actions[pos++], {}};
    int k = rule_arity(node.rule);
    node.children.reserve(k);
    for (int i = 0; i < k; ++i) node.children.push_back(decode(actions, pos));
    return node;
}

}  // namespace

ExprTree build_tree(const std::vector<Rule>& actions) {
    size_t pos = 0;
    ExprTree t = decode(actions, pos);
    if (pos != actions.size())
        throw std::invalid_argument("build_tree: trailing actions beyond a complete tree");
    return t;
}

std::vector<Rule> preorder(const ExprTree& tree) {
    std::vector<Rule> out;
    out.push_back(tree.rule);
    for (const auto& c : tree.children) {
        auto sub = preorder(c);
        out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
}

std::string serialize(const ExprTree& tree) {
    std::string s = rule_name(tree.rule);
    if (!tree.children.empty()) {
        s += "(";
        for (size_t i = 0; i < tree.children.size(); ++i) {
            if (i) s += ",";
            s += serialize(tree.children[i]);
        }
        s += ")";
    }
    return s;
}

namespace {

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    ExprTree run() {
        ExprTree t = expr();
        skip_ws();
        if (pos_ != text_.size()) throw ParseError("trailing input", pos_);
        return t;
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    ExprTree expr() {
        skip_ws();
        size_t start = pos_;
        std::string tok;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            tok += text_[pos_++];
        if (tok.empty()) throw ParseError("expected token", pos_);
        Rule r;
        bool found = false;
        for (Rule cand : all_rules())
            if (tok == rule_name(cand)) {
                r = cand;
                found = true;
                break;
            }
        if (!found) throw ParseError("unknown token '" + tok + "'", start);
        int k = rule_arity(r);
        ExprTree node{r, {}};
        if (k == 0) return node;
        expect('(');
        node.children.push_back(expr());
        for (int i = 1; i < k; ++i) {
            expect(',');
            node.children.push_back(expr());
        }
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ',')
            throw ParseError("too many arguments for " + std::string(rule_name(r)), pos_);
        expect(')');
        return node;
    }

    void expect(char c) {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != c)
            throw ParseError(std::string("expected '") + c + "'", pos_);
        ++pos_;
    }

    const std::string& text_;
    size_t pos_ = 0;
};

}  // namespace

ExprTree parse(const std::string& text) { return Parser(text).run(); }

}  // namespace autolinc
