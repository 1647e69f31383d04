#include "autolinc/loss_zoo.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace autolinc {

namespace {

// Discovered-loss presets. F is registered as square(exp(x)) in place
// of exp(2x); the two are identical and the former fits the 10-rule
// budget.
const std::map<std::string, Preset>& registry() {
    static const std::map<std::string, Preset> reg = [] {
        std::map<std::string, Preset> m;
        auto native = [&](const std::string& name, NativeLoss k) {
            m[name] = Preset{name, true, k, ""};
        };
        auto tree = [&](const std::string& name, const std::string& expr) {
            m[name] = Preset{name, false, NativeLoss::CE, expr};
        };
        native("CE", NativeLoss::CE);
        native("re-weight", NativeLoss::ReWeight);
        native("balanced-softmax", NativeLoss::BalancedSoftmax);
        native("pc-softmax", NativeLoss::PCSoftmax);
        tree("A", "exp(square(tanh(add(mul(inv(N),neg(y)),yhat))))");
        tree("B", "square(add(neg(mul(N,yhat)),y))");
        tree("C", "add(yhat,square(add(mul(inv(N),neg(y)),yhat)))");
        tree("D", "square(neg(tanh(add(mul(inv(N),neg(y)),yhat))))");
        tree("E", "square(add(tanh(neg(yhat)),mul(tanh(y),inv(N))))");
        tree("F", "square(add(square(exp(mul(inv(N),neg(y)))),yhat))");
        tree("G", "square(tanh(tanh(add(mul(inv(N),neg(y)),yhat))))");
        tree("H", "square(add(yhat,neg(inv(add(log(tanh(y)),N)))))");
        tree("I", "mul(neg(add(tanh(y),mul(yhat,neg(N)))),yhat)");
        tree("J", "square(add(add(yhat,N),log(log(inv(sqrt(y))))))");
        tree("K", "square(add(yhat,sqrt(sqrt(mul(N,square(log(y)))))))");
        tree("L", "log(add(square(add(y,neg(yhat))),log(N)))");
        tree("M", "abs(add(neg(y),add(yhat,square(tanh(N)))))");
        tree("N", "square(add(yhat,add(N,log(log(inv(sqrt(y)))))))");
        tree("O", "mul(yhat,add(yhat,add(N,log(neg(log(y))))))");
        return m;
    }();
    return reg;
}

}  // namespace

Preset preset(const std::string& name) {
    const auto& reg = registry();
    auto it = reg.find(name);
    if (it == reg.end()) {
        std::string names;
        for (const auto& [n, _] : reg) names += (names.empty() ? "" : ", ") + n;
        throw std::invalid_argument("unknown preset '" + name + "'; registered: " + names);
    }
    return it->second;
}

std::vector<std::string> list_presets() {
    std::vector<std::string> out;
    for (const auto& [n, _] : registry()) out.push_back(n);
    return out;  // std::map iteration is already sorted
}

bool is_preset(const std::string& name) { return registry().count(name) > 0; }

}  // namespace autolinc
