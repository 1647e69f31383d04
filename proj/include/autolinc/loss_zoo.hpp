#pragma once

#include <string>
#include <vector>

#include "autolinc/grammar.hpp"

namespace autolinc {

enum class NativeLoss { CE, ReWeight, BalancedSoftmax, PCSoftmax };

// A named loss: either one of the native log-softmax baselines or an
// expression-tree preset.
struct Preset {
    std::string name;
    bool is_native = false;
    NativeLoss native = NativeLoss::CE;
    std::string expression;  // tree presets only
};

// Throws with the registered names listed when `name` is unknown.
Preset preset(const std::string& name);
std::vector<std::string> list_presets();
bool is_preset(const std::string& name);

}  // namespace autolinc
