#pragma once

#include "swctrl/switch_model.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace swctrl {

/// Built-in example systems (all with lambda = 1, T = 1):
///   exp-3-3        three modes e1 -> e2 <-> e3, only e1 has drift, M = 2
///   exp-3-4        on/off modes 0 <-> 1 with multiplicative jumps, M = 2
///   exp-3-4-final  exp-3-3 restricted to a single jump (M = 1);
///                  "exp-3-3-final" is accepted as an alias
std::vector<std::string> fixture_names();
std::optional<std::string> fixture_document(std::string_view name);
/// Throws InputError for unknown names.
SwitchSystem fixture(std::string_view name);

}  // namespace swctrl
