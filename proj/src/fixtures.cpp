#include "swctrl/fixtures.hpp"

#include "swctrl/errors.hpp"

namespace swctrl {
namespace {

constexpr std::string_view kExp33 = R"({
  "N": 2, "d": 1,
  "modes": ["e1", "e2", "e3"],
  "lambda": {"e1": 1.0, "e2": 1.0, "e3": 1.0},
  "Q": [[0, 1, 0], [0, 0, 1], [0, 1, 0]],
  "A": {"e1": [[0, 0], [1, 0]], "e2": [[0, 0], [0, 0]], "e3": [[0, 0], [0, 0]]},
  "B": [[1], [0]],
  "M": 2, "T": 1.0, "gamma0": "e1"
})";

constexpr std::string_view kExp34 = R"({
  "N": 2, "d": 1,
  "modes": ["0", "1"],
  "lambda": {"0": 1.0, "1": 1.0},
  "Q": [[0, 1], [1, 0]],
  "A": {"0": [[0, 0], [1, 0]], "1": [[0, 0], [1, 0]]},
  "B": [[1], [0]],
  "C": {"0->1": [[-1, 0], [0, -1]], "1->0": [[-1, 0], [1, -1]]},
  "M": 2, "T": 1.0, "gamma0": "0"
})";

constexpr std::string_view kExp34Final = R"({
  "N": 2, "d": 1,
  "modes": ["e1", "e2", "e3"],
  "lambda": {"e1": 1.0, "e2": 1.0, "e3": 1.0},
  "Q": [[0, 1, 0], [0, 0, 1], [0, 1, 0]],
  "A": {"e1": [[0, 0], [1, 0]], "e2": [[0, 0], [0, 0]], "e3": [[0, 0], [0, 0]]},
  "B": [[1], [0]],
  "M": 1, "T": 1.0, "gamma0": "e1"
})";

}  // namespace

std::vector<std::string> fixture_names() { return {"exp-3-3", "exp-3-4", "exp-3-4-final"}; }

std::optional<std::string> fixture_document(std::string_view name) {
  if (name == "exp-3-3") return std::string(kExp33);
  if (name == "exp-3-4") return std::string(kExp34);
  if (name == "exp-3-4-final" || name == "exp-3-3-final") return std::string(kExp34Final);
  return std::nullopt;
}

SwitchSystem fixture(std::string_view name) {
  const auto doc = fixture_document(name);
  if (!doc) throw InputError("fixture", "unknown fixture '" + std::string(name) + "'");
  return parse_system_text(*doc);
}

}  // namespace swctrl
