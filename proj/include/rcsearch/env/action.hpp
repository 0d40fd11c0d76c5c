#pragma once

#include <compare>
#include <string>

namespace rcs::env {

// SelectNode(i) or STOP.
struct Action {
  static constexpr int kStopNode = -1;

  int node = kStopNode;

  static Action select(int i) { return Action{i}; }
  static Action stop() { return Action{kStopNode}; }
  bool is_stop() const { return node == kStopNode; }

  auto operator<=>(const Action &) const = default;

  std::string to_string() const { return is_stop() ? "STOP" : "Select " + std::to_string(node); }
};

}  // namespace rcs::env
