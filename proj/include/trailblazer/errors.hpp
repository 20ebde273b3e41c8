#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace trailblazer {

/// Thrown when an input file or a constructed model violates its contract.
class validation_error : public std::runtime_error {
  public:
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a run would exceed its configured oracle-call cap.
class budget_exceeded : public std::runtime_error {
  public:
    budget_exceeded(std::uint64_t cap, std::uint64_t transition_calls,
                    std::uint64_t reward_calls, int max_depth_reached)
        : std::runtime_error("oracle-call cap of " + std::to_string(cap) + " exceeded"),
          cap(cap),
          transition_calls(transition_calls),
          reward_calls(reward_calls),
          max_depth_reached(max_depth_reached) {}

    std::uint64_t cap;
    std::uint64_t transition_calls;
    std::uint64_t reward_calls;
    int max_depth_reached;
};

/// Precondition check on caller-supplied values.
inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

/// Internal consistency check; a failure indicates a bug, not bad input.
/// Kept enabled in release builds.
inline void check(bool cond, const char* msg) {
    if (!cond) throw std::logic_error(msg);
}

}  // namespace trailblazer
