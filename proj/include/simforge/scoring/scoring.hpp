#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace simforge::scoring {

/// Component a critic evaluates; each has a fixed rubric.
enum class ComponentKind { StateChange, Decompose, InputLogic, StateTransition, UiRendering };

inline constexpr ComponentKind kAllKinds[] = {
    ComponentKind::StateChange, ComponentKind::Decompose, ComponentKind::InputLogic,
    ComponentKind::StateTransition, ComponentKind::UiRendering,
};

std::string_view to_string(ComponentKind kind);
std::optional<ComponentKind> parse_component_kind(std::string_view text);

/// Ordered rubric categories (snake_case) for `kind`.
std::span<const std::string_view> rubric(ComponentKind kind);

inline constexpr int kMinScore = 0;
inline constexpr int kMaxScore = 10;

struct Critique {
    ComponentKind kind = ComponentKind::StateChange;
    std::vector<int> scores;
    std::string feedback;
    std::vector<std::string> suggestions;

    bool operator==(const Critique&) const = default;
};

/// Throws InvalidCritique when arity or range is wrong for the kind.
void validate(const Critique& critique);

int total(const Critique& critique);

struct ScoreDelta {
    std::string category;
    int previous = 0;
    int current = 0;
    int delta = 0;

    bool operator==(const ScoreDelta&) const = default;
};

/// Per-category changes in rubric order. Throws KindMismatch.
std::vector<ScoreDelta> deltas(const Critique& previous, const Critique& current);

/// `decomposition_quality` -> `Decomposition Quality`.
std::string title_case(std::string_view category);

/// One `Name: prev → curr (+d)` line per entry, newline separated.
std::string format_deltas(std::span<const ScoreDelta> entries);

enum class PlannerDecision { Accept, Rollback, Refine };

std::string_view to_string(PlannerDecision decision);

/// Accept when every latest score clears `tau`; otherwise Rollback when the
/// latest total strictly fell below the previous round's; otherwise Refine.
/// Throws EmptyHistory or KindMismatch.
PlannerDecision planner_policy(std::span<const Critique> history, int tau);

}  // namespace simforge::scoring
