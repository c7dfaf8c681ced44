#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pathnav/geometry.hpp"

namespace pathnav {

// Structured outputs the backend must emit at each stage. Parsers tolerate
// surrounding prose and fenced code blocks: the first balanced JSON object
// that satisfies the schema wins. They never throw anything but Error.

struct RegionGroup {
  std::string name;
  std::vector<long long> region_ids;
  bool needs_high_mag = false;

  bool operator==(const RegionGroup&) const = default;
};

struct RegionSelection {
  std::vector<RegionGroup> groups;
  std::vector<long long> priority;  // recommended viewing order

  std::vector<long long> all_region_ids() const;
  bool operator==(const RegionSelection&) const = default;
};

enum class NavAction { overview, move, zoom_in, zoom_out };

const char* to_string(NavAction action);
std::optional<NavAction> nav_action_from(std::string_view name);

struct NavStep {
  NavAction action = NavAction::overview;
  Viewport viewport;
  std::string rationale;

  bool operator==(const NavStep&) const = default;
};

struct NavPlan {
  std::vector<NavStep> steps;
  bool overview_inserted = false;  // synthetic first step was prepended
  bool truncated = false;          // runtime cut the plan at max_steps

  bool operator==(const NavPlan&) const = default;
};

struct ReasoningResult {
  std::vector<std::string> step_notes;
  std::string conclusion;
  std::optional<int> answer_index;

  bool operator==(const ReasoningResult&) const = default;
};

RegionSelection parse_region_selection(const std::string& text);

// Accepts {"steps":[{"action","center":[x,y],"magnification","rationale"}]}.
// Numeric strings like "2.5x" are normalized; a missing leading overview
// step is synthesized and flagged.
NavPlan parse_nav_plan(const std::string& text);

// Canonical JSON: keys in (action, center, magnification, rationale) order,
// centers at 3 decimals, magnifications at 2. parse_nav_plan of the output
// reproduces the plan exactly after the same rounding.
std::string serialize_nav_plan(const NavPlan& plan);

ReasoningResult parse_reasoning_result(const std::string& text,
                                       std::optional<int> n_options = {});

// Answer extraction rules, in order: last "Answer: <letter>", last
// standalone option-letter line, unique option text contained in the final
// paragraph (available only when `options` is provided).
int extract_answer(const std::string& text, int n_options,
                   const std::vector<std::string>& options = {});

}  // namespace pathnav
