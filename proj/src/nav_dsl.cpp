#include "pathnav/nav_dsl.hpp"

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "pathnav/errors.hpp"
#include "pathnav/util.hpp"

namespace pathnav {

namespace {

using nlohmann::json;

// First balanced {...} span that parses as JSON, scanning string literals
// and escapes; prose and code fences around it are ignored.
std::optional<json> extract_first_json_object(const std::string& text) {
  for (std::size_t start = 0; start < text.size(); ++start) {
    if (text[start] != '{') continue;
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) {
          json doc = json::parse(text.substr(start, i - start + 1), nullptr,
                                 /*allow_exceptions=*/false);
          if (!doc.is_discarded() && doc.is_object()) return doc;
          break;  // balanced but unparseable; try the next '{'
        }
      }
    }
  }
  return std::nullopt;
}

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error(Errc::schema_violation, path + ": " + what);
}

double number_at(const json& node, const std::string& path) {
  if (node.is_number()) return node.get<double>();
  if (node.is_string()) {
    std::string s = trim(node.get<std::string>());
    // tolerate magnification suffixes: "2.5x", "3X"
    while (!s.empty() && (s.back() == 'x' || s.back() == 'X')) s.pop_back();
    s = trim(s);
    try {
      std::size_t used = 0;
      double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (...) {
    }
    schema_error(path, "not a number: \"" + node.get<std::string>() + "\"");
  }
  schema_error(path, "expected number");
}

std::string string_at(const json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key)) schema_error(path + "." + key, "missing");
  if (!obj[key].is_string()) schema_error(path + "." + key, "expected string");
  return obj[key].get<std::string>();
}

bool nearly(double a, double b) { return std::fabs(a - b) <= 1e-9; }

std::vector<std::string> strip_fence_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).rfind("```", 0) == 0) continue;
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

const char* to_string(NavAction action) {
  switch (action) {
    case NavAction::overview: return "overview";
    case NavAction::move: return "move";
    case NavAction::zoom_in: return "zoom_in";
    case NavAction::zoom_out: return "zoom_out";
  }
  return "overview";
}

std::optional<NavAction> nav_action_from(std::string_view name) {
  if (name == "overview") return NavAction::overview;
  if (name == "move") return NavAction::move;
  if (name == "zoom_in") return NavAction::zoom_in;
  if (name == "zoom_out") return NavAction::zoom_out;
  return std::nullopt;
}

std::vector<long long> RegionSelection::all_region_ids() const {
  std::vector<long long> ids;
  for (const RegionGroup& group : groups) {
    ids.insert(ids.end(), group.region_ids.begin(), group.region_ids.end());
  }
  return ids;
}

RegionSelection parse_region_selection(const std::string& text) {
  auto doc = extract_first_json_object(text);
  if (!doc) throw Error(Errc::no_json_found, "no JSON object in response");

  RegionSelection selection;
  if (!doc->contains("groups") || !(*doc)["groups"].is_array()) {
    schema_error("groups", "missing or not an array");
  }
  std::set<long long> seen;
  int gi = 0;
  for (const json& g : (*doc)["groups"]) {
    std::string path = "groups[" + std::to_string(gi++) + "]";
    if (!g.is_object()) schema_error(path, "expected object");
    RegionGroup group;
    group.name = string_at(g, "name", path);
    if (!g.contains("region_ids") || !g["region_ids"].is_array()) {
      schema_error(path + ".region_ids", "missing or not an array");
    }
    for (const json& id : g["region_ids"]) {
      if (!id.is_number_integer()) {
        schema_error(path + ".region_ids", "expected integer ids");
      }
      long long v = id.get<long long>();
      if (!seen.insert(v).second) {
        throw Error(Errc::duplicate_region_id,
                    "region " + std::to_string(v) + " appears in two groups");
      }
      group.region_ids.push_back(v);
    }
    if (!g.contains("needs_high_mag") || !g["needs_high_mag"].is_boolean()) {
      schema_error(path + ".needs_high_mag", "missing or not a boolean");
    }
    group.needs_high_mag = g["needs_high_mag"].get<bool>();
    selection.groups.push_back(std::move(group));
  }

  if (!doc->contains("priority") || !(*doc)["priority"].is_array()) {
    schema_error("priority", "missing or not an array");
  }
  std::set<long long> in_priority;
  int pi = 0;
  for (const json& id : (*doc)["priority"]) {
    std::string path = "priority[" + std::to_string(pi++) + "]";
    if (!id.is_number_integer()) schema_error(path, "expected integer id");
    long long v = id.get<long long>();
    if (!seen.count(v)) schema_error(path, "id " + std::to_string(v) + " not in any group");
    if (!in_priority.insert(v).second) {
      schema_error(path, "id " + std::to_string(v) + " repeated in priority");
    }
    selection.priority.push_back(v);
  }
  return selection;
}

NavPlan parse_nav_plan(const std::string& text) {
  auto doc = extract_first_json_object(text);
  if (!doc) throw Error(Errc::no_json_found, "no JSON object in response");
  if (!doc->contains("steps") || !(*doc)["steps"].is_array()) {
    schema_error("steps", "missing or not an array");
  }
  const json& steps = (*doc)["steps"];
  if (steps.empty()) schema_error("steps", "plan has no steps");

  NavPlan plan;
  int si = 0;
  for (const json& s : steps) {
    std::string path = "steps[" + std::to_string(si++) + "]";
    if (!s.is_object()) schema_error(path, "expected object");
    NavStep step;
    std::string action = string_at(s, "action", path);
    auto parsed = nav_action_from(action);
    if (!parsed) schema_error(path + ".action", "unknown action \"" + action + "\"");
    step.action = *parsed;

    if (!s.contains("center") || !s["center"].is_array() || s["center"].size() != 2) {
      schema_error(path + ".center", "expected [x, y]");
    }
    step.viewport.cx = number_at(s["center"][0], path + ".center[0]");
    step.viewport.cy = number_at(s["center"][1], path + ".center[1]");
    if (!s.contains("magnification")) schema_error(path + ".magnification", "missing");
    step.viewport.magnification = number_at(s["magnification"], path + ".magnification");
    step.rationale = s.contains("rationale") && s["rationale"].is_string()
                         ? s["rationale"].get<std::string>()
                         : "";

    if (step.viewport.cx < 0.0 || step.viewport.cx > 1.0 ||
        step.viewport.cy < 0.0 || step.viewport.cy > 1.0) {
      throw Error(Errc::invalid_viewport, path + ": center outside [0,1]");
    }
    if (!(step.viewport.magnification >= 1.0)) {
      throw Error(Errc::invalid_viewport, path + ": magnification below 1");
    }
    plan.steps.push_back(std::move(step));
  }

  if (plan.steps.front().action != NavAction::overview) {
    NavStep synthetic;
    synthetic.action = NavAction::overview;
    synthetic.viewport = {0.5, 0.5, 1.0};
    synthetic.rationale = "auto-inserted overview";
    plan.steps.insert(plan.steps.begin(), synthetic);
    plan.overview_inserted = true;
  }

  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const NavStep& step = plan.steps[i];
    double m = step.viewport.magnification;
    std::string path = "steps[" + std::to_string(i) + "]";
    if (step.action == NavAction::overview) {
      if (!nearly(m, 1.0)) {
        throw Error(Errc::inconsistent_action, path + ": overview requires 1x");
      }
      continue;
    }
    double prev = plan.steps[i - 1].viewport.magnification;
    switch (step.action) {
      case NavAction::zoom_in:
        if (!(m > prev + 1e-9)) {
          throw Error(Errc::inconsistent_action,
                      path + ": zoom_in must increase magnification");
        }
        break;
      case NavAction::zoom_out:
        if (!(m < prev - 1e-9)) {
          throw Error(Errc::inconsistent_action,
                      path + ": zoom_out must decrease magnification");
        }
        break;
      case NavAction::move: {
        if (!nearly(m, prev)) {
          throw Error(Errc::inconsistent_action,
                      path + ": move must keep magnification");
        }
        const Viewport& before = plan.steps[i - 1].viewport;
        if (nearly(step.viewport.cx, before.cx) && nearly(step.viewport.cy, before.cy)) {
          throw Error(Errc::inconsistent_action, path + ": move must change center");
        }
        break;
      }
      case NavAction::overview:
        break;
    }
  }
  return plan;
}

std::string serialize_nav_plan(const NavPlan& plan) {
  std::ostringstream out;
  out << "{\"steps\":[";
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const NavStep& step = plan.steps[i];
    if (i > 0) out << ',';
    out << "{\"action\":\"" << to_string(step.action) << "\""
        << ",\"center\":[" << fixed_decimal(std::llround(step.viewport.cx * 1000), 3)
        << ',' << fixed_decimal(std::llround(step.viewport.cy * 1000), 3) << ']'
        << ",\"magnification\":"
        << fixed_decimal(std::llround(step.viewport.magnification * 100), 2)
        << ",\"rationale\":" << nlohmann::json(step.rationale).dump() << '}';
  }
  out << "]}";
  return out.str();
}

ReasoningResult parse_reasoning_result(const std::string& text,
                                       std::optional<int> n_options) {
  auto doc = extract_first_json_object(text);
  if (!doc) throw Error(Errc::no_json_found, "no JSON object in response");

  ReasoningResult result;
  if (!doc->contains("step_notes") || !(*doc)["step_notes"].is_array()) {
    schema_error("step_notes", "missing or not an array");
  }
  int ni = 0;
  for (const json& note : (*doc)["step_notes"]) {
    if (!note.is_string()) {
      schema_error("step_notes[" + std::to_string(ni) + "]", "expected string");
    }
    result.step_notes.push_back(note.get<std::string>());
    ++ni;
  }
  result.conclusion = string_at(*doc, "conclusion", "");
  if (doc->contains("answer_index") && !(*doc)["answer_index"].is_null()) {
    if (!(*doc)["answer_index"].is_number_integer()) {
      schema_error("answer_index", "expected integer");
    }
    int index = (*doc)["answer_index"].get<int>();
    if (n_options && (index < 0 || index >= *n_options)) {
      schema_error("answer_index",
                   std::to_string(index) + " outside [0, " +
                       std::to_string(*n_options) + ")");
    }
    result.answer_index = index;
  }
  return result;
}

int extract_answer(const std::string& text, int n_options,
                   const std::vector<std::string>& options) {
  if (n_options < 2 || n_options > 8) {
    throw Error(Errc::invalid_args, "n_options must be in [2, 8]");
  }
  if (!options.empty() && int(options.size()) != n_options) {
    throw Error(Errc::invalid_args, "options size disagrees with n_options");
  }

  auto letter_index = [&](char c) -> int {
    int idx = std::toupper(static_cast<unsigned char>(c)) - 'A';
    return (idx >= 0 && idx < n_options) ? idx : -1;
  };

  std::vector<std::string> lines = strip_fence_lines(text);
  std::string clean;
  for (const std::string& line : lines) clean += line + "\n";
  while (!clean.empty() && std::isspace(static_cast<unsigned char>(clean.back()))) {
    clean.pop_back();
  }

  // Rule 1: last "Answer: <letter>".
  int found = -1;
  std::string lower = to_lower(clean);
  for (std::size_t pos = lower.find("answer"); pos != std::string::npos;
       pos = lower.find("answer", pos + 1)) {
    std::size_t i = pos + 6;
    while (i < clean.size() && (clean[i] == ' ' || clean[i] == '\t')) ++i;
    if (i >= clean.size() || clean[i] != ':') continue;
    ++i;
    while (i < clean.size() &&
           (clean[i] == ' ' || clean[i] == '\t' || clean[i] == '*' ||
            clean[i] == '(' || clean[i] == '[')) {
      ++i;
    }
    if (i >= clean.size()) continue;
    int idx = letter_index(clean[i]);
    if (idx < 0) continue;
    if (i + 1 < clean.size() &&
        std::isalnum(static_cast<unsigned char>(clean[i + 1]))) {
      continue;  // letter is the start of a longer word
    }
    found = idx;
  }
  if (found >= 0) return found;

  // Rule 2: last standalone line that is a single option letter.
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    std::string t = trim(*it);
    if (t.size() >= 2 && t.front() == '(' && t.back() == ')') {
      t = t.substr(1, t.size() - 2);
    }
    while (!t.empty() && (t.back() == '.' || t.back() == ')')) t.pop_back();
    if (t.size() != 1) continue;
    int idx = letter_index(t[0]);
    if (idx >= 0) return idx;
  }

  // Rule 3: exactly one option's full text in the final paragraph.
  if (!options.empty()) {
    std::size_t cut = clean.rfind("\n\n");
    std::string paragraph =
        to_lower(cut == std::string::npos ? clean : clean.substr(cut + 2));
    int match = -1;
    int matches = 0;
    for (int i = 0; i < n_options; ++i) {
      if (paragraph.find(to_lower(options[std::size_t(i)])) != std::string::npos) {
        match = i;
        ++matches;
      }
    }
    if (matches > 1) {
      throw Error(Errc::unparseable, "several option texts in final paragraph");
    }
    if (matches == 1) return match;
  }

  throw Error(Errc::unparseable, "no answer rule matched");
}

}  // namespace pathnav
