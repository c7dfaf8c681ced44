#include "pathnav/prompts.hpp"

#include "pathnav/errors.hpp"
#include "pathnav/util.hpp"

namespace pathnav {

namespace {

struct StageSpec {
  const char* name;
  std::vector<const char*> required;
  const char* text;
};

const StageSpec kStages[] = {
    {"global_screening",
     {"region_ids"},
     R"(You are an experienced pathologist screening a whole-slide image.
The attached overview shows the slide with candidate regions outlined and
numbered. Available region ids: {{region_ids}}.

Group the regions by what they appear to contain, decide which groups need
high-magnification examination, and order the regions you would examine
first. Ignore glass, background and artifacts.

Reply with a single JSON object:
{"groups": [{"name": "<short description>", "region_ids": [<int>, ...],
"needs_high_mag": <true|false>}, ...],
 "priority": [<region ids in recommended viewing order>]}

Every region id may appear in at most one group. List in "priority" only ids
that appear in a group.)"},

    {"navigation_planning",
     {"step_count"},
     R"(You are an experienced pathologist examining one huge tissue region.
The attached overview shows the region at 1x with a coordinate grid at 0.1
intervals; (0.0, 0.0) is the top-left corner and (1.0, 1.0) the bottom-right.

Plan a navigation path of at most {{step_count}} steps that starts with a 1x
overview and then moves, zooms in, or zooms out to the fields of view most
likely to yield diagnostic insight. Magnification is relative to this region:
1x shows everything, 2x shows a quarter, higher values show less.

Reply with a single JSON object:
{"steps": [{"action": "overview"|"move"|"zoom_in"|"zoom_out",
"center": [<x>, <y>], "magnification": <number >= 1>,
"rationale": "<why this field of view>"}, ...]}

Rules: the first step is an overview at magnification 1; zoom_in must
increase magnification, zoom_out must decrease it; move keeps magnification
and changes the center.)"},

    {"navigation_planning_vqa",
     {"question", "options", "step_count"},
     R"(You are an experienced pathologist examining one huge tissue region to
answer a specific question. The attached overview shows the region at 1x with
a coordinate grid at 0.1 intervals; (0.0, 0.0) is the top-left corner and
(1.0, 1.0) the bottom-right.

Question: {{question}}
Options:
{{options}}

Plan a navigation path of at most {{step_count}} steps that starts with a 1x
overview and then visits the fields of view needed to answer the question.
Magnification is relative to this region: 1x shows everything, 2x shows a
quarter, higher values show less.

Reply with a single JSON object:
{"steps": [{"action": "overview"|"move"|"zoom_in"|"zoom_out",
"center": [<x>, <y>], "magnification": <number >= 1>,
"rationale": "<why this field of view helps answer the question>"}, ...]}

Rules: the first step is an overview at magnification 1; zoom_in must
increase magnification, zoom_out must decrease it; move keeps magnification
and changes the center.)"},

    {"reasoning",
     {"step_count"},
     R"(You are an experienced pathologist. You planned a navigation path over
one huge tissue region and the {{step_count}} fields of view along that path
follow, each preceded by its step metadata (action, center, magnification,
rationale).

Work through the views in order, integrating observations across
magnifications the way you would at the microscope, then synthesize a
diagnostic conclusion.

Reply with a single JSON object:
{"step_notes": ["<observation for view 1>", ...one note per view...],
 "conclusion": "<integrated diagnostic description and impression>"})"},

    {"reasoning_vqa",
     {"question", "options"},
     R"(You are an experienced pathologist answering a question about one huge
tissue region. The fields of view along your planned navigation path follow,
each preceded by its step metadata (action, center, magnification,
rationale).

Question: {{question}}
Options:
{{options}}

Work through the views in order, note what each contributes to answering the
question, compare the options, and commit to exactly one.

Reply with a single JSON object:
{"step_notes": ["<observation for view 1>", ...one note per view...],
 "conclusion": "<reasoning that weighs the options>",
 "answer_index": <0-based index of the chosen option>})"},

    {"wsi_classification",
     {"labels", "descriptions"},
     R"(You are an experienced pathologist. Region-by-region diagnostic
descriptions of one whole-slide image follow:

{{descriptions}}

Classify the slide into exactly one of these labels:
{{labels}}

Reply with the chosen label verbatim and nothing else.)"},

    {"educated_guess",
     {"question", "options"},
     R"(Answer the following multiple-choice pathology question. No image is
provided; use only the text. If the text alone is insufficient, make your
best educated guess. Finish with a line "Answer: <letter>".

Question: {{question}}
Options:
{{options}})"},
};

}  // namespace

const std::vector<std::string>& PromptPack::stages() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const StageSpec& s : kStages) out.push_back(s.name);
    return out;
  }();
  return names;
}

PromptPack PromptPack::builtin() {
  PromptPack pack;
  for (const StageSpec& s : kStages) pack.templates_[s.name] = s.text;
  return pack;
}

PromptPack PromptPack::load_dir(const std::filesystem::path& dir) {
  PromptPack pack = builtin();
  for (const StageSpec& s : kStages) {
    std::filesystem::path file = dir / (std::string(s.name) + ".txt");
    if (std::filesystem::exists(file)) {
      pack.templates_[s.name] = read_text_file(file);
    }
  }
  pack.validate();
  return pack;
}

void PromptPack::validate() const {
  for (const StageSpec& s : kStages) {
    const std::string& text = templates_.at(s.name);
    for (const char* placeholder : s.required) {
      std::string token = "{{" + std::string(placeholder) + "}}";
      if (text.find(token) == std::string::npos) {
        throw Error(Errc::schema_violation,
                    std::string(s.name) + " template lacks " + token);
      }
    }
  }
}

const std::string& PromptPack::template_for(const std::string& stage) const {
  auto it = templates_.find(stage);
  if (it == templates_.end()) {
    throw Error(Errc::invalid_args, "unknown prompt stage \"" + stage + "\"");
  }
  return it->second;
}

std::string PromptPack::render(
    const std::string& stage,
    const std::vector<std::pair<std::string, std::string>>& vars) const {
  std::string out = template_for(stage);
  for (const auto& [name, value] : vars) {
    std::string token = "{{" + name + "}}";
    std::size_t pos = 0;
    while ((pos = out.find(token, pos)) != std::string::npos) {
      out.replace(pos, token.size(), value);
      pos += value.size();
    }
  }
  std::size_t open = out.find("{{");
  if (open != std::string::npos && out.find("}}", open) != std::string::npos) {
    throw Error(Errc::invalid_args,
                "unresolved placeholder in stage \"" + stage + "\": " +
                    out.substr(open, out.find("}}", open) - open + 2));
  }
  return out;
}

void PromptPack::write_dir(const std::filesystem::path& dir) const {
  for (const auto& [stage, text] : templates_) {
    write_text_file(dir / (stage + ".txt"), text);
  }
}

}  // namespace pathnav
