#include "pathnav/dataset.hpp"

#include <set>
#include <sstream>

#include "pathnav/nav_dsl.hpp"
#include "pathnav/util.hpp"

namespace pathnav {

using nlohmann::json;

namespace {

VqaRecord record_from_json(const json& doc, int line_no) {
  auto fail = [line_no](const std::string& what) -> Error {
    return Error(Errc::schema_violation,
                 "line " + std::to_string(line_no) + ": " + what);
  };
  VqaRecord record;
  try {
    record.record_id = doc.at("record_id").get<std::string>();
    record.question = doc.at("question").get<std::string>();
    record.subset = doc.value("subset", "default");
    for (const json& opt : doc.at("options")) {
      record.options.push_back(opt.get<std::string>());
    }
    record.answer_index = doc.at("answer_index").get<int>();
    if (doc.contains("region_ref")) {
      const json& ref = doc["region_ref"];
      if (ref.is_string()) {
        record.region_path = ref.get<std::string>();
      } else if (ref.is_object()) {
        record.slide_id = ref.at("slide_id").get<std::string>();
        record.region_id = ref.at("region_id").get<long long>();
      } else {
        throw fail("region_ref must be a path or {slide_id, region_id}");
      }
    }
  } catch (const json::exception& e) {
    throw fail(e.what());
  }
  if (record.options.size() < 2 || record.options.size() > 8) {
    throw fail("options must have 2 to 8 entries");
  }
  std::set<std::string> distinct(record.options.begin(), record.options.end());
  if (distinct.size() != record.options.size()) {
    throw fail("options must be pairwise distinct");
  }
  if (record.answer_index < 0 ||
      record.answer_index >= int(record.options.size())) {
    throw Error(Errc::bad_answer_index,
                "line " + std::to_string(line_no) + ": answer_index " +
                    std::to_string(record.answer_index) + " outside [0, " +
                    std::to_string(record.options.size()) + ")");
  }
  return record;
}

}  // namespace

std::vector<VqaRecord> parse_vqa_manifest(const std::string& jsonl) {
  std::vector<VqaRecord> records;
  std::set<std::string> ids;
  std::istringstream in(jsonl);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded()) {
      throw Error(Errc::schema_violation,
                  "line " + std::to_string(line_no) + ": invalid JSON");
    }
    VqaRecord record = record_from_json(doc, line_no);
    if (!ids.insert(record.record_id).second) {
      throw Error(Errc::duplicate_record_id,
                  "line " + std::to_string(line_no) + ": record \"" +
                      record.record_id + "\" already defined");
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<VqaRecord> load_vqa_manifest(const std::filesystem::path& path) {
  return parse_vqa_manifest(read_text_file(path));
}

std::string vqa_manifest_jsonl(const std::vector<VqaRecord>& records) {
  std::ostringstream out;
  for (const VqaRecord& r : records) {
    json ref;
    if (!r.region_path.empty()) {
      ref = r.region_path;
    } else {
      ref = json{{"slide_id", r.slide_id}, {"region_id", r.region_id}};
    }
    out << json{{"record_id", r.record_id},
                {"region_ref", ref},
                {"question", r.question},
                {"options", r.options},
                {"answer_index", r.answer_index},
                {"subset", r.subset}}
               .dump()
        << '\n';
  }
  return out.str();
}

std::string format_options(const std::vector<std::string>& options) {
  std::string out;
  for (std::size_t i = 0; i < options.size(); ++i) {
    out += char('A' + i);
    out += ". ";
    out += options[i];
    if (i + 1 < options.size()) out += '\n';
  }
  return out;
}

ShortcutFilterOutcome shortcut_filter(const std::vector<VqaRecord>& records,
                                      Backend& first, Backend& second,
                                      const PromptPack& prompts,
                                      double temperature) {
  if (&first == &second || first.profile().name == second.profile().name) {
    throw Error(Errc::invalid_args,
                "shortcut filter needs two distinct backends");
  }

  ShortcutFilterOutcome outcome;
  for (const VqaRecord& record : records) {
    std::string prompt =
        prompts.render("educated_guess", {{"question", record.question},
                                          {"options", format_options(record.options)}});
    CompletionRequest request;
    request.messages.push_back(ChatMessage::user_text(prompt));
    request.temperature = temperature;

    json entry{{"record_id", record.record_id}};
    json answers = json::array();
    bool failed = false;
    bool both_correct = true;
    Backend* backends[2] = {&first, &second};
    for (int b = 0; b < 2 && !failed; ++b) {
      CallMeta meta{"filter/" + record.record_id, "educated_guess"};
      try {
        CompletionResult result = backends[b]->complete(request, meta);
        int answer = extract_answer(result.text, int(record.options.size()),
                                    record.options);
        answers.push_back(answer);
        both_correct = both_correct && answer == record.answer_index;
      } catch (const Error& e) {
        answers.push_back(nullptr);
        entry["warning"] = e.what();
        outcome.warnings.push_back("record " + record.record_id +
                                   " kept after backend failure: " + e.what());
        failed = true;  // fail-open
      }
    }
    entry["answers"] = answers;
    bool dropped = !failed && both_correct;
    entry["dropped"] = dropped;
    outcome.log.push_back(std::move(entry));
    if (dropped) {
      outcome.dropped.push_back(record);
    } else {
      outcome.kept.push_back(record);
    }
  }
  return outcome;
}

ReportPairing pair_reports(const std::vector<std::string>& slide_ids,
                           const std::filesystem::path& reports_dir) {
  ReportPairing out;
  for (const std::string& slide_id : slide_ids) {
    std::filesystem::path file = reports_dir / (slide_id + ".txt");
    if (std::filesystem::exists(file)) {
      out.pairs.push_back({slide_id, read_text_file(file)});
    } else {
      out.unmatched_slides.push_back(slide_id);
    }
  }
  return out;
}

}  // namespace pathnav
