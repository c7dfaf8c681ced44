#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include "pathnav/backend.hpp"
#include "pathnav/prompts.hpp"

namespace pathnav {

struct VqaRecord {
  std::string record_id;
  std::string region_path;         // set when region_ref is a path
  std::string slide_id;            // set when region_ref is (slide, region)
  long long region_id = -1;
  std::string question;
  std::vector<std::string> options;  // 2 to 8, pairwise distinct
  int answer_index = 0;
  std::string subset;
};

// JSONL, one record per line:
// {"record_id","region_ref","question","options","answer_index","subset"}
// where region_ref is a path string or {"slide_id","region_id"}.
std::vector<VqaRecord> load_vqa_manifest(const std::filesystem::path& path);
std::vector<VqaRecord> parse_vqa_manifest(const std::string& jsonl);
std::string vqa_manifest_jsonl(const std::vector<VqaRecord>& records);

// "A. first option\nB. second option" — the option list as shown to backends.
std::string format_options(const std::vector<std::string>& options);

struct ShortcutFilterOutcome {
  std::vector<VqaRecord> kept;
  std::vector<VqaRecord> dropped;
  std::vector<nlohmann::json> log;  // one entry per record
  std::vector<std::string> warnings;
};

// Text-only screening: each question goes to both backends without the
// image; records both answer correctly are dropped. Backend failures keep
// the record (fail-open) with a warning.
ShortcutFilterOutcome shortcut_filter(const std::vector<VqaRecord>& records,
                                      Backend& first, Backend& second,
                                      const PromptPack& prompts,
                                      double temperature = 0.0);

struct ReportPair {
  std::string slide_id;
  std::string report_text;
};

struct ReportPairing {
  std::vector<ReportPair> pairs;
  std::vector<std::string> unmatched_slides;
};

// Pairs slide ids with <slide_id>.txt files in a directory.
ReportPairing pair_reports(const std::vector<std::string>& slide_ids,
                           const std::filesystem::path& reports_dir);

}  // namespace pathnav
