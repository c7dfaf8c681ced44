#pragma once

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pathnav/backend.hpp"
#include "pathnav/dataset.hpp"
#include "pathnav/nav_dsl.hpp"
#include "pathnav/prompts.hpp"
#include "pathnav/slide.hpp"
#include "pathnav/tiler.hpp"
#include "pathnav/view_ops.hpp"

namespace pathnav {

struct RunConfig {
  int out_res = kDefaultViewResolution;
  int region_size = kDefaultRegionSize;
  double overlap = 0.05;
  double min_tissue = 0.10;
  double tissue_s_min = 0.08;
  double tissue_v_max = 0.94;
  int thumbnail_factor = 32;
  int max_steps = 12;
  int attempts = 8;
  double temperature = 0.0;          // evaluation runs
  double attempt_temperature = 0.8;  // pass@k generation runs
  int workers = 1;
  double max_magnification = 0.0;    // 0 -> region_size / out_res
  bool skip_low_mag_groups = false;
  long long seed = 0;
  std::filesystem::path output_dir;  // empty: keep everything in memory

  double magnification_cap() const;
  void validate() const;
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& doc);
};

// One backend call per line; images appear as content hashes.
using Transcript = std::vector<nlohmann::json>;

struct RegionReport {
  long long region_id = -1;
  NavPlan plan;
  std::vector<ViewImage> views;
  ReasoningResult reasoning;
  std::optional<int> answer_index;
  std::optional<std::string> error;  // per-region failure in a WSI run
  Transcript transcript;
  double planning_seconds = 0.0;
  double reasoning_seconds = 0.0;
};

struct WsiReport {
  std::string slide_id;
  RegionSelection selection;
  std::vector<RegionReport> region_reports;  // priority order
  std::optional<std::string> predicted_label;
  std::vector<std::string> warnings;
  Transcript screening_transcript;
};

// Stage 1: thumbnail with region boxes and ids goes to the backend; the
// parsed selection is validated against the plan's region ids.
RegionSelection run_global_screening(const Image& thumbnail,
                                     const TilingPlan& plan, Backend& backend,
                                     const PromptPack& prompts,
                                     const RunConfig& config,
                                     Transcript* transcript = nullptr,
                                     const std::string& conversation = "screening");

// Stage 2: grid-annotated 1x overview goes to the backend; plans beyond
// max_steps are truncated and flagged.
NavPlan run_navigation_planning(const RegionImage& region, Backend& backend,
                                const PromptPack& prompts,
                                const RunConfig& config,
                                const VqaRecord* question = nullptr,
                                Transcript* transcript = nullptr,
                                const std::string& conversation = "region");

// One crop per step, order preserved. Requests beyond the magnification cap
// or outside the region are clamped, never rejected.
std::vector<ViewImage> execute_plan(const RegionImage& region,
                                    const NavPlan& plan,
                                    int out_res = kDefaultViewResolution,
                                    double max_magnification = 0.0);

// Stage 3: views with step metadata, batched under the backend image limit
// within one conversation. In VQA mode the structured answer_index wins;
// otherwise the extractor runs on the conclusion.
ReasoningResult run_reasoning(const std::vector<ViewImage>& views,
                              const NavPlan& plan, Backend& backend,
                              const PromptPack& prompts,
                              const RunConfig& config,
                              const VqaRecord* question = nullptr,
                              Transcript* transcript = nullptr,
                              const std::string& conversation = "region");

// Stages 2-3 composed over one region.
RegionReport run_region(const RegionImage& region, Backend& backend,
                        const PromptPack& prompts, const RunConfig& config,
                        const VqaRecord* question = nullptr,
                        const std::string& conversation = "");

// Reruns run_region n times at the generation temperature, one conversation
// per attempt.
std::vector<RegionReport> run_region_attempts(const RegionImage& region,
                                              Backend& backend,
                                              const PromptPack& prompts,
                                              const RunConfig& config,
                                              const VqaRecord* question,
                                              int n_attempts);

// Full pipeline: tiling, tissue filter, screening, then run_region per
// priority region (concurrently up to config.workers). Per-region failures
// are recorded and the run continues.
WsiReport run_wsi(const SlidePyramid& pyramid, Backend& backend,
                  const PromptPack& prompts, const RunConfig& config);

// Matches the backend's reply against the label list, longest label first
// so labels containing other labels resolve cleanly.
std::string classify_wsi(const WsiReport& report,
                         const std::vector<std::string>& labels,
                         Backend& backend, const PromptPack& prompts,
                         const RunConfig& config,
                         Transcript* transcript = nullptr);
std::string match_label(const std::string& response,
                        const std::vector<std::string>& labels);

nlohmann::json region_report_json(const RegionReport& report);
nlohmann::json wsi_report_json(const WsiReport& report);
WsiReport wsi_report_from_json(const nlohmann::json& doc);
nlohmann::json selection_json(const RegionSelection& selection);

// run/<slide_id>/ layout: selection.json, region_<id>/{plan.json,
// reasoning.json, views/step_<k>.png}, report.json, transcript.jsonl,
// timings.json. report.json and transcript.jsonl carry no wall-clock data.
void persist_region_report(const RegionReport& report,
                           const std::filesystem::path& dir);
std::filesystem::path persist_wsi_run(const WsiReport& report,
                                      const std::filesystem::path& out_dir);

}  // namespace pathnav
