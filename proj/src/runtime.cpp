#include "pathnav/runtime.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <thread>

#include "pathnav/grid_overlay.hpp"
#include "pathnav/image_io.hpp"
#include "pathnav/util.hpp"

namespace pathnav {

using nlohmann::json;

double RunConfig::magnification_cap() const {
  if (max_magnification > 0.0) return std::max(1.0, max_magnification);
  return std::max(1.0, double(region_size) / double(out_res));
}

void RunConfig::validate() const {
  if (out_res < 1) throw Error(Errc::invalid_args, "out_res must be >= 1");
  if (region_size < 1) throw Error(Errc::invalid_args, "region_size must be >= 1");
  if (!(overlap >= 0.0 && overlap < 1.0)) {
    throw Error(Errc::invalid_overlap, "overlap must be in [0, 1)");
  }
  if (min_tissue < 0.0 || min_tissue > 1.0) {
    throw Error(Errc::invalid_args, "min_tissue must be in [0, 1]");
  }
  if (thumbnail_factor < 1) {
    throw Error(Errc::invalid_args, "thumbnail_factor must be >= 1");
  }
  if (max_steps < 1) throw Error(Errc::invalid_args, "max_steps must be >= 1");
  if (attempts < 1) throw Error(Errc::invalid_args, "attempts must be >= 1");
  if (temperature < 0.0 || temperature > 2.0 || attempt_temperature < 0.0 ||
      attempt_temperature > 2.0) {
    throw Error(Errc::invalid_args, "temperature must be in [0, 2]");
  }
  if (workers < 1) throw Error(Errc::invalid_args, "workers must be >= 1");
}

json RunConfig::to_json() const {
  return json{{"out_res", out_res},
              {"region_size", region_size},
              {"overlap", overlap},
              {"min_tissue", min_tissue},
              {"tissue_s_min", tissue_s_min},
              {"tissue_v_max", tissue_v_max},
              {"thumbnail_factor", thumbnail_factor},
              {"max_steps", max_steps},
              {"attempts", attempts},
              {"temperature", temperature},
              {"attempt_temperature", attempt_temperature},
              {"workers", workers},
              {"max_magnification", max_magnification},
              {"skip_low_mag_groups", skip_low_mag_groups},
              {"seed", seed},
              {"output_dir", output_dir.string()}};
}

RunConfig RunConfig::from_json(const json& doc) {
  RunConfig config;
  config.out_res = doc.value("out_res", config.out_res);
  config.region_size = doc.value("region_size", config.region_size);
  config.overlap = doc.value("overlap", config.overlap);
  config.min_tissue = doc.value("min_tissue", config.min_tissue);
  config.tissue_s_min = doc.value("tissue_s_min", config.tissue_s_min);
  config.tissue_v_max = doc.value("tissue_v_max", config.tissue_v_max);
  config.thumbnail_factor = doc.value("thumbnail_factor", config.thumbnail_factor);
  config.max_steps = doc.value("max_steps", config.max_steps);
  config.attempts = doc.value("attempts", config.attempts);
  config.temperature = doc.value("temperature", config.temperature);
  config.attempt_temperature =
      doc.value("attempt_temperature", config.attempt_temperature);
  config.workers = doc.value("workers", config.workers);
  config.max_magnification =
      doc.value("max_magnification", config.max_magnification);
  config.skip_low_mag_groups =
      doc.value("skip_low_mag_groups", config.skip_low_mag_groups);
  config.seed = doc.value("seed", config.seed);
  config.output_dir = doc.value("output_dir", config.output_dir.string());
  config.validate();
  return config;
}

namespace {

CompletionResult call_backend(Backend& backend, const CompletionRequest& request,
                              const CallMeta& meta, Transcript* transcript) {
  json entry{{"conversation", meta.conversation_id},
             {"stage", meta.stage},
             {"seq", transcript ? int(transcript->size()) : 0},
             {"request", request_transcript_json(request)}};
  entry["request"]["model"] = backend.profile().model;
  try {
    CompletionResult result = backend.complete(request, meta);
    entry["response"] = result.text;
    entry["retries"] = result.retries;
    entry["request_id"] = result.request_id;
    if (transcript) transcript->push_back(std::move(entry));
    return result;
  } catch (const Error& e) {
    entry["error"] = e.what();
    if (transcript) transcript->push_back(std::move(entry));
    throw;
  }
}

std::string viewport_text(const Viewport& v) {
  return "center (" + fixed_decimal(std::llround(v.cx * 1000), 3) + ", " +
         fixed_decimal(std::llround(v.cy * 1000), 3) + ") at " +
         fixed_decimal(std::llround(v.magnification * 100), 2) + "x";
}

void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  int n_threads = std::min<std::size_t>(std::size_t(std::max(1, workers)), count);
  if (n_threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(n_threads));
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        body(i);
      }
    });
  }
  for (std::thread& t : pool) t.join();
}

json reasoning_json(const ReasoningResult& reasoning) {
  json out{{"step_notes", reasoning.step_notes},
           {"conclusion", reasoning.conclusion}};
  out["answer_index"] =
      reasoning.answer_index ? json(*reasoning.answer_index) : json(nullptr);
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

RegionSelection run_global_screening(const Image& thumbnail,
                                     const TilingPlan& plan, Backend& backend,
                                     const PromptPack& prompts,
                                     const RunConfig& config,
                                     Transcript* transcript,
                                     const std::string& conversation) {
  if (plan.specs.empty()) {
    throw Error(Errc::invalid_args, "screening needs at least one region");
  }

  Image overlay = thumbnail;
  std::vector<std::pair<PixelRect, std::string>> boxes;
  std::string id_list;
  for (const RegionSpec& spec : plan.specs) {
    PixelRect rect;
    rect.x = int(std::llround(double(spec.x) * thumbnail.width / plan.width_px));
    rect.y = int(std::llround(double(spec.y) * thumbnail.height / plan.height_px));
    rect.w = std::max(1, int(std::llround(double(spec.w) * thumbnail.width / plan.width_px)));
    rect.h = std::max(1, int(std::llround(double(spec.h) * thumbnail.height / plan.height_px)));
    rect.x = std::min(rect.x, thumbnail.width - rect.w);
    rect.y = std::min(rect.y, thumbnail.height - rect.h);
    boxes.emplace_back(rect, std::to_string(spec.region_id));
    if (!id_list.empty()) id_list += ", ";
    id_list += std::to_string(spec.region_id);
  }
  draw_labeled_boxes(overlay, boxes, {0, 0, 0});

  CompletionRequest request;
  request.temperature = config.temperature;
  if (config.seed != 0) request.seed = config.seed;
  ChatMessage message;
  message.role = Role::user;
  message.parts.push_back(MessagePart::make_text(
      prompts.render("global_screening", {{"region_ids", id_list}})));
  message.parts.push_back(MessagePart::make_image(std::move(overlay)));
  request.messages.push_back(std::move(message));

  CompletionResult result = call_backend(
      backend, request, {conversation, "global_screening"}, transcript);
  RegionSelection selection = parse_region_selection(result.text);

  std::set<long long> known;
  for (const RegionSpec& spec : plan.specs) known.insert(spec.region_id);
  for (long long id : selection.all_region_ids()) {
    if (!known.count(id)) {
      throw Error(Errc::unknown_region_id,
                  "selection references region " + std::to_string(id) +
                      " absent from the plan");
    }
  }
  return selection;
}

NavPlan run_navigation_planning(const RegionImage& region, Backend& backend,
                                const PromptPack& prompts,
                                const RunConfig& config,
                                const VqaRecord* question,
                                Transcript* transcript,
                                const std::string& conversation) {
  ViewImage overview = crop_viewport(region, {0.5, 0.5, 1.0}, config.out_res);
  Image annotated = annotate_grid(overview.pixels, 0.1);

  std::string prompt =
      question
          ? prompts.render("navigation_planning_vqa",
                           {{"question", question->question},
                            {"options", format_options(question->options)},
                            {"step_count", std::to_string(config.max_steps)}})
          : prompts.render("navigation_planning",
                           {{"step_count", std::to_string(config.max_steps)}});

  CompletionRequest request;
  request.temperature = config.temperature;
  if (config.seed != 0) request.seed = config.seed;
  ChatMessage message;
  message.role = Role::user;
  message.parts.push_back(MessagePart::make_text(std::move(prompt)));
  message.parts.push_back(MessagePart::make_image(std::move(annotated)));
  request.messages.push_back(std::move(message));

  CompletionResult result = call_backend(
      backend, request, {conversation, "navigation_planning"}, transcript);
  NavPlan plan = parse_nav_plan(result.text);
  if (int(plan.steps.size()) > config.max_steps) {
    plan.steps.resize(std::size_t(config.max_steps));
    plan.truncated = true;
  }
  return plan;
}

std::vector<ViewImage> execute_plan(const RegionImage& region,
                                    const NavPlan& plan, int out_res,
                                    double max_magnification) {
  const double cap = max_magnification > 0.0 ? std::max(1.0, max_magnification)
                                             : std::numeric_limits<double>::infinity();
  std::vector<ViewImage> views;
  views.reserve(plan.steps.size());
  int index = 0;
  for (const NavStep& step : plan.steps) {
    Viewport wanted = step.viewport;
    Viewport capped = wanted;
    capped.magnification = std::min(std::max(1.0, wanted.magnification), cap);
    ViewImage view = crop_viewport(region, capped, out_res);
    view.requested = wanted;
    view.clamped = view.clamped || capped.magnification != wanted.magnification;
    view.step_index = index++;
    views.push_back(std::move(view));
  }
  return views;
}

ReasoningResult run_reasoning(const std::vector<ViewImage>& views,
                              const NavPlan& plan, Backend& backend,
                              const PromptPack& prompts,
                              const RunConfig& config,
                              const VqaRecord* question,
                              Transcript* transcript,
                              const std::string& conversation) {
  if (views.empty()) throw Error(Errc::invalid_args, "reasoning needs views");

  std::string prompt =
      question ? prompts.render("reasoning_vqa",
                                {{"question", question->question},
                                 {"options", format_options(question->options)}})
               : prompts.render("reasoning",
                                {{"step_count", std::to_string(views.size())}});

  const int limit = backend.profile().max_images_per_request;
  const int batches = int((views.size() + std::size_t(limit) - 1) / std::size_t(limit));

  std::string final_text;
  for (int b = 0; b < batches; ++b) {
    CompletionRequest request;
    request.temperature = config.temperature;
    if (config.seed != 0) request.seed = config.seed;
    ChatMessage message;
    message.role = Role::user;
    if (b == 0) {
      message.parts.push_back(MessagePart::make_text(prompt));
    } else {
      message.parts.push_back(MessagePart::make_text(
          "Continuation: views " + std::to_string(b * limit + 1) + " onward."));
    }
    std::size_t begin = std::size_t(b) * std::size_t(limit);
    std::size_t end = std::min(views.size(), begin + std::size_t(limit));
    for (std::size_t i = begin; i < end; ++i) {
      const ViewImage& view = views[i];
      const NavStep& step = plan.steps.at(std::size_t(view.step_index));
      std::string meta = "Step " + std::to_string(i + 1) + ": " +
                         to_string(step.action) + ", " +
                         viewport_text(view.viewport);
      if (!step.rationale.empty()) meta += ". Rationale: " + step.rationale;
      if (view.clamped) meta += " (clamped)";
      message.parts.push_back(MessagePart::make_text(std::move(meta)));
      message.parts.push_back(MessagePart::make_image(view.pixels));
    }
    if (b + 1 < batches) {
      message.parts.push_back(MessagePart::make_text(
          "More views follow in the next message. Reply READY and wait."));
    } else if (batches > 1) {
      message.parts.push_back(MessagePart::make_text(
          "All views delivered. Produce the JSON reasoning now."));
    }
    request.messages.push_back(std::move(message));
    CompletionResult result =
        call_backend(backend, request, {conversation, "reasoning"}, transcript);
    final_text = result.text;
  }

  std::optional<int> n_options;
  if (question) n_options = int(question->options.size());
  ReasoningResult reasoning = parse_reasoning_result(final_text, n_options);
  if (reasoning.step_notes.size() != views.size()) {
    throw Error(Errc::schema_violation,
                "step_notes: got " + std::to_string(reasoning.step_notes.size()) +
                    " notes for " + std::to_string(views.size()) + " views");
  }
  if (question && !reasoning.answer_index) {
    try {
      reasoning.answer_index = extract_answer(
          reasoning.conclusion, int(question->options.size()), question->options);
    } catch (const Error&) {
      throw Error(Errc::answer_missing,
                  "no answer in reasoning; conclusion was: " +
                      reasoning.conclusion.substr(0, 200));
    }
  }
  return reasoning;
}

RegionReport run_region(const RegionImage& region, Backend& backend,
                        const PromptPack& prompts, const RunConfig& config,
                        const VqaRecord* question,
                        const std::string& conversation) {
  RegionReport report;
  report.region_id = region.region_id;
  std::string conv = conversation.empty()
                         ? region.slide_id + "/region_" +
                               std::to_string(region.region_id)
                         : conversation;

  const char* stage = "navigation_planning";
  try {
    auto t0 = std::chrono::steady_clock::now();
    report.plan = run_navigation_planning(region, backend, prompts, config,
                                          question, &report.transcript, conv);
    report.planning_seconds = seconds_since(t0);

    stage = "execute_plan";
    report.views = execute_plan(region, report.plan, config.out_res,
                                config.magnification_cap());

    stage = "reasoning";
    auto t1 = std::chrono::steady_clock::now();
    report.reasoning =
        run_reasoning(report.views, report.plan, backend, prompts, config,
                      question, &report.transcript, conv);
    report.reasoning_seconds = seconds_since(t1);
    report.answer_index = report.reasoning.answer_index;
  } catch (const Error& e) {
    throw Error(e.code(), std::string(stage) + ": " + e.what());
  }
  return report;
}

std::vector<RegionReport> run_region_attempts(const RegionImage& region,
                                              Backend& backend,
                                              const PromptPack& prompts,
                                              const RunConfig& config,
                                              const VqaRecord* question,
                                              int n_attempts) {
  if (n_attempts < 1) throw Error(Errc::invalid_args, "attempts must be >= 1");
  std::vector<RegionReport> reports;
  reports.reserve(std::size_t(n_attempts));
  for (int attempt = 0; attempt < n_attempts; ++attempt) {
    RunConfig attempt_config = config;
    attempt_config.temperature = config.attempt_temperature;
    if (config.seed != 0) attempt_config.seed = config.seed + attempt;
    std::string conv = region.slide_id + "/region_" +
                       std::to_string(region.region_id) + "/attempt_" +
                       std::to_string(attempt);
    try {
      reports.push_back(run_region(region, backend, prompts, attempt_config,
                                   question, conv));
    } catch (const Error& e) {
      RegionReport failed;
      failed.region_id = region.region_id;
      failed.error = e.what();
      reports.push_back(std::move(failed));
    }
  }
  return reports;
}

WsiReport run_wsi(const SlidePyramid& pyramid, Backend& backend,
                  const PromptPack& prompts, const RunConfig& config) {
  config.validate();
  WsiReport report;
  report.slide_id = pyramid.slide_id;

  TilingPlan plan = plan_regions(pyramid.width_px, pyramid.height_px,
                                 config.region_size, config.overlap);
  plan.slide_id = pyramid.slide_id;
  TilingPlan kept = filter_regions(plan, pyramid, config.min_tissue,
                                   config.tissue_s_min, config.tissue_v_max);
  if (kept.specs.empty()) {
    report.warnings.push_back("all planned regions fell below the tissue threshold");
    return report;
  }

  Image thumbnail = make_thumbnail(pyramid, config.thumbnail_factor);
  report.selection = run_global_screening(thumbnail, kept, backend, prompts,
                                          config, &report.screening_transcript,
                                          pyramid.slide_id + "/screening");

  std::map<long long, const RegionSpec*> by_id;
  for (const RegionSpec& spec : kept.specs) by_id[spec.region_id] = &spec;
  std::set<long long> low_mag;
  for (const RegionGroup& group : report.selection.groups) {
    if (!group.needs_high_mag) {
      low_mag.insert(group.region_ids.begin(), group.region_ids.end());
    }
  }

  std::vector<const RegionSpec*> jobs;
  for (long long id : report.selection.priority) {
    auto it = by_id.find(id);
    if (it == by_id.end()) continue;  // ids validated against kept already
    if (config.skip_low_mag_groups && low_mag.count(id)) {
      report.warnings.push_back("region " + std::to_string(id) +
                                " skipped (group needs no high magnification)");
      continue;
    }
    jobs.push_back(it->second);
  }

  std::vector<RegionReport> results(jobs.size());
  parallel_for(jobs.size(), config.workers, [&](std::size_t i) {
    const RegionSpec& spec = *jobs[i];
    try {
      RegionImage region = extract_region(pyramid, spec);
      results[i] = run_region(region, backend, prompts, config, nullptr, "");
    } catch (const Error& e) {
      results[i].region_id = spec.region_id;
      results[i].error = e.what();
    }
  });
  report.region_reports = std::move(results);

  if (!config.output_dir.empty()) persist_wsi_run(report, config.output_dir);
  return report;
}

std::string match_label(const std::string& response,
                        const std::vector<std::string>& labels) {
  std::string haystack = to_lower(response);
  std::vector<std::size_t> order(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return labels[a].size() > labels[b].size();
  });

  std::vector<bool> taken(haystack.size(), false);
  std::set<std::size_t> matched;
  for (std::size_t li : order) {
    std::string needle = to_lower(labels[li]);
    if (needle.empty()) continue;
    for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
         pos = haystack.find(needle, pos + 1)) {
      bool free = true;
      for (std::size_t i = pos; i < pos + needle.size() && free; ++i) {
        free = !taken[i];
      }
      if (!free) continue;
      for (std::size_t i = pos; i < pos + needle.size(); ++i) taken[i] = true;
      matched.insert(li);
      break;
    }
  }
  if (matched.size() != 1) {
    throw Error(Errc::label_mismatch,
                "response matches " + std::to_string(matched.size()) +
                    " labels: " + response.substr(0, 200));
  }
  return labels[*matched.begin()];
}

std::string classify_wsi(const WsiReport& report,
                         const std::vector<std::string>& labels,
                         Backend& backend, const PromptPack& prompts,
                         const RunConfig& config, Transcript* transcript) {
  if (labels.empty()) throw Error(Errc::invalid_args, "label list is empty");

  std::string descriptions;
  for (const RegionReport& region : report.region_reports) {
    if (region.error || region.reasoning.conclusion.empty()) continue;
    descriptions += "Region " + std::to_string(region.region_id) + ": " +
                    region.reasoning.conclusion + "\n\n";
  }
  if (descriptions.empty()) {
    throw Error(Errc::invalid_args, "report has no reasoning conclusions");
  }
  std::string label_list;
  for (const std::string& label : labels) label_list += "- " + label + "\n";

  CompletionRequest request;
  request.temperature = config.temperature;
  if (config.seed != 0) request.seed = config.seed;
  request.messages.push_back(ChatMessage::user_text(
      prompts.render("wsi_classification", {{"labels", label_list},
                                            {"descriptions", descriptions}})));
  CompletionResult result =
      call_backend(backend, request,
                   {report.slide_id + "/classification", "wsi_classification"},
                   transcript);
  return match_label(result.text, labels);
}

json selection_json(const RegionSelection& selection) {
  json groups = json::array();
  for (const RegionGroup& group : selection.groups) {
    groups.push_back({{"name", group.name},
                      {"region_ids", group.region_ids},
                      {"needs_high_mag", group.needs_high_mag}});
  }
  return json{{"groups", groups}, {"priority", selection.priority}};
}

json region_report_json(const RegionReport& report) {
  json views = json::array();
  for (const ViewImage& view : report.views) {
    views.push_back(
        {{"step", view.step_index},
         {"requested",
          {{"center", {view.requested.cx, view.requested.cy}},
           {"magnification", view.requested.magnification}}},
         {"effective",
          {{"center", {view.viewport.cx, view.viewport.cy}},
           {"magnification", view.viewport.magnification}}},
         {"rect", {view.provenance.x, view.provenance.y, view.provenance.w,
                   view.provenance.h}},
         {"clamped", view.clamped}});
  }
  json out{{"region_id", report.region_id},
           {"plan", report.error ? json(nullptr)
                                 : json::parse(serialize_nav_plan(report.plan))},
           {"plan_flags",
            {{"overview_inserted", report.plan.overview_inserted},
             {"truncated", report.plan.truncated}}},
           {"views", views},
           {"reasoning", reasoning_json(report.reasoning)}};
  out["answer_index"] =
      report.answer_index ? json(*report.answer_index) : json(nullptr);
  out["error"] = report.error ? json(*report.error) : json(nullptr);
  return out;
}

json wsi_report_json(const WsiReport& report) {
  json regions = json::array();
  for (const RegionReport& region : report.region_reports) {
    regions.push_back(region_report_json(region));
  }
  json out{{"slide_id", report.slide_id},
           {"selection", selection_json(report.selection)},
           {"regions", regions},
           {"warnings", report.warnings}};
  out["predicted_label"] =
      report.predicted_label ? json(*report.predicted_label) : json(nullptr);
  return out;
}

WsiReport wsi_report_from_json(const json& doc) {
  WsiReport report;
  report.slide_id = doc.value("slide_id", "");
  if (doc.contains("selection")) {
    for (const json& g : doc["selection"].value("groups", json::array())) {
      RegionGroup group;
      group.name = g.value("name", "");
      for (const json& id : g.value("region_ids", json::array())) {
        group.region_ids.push_back(id.get<long long>());
      }
      group.needs_high_mag = g.value("needs_high_mag", false);
      report.selection.groups.push_back(std::move(group));
    }
    for (const json& id : doc["selection"].value("priority", json::array())) {
      report.selection.priority.push_back(id.get<long long>());
    }
  }
  for (const json& r : doc.value("regions", json::array())) {
    RegionReport region;
    region.region_id = r.value("region_id", -1LL);
    if (r.contains("reasoning")) {
      const json& reasoning = r["reasoning"];
      for (const json& note : reasoning.value("step_notes", json::array())) {
        region.reasoning.step_notes.push_back(note.get<std::string>());
      }
      region.reasoning.conclusion = reasoning.value("conclusion", "");
      if (reasoning.contains("answer_index") &&
          !reasoning["answer_index"].is_null()) {
        region.reasoning.answer_index = reasoning["answer_index"].get<int>();
      }
    }
    if (r.contains("answer_index") && !r["answer_index"].is_null()) {
      region.answer_index = r["answer_index"].get<int>();
    }
    if (r.contains("error") && !r["error"].is_null()) {
      region.error = r["error"].get<std::string>();
    }
    report.region_reports.push_back(std::move(region));
  }
  if (doc.contains("predicted_label") && !doc["predicted_label"].is_null()) {
    report.predicted_label = doc["predicted_label"].get<std::string>();
  }
  return report;
}

void persist_region_report(const RegionReport& report,
                           const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  if (!report.error) {
    write_text_file(dir / "plan.json", serialize_nav_plan(report.plan) + "\n");
    write_text_file(dir / "reasoning.json",
                    reasoning_json(report.reasoning).dump(2) + "\n");
    for (const ViewImage& view : report.views) {
      save_png(view.pixels,
               dir / "views" / ("step_" + std::to_string(view.step_index) + ".png"));
    }
  } else {
    write_text_file(dir / "error.txt", *report.error + "\n");
  }
}

std::filesystem::path persist_wsi_run(const WsiReport& report,
                                      const std::filesystem::path& out_dir) {
  std::filesystem::path dir = out_dir / report.slide_id;
  std::filesystem::create_directories(dir);

  write_text_file(dir / "selection.json",
                  selection_json(report.selection).dump(2) + "\n");
  for (const RegionReport& region : report.region_reports) {
    persist_region_report(region,
                          dir / ("region_" + std::to_string(region.region_id)));
  }
  write_text_file(dir / "report.json", wsi_report_json(report).dump(2) + "\n");

  std::string transcript;
  for (const json& entry : report.screening_transcript) {
    transcript += entry.dump() + "\n";
  }
  for (const RegionReport& region : report.region_reports) {
    for (const json& entry : region.transcript) transcript += entry.dump() + "\n";
  }
  write_text_file(dir / "transcript.jsonl", transcript);

  json timings = json::object();
  for (const RegionReport& region : report.region_reports) {
    timings[std::to_string(region.region_id)] = {
        {"planning_s", region.planning_seconds},
        {"reasoning_s", region.reasoning_seconds}};
  }
  write_text_file(dir / "timings.json", timings.dump(2) + "\n");
  return dir;
}

}  // namespace pathnav
