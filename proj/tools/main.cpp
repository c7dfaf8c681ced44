// pathnav: tile whole-slide images into huge regions, drive the three-stage
// screening/planning/reasoning loop over a chat-completion backend, and score
// the results. See README.md for the workflows.

#include <CLI11.hpp>

#include <cstdio>
#include <functional>
#include <iostream>

#include "pathnav/eval.hpp"
#include "pathnav/grid_overlay.hpp"
#include "pathnav/image_io.hpp"
#include "pathnav/runtime.hpp"
#include "pathnav/util.hpp"

namespace {

using namespace pathnav;
using nlohmann::json;

// CLI flags override values from --config, which override defaults.
struct ConfigFlags {
  std::string config_path;
  RunConfig flag_values;
  std::map<std::string, CLI::Option*> options;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    options["out_res"] =
        cmd->add_option("--out-res", flag_values.out_res, "view resolution");
    options["region_size"] = cmd->add_option("--region-size",
                                             flag_values.region_size,
                                             "huge region size in pixels");
    options["overlap"] =
        cmd->add_option("--overlap", flag_values.overlap, "region overlap fraction");
    options["min_tissue"] = cmd->add_option("--min-tissue", flag_values.min_tissue,
                                            "tissue fraction threshold");
    options["tissue_s_min"] = cmd->add_option("--tissue-s-min",
                                              flag_values.tissue_s_min,
                                              "tissue saturation threshold");
    options["tissue_v_max"] = cmd->add_option("--tissue-v-max",
                                              flag_values.tissue_v_max,
                                              "tissue value threshold");
    options["thumbnail_factor"] =
        cmd->add_option("--thumbnail-factor", flag_values.thumbnail_factor,
                        "thumbnail downscale factor");
    options["max_steps"] =
        cmd->add_option("--max-steps", flag_values.max_steps, "plan step cap");
    options["attempts"] =
        cmd->add_option("--attempts", flag_values.attempts, "pass@k attempts");
    options["temperature"] = cmd->add_option("--temperature",
                                             flag_values.temperature,
                                             "evaluation temperature");
    options["attempt_temperature"] =
        cmd->add_option("--attempt-temperature", flag_values.attempt_temperature,
                        "generation temperature for attempts");
    options["workers"] =
        cmd->add_option("--workers", flag_values.workers, "parallel region cap");
    options["max_magnification"] =
        cmd->add_option("--max-magnification", flag_values.max_magnification,
                        "magnification cap (0: region_size/out_res)");
    options["skip_low_mag_groups"] =
        cmd->add_flag("--skip-low-mag", flag_values.skip_low_mag_groups,
                      "skip groups flagged needs_high_mag=false");
    options["seed"] = cmd->add_option("--seed", flag_values.seed, "request seed");
  }

  RunConfig resolve() const {
    RunConfig config;
    if (!config_path.empty()) {
      json doc = json::parse(read_text_file(config_path), nullptr, false);
      if (doc.is_discarded()) {
        throw Error(Errc::schema_violation, "bad config file " + config_path);
      }
      config = RunConfig::from_json(doc);
    }
    auto take = [&](const char* name, auto member) {
      if (options.at(name)->count() > 0) config.*member = flag_values.*member;
    };
    take("out_res", &RunConfig::out_res);
    take("region_size", &RunConfig::region_size);
    take("overlap", &RunConfig::overlap);
    take("min_tissue", &RunConfig::min_tissue);
    take("tissue_s_min", &RunConfig::tissue_s_min);
    take("tissue_v_max", &RunConfig::tissue_v_max);
    take("thumbnail_factor", &RunConfig::thumbnail_factor);
    take("max_steps", &RunConfig::max_steps);
    take("attempts", &RunConfig::attempts);
    take("temperature", &RunConfig::temperature);
    take("attempt_temperature", &RunConfig::attempt_temperature);
    take("workers", &RunConfig::workers);
    take("max_magnification", &RunConfig::max_magnification);
    take("skip_low_mag_groups", &RunConfig::skip_low_mag_groups);
    take("seed", &RunConfig::seed);
    config.validate();
    return config;
  }
};

void write_resolved_config(const RunConfig& config,
                           const std::filesystem::path& out_dir) {
  write_text_file(out_dir / "config.resolved.json", config.to_json().dump(2) + "\n");
}

void write_run_log(const std::filesystem::path& out_dir,
                   const std::string& command,
                   const std::vector<std::string>& warnings = {}) {
  std::string log;
  for (const std::string& warning : warnings) {
    log += json{{"event", "warning"}, {"detail", warning}}.dump() + "\n";
  }
  log += json{{"event", "completed"}, {"command", command}}.dump() + "\n";
  write_text_file(out_dir / "log.jsonl", log);
}

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  while (begin <= csv.size()) {
    std::size_t end = csv.find(',', begin);
    if (end == std::string::npos) end = csv.size();
    std::string item = trim(csv.substr(begin, end - begin));
    if (!item.empty()) out.push_back(item);
    begin = end + 1;
  }
  return out;
}

const VqaRecord* find_record(const std::vector<VqaRecord>& records,
                             const std::string& id) {
  for (const VqaRecord& r : records) {
    if (r.record_id == id) return &r;
  }
  throw Error(Errc::unknown_record_id, id);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"whole-slide navigation runtime and evaluation harness"};
  app.require_subcommand(1);
  std::function<void()> task;

  // tile: plan regions, filter by tissue, extract PNGs + manifest
  {
    auto* cmd = app.add_subcommand("tile", "plan, filter and extract regions");
    auto flags = std::make_shared<ConfigFlags>();
    auto slide = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>("out");
    auto plan_only = std::make_shared<bool>(false);
    cmd->add_option("--slide", *slide, "slide manifest JSON")->required();
    cmd->add_option("--out", *out, "output directory");
    cmd->add_flag("--plan-only", *plan_only, "write the manifest, skip extraction");
    flags->attach(cmd);
    cmd->callback([=, &task] {
      task = [=] {
        RunConfig config = flags->resolve();
        SlidePyramid pyramid = load_pyramid(*slide);
        TilingPlan plan = plan_regions(pyramid.width_px, pyramid.height_px,
                                       config.region_size, config.overlap);
        plan.slide_id = pyramid.slide_id;
        TilingPlan kept =
            filter_regions(plan, pyramid, config.min_tissue,
                           config.tissue_s_min, config.tissue_v_max);
        std::filesystem::path dir = *out;
        std::filesystem::create_directories(dir / pyramid.slide_id);
        write_text_file(dir / pyramid.slide_id / "regions.jsonl",
                        region_manifest_jsonl(kept));
        if (!*plan_only) {
          for (const RegionSpec& spec : kept.specs) {
            RegionImage region = extract_region(pyramid, spec);
            save_png(region.pixels,
                     dir / pyramid.slide_id /
                         ("region_" + std::to_string(spec.region_id) + ".png"));
          }
        }
        write_resolved_config(config, dir);
        write_run_log(dir, "tile");
        std::cout << kept.specs.size() << " of " << plan.specs.size()
                  << " regions kept\n";
      };
    });
  }

  // thumbnail
  {
    auto* cmd = app.add_subcommand("thumbnail", "render the slide overview");
    auto slide = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>("thumbnail.png");
    auto factor = std::make_shared<int>(32);
    cmd->add_option("--slide", *slide, "slide manifest JSON")->required();
    cmd->add_option("--out", *out, "output PNG");
    cmd->add_option("--factor", *factor, "downscale factor");
    cmd->callback([=, &task] {
      task = [=] {
        SlidePyramid pyramid = load_pyramid(*slide);
        save_png(make_thumbnail(pyramid, *factor), *out);
        std::cout << "wrote " << *out << "\n";
      };
    });
  }

  // grid: coordinate overlay
  {
    auto* cmd = app.add_subcommand("grid", "draw the coordinate grid overlay");
    auto input = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>("grid.png");
    auto interval = std::make_shared<double>(0.1);
    cmd->add_option("--image", *input, "input raster")->required();
    cmd->add_option("--out", *out, "output PNG");
    cmd->add_option("--interval", *interval, "grid interval");
    cmd->callback([=, &task] {
      task = [=] {
        save_png(annotate_grid(load_image(*input), *interval), *out);
        std::cout << "wrote " << *out << "\n";
      };
    });
  }

  // crop: execute a plan file against a region raster
  {
    auto* cmd = app.add_subcommand("crop", "execute a plan file against a region");
    auto flags = std::make_shared<ConfigFlags>();
    auto region_path = std::make_shared<std::string>();
    auto plan_path = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>("views");
    cmd->add_option("--region", *region_path, "region raster")->required();
    cmd->add_option("--plan", *plan_path, "navigation plan JSON")->required();
    cmd->add_option("--out", *out, "output directory");
    flags->attach(cmd);
    cmd->callback([=, &task] {
      task = [=] {
        RunConfig config = flags->resolve();
        RegionImage region = load_region_image(*region_path);
        NavPlan plan = parse_nav_plan(read_text_file(*plan_path));
        auto views = execute_plan(region, plan, config.out_res,
                                  config.magnification_cap());
        std::filesystem::path dir = *out;
        json index = json::array();
        for (const ViewImage& view : views) {
          std::string name = "step_" + std::to_string(view.step_index) + ".png";
          save_png(view.pixels, dir / name);
          index.push_back({{"step", view.step_index},
                           {"file", name},
                           {"rect", {view.provenance.x, view.provenance.y,
                                     view.provenance.w, view.provenance.h}},
                           {"clamped", view.clamped}});
        }
        write_text_file(dir / "views.json", index.dump(2) + "\n");
        write_resolved_config(config, dir);
        std::cout << views.size() << " views written to " << *out << "\n";
      };
    });
  }

  // run-region
  {
    auto* cmd = app.add_subcommand("run-region",
                                   "plan, execute and reason over one region");
    auto flags = std::make_shared<ConfigFlags>();
    auto region_path = std::make_shared<std::string>();
    auto backend_path = std::make_shared<std::string>();
    auto prompts_dir = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>("run");
    auto vqa_manifest = std::make_shared<std::string>();
    auto record_id = std::make_shared<std::string>();
    auto n_attempts = std::make_shared<int>(1);
    cmd->add_option("--region", *region_path, "region raster")->required();
    cmd->add_option("--backend", *backend_path, "backend profile JSON")->required();
    cmd->add_option("--prompts", *prompts_dir, "prompt pack directory");
    cmd->add_option("--out", *out, "output directory");
    cmd->add_option("--vqa", *vqa_manifest, "VQA manifest (enables VQA mode)");
    cmd->add_option("--record", *record_id, "record id within --vqa");
    cmd->add_option("--n", *n_attempts, "attempts (pass@k generation mode)");
    flags->attach(cmd);
    cmd->callback([=, &task] {
      task = [=] {
        RunConfig config = flags->resolve();
        auto backend = load_backend(*backend_path);
        PromptPack prompts = prompts_dir->empty() ? PromptPack::builtin()
                                                  : PromptPack::load_dir(*prompts_dir);
        RegionImage region = load_region_image(*region_path);

        std::vector<VqaRecord> records;
        const VqaRecord* question = nullptr;
        if (!vqa_manifest->empty()) {
          records = load_vqa_manifest(*vqa_manifest);
          question = record_id->empty() ? &records.at(0)
                                        : find_record(records, *record_id);
        }

        std::filesystem::path dir = *out;
        if (*n_attempts > 1) {
          auto reports = run_region_attempts(region, *backend, prompts, config,
                                             question, *n_attempts);
          std::vector<VqaPrediction> predictions;
          for (int a = 0; a < int(reports.size()); ++a) {
            const RegionReport& report = reports[std::size_t(a)];
            persist_region_report(report, dir / ("attempt_" + std::to_string(a)));
            VqaPrediction p;
            p.record_id = question ? question->record_id
                                   : "region_" + std::to_string(region.region_id);
            p.attempt = a;
            if (report.error) {
              p.error = *report.error;
            } else if (report.answer_index) {
              p.answer_index = *report.answer_index;
            } else {
              p.error = "no answer produced";
            }
            predictions.push_back(std::move(p));
          }
          write_text_file(dir / "predictions.jsonl", predictions_jsonl(predictions));
        } else {
          RegionReport report =
              run_region(region, *backend, prompts, config, question, "");
          persist_region_report(report, dir);
          write_text_file(dir / "report.json",
                          region_report_json(report).dump(2) + "\n");
          std::string transcript;
          for (const json& entry : report.transcript) {
            transcript += entry.dump() + "\n";
          }
          write_text_file(dir / "transcript.jsonl", transcript);
        }
        write_resolved_config(config, dir);
        write_run_log(dir, "run-region");
        std::cout << "run written to " << *out << "\n";
      };
    });
  }

  // run-wsi
  {
    auto* cmd = app.add_subcommand("run-wsi", "full screening/region pipeline");
    auto flags = std::make_shared<ConfigFlags>();
    auto slide = std::make_shared<std::string>();
    auto backend_path = std::make_shared<std::string>();
    auto prompts_dir = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>("run");
    cmd->add_option("--slide", *slide, "slide manifest JSON")->required();
    cmd->add_option("--backend", *backend_path, "backend profile JSON")->required();
    cmd->add_option("--prompts", *prompts_dir, "prompt pack directory");
    cmd->add_option("--out", *out, "output directory");
    flags->attach(cmd);
    cmd->callback([=, &task] {
      task = [=] {
        RunConfig config = flags->resolve();
        config.output_dir = *out;
        auto backend = load_backend(*backend_path);
        PromptPack prompts = prompts_dir->empty() ? PromptPack::builtin()
                                                  : PromptPack::load_dir(*prompts_dir);
        SlidePyramid pyramid = load_pyramid(*slide);
        WsiReport report = run_wsi(pyramid, *backend, prompts, config);
        write_resolved_config(config, std::filesystem::path(*out) / report.slide_id);
        write_run_log(std::filesystem::path(*out) / report.slide_id, "run-wsi",
                      report.warnings);
        for (const std::string& warning : report.warnings) {
          std::cerr << "warning: " << warning << "\n";
        }
        std::cout << report.region_reports.size() << " regions reported under "
                  << *out << "/" << report.slide_id << "\n";
      };
    });
  }

  // classify-wsi
  {
    auto* cmd = app.add_subcommand("classify-wsi",
                                   "label a WSI report via the backend");
    auto flags = std::make_shared<ConfigFlags>();
    auto report_path = std::make_shared<std::string>();
    auto backend_path = std::make_shared<std::string>();
    auto prompts_dir = std::make_shared<std::string>();
    auto labels_csv = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    cmd->add_option("--report", *report_path, "report.json from run-wsi")->required();
    cmd->add_option("--backend", *backend_path, "backend profile JSON")->required();
    cmd->add_option("--labels", *labels_csv, "comma-separated label set")->required();
    cmd->add_option("--prompts", *prompts_dir, "prompt pack directory");
    cmd->add_option("--out", *out, "write {label} JSON here");
    flags->attach(cmd);
    cmd->callback([=, &task] {
      task = [=] {
        RunConfig config = flags->resolve();
        auto backend = load_backend(*backend_path);
        PromptPack prompts = prompts_dir->empty() ? PromptPack::builtin()
                                                  : PromptPack::load_dir(*prompts_dir);
        json doc = json::parse(read_text_file(*report_path));
        WsiReport report = wsi_report_from_json(doc);
        std::string label =
            classify_wsi(report, split_csv(*labels_csv), *backend, prompts, config);
        if (!out->empty()) {
          write_text_file(*out, json{{"slide_id", report.slide_id},
                                     {"predicted_label", label}}
                                        .dump(2) +
                                    "\n");
        }
        std::cout << label << "\n";
      };
    });
  }

  // eval-vqa
  {
    auto* cmd = app.add_subcommand("eval-vqa", "score predictions against gold");
    auto gold_path = std::make_shared<std::string>();
    auto pred_path = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto ks_csv = std::make_shared<std::string>();
    auto table = std::make_shared<bool>(false);
    cmd->add_option("--gold", *gold_path, "VQA manifest JSONL")->required();
    cmd->add_option("--pred", *pred_path, "predictions JSONL")->required();
    cmd->add_option("--out", *out, "report JSON path");
    cmd->add_option("--ks", *ks_csv, "pass@k values, e.g. 1,2,4,8");
    cmd->add_flag("--table", *table, "print the subset table");
    cmd->callback([=, &task] {
      task = [=] {
        auto gold = load_vqa_manifest(*gold_path);
        auto predictions = load_predictions(*pred_path);

        std::vector<VqaPrediction> first_attempt;
        bool multi_attempt = false;
        for (const VqaPrediction& p : predictions) {
          if (p.attempt == 0) first_attempt.push_back(p);
          if (p.attempt > 0) multi_attempt = true;
        }
        EvalReport report = score_vqa(first_attempt, gold);
        if (multi_attempt) {
          std::vector<int> ks;
          if (!ks_csv->empty()) {
            for (const std::string& k : split_csv(*ks_csv)) ks.push_back(std::stoi(k));
          } else {
            std::map<std::string, int> counts;
            for (const VqaPrediction& p : predictions) ++counts[p.record_id];
            int n = counts.empty() ? 1 : counts.begin()->second;
            for (int k = 1; k <= n; k *= 2) ks.push_back(k);
            if (ks.empty() || ks.back() != n) ks.push_back(n);
          }
          report.pass_at_k = aggregate_pass_at_k(predictions, gold, ks);
        }
        std::string rendered = eval_report_json(report).dump(2) + "\n";
        if (!out->empty()) write_text_file(*out, rendered);
        if (*table) {
          std::cout << render_subset_table(report);
        } else {
          std::cout << rendered;
        }
      };
    });
  }

  // pass-at-k
  {
    auto* cmd = app.add_subcommand("pass-at-k", "evaluate the pass@k estimator");
    auto n = std::make_shared<long long>(8);
    auto c = std::make_shared<long long>(0);
    auto k = std::make_shared<long long>(1);
    cmd->add_option("--n", *n, "attempts")->required();
    cmd->add_option("--c", *c, "correct attempts")->required();
    cmd->add_option("--k", *k, "draws")->required();
    cmd->callback([=, &task] {
      task = [=] { std::printf("%.6f\n", pass_at_k(*n, *c, *k)); };
    });
  }

  // filter-shortcuts
  {
    auto* cmd = app.add_subcommand("filter-shortcuts",
                                   "drop questions answerable by text alone");
    auto flags = std::make_shared<ConfigFlags>();
    auto manifest = std::make_shared<std::string>();
    auto backend_a = std::make_shared<std::string>();
    auto backend_b = std::make_shared<std::string>();
    auto prompts_dir = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>("filtered");
    cmd->add_option("--manifest", *manifest, "VQA manifest JSONL")->required();
    cmd->add_option("--backend-a", *backend_a, "first text backend")->required();
    cmd->add_option("--backend-b", *backend_b, "second text backend")->required();
    cmd->add_option("--prompts", *prompts_dir, "prompt pack directory");
    cmd->add_option("--out", *out, "output directory");
    flags->attach(cmd);
    cmd->callback([=, &task] {
      task = [=] {
        RunConfig config = flags->resolve();
        auto records = load_vqa_manifest(*manifest);
        auto first = load_backend(*backend_a);
        auto second = load_backend(*backend_b);
        PromptPack prompts = prompts_dir->empty() ? PromptPack::builtin()
                                                  : PromptPack::load_dir(*prompts_dir);
        ShortcutFilterOutcome outcome = shortcut_filter(
            records, *first, *second, prompts, config.temperature);
        std::filesystem::path dir = *out;
        write_text_file(dir / "kept.jsonl", vqa_manifest_jsonl(outcome.kept));
        write_text_file(dir / "dropped.jsonl", vqa_manifest_jsonl(outcome.dropped));
        std::string log;
        for (const json& entry : outcome.log) log += entry.dump() + "\n";
        write_text_file(dir / "filter_log.jsonl", log);
        write_resolved_config(config, dir);
        write_run_log(dir, "filter-shortcuts", outcome.warnings);
        for (const std::string& warning : outcome.warnings) {
          std::cerr << "warning: " << warning << "\n";
        }
        std::cout << outcome.kept.size() << " kept, " << outcome.dropped.size()
                  << " dropped\n";
      };
    });
  }

  // report
  {
    auto* cmd = app.add_subcommand("report", "render an eval report as a table");
    auto eval_path = std::make_shared<std::string>();
    cmd->add_option("--eval", *eval_path, "eval report JSON")->required();
    cmd->callback([=, &task] {
      task = [=] {
        EvalReport report =
            eval_report_from_json(json::parse(read_text_file(*eval_path)));
        std::cout << render_subset_table(report);
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    task();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
