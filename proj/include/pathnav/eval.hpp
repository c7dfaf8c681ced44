#pragma once

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pathnav/dataset.hpp"

namespace pathnav {

struct VqaPrediction {
  std::string record_id;
  int attempt = 0;
  std::optional<int> answer_index;
  std::optional<std::string> error;  // exactly one of answer_index/error
};

struct SubsetStats {
  int n = 0;
  int correct = 0;
  double accuracy = 0.0;
};

struct ConfusionMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<int>> counts;  // counts[gold][pred], extra col = off-list
};

struct EvalReport {
  std::map<std::string, SubsetStats> per_subset;
  SubsetStats overall;
  std::map<int, double> pass_at_k;
  std::optional<ConfusionMatrix> confusion;
  std::optional<double> balanced_accuracy;
  std::vector<std::string> warnings;
};

// First-attempt accuracy per subset and pooled overall. Errored or missing
// predictions count as incorrect.
EvalReport score_vqa(const std::vector<VqaPrediction>& predictions,
                     const std::vector<VqaRecord>& gold);

// Unbiased estimator 1 - C(n-c, k)/C(n, k). Binomials are evaluated exactly
// in integers whenever they fit 64 bits (always for desk-scale n); a stable
// product form covers larger n.
double pass_at_k(long long n, long long c, long long k);

// Mean of pass@k over records; every record must carry the same attempt
// count. Gold decides per-attempt correctness.
std::map<int, double> aggregate_pass_at_k(
    const std::vector<VqaPrediction>& attempts,
    const std::vector<VqaRecord>& gold, const std::vector<int>& ks);

// Mean per-class recall. Labels declared but absent from gold are excluded
// with a warning; predictions outside `labels` count as wrong.
double balanced_accuracy(const std::vector<std::string>& predictions,
                         const std::vector<std::string>& gold,
                         const std::vector<std::string>& labels,
                         std::vector<std::string>* warnings = nullptr,
                         ConfusionMatrix* confusion = nullptr);

// Predictions JSONL:
// {"record_id":str,"attempt":int,"answer_index":int|null,"error":str|null}
std::vector<VqaPrediction> parse_predictions(const std::string& jsonl);
std::vector<VqaPrediction> load_predictions(const std::filesystem::path& path);
std::string predictions_jsonl(const std::vector<VqaPrediction>& predictions);

nlohmann::json eval_report_json(const EvalReport& report);
EvalReport eval_report_from_json(const nlohmann::json& doc);

// Plain-text table, one column per subset with counts in parentheses plus a
// pooled Overall column; TCGA subsets keep their benchmark ordering.
std::string render_subset_table(const EvalReport& report);

}  // namespace pathnav
