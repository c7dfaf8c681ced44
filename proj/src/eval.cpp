#include "pathnav/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "pathnav/util.hpp"

namespace pathnav {

using nlohmann::json;

namespace {

// C(n, k) when it fits unsigned 64-bit; nullopt on overflow.
std::optional<unsigned long long> binomial_u64(long long n, long long k) {
  if (k < 0 || k > n) return 0ULL;
  k = std::min(k, n - k);
  unsigned long long result = 1;
  for (long long i = 1; i <= k; ++i) {
    unsigned long long factor = (unsigned long long)(n - k + i);
    if (result > ~0ULL / factor) return std::nullopt;
    result = result * factor / (unsigned long long)i;
  }
  return result;
}

const std::vector<std::string>& benchmark_subset_order() {
  static const std::vector<std::string> order = {
      "BRCA", "LUAD", "LUSC", "KIRP", "KIRC",
      "KICH", "ESCA", "THCA", "BLCA", "TGCT"};
  return order;
}

std::string percent(double value) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1) << value * 100.0;
  return out.str();
}

}  // namespace

double pass_at_k(long long n, long long c, long long k) {
  if (n < 1 || c < 0 || c > n || k < 1 || k > n) {
    throw Error(Errc::invalid_args,
                "pass@k needs 0 <= c <= n and 1 <= k <= n (n=" +
                    std::to_string(n) + " c=" + std::to_string(c) +
                    " k=" + std::to_string(k) + ")");
  }
  auto total = binomial_u64(n, k);
  auto fail = binomial_u64(n - c, k);
  if (total && fail) {
    // single rounding: (C(n,k) - C(n-c,k)) / C(n,k)
    return double(*total - *fail) / double(*total);
  }
  double failing = 1.0;
  for (long long i = 0; i < k; ++i) {
    if (n - c - i <= 0) return 1.0;
    failing *= double(n - c - i) / double(n - i);
  }
  return 1.0 - failing;
}

EvalReport score_vqa(const std::vector<VqaPrediction>& predictions,
                     const std::vector<VqaRecord>& gold) {
  std::map<std::string, const VqaRecord*> by_id;
  for (const VqaRecord& record : gold) by_id[record.record_id] = &record;

  std::map<std::string, const VqaPrediction*> seen;
  for (const VqaPrediction& p : predictions) {
    if (p.attempt != 0) {
      throw Error(Errc::invalid_args,
                  "score_vqa expects attempt 0 only (record " + p.record_id +
                      " has attempt " + std::to_string(p.attempt) + ")");
    }
    if (!by_id.count(p.record_id)) {
      throw Error(Errc::unknown_record_id, p.record_id);
    }
    if (!seen.emplace(p.record_id, &p).second) {
      throw Error(Errc::duplicate_prediction, p.record_id);
    }
  }

  EvalReport report;
  for (const VqaRecord& record : gold) {
    SubsetStats& stats = report.per_subset[record.subset];
    ++stats.n;
    ++report.overall.n;
    auto it = seen.find(record.record_id);
    bool correct = it != seen.end() && it->second->answer_index &&
                   *it->second->answer_index == record.answer_index;
    if (correct) {
      ++stats.correct;
      ++report.overall.correct;
    }
  }
  for (auto& [_, stats] : report.per_subset) {
    stats.accuracy = stats.n > 0 ? double(stats.correct) / stats.n : 0.0;
  }
  report.overall.accuracy =
      report.overall.n > 0 ? double(report.overall.correct) / report.overall.n
                           : 0.0;
  return report;
}

std::map<int, double> aggregate_pass_at_k(
    const std::vector<VqaPrediction>& attempts,
    const std::vector<VqaRecord>& gold, const std::vector<int>& ks) {
  std::map<std::string, const VqaRecord*> by_id;
  for (const VqaRecord& record : gold) by_id[record.record_id] = &record;

  std::map<std::string, std::map<int, const VqaPrediction*>> grouped;
  for (const VqaPrediction& p : attempts) {
    auto it = by_id.find(p.record_id);
    if (it == by_id.end()) {
      throw Error(Errc::unknown_record_id, p.record_id);
    }
    if (!grouped[p.record_id].emplace(p.attempt, &p).second) {
      throw Error(Errc::duplicate_prediction,
                  p.record_id + " attempt " + std::to_string(p.attempt));
    }
  }
  if (grouped.empty()) {
    throw Error(Errc::invalid_args, "no attempts to aggregate");
  }

  long long n = -1;
  std::map<std::string, long long> correct_counts;
  for (const auto& [record_id, attempts_by_index] : grouped) {
    long long size = (long long)attempts_by_index.size();
    if (n < 0) n = size;
    if (size != n) {
      throw Error(Errc::ragged_attempts,
                  record_id + " has " + std::to_string(size) +
                      " attempts, expected " + std::to_string(n));
    }
    const VqaRecord* record = by_id.at(record_id);
    long long correct = 0;
    for (const auto& [_, p] : attempts_by_index) {
      if (p->answer_index && *p->answer_index == record->answer_index) {
        ++correct;
      }
    }
    correct_counts[record_id] = correct;
  }

  std::map<int, double> out;
  for (int k : ks) {
    if (k < 1 || k > n) {
      throw Error(Errc::invalid_args,
                  "k=" + std::to_string(k) + " outside [1, n=" +
                      std::to_string(n) + "]");
    }
    double sum = 0.0;
    for (const auto& [_, c] : correct_counts) sum += pass_at_k(n, c, k);
    out[k] = sum / double(correct_counts.size());
  }
  return out;
}

double balanced_accuracy(const std::vector<std::string>& predictions,
                         const std::vector<std::string>& gold,
                         const std::vector<std::string>& labels,
                         std::vector<std::string>* warnings,
                         ConfusionMatrix* confusion) {
  if (predictions.size() != gold.size()) {
    throw Error(Errc::invalid_args, "prediction/gold length mismatch");
  }
  if (labels.empty()) throw Error(Errc::invalid_args, "empty label list");

  std::map<std::string, int> label_index;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    label_index[labels[i]] = int(i);
  }
  for (const std::string& g : gold) {
    if (!label_index.count(g)) {
      throw Error(Errc::invalid_args, "gold label \"" + g + "\" not declared");
    }
  }

  std::vector<long long> total(labels.size(), 0), hit(labels.size(), 0);
  std::vector<std::vector<int>> counts(labels.size(),
                                       std::vector<int>(labels.size() + 1, 0));
  for (std::size_t i = 0; i < gold.size(); ++i) {
    int gi = label_index.at(gold[i]);
    ++total[std::size_t(gi)];
    auto pi = label_index.find(predictions[i]);
    if (pi != label_index.end()) {
      ++counts[std::size_t(gi)][std::size_t(pi->second)];
      if (pi->second == gi) ++hit[std::size_t(gi)];
    } else {
      ++counts[std::size_t(gi)].back();
    }
  }

  double sum = 0.0;
  int classes = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (total[i] == 0) {
      if (warnings != nullptr) {
        warnings->push_back("EmptyClass: label \"" + labels[i] +
                            "\" absent from gold; excluded");
      }
      continue;
    }
    sum += double(hit[i]) / double(total[i]);
    ++classes;
  }
  if (classes == 0) {
    throw Error(Errc::empty_class, "no declared label present in gold");
  }
  if (confusion != nullptr) {
    confusion->labels = labels;
    confusion->counts = std::move(counts);
  }
  return sum / double(classes);
}

std::vector<VqaPrediction> parse_predictions(const std::string& jsonl) {
  std::vector<VqaPrediction> out;
  std::istringstream in(jsonl);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      throw Error(Errc::schema_violation,
                  "line " + std::to_string(line_no) + ": invalid JSON");
    }
    VqaPrediction p;
    try {
      p.record_id = doc.at("record_id").get<std::string>();
      p.attempt = doc.value("attempt", 0);
      if (doc.contains("answer_index") && !doc["answer_index"].is_null()) {
        p.answer_index = doc["answer_index"].get<int>();
      }
      if (doc.contains("error") && !doc["error"].is_null()) {
        p.error = doc["error"].get<std::string>();
      }
    } catch (const json::exception& e) {
      throw Error(Errc::schema_violation,
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (p.answer_index.has_value() == p.error.has_value()) {
      throw Error(Errc::schema_violation,
                  "line " + std::to_string(line_no) +
                      ": exactly one of answer_index/error required");
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<VqaPrediction> load_predictions(const std::filesystem::path& path) {
  return parse_predictions(read_text_file(path));
}

std::string predictions_jsonl(const std::vector<VqaPrediction>& predictions) {
  std::ostringstream out;
  for (const VqaPrediction& p : predictions) {
    json line{{"record_id", p.record_id}, {"attempt", p.attempt}};
    line["answer_index"] = p.answer_index ? json(*p.answer_index) : json(nullptr);
    line["error"] = p.error ? json(*p.error) : json(nullptr);
    out << line.dump() << '\n';
  }
  return out.str();
}

json eval_report_json(const EvalReport& report) {
  json subsets = json::object();
  for (const auto& [name, stats] : report.per_subset) {
    subsets[name] = {{"n", stats.n},
                     {"correct", stats.correct},
                     {"accuracy", stats.accuracy}};
  }
  json out{{"per_subset", subsets},
           {"overall",
            {{"n", report.overall.n},
             {"correct", report.overall.correct},
             {"accuracy", report.overall.accuracy}}}};
  if (!report.pass_at_k.empty()) {
    json pk = json::object();
    for (const auto& [k, v] : report.pass_at_k) pk[std::to_string(k)] = v;
    out["pass_at_k"] = pk;
  }
  if (report.balanced_accuracy) {
    out["balanced_accuracy"] = *report.balanced_accuracy;
  }
  if (report.confusion) {
    out["confusion"] = {{"labels", report.confusion->labels},
                        {"counts", report.confusion->counts}};
  }
  if (!report.warnings.empty()) out["warnings"] = report.warnings;
  return out;
}

EvalReport eval_report_from_json(const json& doc) {
  EvalReport report;
  for (auto it = doc.at("per_subset").begin(); it != doc.at("per_subset").end();
       ++it) {
    SubsetStats stats;
    stats.n = it.value().at("n").get<int>();
    stats.correct = it.value().at("correct").get<int>();
    stats.accuracy = it.value().at("accuracy").get<double>();
    report.per_subset[it.key()] = stats;
  }
  report.overall.n = doc.at("overall").at("n").get<int>();
  report.overall.correct = doc.at("overall").at("correct").get<int>();
  report.overall.accuracy = doc.at("overall").at("accuracy").get<double>();
  if (doc.contains("pass_at_k")) {
    for (auto it = doc["pass_at_k"].begin(); it != doc["pass_at_k"].end(); ++it) {
      report.pass_at_k[std::stoi(it.key())] = it.value().get<double>();
    }
  }
  if (doc.contains("balanced_accuracy")) {
    report.balanced_accuracy = doc["balanced_accuracy"].get<double>();
  }
  return report;
}

std::string render_subset_table(const EvalReport& report) {
  std::vector<std::string> order;
  for (const std::string& name : benchmark_subset_order()) {
    if (report.per_subset.count(name)) order.push_back(name);
  }
  for (const auto& [name, _] : report.per_subset) {
    if (std::find(order.begin(), order.end(), name) == order.end()) {
      order.push_back(name);
    }
  }

  std::vector<std::string> heads, accs;
  for (const std::string& name : order) {
    const SubsetStats& stats = report.per_subset.at(name);
    heads.push_back(name + " (" + std::to_string(stats.n) + ")");
    accs.push_back(percent(stats.accuracy));
  }
  heads.push_back("Overall (" + std::to_string(report.overall.n) + ")");
  accs.push_back(percent(report.overall.accuracy));

  std::ostringstream out;
  out << std::left << std::setw(10) << "Subset";
  for (const std::string& h : heads) out << std::right << std::setw(int(h.size()) + 2) << h;
  out << '\n' << std::left << std::setw(10) << "Accuracy";
  for (std::size_t i = 0; i < heads.size(); ++i) {
    out << std::right << std::setw(int(heads[i].size()) + 2) << accs[i];
  }
  out << '\n';
  if (!report.pass_at_k.empty()) {
    out << "Pass@k";
    for (const auto& [k, v] : report.pass_at_k) {
      out << "  k=" << k << ": " << percent(v);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace pathnav
