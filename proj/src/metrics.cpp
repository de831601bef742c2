#include "biclink/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace biclink {

namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
  std::size_t pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw std::invalid_argument("non-finite score");
    if (labels[i] != 0 && labels[i] != 1) throw std::invalid_argument("labels must be 0 or 1");
    pos += static_cast<std::size_t>(labels[i]);
  }
  if (pos == 0 || pos == labels.size())
    throw std::invalid_argument("metrics need at least one positive and one negative label");
}

std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
  return idx;
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  // Sum of midranks of positives over tie groups.
  double rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (labels[idx[k]] == 1) {
        rank_sum += midrank;
        ++pos;
      }
    i = j;
  }
  const double np = static_cast<double>(pos);
  const double nn = static_cast<double>(scores.size() - pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double average_precision(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  const auto idx = descending_order(scores);
  const double total_pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  double area = 0.0, prev_recall = 0.0;
  std::size_t tp = 0, seen = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      tp += static_cast<std::size_t>(labels[idx[j]]);
      ++j;
    }
    seen = j;
    const double recall = static_cast<double>(tp) / total_pos;
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return area;
}

ConfusionCounts confusion(std::span<const double> scores, std::span<const int> labels, double threshold) {
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1)
      (predicted ? c.tp : c.fn)++;
    else
      (predicted ? c.fp : c.tn)++;
  }
  return c;
}

EvalReport compute_metrics(std::span<const ScoredPair> pairs, double threshold) {
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(pairs.size());
  labels.reserve(pairs.size());
  for (const auto& p : pairs) {
    scores.push_back(p.score);
    labels.push_back(p.label);
  }
  EvalReport r;
  r.threshold = threshold;
  r.auc = roc_auc(scores, labels);
  r.aupr = average_precision(scores, labels);
  r.counts = confusion(scores, labels, threshold);
  const auto& c = r.counts;
  r.precision = c.tp + c.fp == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  r.f1 = r.precision + r.recall == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

double median_threshold(std::span<const ScoredPair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("no scores");
  std::vector<double> s;
  s.reserve(pairs.size());
  for (const auto& p : pairs) s.push_back(p.score);
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  return n % 2 == 1 ? s[n / 2] : (s[n / 2 - 1] + s[n / 2]) / 2.0;
}

void write_predictions(std::ostream& out, std::span<const ScoredPair> pairs) {
  out << std::setprecision(17);
  for (const auto& p : pairs) out << p.object << '\t' << p.attribute << '\t' << p.score << '\t' << p.label << '\n';
}

void write_predictions(const std::filesystem::path& path, std::span<const ScoredPair> pairs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_predictions(out, pairs);
}

std::string report_to_json(const EvalReport& r, const std::string& method, const std::string& extra_json) {
  nlohmann::ordered_json j;
  j["method"] = method;
  j["f1"] = r.f1;
  j["auc"] = r.auc;
  j["aupr"] = r.aupr;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["threshold"] = r.threshold;
  j["counts"] = {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"tn", r.counts.tn}, {"fn", r.counts.fn}};
  j["metadata"] = nlohmann::ordered_json::parse(extra_json);
  return j.dump(2);
}

}  // namespace biclink
