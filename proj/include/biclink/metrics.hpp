#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace biclink {

struct ScoredPair {
  std::string object;
  std::string attribute;
  double score = 0.0;
  int label = 0;
};

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
};

struct EvalReport {
  double f1 = 0.0;
  double auc = 0.0;
  double aupr = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double threshold = 0.5;
  ConfusionCounts counts;
};

/// score >= threshold predicts a link. Throws unless both labels occur.
EvalReport compute_metrics(std::span<const ScoredPair> pairs, double threshold);

/// Mann-Whitney statistic; a tie between a positive and a negative counts 1/2.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Step-interpolated area under the precision-recall curve, sweeping scores
/// from high to low with tied scores entering together.
double average_precision(std::span<const double> scores, std::span<const int> labels);

ConfusionCounts confusion(std::span<const double> scores, std::span<const int> labels, double threshold);

/// Median of the scores, the default cut for unbounded baseline scores.
double median_threshold(std::span<const ScoredPair> pairs);

void write_predictions(std::ostream& out, std::span<const ScoredPair> pairs);
void write_predictions(const std::filesystem::path& path, std::span<const ScoredPair> pairs);

std::string report_to_json(const EvalReport& report, const std::string& method,
                           const std::string& extra_json = "{}");

}  // namespace biclink
