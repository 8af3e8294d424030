#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "searn/data.hpp"

namespace searn {

// Minimum-cost one-to-one assignment of rows to columns of a square cost
// matrix (row-major, n x n). Returns the column of each row.
std::vector<int> min_cost_assignment(std::span<const double> cost, std::size_t n);

// Error rate after the best one-to-one mapping of predicted labels onto gold
// labels, computed over the pooled labelings. Tokens whose predicted label
// is left unmatched count as errors.
double matched_hamming(std::span<const int> pred, std::span<const int> gold, std::size_t K_pred,
                       std::size_t K_gold);

// arc_accuracy is declared with the parser (task_depparse.hpp).
double arc_accuracy_pooled(std::span<const DependencyTree> pred,
                           std::span<const DependencyTree> gold);

struct RunSummary {
  std::string metric;
  std::vector<double> values;
  double mean = 0.0;
  double stddev = 0.0;   // sample standard deviation
  bool stddev_defined = false;  // false for a single run (stddev reported as 0)

  std::size_t runs() const { return values.size(); }
};

RunSummary summarize(const std::string& metric, std::span<const double> values);

// Rows of `metric,run,value`.
void write_metrics_csv(std::ostream& out, const std::vector<RunSummary>& summaries);
void write_metrics_csv(const std::string& path, const std::vector<RunSummary>& summaries);
// {"metrics": [{"metric", "runs", "mean", "stddev", "stddev_defined", "values"}]}
std::string summaries_to_json(const std::vector<RunSummary>& summaries);

}  // namespace searn
