#include "searn/eval.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "searn/error.hpp"
#include "searn/task_depparse.hpp"

namespace searn {

std::vector<int> min_cost_assignment(std::span<const double> cost, std::size_t n) {
  require(cost.size() == n * n, ErrorKind::parameter, "cost matrix must be n x n");
  // Shortest augmenting paths with potentials (Hungarian method), 1-based.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> col(n, -1);
  for (std::size_t j = 1; j <= n; ++j) {
    if (match[j] != 0) col[match[j] - 1] = static_cast<int>(j - 1);
  }
  return col;
}

double matched_hamming(std::span<const int> pred, std::span<const int> gold, std::size_t K_pred,
                       std::size_t K_gold) {
  require(pred.size() == gold.size(), ErrorKind::data, "labelings differ in length");
  require(!pred.empty(), ErrorKind::data, "empty labeling");
  require(K_pred >= 1 && K_gold >= 1, ErrorKind::parameter, "label counts must be positive");
  const std::size_t n = std::max(K_pred, K_gold);
  std::vector<double> agree(n * n, 0.0);
  for (std::size_t t = 0; t < pred.size(); ++t) {
    if (pred[t] < 0 || static_cast<std::size_t>(pred[t]) >= K_pred || gold[t] < 0 ||
        static_cast<std::size_t>(gold[t]) >= K_gold) {
      fail(ErrorKind::data, "label out of range at position " + std::to_string(t));
    }
    agree[static_cast<std::size_t>(pred[t]) * n + static_cast<std::size_t>(gold[t])] += 1.0;
  }
  // Padding rows/columns have zero agreement, so unmatched labels score 0.
  std::vector<double> cost(agree.size());
  for (std::size_t i = 0; i < agree.size(); ++i) cost[i] = -agree[i];
  const auto col = min_cost_assignment(cost, n);
  double hits = 0.0;
  for (std::size_t r = 0; r < n; ++r) hits += agree[r * n + static_cast<std::size_t>(col[r])];
  return 1.0 - hits / static_cast<double>(pred.size());
}

double arc_accuracy_pooled(std::span<const DependencyTree> pred,
                           std::span<const DependencyTree> gold) {
  require(pred.size() == gold.size(), ErrorKind::data, "tree lists differ in length");
  double right = 0.0;
  double total = 0.0;
  for (std::size_t n = 0; n < pred.size(); ++n) {
    right += arc_accuracy(pred[n], gold[n]) * static_cast<double>(gold[n].size());
    total += static_cast<double>(gold[n].size());
  }
  require(total > 0.0, ErrorKind::data, "no tokens to score");
  return right / total;
}

RunSummary summarize(const std::string& metric, std::span<const double> values) {
  require(!values.empty(), ErrorKind::parameter, "cannot summarize zero runs");
  RunSummary s;
  s.metric = metric;
  s.values.assign(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  const auto n = static_cast<double>(values.size());
  s.mean = sum / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
    s.stddev_defined = true;
  }
  return s;
}

void write_metrics_csv(std::ostream& out, const std::vector<RunSummary>& summaries) {
  out << "metric,run,value\n";
  std::ostringstream num;
  num.precision(17);
  for (const auto& s : summaries) {
    for (std::size_t r = 0; r < s.values.size(); ++r) {
      num.str("");
      num << s.values[r];
      out << s.metric << ',' << r << ',' << num.str() << '\n';
    }
  }
}

void write_metrics_csv(const std::string& path, const std::vector<RunSummary>& summaries) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot open " + path + " for writing");
  write_metrics_csv(out, summaries);
  if (!out) fail(ErrorKind::io, "failed writing " + path);
}

std::string summaries_to_json(const std::vector<RunSummary>& summaries) {
  nlohmann::ordered_json j;
  j["metrics"] = nlohmann::ordered_json::array();
  for (const auto& s : summaries) {
    nlohmann::ordered_json m;
    m["metric"] = s.metric;
    m["runs"] = s.runs();
    m["mean"] = s.mean;
    m["stddev"] = s.stddev;
    m["stddev_defined"] = s.stddev_defined;
    m["values"] = s.values;
    j["metrics"].push_back(std::move(m));
  }
  return j.dump(2) + "\n";
}

}  // namespace searn
