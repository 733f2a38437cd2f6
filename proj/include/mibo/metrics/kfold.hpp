#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace mibo::metrics {

// Shuffles 0..n-1 with the seed, then cuts k contiguous folds whose sizes
// differ by at most one.
std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t k, std::uint64_t seed);

struct MetricSummary {
  std::string name;
  std::vector<double> values;  // one per fold (and seed)
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single value
};

MetricSummary summarize(std::string name, std::vector<double> values);

struct EvalReport {
  std::string method;
  std::vector<std::uint64_t> seeds;
  std::size_t folds = 0;
  std::vector<MetricSummary> metrics;

  const MetricSummary* find(const std::string& name) const;
};

using NamedMetrics = std::vector<std::pair<std::string, double>>;
// Trains on the first row set and scores on the second.
using FoldTrainer =
    std::function<NamedMetrics(const std::vector<std::size_t>& train, const std::vector<std::size_t>& test)>;

EvalReport kfold_evaluate(std::size_t n, std::size_t k, std::uint64_t seed, const FoldTrainer& trainer);

// Concatenates per-fold values of reports that share metric names.
EvalReport merge_reports(const std::vector<EvalReport>& reports);

}  // namespace mibo::metrics
