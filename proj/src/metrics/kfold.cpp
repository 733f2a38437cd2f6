#include "mibo/metrics/kfold.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>

namespace mibo::metrics {

std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("kfold: k must be at least 2");
  if (k > n) {
    throw std::invalid_argument("kfold: k=" + std::to_string(k) + " exceeds dataset size " + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  // Fisher-Yates with our own index draw so the order is identical across standard libraries.
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                    order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return folds;
}

MetricSummary summarize(std::string name, std::vector<double> values) {
  MetricSummary s;
  s.name = std::move(name);
  s.values = std::move(values);
  if (s.values.empty()) return s;
  s.mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / static_cast<double>(s.values.size());
  if (s.values.size() > 1) {
    double ss = 0.0;
    for (double v : s.values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.values.size() - 1));
  }
  return s;
}

const MetricSummary* EvalReport::find(const std::string& name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

namespace {

EvalReport collect(std::vector<std::pair<std::string, std::vector<double>>> columns) {
  EvalReport r;
  for (auto& [name, values] : columns) r.metrics.push_back(summarize(name, std::move(values)));
  return r;
}

void append(std::vector<std::pair<std::string, std::vector<double>>>& columns, const std::string& name,
            std::span<const double> values) {
  auto it = std::find_if(columns.begin(), columns.end(), [&](const auto& c) { return c.first == name; });
  if (it == columns.end()) {
    columns.emplace_back(name, std::vector<double>{});
    it = columns.end() - 1;
  }
  it->second.insert(it->second.end(), values.begin(), values.end());
}

}  // namespace

EvalReport kfold_evaluate(std::size_t n, std::size_t k, std::uint64_t seed, const FoldTrainer& trainer) {
  const auto folds = kfold_partition(n, k, seed);
  std::vector<std::pair<std::string, std::vector<double>>> columns;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> train;
    for (std::size_t g = 0; g < k; ++g) {
      if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
    }
    for (const auto& [name, value] : trainer(train, folds[f])) append(columns, name, std::span(&value, 1));
  }
  auto r = collect(std::move(columns));
  r.seeds = {seed};
  r.folds = k;
  return r;
}

EvalReport merge_reports(const std::vector<EvalReport>& reports) {
  if (reports.empty()) return {};
  std::vector<std::pair<std::string, std::vector<double>>> columns;
  std::vector<std::uint64_t> seeds;
  for (const auto& r : reports) {
    if (r.folds != reports.front().folds) throw std::invalid_argument("merge_reports: fold counts differ");
    for (const auto& m : r.metrics) append(columns, m.name, m.values);
    seeds.insert(seeds.end(), r.seeds.begin(), r.seeds.end());
  }
  auto out = collect(std::move(columns));
  out.method = reports.front().method;
  out.seeds = std::move(seeds);
  out.folds = reports.front().folds;
  return out;
}

}  // namespace mibo::metrics
