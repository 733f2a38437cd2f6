#include "mibo/metrics/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "mibo/io.hpp"

namespace mibo::metrics {

namespace {



std::string number(double v) { return io::format17(v); }

}  // namespace

std::string report_to_json(const EvalReport& report) {
  std::ostringstream os;
  os << "{\n  \"method\": " << nlohmann::json(report.method).dump() << ",\n  \"seeds\": [";
  for (std::size_t i = 0; i < report.seeds.size(); ++i) os << (i ? ", " : "") << report.seeds[i];
  os << "],\n  \"folds\": " << report.folds << ",\n  \"metrics\": [";
  for (std::size_t m = 0; m < report.metrics.size(); ++m) {
    const auto& s = report.metrics[m];
    os << (m ? "," : "") << "\n    {\"name\": " << nlohmann::json(s.name).dump() << ", \"mean\": " << number(s.mean)
       << ", \"std\": " << number(s.stddev) << ", \"values\": [";
    for (std::size_t i = 0; i < s.values.size(); ++i) os << (i ? ", " : "") << number(s.values[i]);
    os << "]}";
  }
  os << (report.metrics.empty() ? "" : "\n  ") << "]\n}\n";
  return os.str();
}

EvalReport report_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  EvalReport r;
  r.method = j.at("method").get<std::string>();
  r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  r.folds = j.at("folds").get<std::size_t>();
  for (const auto& m : j.at("metrics")) {
    auto s = summarize(m.at("name").get<std::string>(), m.at("values").get<std::vector<double>>());
    s.mean = m.at("mean").get<double>();
    s.stddev = m.at("std").get<double>();
    r.metrics.push_back(std::move(s));
  }
  return r;
}

std::string render_table(const std::vector<EvalReport>& reports) {
  std::vector<std::string> names;
  for (const auto& r : reports) {
    for (const auto& m : r.metrics) {
      if (std::find(names.begin(), names.end(), m.name) == names.end()) names.push_back(m.name);
    }
  }
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"method"});
  for (const auto& n : names) cells.back().push_back(n);
  for (const auto& r : reports) {
    std::vector<std::string> row{r.method};
    for (const auto& n : names) {
      const auto* m = r.find(n);
      if (!m) {
        row.emplace_back("-");
        continue;
      }
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.4f +/- %.4f", m->mean, m->stddev);
      row.emplace_back(buf);
    }
    cells.push_back(std::move(row));
  }
  std::vector<std::size_t> width(names.size() + 1, 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream os;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      os << (c ? "  " : "") << cells[r][c];
      if (c + 1 < cells[r].size()) os << std::string(width[c] - cells[r][c].size(), ' ');
    }
    os << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      os << std::string(total + 2 * (width.size() - 1), '-') << '\n';
    }
  }
  return os.str();
}

}  // namespace mibo::metrics
