#include "mibo/solver/history.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mibo/io.hpp"

namespace mibo::solver {

using io::format17;

std::string history_csv_line(const HistoryRow& r) {
  std::string s = std::to_string(r.iter);
  for (double v : {r.eta_t, r.loss_s, r.loss_l, r.J, r.G, r.delta_w_sq}) s += "," + format17(v);
  s += "," + std::to_string(r.num_planes);
  for (double v : {r.mu1, r.mu2, r.lambda_sum}) s += "," + format17(v);
  return s;
}

std::string diagnostics_csv_line(const HistoryRow& r) {
  return std::to_string(r.iter) + "," + format17(r.delta_w_sq) + "," + format17(r.grad_u_sq) + "," +
         format17(r.grad_v_sq);
}

std::string history_csv(const std::vector<HistoryRow>& rows) {
  std::string out = std::string(kHistoryHeader) + "\n";
  for (const auto& r : rows) out += history_csv_line(r) + "\n";
  return out;
}

std::string diagnostics_csv(const std::vector<HistoryRow>& rows) {
  std::string out = std::string(kDiagnosticsHeader) + "\n";
  for (const auto& r : rows) out += diagnostics_csv_line(r) + "\n";
  return out;
}

namespace {

std::vector<std::vector<double>> parse_csv(const std::filesystem::path& path, const std::string& header) {
  std::istringstream in(io::read_text(path));
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw std::runtime_error("'" + path.string() + "' does not start with the expected header");
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> fields;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) fields.push_back(std::stod(cell));
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

std::vector<HistoryRow> read_history(const std::filesystem::path& history_path,
                                     const std::filesystem::path& diagnostics_path) {
  const auto rows = parse_csv(history_path, kHistoryHeader);
  std::vector<HistoryRow> out;
  out.reserve(rows.size());
  for (const auto& f : rows) {
    if (f.size() != 11) throw std::runtime_error("history row with " + std::to_string(f.size()) + " fields");
    HistoryRow r;
    r.iter = static_cast<std::size_t>(f[0]);
    r.eta_t = f[1];
    r.loss_s = f[2];
    r.loss_l = f[3];
    r.J = f[4];
    r.G = f[5];
    r.delta_w_sq = f[6];
    r.num_planes = static_cast<std::size_t>(f[7]);
    r.mu1 = f[8];
    r.mu2 = f[9];
    r.lambda_sum = f[10];
    out.push_back(r);
  }
  if (!diagnostics_path.empty() && std::filesystem::exists(diagnostics_path)) {
    const auto diag = parse_csv(diagnostics_path, kDiagnosticsHeader);
    if (diag.size() != out.size()) throw std::runtime_error("diagnostics and history lengths differ");
    for (std::size_t i = 0; i < diag.size(); ++i) {
      out[i].grad_u_sq = diag[i].at(2);
      out[i].grad_v_sq = diag[i].at(3);
    }
  }
  return out;
}

HistoryFlusher::HistoryFlusher(std::filesystem::path path, std::size_t every)
    : path_(std::move(path)), every_(every) {
  std::ofstream out(path_, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path_.string() + "'");
  out << kHistoryHeader << "\n";
}

void HistoryFlusher::maybe_flush(const std::vector<HistoryRow>& rows) {
  if (path_.empty() || every_ == 0 || rows.size() - written_ < every_) return;
  std::ofstream out(path_, std::ios::app);
  for (; written_ < rows.size(); ++written_) out << history_csv_line(rows[written_]) << "\n";
}

void HistoryFlusher::finish() {
  if (!path_.empty()) std::filesystem::remove(path_);
  path_.clear();
}

}  // namespace mibo::solver
