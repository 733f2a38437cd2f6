#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace mibo::solver {

struct HistoryRow {
  std::size_t iter = 0;
  double eta_t = 0.0;
  double loss_s = 0.0;
  double loss_l = 0.0;
  double J = 0.0;
  double G = 0.0;
  double delta_w_sq = 0.0;
  std::size_t num_planes = 0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double lambda_sum = 0.0;
  // Stationarity inputs, kept in the diagnostics file.
  double grad_u_sq = 0.0;
  double grad_v_sq = 0.0;
};

inline constexpr const char* kHistoryHeader =
    "iter,eta_t,loss_s,loss_l,J,G,delta_w_sq,num_planes,mu1,mu2,lambda_sum";
inline constexpr const char* kDiagnosticsHeader = "iter,delta_w_sq,grad_u_sq,grad_v_sq";

std::string history_csv_line(const HistoryRow& row);
std::string diagnostics_csv_line(const HistoryRow& row);

std::string history_csv(const std::vector<HistoryRow>& rows);
std::string diagnostics_csv(const std::vector<HistoryRow>& rows);

// Reads history.csv and, when present next to it, diagnostics.csv.
std::vector<HistoryRow> read_history(const std::filesystem::path& history_csv,
                                     const std::filesystem::path& diagnostics_csv = {});

// Appends rows to a growing file while a run is in flight.
class HistoryFlusher {
 public:
  HistoryFlusher() = default;
  HistoryFlusher(std::filesystem::path path, std::size_t every);
  void maybe_flush(const std::vector<HistoryRow>& rows);
  void finish();  // removes the in-flight file

 private:
  std::filesystem::path path_;
  std::size_t every_ = 0;
  std::size_t written_ = 0;
};

}  // namespace mibo::solver
