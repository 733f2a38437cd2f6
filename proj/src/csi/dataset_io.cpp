#include <stdexcept>

#include "json.hpp"
#include "mibo/csi/dataset.hpp"
#include "mibo/csi/scenario_json.hpp"
#include "mibo/io.hpp"

namespace mibo::csi {

using nlohmann::json;

void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::size_t n = ds.size();
  const std::size_t pairs = ds.scenario.pairs();
  const std::size_t m = ds.scenario.subcarriers;

  std::vector<double> h;
  std::vector<double> labels;
  std::vector<double> pos;
  h.reserve(n * pairs * m * 2);
  for (const auto& s : ds.samples) {
    if (s.h.pairs != pairs || s.h.subcarriers != m) {
      throw std::invalid_argument("write_dataset: sample CSI shape disagrees with the scenario");
    }
    for (const auto& v : s.h.values) {
      h.push_back(v.real());
      h.push_back(v.imag());
    }
    labels.push_back(static_cast<double>(s.state));
    pos.push_back(s.position.x);
    pos.push_back(s.position.y);
  }
  io::write_f64_atomic(dir / "h.bin", h);
  io::write_f64_atomic(dir / "m.bin", labels);
  io::write_f64_atomic(dir / "p.bin", pos);

  json manifest;
  manifest["format_version"] = kDatasetFormatVersion;
  manifest["seed"] = ds.seed;
  manifest["featurization"] = to_string(ds.mode);
  manifest["counts"] = {{"samples", n}, {"pairs", pairs}, {"subcarriers", m}, {"states", ds.state_count()}};
  manifest["shapes"] = {{"h", {n, pairs, m, 2}}, {"m", {n}}, {"p", {n, 2}}};
  manifest["scenario"] = scenario_to_json(ds.scenario);
  io::write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

Dataset read_dataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  if (!std::filesystem::exists(manifest_path)) {
    throw std::runtime_error("no dataset manifest at '" + manifest_path.string() + "'");
  }
  json manifest;
  try {
    manifest = json::parse(io::read_text(manifest_path));
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed dataset manifest: " + std::string(e.what()));
  }
  const int version = manifest.value("format_version", -1);
  if (version != kDatasetFormatVersion) {
    throw std::runtime_error("unsupported dataset format version " + std::to_string(version));
  }
  Dataset ds;
  ds.scenario = scenario_from_json(manifest.at("scenario"));
  ds.seed = manifest.at("seed").get<std::uint64_t>();
  ds.mode = feature_mode_from_string(manifest.at("featurization").get<std::string>());
  const auto n = manifest.at("counts").at("samples").get<std::size_t>();
  const std::size_t pairs = ds.scenario.pairs();
  const std::size_t m = ds.scenario.subcarriers;

  const auto h = io::read_f64(dir / "h.bin");
  const auto labels = io::read_f64(dir / "m.bin");
  const auto pos = io::read_f64(dir / "p.bin");
  if (h.size() != n * pairs * m * 2 || labels.size() != n || pos.size() != n * 2) {
    throw std::runtime_error("dataset binaries disagree with the manifest shapes");
  }
  ds.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& s = ds.samples[i];
    s.h = CsiMatrix(pairs, m);
    const double* src = h.data() + i * pairs * m * 2;
    for (std::size_t k = 0; k < pairs * m; ++k) s.h.values[k] = {src[2 * k], src[2 * k + 1]};
    s.state = static_cast<std::size_t>(labels[i]);
    s.position = {pos[2 * i], pos[2 * i + 1]};
    s.slot = i;
  }
  return ds;
}

}  // namespace mibo::csi
