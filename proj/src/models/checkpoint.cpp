#include "mibo/models/checkpoint.hpp"

#include <stdexcept>

#include "json.hpp"
#include "mibo/io.hpp"

namespace mibo::models {

using nlohmann::json;

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& dir) {
  if (ckpt.theta.size() != ckpt.spec.parameter_count()) {
    throw std::invalid_argument("checkpoint parameter block does not match its layer sizes");
  }
  std::filesystem::create_directories(dir);
  io::write_f64_atomic(dir / "params.bin", ckpt.theta);
  io::write_f64_atomic(dir / "selection.bin", ckpt.selection);
  json m;
  m["format_version"] = kCheckpointFormatVersion;
  m["layer_sizes"] = ckpt.spec.layer_sizes();
  m["head"] = to_string(ckpt.spec.head);
  m["n_subs"] = ckpt.spec.subcarriers;
  m["featurization"] = csi::to_string(ckpt.spec.mode);
  m["selection_source"] = ckpt.spec.selection == SelectionSource::direct ? "direct" : "sigmoid";
  json blocks = json::array();
  const auto sizes = ckpt.spec.layer_sizes();
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    blocks.push_back({{"name", "W" + std::to_string(k + 1)}, {"shape", {sizes[k + 1], sizes[k]}}});
    blocks.push_back({{"name", "b" + std::to_string(k + 1)}, {"shape", {sizes[k + 1]}}});
  }
  m["blocks"] = blocks;
  io::write_file_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

Checkpoint read_checkpoint(const std::filesystem::path& dir) {
  const json m = json::parse(io::read_text(dir / "manifest.json"));
  if (m.value("format_version", -1) != kCheckpointFormatVersion) {
    throw std::runtime_error("unsupported checkpoint format version");
  }
  Checkpoint c;
  const auto sizes = m.at("layer_sizes").get<std::vector<std::size_t>>();
  if (sizes.size() < 2) throw std::runtime_error("checkpoint needs at least two layer sizes");
  c.spec.subcarriers = m.at("n_subs").get<std::size_t>();
  c.spec.mode = csi::feature_mode_from_string(m.at("featurization").get<std::string>());
  c.spec.hidden.assign(sizes.begin() + 1, sizes.end() - 1);
  c.spec.outputs = sizes.back();
  c.spec.head = head_from_string(m.at("head").get<std::string>());
  c.spec.selection = m.at("selection_source").get<std::string>() == "sigmoid" ? SelectionSource::sigmoid
                                                                               : SelectionSource::direct;
  if (c.spec.input_width() != sizes.front()) {
    throw std::runtime_error("checkpoint input width disagrees with n_subs and featurization");
  }
  c.theta = io::read_f64(dir / "params.bin");
  c.selection = io::read_f64(dir / "selection.bin");
  if (c.theta.size() != c.spec.parameter_count() || c.selection.size() != c.spec.subcarriers) {
    throw std::runtime_error("checkpoint binaries disagree with the manifest");
  }
  return c;
}

}  // namespace mibo::models
