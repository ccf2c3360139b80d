#include "ptycho/snapshot.hpp"

#include <json.hpp>

#include <cstring>
#include <sstream>

#include "ptycho/io_util.hpp"

namespace ptycho {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'P', 'T', 'Y', 'S', 'N', 'P', '1', '\n'};

void append_tensor(std::string& out, const ComplexTensor& t) {
  for (double v : t.re()) append_f64_le(out, v);
  for (double v : t.im()) append_f64_le(out, v);
}

ComplexTensor read_tensor(const std::string& bytes, std::size_t& off, int rows,
                          int cols) {
  ComplexTensor t(rows, cols);
  for (double& v : t.re()) {
    v = read_f64_le(bytes, off);
    off += 8;
  }
  for (double& v : t.im()) {
    v = read_f64_le(bytes, off);
    off += 8;
  }
  return t;
}

void append_adam(std::string& out, json& meta, const AdamState& a) {
  meta.push_back({{"rows", a.m.rows()}, {"cols", a.m.cols()}, {"step", a.step}});
  append_tensor(out, a.m);
  append_tensor(out, a.v);
}

AdamState read_adam(const std::string& bytes, std::size_t& off,
                    const json& meta) {
  AdamState a;
  const int rows = meta.at("rows").get<int>();
  const int cols = meta.at("cols").get<int>();
  a.step = meta.at("step").get<long>();
  a.m = read_tensor(bytes, off, rows, cols);
  a.v = read_tensor(bytes, off, rows, cols);
  return a;
}

}  // namespace

void save_snapshot(const ReconstructionState& state, const fs::path& path) {
  std::string payload;
  json h;
  h["version"] = "ptys-1";
  h["epochs_done"] = state.epochs_done;
  h["z_reference_m"] = state.z_reference_m;
  h["z_scale_u"] = state.z_scale_u;
  h["pixel_pitch_m"] = state.scan.pixel_pitch;
  h["object_shape"] = {state.object.rows(), state.object.cols()};
  append_tensor(payload, state.object);
  h["mode_count"] = state.probe_modes.size();
  h["mode_shape"] = {state.probe_modes[0].rows(), state.probe_modes[0].cols()};
  for (const ComplexTensor& m : state.probe_modes) append_tensor(payload, m);

  h["positions_m"] = json::array();
  for (const auto& p : state.scan.nominal_m) {
    h["positions_m"].push_back({p[0], p[1]});
  }
  for (const auto& c : state.scan.corrections) {
    append_f64_le(payload, c[0]);
    append_f64_le(payload, c[1]);
  }

  h["adam_object"] = json::array();
  append_adam(payload, h["adam_object"], state.adam_object);
  h["adam_probe"] = json::array();
  for (const AdamState& a : state.adam_probe) append_adam(payload, h["adam_probe"], a);
  h["adam_distance"] = json::array();
  append_adam(payload, h["adam_distance"], state.adam_distance);
  h["adam_positions"] = json::array();
  for (const AdamState& a : state.adam_positions) {
    append_adam(payload, h["adam_positions"], a);
  }
  h["history_csv"] = state.history.to_csv();

  const std::string header = h.dump();
  std::string bytes(kMagic, sizeof(kMagic));
  append_f64_le(bytes, static_cast<double>(header.size()));
  bytes += header;
  char crc[16];
  std::snprintf(crc, sizeof(crc), "%08x",
                crc32(payload.data(), payload.size()));
  bytes.append(crc, 8);
  bytes += payload;
  write_file_atomic(path, bytes);
}

ReconstructionState load_snapshot(const fs::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw DatasetError("bad-snapshot", "not a snapshot file: " + path.string());
  }
  const auto header_len = static_cast<std::size_t>(read_f64_le(bytes, 8));
  json h;
  try {
    h = json::parse(bytes.substr(16, header_len));
  } catch (const json::exception& e) {
    throw DatasetError("bad-snapshot", e.what());
  }
  if (h.value("version", "") != "ptys-1") {
    throw DatasetError("bad-version", "unknown snapshot version");
  }
  const std::string stored_crc = bytes.substr(16 + header_len, 8);
  const std::string payload = bytes.substr(16 + header_len + 8);
  char crc[16];
  std::snprintf(crc, sizeof(crc), "%08x", crc32(payload.data(), payload.size()));
  if (stored_crc != crc) {
    throw DatasetError("checksum-mismatch", "snapshot payload corrupted");
  }

  ReconstructionState state;
  state.epochs_done = h.at("epochs_done").get<int>();
  state.z_reference_m = h.at("z_reference_m").get<double>();
  state.z_scale_u = h.at("z_scale_u").get<double>();
  state.scan.pixel_pitch = h.at("pixel_pitch_m").get<double>();

  std::size_t off = 0;
  state.object = read_tensor(payload, off, h.at("object_shape").at(0).get<int>(),
                             h.at("object_shape").at(1).get<int>());
  const std::size_t modes = h.at("mode_count").get<std::size_t>();
  for (std::size_t m = 0; m < modes; ++m) {
    state.probe_modes.push_back(
        read_tensor(payload, off, h.at("mode_shape").at(0).get<int>(),
                    h.at("mode_shape").at(1).get<int>()));
  }
  for (const auto& p : h.at("positions_m")) {
    state.scan.nominal_m.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  }
  for (std::size_t j = 0; j < state.scan.nominal_m.size(); ++j) {
    const double cx = read_f64_le(payload, off);
    off += 8;
    const double cy = read_f64_le(payload, off);
    off += 8;
    state.scan.corrections.push_back({cx, cy});
  }
  state.adam_object = read_adam(payload, off, h.at("adam_object").at(0));
  for (const auto& meta : h.at("adam_probe")) {
    state.adam_probe.push_back(read_adam(payload, off, meta));
  }
  state.adam_distance = read_adam(payload, off, h.at("adam_distance").at(0));
  for (const auto& meta : h.at("adam_positions")) {
    state.adam_positions.push_back(read_adam(payload, off, meta));
  }

  // History restored row by row from the embedded CSV.
  std::istringstream csv(h.value("history_csv", ""));
  std::string line;
  std::getline(csv, line);  // header
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    EpochRecord r;
    std::istringstream row(line);
    std::string cell;
    auto next = [&]() -> std::string {
      std::getline(row, cell, ',');
      return cell;
    };
    r.epoch = std::stoi(next());
    r.data_fidelity = std::stod(next());
    r.regularization = std::stod(next());
    r.total_loss = std::stod(next());
    r.z_m = std::stod(next());
    const std::string med = next();
    if (!med.empty()) {
      r.has_truth_metrics = true;
      r.pos_err_median = std::stod(med);
      r.pos_err_mean = std::stod(next());
      r.pos_err_max = std::stod(next());
      r.ssim_magnitude = std::stod(next());
      r.ssim_phase = std::stod(next());
    }
    state.history.epochs.push_back(r);
  }
  return state;
}

}  // namespace ptycho
