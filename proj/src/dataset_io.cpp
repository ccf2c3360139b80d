#include "ptycho/dataset.hpp"

#include <json.hpp>

#include <cstring>
#include <sstream>

#include "ptycho/io_util.hpp"

namespace ptycho {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kDatasetVersion = "ptyd-1";
constexpr const char* kTruthVersion = "ptyt-1";

fs::path payload_path(const fs::path& manifest_path) {
  fs::path p = manifest_path;
  p.replace_extension(".bin");
  return p;
}

std::string checksum_hex(const std::string& bytes) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%08x", crc32(bytes.data(), bytes.size()));
  return buf;
}

void append_plane_f32(std::string& out, const ComplexTensor& t) {
  for (double v : t.re()) append_f32_le(out, static_cast<float>(v));
}

void append_tensor_f64(std::string& out, const ComplexTensor& t) {
  for (double v : t.re()) append_f64_le(out, v);
  for (double v : t.im()) append_f64_le(out, v);
}

ComplexTensor read_tensor_f64(const std::string& bytes, std::size_t& off,
                              int rows, int cols) {
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

}  // namespace

void save_dataset(const PtychoDataset& ds, const fs::path& manifest_path) {
  std::string payload;
  payload.reserve((ds.frames.size() + ds.darks.size()) *
                  static_cast<std::size_t>(ds.rows) * ds.cols * 4);
  for (const ComplexTensor& f : ds.frames) append_plane_f32(payload, f);
  for (const ComplexTensor& d : ds.darks) append_plane_f32(payload, d);

  json m;
  m["version"] = kDatasetVersion;
  m["wavelength_m"] = ds.wavelength;
  m["z_init_m"] = ds.z_init;
  m["pixel_pitch_m"] = {ds.dx, ds.dy};
  m["pattern_shape"] = {ds.rows, ds.cols};
  m["frame_count"] = ds.frames.size();
  m["dark_count"] = ds.darks.size();
  m["positions_m"] = json::array();
  for (const auto& p : ds.positions_m) m["positions_m"].push_back({p[0], p[1]});
  m["notes"] = ds.notes;
  m["payload"] = payload_path(manifest_path).filename().string();
  m["payload_crc32"] = checksum_hex(payload);

  write_file_atomic(payload_path(manifest_path), payload);
  write_file_atomic(manifest_path, m.dump(2) + "\n");
}

PtychoDataset load_dataset(const fs::path& manifest_path) {
  json m;
  try {
    m = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw DatasetError("bad-manifest", e.what());
  }
  if (!m.contains("version") || m["version"] != kDatasetVersion) {
    throw DatasetError("bad-version",
                       "unknown container version in " + manifest_path.string());
  }
  PtychoDataset ds;
  try {
    ds.wavelength = m.at("wavelength_m").get<double>();
    ds.z_init = m.at("z_init_m").get<double>();
    ds.dx = m.at("pixel_pitch_m").at(0).get<double>();
    ds.dy = m.at("pixel_pitch_m").at(1).get<double>();
    ds.rows = m.at("pattern_shape").at(0).get<int>();
    ds.cols = m.at("pattern_shape").at(1).get<int>();
    for (const auto& p : m.at("positions_m")) {
      ds.positions_m.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    }
    ds.notes = m.value("notes", "");
  } catch (const json::exception& e) {
    throw DatasetError("bad-manifest", e.what());
  }
  const std::size_t frames = m.at("frame_count").get<std::size_t>();
  const std::size_t darks = m.value("dark_count", std::size_t{0});
  if (frames != ds.positions_m.size()) {
    throw DatasetError("shape-mismatch",
                       "frame count does not match position list");
  }

  const fs::path pp = manifest_path.parent_path() /
                      m.at("payload").get<std::string>();
  std::string payload;
  try {
    payload = read_file(pp);
  } catch (const std::exception& e) {
    throw DatasetError("missing-payload", e.what());
  }
  const std::size_t plane = static_cast<std::size_t>(ds.rows) * ds.cols * 4;
  if (payload.size() != (frames + darks) * plane) {
    throw DatasetError("truncated-payload",
                       "expected " + std::to_string((frames + darks) * plane) +
                           " bytes, found " + std::to_string(payload.size()));
  }
  if (checksum_hex(payload) != m.at("payload_crc32").get<std::string>()) {
    throw DatasetError("checksum-mismatch", "payload corrupted: " + pp.string());
  }

  std::size_t off = 0;
  auto read_plane = [&] {
    ComplexTensor t(ds.rows, ds.cols);
    for (double& v : t.re()) {
      v = read_f32_le(payload, off);
      off += 4;
    }
    return t;
  };
  for (std::size_t j = 0; j < frames; ++j) ds.frames.push_back(read_plane());
  for (std::size_t j = 0; j < darks; ++j) ds.darks.push_back(read_plane());
  return ds;
}

void save_ground_truth(const GroundTruth& gt, const fs::path& manifest_path) {
  std::string payload;
  append_tensor_f64(payload, gt.object);
  for (const ComplexTensor& p : gt.probe_modes) append_tensor_f64(payload, p);

  json m;
  m["version"] = kTruthVersion;
  m["z_m"] = gt.z_m;
  m["object_shape"] = {gt.object.rows(), gt.object.cols()};
  m["mode_count"] = gt.probe_modes.size();
  m["mode_shape"] = {gt.probe_modes.empty() ? 0 : gt.probe_modes[0].rows(),
                     gt.probe_modes.empty() ? 0 : gt.probe_modes[0].cols()};
  m["positions_m"] = json::array();
  for (const auto& p : gt.positions_m) m["positions_m"].push_back({p[0], p[1]});
  m["roi"] = {gt.roi.row0, gt.roi.col0, gt.roi.rows, gt.roi.cols};
  m["payload"] = payload_path(manifest_path).filename().string();
  m["payload_crc32"] = checksum_hex(payload);

  write_file_atomic(payload_path(manifest_path), payload);
  write_file_atomic(manifest_path, m.dump(2) + "\n");
}

GroundTruth load_ground_truth(const fs::path& manifest_path) {
  json m;
  try {
    m = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw DatasetError("bad-manifest", e.what());
  }
  if (!m.contains("version") || m["version"] != kTruthVersion) {
    throw DatasetError("bad-version", "unknown sidecar version");
  }
  GroundTruth gt;
  gt.z_m = m.at("z_m").get<double>();
  for (const auto& p : m.at("positions_m")) {
    gt.positions_m.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  }
  gt.roi = {m.at("roi").at(0).get<int>(), m.at("roi").at(1).get<int>(),
            m.at("roi").at(2).get<int>(), m.at("roi").at(3).get<int>()};

  const fs::path pp = manifest_path.parent_path() /
                      m.at("payload").get<std::string>();
  const std::string payload = read_file(pp);
  if (checksum_hex(payload) != m.at("payload_crc32").get<std::string>()) {
    throw DatasetError("checksum-mismatch", "sidecar payload corrupted");
  }
  std::size_t off = 0;
  const int orows = m.at("object_shape").at(0).get<int>();
  const int ocols = m.at("object_shape").at(1).get<int>();
  gt.object = read_tensor_f64(payload, off, orows, ocols);
  const std::size_t modes = m.at("mode_count").get<std::size_t>();
  const int mrows = m.at("mode_shape").at(0).get<int>();
  const int mcols = m.at("mode_shape").at(1).get<int>();
  for (std::size_t p = 0; p < modes; ++p) {
    gt.probe_modes.push_back(read_tensor_f64(payload, off, mrows, mcols));
  }
  return gt;
}

std::vector<ComplexTensor> dark_field_correct(
    const std::vector<ComplexTensor>& frames,
    const std::vector<ComplexTensor>& darks, long* clamped) {
  if (clamped) *clamped = 0;
  if (darks.empty()) {
    log_info("dark_field_correct: no dark frames, returning input unchanged");
    return frames;
  }
  ComplexTensor mean(darks[0].rows(), darks[0].cols());
  for (const ComplexTensor& d : darks) {
    if (!d.same_shape(mean)) {
      throw DatasetError("shape-mismatch", "dark frame shape differs");
    }
    for (std::size_t i = 0; i < mean.size(); ++i) mean.re()[i] += d.re()[i];
  }
  for (std::size_t i = 0; i < mean.size(); ++i) mean.re()[i] /= darks.size();

  std::vector<ComplexTensor> out;
  out.reserve(frames.size());
  for (const ComplexTensor& f : frames) {
    if (!f.same_shape(mean)) {
      throw DatasetError("shape-mismatch", "frame/dark shape differs");
    }
    ComplexTensor c(f.rows(), f.cols());
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double v = f.re()[i] - mean.re()[i];
      if (v < 0.0 && clamped) ++*clamped;
      c.re()[i] = std::max(v, 0.0);
    }
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

constexpr char kArrayMagic[8] = {'P', 'T', 'Y', 'A', 'R', 'R', '1', '\n'};

void append_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

std::uint32_t read_u32_le(const std::string& bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) {
    v = (v << 8) | static_cast<unsigned char>(bytes.at(offset + i));
  }
  return v;
}

}  // namespace

void save_array(const ComplexTensor& t, const fs::path& path,
                bool complex_data) {
  std::string bytes(kArrayMagic, sizeof(kArrayMagic));
  append_u32_le(bytes, static_cast<std::uint32_t>(t.rows()));
  append_u32_le(bytes, static_cast<std::uint32_t>(t.cols()));
  append_u32_le(bytes, complex_data ? 2 : 1);
  for (double v : t.re()) append_f64_le(bytes, v);
  if (complex_data) {
    for (double v : t.im()) append_f64_le(bytes, v);
  }
  write_file_atomic(path, bytes);
}

ComplexTensor load_array(const fs::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 20 || std::memcmp(bytes.data(), kArrayMagic, 8) != 0) {
    throw DatasetError("bad-array", "not an array file: " + path.string());
  }
  const int rows = static_cast<int>(read_u32_le(bytes, 8));
  const int cols = static_cast<int>(read_u32_le(bytes, 12));
  const std::uint32_t channels = read_u32_le(bytes, 16);
  ComplexTensor t(rows, cols);
  std::size_t off = 20;
  for (double& v : t.re()) {
    v = read_f64_le(bytes, off);
    off += 8;
  }
  if (channels == 2) {
    for (double& v : t.im()) {
      v = read_f64_le(bytes, off);
      off += 8;
    }
  }
  return t;
}

}  // namespace ptycho
