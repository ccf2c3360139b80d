#pragma once

#include <array>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptycho/metrics.hpp"
#include "ptycho/tensor.hpp"

namespace ptycho {

using ad::ComplexTensor;

/// A measured (or synthesized) ptychography acquisition. In memory the
/// frames stay double precision; the on-disk payload quantizes to the
/// container's little-endian float32 contract.
struct PtychoDataset {
  double wavelength = 1e-9;
  double z_init = 0.1;       // meters, initial propagation distance estimate
  double dx = 1e-6, dy = 1e-6;
  int rows = 0, cols = 0;    // pattern shape
  std::vector<std::array<double, 2>> positions_m;
  std::vector<ComplexTensor> frames;  // real planes, one intensity per shot
  std::vector<ComplexTensor> darks;   // optional dark frames
  std::string notes;

  std::size_t count() const { return frames.size(); }
};

/// Synthetic-data sidecar: everything needed for truth-aware metrics.
struct GroundTruth {
  ComplexTensor object;
  std::vector<ComplexTensor> probe_modes;
  double z_m = 0.0;
  std::vector<std::array<double, 2>> positions_m;
  EvalRoi roi;
};

struct DatasetError : std::runtime_error {
  std::string code;
  DatasetError(std::string code_, const std::string& what_)
      : std::runtime_error(code_ + ": " + what_), code(std::move(code_)) {}
};

/// Manifest (JSON) at `manifest_path` plus a payload binary next to it.
/// Round trips are bit-exact for the payload and value-exact for the
/// manifest; loading verifies the version tag and payload checksum.
void save_dataset(const PtychoDataset& ds,
                  const std::filesystem::path& manifest_path);
PtychoDataset load_dataset(const std::filesystem::path& manifest_path);

void save_ground_truth(const GroundTruth& gt,
                       const std::filesystem::path& manifest_path);
GroundTruth load_ground_truth(const std::filesystem::path& manifest_path);

/// corrected = max(frame - mean(darks), 0). Empty darks leave the frames
/// unchanged (with a warning). Reports the number of clamped samples.
std::vector<ComplexTensor> dark_field_correct(
    const std::vector<ComplexTensor>& frames,
    const std::vector<ComplexTensor>& darks, long* clamped = nullptr);

/// Import shim for 16-bit grayscale multipage TIFF stacks (uncompressed),
/// mapping each page to one frame as floats.
std::vector<ComplexTensor> import_tiff_frames(const std::filesystem::path& path);

// Self-describing array files used for raw tool outputs (f64, magic-tagged).
void save_array(const ComplexTensor& t, const std::filesystem::path& path,
                bool complex_data = true);
ComplexTensor load_array(const std::filesystem::path& path);

}  // namespace ptycho
