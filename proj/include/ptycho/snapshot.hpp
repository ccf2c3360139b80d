#pragma once

#include <filesystem>

#include "ptycho/reconstruct.hpp"

namespace ptycho {

/// Full resumable reconstruction snapshot (parameters, optimizer moments,
/// epoch counter) in one checksummed binary file.
void save_snapshot(const ReconstructionState& state,
                   const std::filesystem::path& path);
ReconstructionState load_snapshot(const std::filesystem::path& path);

}  // namespace ptycho
