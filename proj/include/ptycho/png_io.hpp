#pragma once

#include <filesystem>

#include "ptycho/tensor.hpp"

namespace ptycho {

using ad::ComplexTensor;

/// 8-bit grayscale PNG of |field| mapped linearly onto [0, max|field|].
void write_magnitude_png(const ComplexTensor& field,
                         const std::filesystem::path& path);

/// RGB PNG of arg(field) under a cyclic colormap over (-pi, pi].
void write_phase_png(const ComplexTensor& field,
                     const std::filesystem::path& path);

/// 8-bit grayscale PNG of a real plane mapped linearly onto its range.
void write_real_png(const ComplexTensor& plane,
                    const std::filesystem::path& path);

}  // namespace ptycho
