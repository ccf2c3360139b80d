#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ptycho {

/// Write-temp-then-rename so readers never observe partial files.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

std::uint32_t crc32(const void* data, std::size_t len);

void append_f32_le(std::string& out, float v);
void append_f64_le(std::string& out, double v);
float read_f32_le(const std::string& bytes, std::size_t offset);
double read_f64_le(const std::string& bytes, std::size_t offset);

/// Verbosity from the PTYCHO_LOG environment variable (quiet|info, default
/// info); the only environment the tools consult.
bool log_enabled();
void log_info(const std::string& msg);

}  // namespace ptycho
