#include <cstdint>
#include <vector>

#include "ptycho/dataset.hpp"
#include "ptycho/io_util.hpp"

namespace ptycho {

namespace {

// Just enough TIFF to ingest beamline stacks: little-endian, uncompressed,
// 16-bit single-sample grayscale, strip layout, multipage via the IFD chain.

struct Reader {
  const std::string& bytes;

  std::uint16_t u16(std::size_t off) const {
    check(off, 2);
    return static_cast<std::uint16_t>(
        static_cast<unsigned char>(bytes[off]) |
        (static_cast<unsigned char>(bytes[off + 1]) << 8));
  }
  std::uint32_t u32(std::size_t off) const {
    check(off, 4);
    return static_cast<std::uint32_t>(u16(off)) |
           (static_cast<std::uint32_t>(u16(off + 2)) << 16);
  }
  void check(std::size_t off, std::size_t n) const {
    if (off + n > bytes.size()) {
      throw DatasetError("bad-tiff", "truncated TIFF structure");
    }
  }
};

struct Entry {
  std::uint16_t type = 0;
  std::uint32_t count = 0;
  std::size_t value_off = 0;  // position of the inline value field
};

std::uint32_t entry_value(const Reader& r, const Entry& e, std::uint32_t idx) {
  const std::size_t elem = e.type == 3 ? 2 : 4;
  std::size_t base = e.value_off;
  if (e.count * elem > 4) base = r.u32(e.value_off);
  const std::size_t off = base + idx * elem;
  return e.type == 3 ? r.u16(off) : r.u32(off);
}

}  // namespace

std::vector<ComplexTensor> import_tiff_frames(
    const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  Reader r{bytes};
  if (bytes.size() < 8 || bytes[0] != 'I' || bytes[1] != 'I' || r.u16(2) != 42) {
    throw DatasetError("bad-tiff",
                       "expected little-endian TIFF: " + path.string());
  }

  std::vector<ComplexTensor> frames;
  std::uint32_t ifd = r.u32(4);
  while (ifd != 0) {
    const std::uint16_t n = r.u16(ifd);
    std::uint32_t width = 0, height = 0, bits = 1, compression = 1;
    std::uint32_t rows_per_strip = 0xFFFFFFFFu, samples = 1;
    Entry strip_offsets, strip_counts;
    for (std::uint16_t i = 0; i < n; ++i) {
      const std::size_t e = ifd + 2 + i * 12u;
      const std::uint16_t tag = r.u16(e);
      Entry entry{r.u16(e + 2), r.u32(e + 4), e + 8};
      switch (tag) {
        case 256: width = entry_value(r, entry, 0); break;
        case 257: height = entry_value(r, entry, 0); break;
        case 258: bits = entry_value(r, entry, 0); break;
        case 259: compression = entry_value(r, entry, 0); break;
        case 273: strip_offsets = entry; break;
        case 277: samples = entry_value(r, entry, 0); break;
        case 278: rows_per_strip = entry_value(r, entry, 0); break;
        case 279: strip_counts = entry; break;
        default: break;
      }
    }
    if (compression != 1) {
      throw DatasetError("bad-tiff", "compressed TIFF not supported");
    }
    if (bits != 16 || samples != 1) {
      throw DatasetError("bad-tiff", "expected 16-bit single-sample pages");
    }
    if (width == 0 || height == 0 || strip_offsets.count == 0) {
      throw DatasetError("bad-tiff", "missing required page tags");
    }

    ComplexTensor frame(static_cast<int>(height), static_cast<int>(width));
    const std::uint32_t rps = std::min(rows_per_strip, height);
    std::uint32_t row = 0;
    for (std::uint32_t s = 0; s < strip_offsets.count; ++s) {
      const std::uint32_t off = entry_value(r, strip_offsets, s);
      const std::uint32_t rows_here = std::min(rps, height - row);
      const std::uint32_t expect = rows_here * width * 2;
      if (strip_counts.count > s && entry_value(r, strip_counts, s) != expect) {
        throw DatasetError("bad-tiff", "unexpected strip byte count");
      }
      for (std::uint32_t rr = 0; rr < rows_here; ++rr) {
        for (std::uint32_t c = 0; c < width; ++c) {
          frame.re(static_cast<int>(row + rr), static_cast<int>(c)) =
              static_cast<double>(r.u16(off + (rr * width + c) * 2));
        }
      }
      row += rows_here;
    }
    frames.push_back(std::move(frame));
    ifd = r.u32(ifd + 2 + n * 12u);
  }
  if (frames.empty()) {
    throw DatasetError("bad-tiff", "no pages in " + path.string());
  }
  return frames;
}

}  // namespace ptycho
