#pragma once

#include <zlib.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rdcnn {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DecodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnsupportedFormat : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// 8-bit grayscale raster, row-major.
struct Image8 {
  int rows = 0, cols = 0;
  std::vector<uint8_t> px;

  bool operator==(const Image8&) const = default;
};

/// Grayscale matrix with values in [0,1], row-major.
struct GrayImage {
  int rows = 0, cols = 0;
  std::vector<double> px;

  double at(int i, int j) const { return px[size_t(i) * cols + j]; }
};

namespace detail {

inline std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::vector<uint8_t> data{std::istreambuf_iterator<char>(f),
                            std::istreambuf_iterator<char>()};
  return data;
}

inline void write_file(const std::string& path, const void* data, size_t n) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f.write(static_cast<const char*>(data), std::streamsize(n));
  if (!f) throw IoError("short write to " + path);
}

inline void put_be32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(uint8_t(v >> 24));
  out.push_back(uint8_t(v >> 16));
  out.push_back(uint8_t(v >> 8));
  out.push_back(uint8_t(v));
}

inline uint32_t get_be32(const uint8_t* p) {
  return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) |
         uint32_t(p[3]);
}

inline void png_chunk(std::vector<uint8_t>& out, const char type[4],
                      const std::vector<uint8_t>& data) {
  put_be32(out, uint32_t(data.size()));
  size_t type_at = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  uint32_t crc = uint32_t(::crc32(0, out.data() + type_at, uInt(4 + data.size())));
  put_be32(out, crc);
}

inline int paeth(int a, int b, int c) {
  int p = a + b - c;
  int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// PGM (P5, binary, maxval 255): the canonical bit-exact interchange format.
// ---------------------------------------------------------------------------

inline void write_pgm(const std::string& path, const Image8& img) {
  std::string header =
      "P5\n" + std::to_string(img.cols) + " " + std::to_string(img.rows) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.px.begin(), img.px.end());
  detail::write_file(path, out.data(), out.size());
}

inline Image8 read_pgm(const std::string& path) {
  auto data = detail::read_file(path);
  size_t pos = 0;
  auto token = [&]() -> std::string {
    while (pos < data.size()) {
      if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(data[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    size_t start = pos;
    while (pos < data.size() && !std::isspace(data[pos])) ++pos;
    return std::string(data.begin() + start, data.begin() + pos);
  };
  if (token() != "P5") throw DecodeError(path + ": not a P5 PGM");
  Image8 img;
  try {
    img.cols = std::stoi(token());
    img.rows = std::stoi(token());
    int maxval = std::stoi(token());
    if (maxval != 255)
      throw UnsupportedFormat(path + ": PGM maxval must be 255");
  } catch (const std::logic_error&) {
    throw DecodeError(path + ": malformed PGM header");
  }
  if (img.rows <= 0 || img.cols <= 0) throw DecodeError(path + ": bad PGM size");
  ++pos;  // single whitespace after maxval
  size_t need = size_t(img.rows) * img.cols;
  if (data.size() - pos < need) throw DecodeError(path + ": truncated PGM data");
  img.px.assign(data.begin() + pos, data.begin() + pos + need);
  return img;
}

// ---------------------------------------------------------------------------
// PNG, 8-bit grayscale out; 8-bit gray or RGB (luma-reduced) in.
// ---------------------------------------------------------------------------

inline void write_png(const std::string& path, const Image8& img) {
  static const uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
  std::vector<uint8_t> out(sig, sig + 8);

  std::vector<uint8_t> ihdr;
  detail::put_be32(ihdr, uint32_t(img.cols));
  detail::put_be32(ihdr, uint32_t(img.rows));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(0);  // grayscale
  ihdr.push_back(0);  // compression
  ihdr.push_back(0);  // filter
  ihdr.push_back(0);  // no interlace
  detail::png_chunk(out, "IHDR", ihdr);

  // Filter byte 0 before each scanline, then one zlib stream.
  std::vector<uint8_t> raw;
  raw.reserve(size_t(img.rows) * (img.cols + 1));
  for (int i = 0; i < img.rows; ++i) {
    raw.push_back(0);
    raw.insert(raw.end(), img.px.begin() + size_t(i) * img.cols,
               img.px.begin() + size_t(i + 1) * img.cols);
  }
  uLongf bound = ::compressBound(uLong(raw.size()));
  std::vector<uint8_t> idat(bound);
  if (::compress2(idat.data(), &bound, raw.data(), uLong(raw.size()), 6) != Z_OK)
    throw IoError(path + ": deflate failed");
  idat.resize(bound);
  detail::png_chunk(out, "IDAT", idat);
  detail::png_chunk(out, "IEND", {});
  detail::write_file(path, out.data(), out.size());
}

inline Image8 read_png(const std::string& path) {
  auto data = detail::read_file(path);
  static const uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
  if (data.size() < 8 || std::memcmp(data.data(), sig, 8) != 0)
    throw DecodeError(path + ": not a PNG");

  int width = 0, height = 0, bitdepth = 0, colortype = 0;
  std::vector<uint8_t> zdata;
  size_t pos = 8;
  bool saw_ihdr = false;
  while (pos + 8 <= data.size()) {
    uint32_t len = detail::get_be32(&data[pos]);
    std::string type(data.begin() + pos + 4, data.begin() + pos + 8);
    if (pos + 12 + len > data.size()) throw DecodeError(path + ": truncated chunk");
    const uint8_t* body = &data[pos + 8];
    if (type == "IHDR") {
      width = int(detail::get_be32(body));
      height = int(detail::get_be32(body + 4));
      bitdepth = body[8];
      colortype = body[9];
      if (body[12] != 0) throw UnsupportedFormat(path + ": interlaced PNG");
      saw_ihdr = true;
    } else if (type == "IDAT") {
      zdata.insert(zdata.end(), body, body + len);
    } else if (type == "IEND") {
      break;
    }
    pos += 12 + len;
  }
  if (!saw_ihdr || width <= 0 || height <= 0) throw DecodeError(path + ": no IHDR");
  if (bitdepth != 8 || (colortype != 0 && colortype != 2))
    throw UnsupportedFormat(path + ": only 8-bit gray or RGB PNG supported");

  const int bpp = colortype == 0 ? 1 : 3;
  const size_t stride = size_t(width) * bpp;
  std::vector<uint8_t> raw(size_t(height) * (stride + 1));
  uLongf rawlen = uLongf(raw.size());
  if (::uncompress(raw.data(), &rawlen, zdata.data(), uLong(zdata.size())) != Z_OK ||
      rawlen != raw.size())
    throw DecodeError(path + ": inflate failed");

  // Undo per-row filtering in place.
  std::vector<uint8_t> prev(stride, 0);
  std::vector<uint8_t> line(stride);
  Image8 img{height, width, {}};
  img.px.resize(size_t(height) * width);
  for (int i = 0; i < height; ++i) {
    const uint8_t* src = &raw[size_t(i) * (stride + 1)];
    uint8_t filter = src[0];
    const uint8_t* s = src + 1;
    for (size_t x = 0; x < stride; ++x) {
      int a = x >= size_t(bpp) ? line[x - bpp] : 0;
      int b = prev[x];
      int c = x >= size_t(bpp) ? prev[x - bpp] : 0;
      int val = s[x];
      switch (filter) {
        case 0: break;
        case 1: val += a; break;
        case 2: val += b; break;
        case 3: val += (a + b) / 2; break;
        case 4: val += detail::paeth(a, b, c); break;
        default: throw DecodeError(path + ": bad filter type");
      }
      line[x] = uint8_t(val);
    }
    prev = line;
    if (colortype == 0) {
      std::copy(line.begin(), line.end(), img.px.begin() + size_t(i) * width);
    } else {
      for (int j = 0; j < width; ++j) {
        double y = 0.299 * line[size_t(j) * 3] + 0.587 * line[size_t(j) * 3 + 1] +
                   0.114 * line[size_t(j) * 3 + 2];
        img.px[size_t(i) * width + j] = uint8_t(std::lround(y));
      }
    }
  }
  return img;
}

// ---------------------------------------------------------------------------
// Loader for initial-state images.
// ---------------------------------------------------------------------------

inline GrayImage resize_nearest(const GrayImage& src, int rows, int cols) {
  GrayImage dst{rows, cols, std::vector<double>(size_t(rows) * cols)};
  for (int i = 0; i < rows; ++i) {
    int si = int(size_t(i) * src.rows / rows);
    for (int j = 0; j < cols; ++j) {
      int sj = int(size_t(j) * src.cols / cols);
      dst.px[size_t(i) * cols + j] = src.at(si, sj);
    }
  }
  return dst;
}

/// Reads a PGM (P5) or PNG file into a [0,1] grayscale matrix; optionally
/// nearest-neighbor resamples to target_size x target_size.
inline GrayImage load_grayscale(const std::string& path,
                                std::optional<int> target_size = {}) {
  auto head = detail::read_file(path);
  if (head.size() < 2) throw DecodeError(path + ": empty file");
  Image8 img;
  if (head[0] == 'P' && head[1] == '5')
    img = read_pgm(path);
  else if (head[0] == 137 && head[1] == 'P')
    img = read_png(path);
  else
    throw UnsupportedFormat(path + ": expected PGM (P5) or PNG");

  GrayImage g{img.rows, img.cols, std::vector<double>(img.px.size())};
  for (size_t k = 0; k < img.px.size(); ++k) g.px[k] = img.px[k] / 255.0;
  if (target_size && (*target_size != g.rows || *target_size != g.cols))
    g = resize_nearest(g, *target_size, *target_size);
  return g;
}

}  // namespace rdcnn
