#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>

#include "rdcnn/image.hpp"

using namespace rdcnn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("rdcnn_img_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

Image8 random_image(int rows, int cols, uint32_t seed) {
  std::mt19937 rng(seed);
  Image8 img{rows, cols, std::vector<uint8_t>(size_t(rows) * cols)};
  for (auto& p : img.px) p = uint8_t(rng() & 0xFF);
  return img;
}

}  // namespace

TEST_CASE("PGM round-trips bit-exactly") {
  TempDir tmp;
  auto img = random_image(37, 23, 1);
  write_pgm(tmp.file("a.pgm"), img);
  CHECK(read_pgm(tmp.file("a.pgm")) == img);
}

TEST_CASE("PGM parser handles comments and rejects bad headers") {
  TempDir tmp;
  {
    std::ofstream f(tmp.file("c.pgm"), std::ios::binary);
    f << "P5\n# a comment\n 2 2\n255\n";
    f.write("\x01\x02\x03\x04", 4);
  }
  auto img = read_pgm(tmp.file("c.pgm"));
  CHECK(img.rows == 2);
  CHECK(img.cols == 2);
  CHECK(img.px == std::vector<uint8_t>{1, 2, 3, 4});

  {
    std::ofstream f(tmp.file("bad.pgm"), std::ios::binary);
    f << "P6\n2 2\n255\n....";
  }
  CHECK_THROWS_AS(read_pgm(tmp.file("bad.pgm")), DecodeError);

  {
    std::ofstream f(tmp.file("short.pgm"), std::ios::binary);
    f << "P5\n4 4\n255\nxy";
  }
  CHECK_THROWS_AS(read_pgm(tmp.file("short.pgm")), DecodeError);

  {
    std::ofstream f(tmp.file("deep.pgm"), std::ios::binary);
    f << "P5\n2 2\n65535\nabcdefgh";
  }
  CHECK_THROWS_AS(read_pgm(tmp.file("deep.pgm")), UnsupportedFormat);

  CHECK_THROWS_AS(read_pgm(tmp.file("missing.pgm")), IoError);
}

TEST_CASE("PNG round-trips bit-exactly") {
  TempDir tmp;
  auto img = random_image(41, 29, 2);
  write_png(tmp.file("a.png"), img);
  CHECK(read_png(tmp.file("a.png")) == img);

  // degenerate 3x3 all-equal image
  Image8 flat{3, 3, std::vector<uint8_t>(9, 77)};
  write_png(tmp.file("flat.png"), flat);
  CHECK(read_png(tmp.file("flat.png")) == flat);
}

TEST_CASE("PNG writer is deterministic") {
  TempDir tmp;
  auto img = random_image(16, 16, 3);
  write_png(tmp.file("x.png"), img);
  write_png(tmp.file("y.png"), img);
  auto bytes = [](const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), {});
  };
  CHECK(bytes(tmp.file("x.png")) == bytes(tmp.file("y.png")));
}

TEST_CASE("load_grayscale scales 8-bit values onto [0,1]") {
  TempDir tmp;
  Image8 img{3, 3, std::vector<uint8_t>(9, 51)};
  img.px[0] = 255;
  img.px[1] = 0;
  write_pgm(tmp.file("g.pgm"), img);
  auto g = load_grayscale(tmp.file("g.pgm"));
  CHECK(g.rows == 3);
  CHECK(g.px[0] == 1.0);
  CHECK(g.px[1] == 0.0);
  CHECK(g.px[2] == 51.0 / 255.0);  // = 0.2 exactly
  CHECK(g.px[2] == 0.2);
}

TEST_CASE("load_grayscale with target_size samples every k-th pixel") {
  TempDir tmp;
  // 64x64 image whose value encodes its (even) source position
  Image8 img{64, 64, std::vector<uint8_t>(64 * 64)};
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j) img.px[i * 64 + j] = uint8_t((i * 3 + j) & 0xFF);
  write_pgm(tmp.file("big.pgm"), img);
  auto g = load_grayscale(tmp.file("big.pgm"), 32);
  REQUIRE(g.rows == 32);
  REQUIRE(g.cols == 32);
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j)
      CHECK(g.at(i, j) == img.px[(2 * i) * 64 + (2 * j)] / 255.0);
}

TEST_CASE("load_grayscale reduces RGB PNGs by luma") {
  TempDir tmp;
  // hand-build a 1x2 RGB PNG: pure red, pure white
  std::vector<uint8_t> raw = {0, 255, 0, 0, 255, 255, 255};  // filter 0 + 2 px
  uLongf bound = compressBound(uLong(raw.size()));
  std::vector<uint8_t> z(bound);
  REQUIRE(compress2(z.data(), &bound, raw.data(), uLong(raw.size()), 6) == Z_OK);
  z.resize(bound);

  std::vector<uint8_t> out{137, 80, 78, 71, 13, 10, 26, 10};
  auto chunk = [&](const char type[4], const std::vector<uint8_t>& body) {
    detail::put_be32(out, uint32_t(body.size()));
    size_t at = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), body.begin(), body.end());
    detail::put_be32(out, uint32_t(crc32(0, out.data() + at, uInt(4 + body.size()))));
  };
  std::vector<uint8_t> ihdr;
  detail::put_be32(ihdr, 2);
  detail::put_be32(ihdr, 1);
  ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0});
  chunk("IHDR", ihdr);
  chunk("IDAT", z);
  chunk("IEND", {});
  detail::write_file(tmp.file("rgb.png").c_str(), out.data(), out.size());

  auto g = load_grayscale(tmp.file("rgb.png"));
  REQUIRE(g.rows == 1);
  REQUIRE(g.cols == 2);
  CHECK(g.px[0] == Catch::Approx(76 / 255.0).margin(1e-9));  // luma of red
  CHECK(g.px[1] == 1.0);
}

namespace {

// Builds a grayscale PNG whose every scanline uses the given filter type,
// applying the filter definition forward so the decoder must invert it.
std::vector<uint8_t> png_with_filter(const Image8& img, uint8_t filter) {
  const int w = img.cols, h = img.rows;
  std::vector<uint8_t> raw;
  std::vector<uint8_t> prev(w, 0);
  for (int i = 0; i < h; ++i) {
    raw.push_back(filter);
    std::vector<uint8_t> line(img.px.begin() + size_t(i) * w,
                              img.px.begin() + size_t(i + 1) * w);
    for (int x = 0; x < w; ++x) {
      int a = x > 0 ? line[x - 1] : 0;
      int b = prev[x];
      int c = x > 0 ? prev[x - 1] : 0;
      int v = line[x];
      switch (filter) {
        case 0: break;
        case 1: v -= a; break;
        case 2: v -= b; break;
        case 3: v -= (a + b) / 2; break;
        case 4: v -= detail::paeth(a, b, c); break;
      }
      raw.push_back(uint8_t(v));
    }
    prev = line;
  }
  uLongf bound = compressBound(uLong(raw.size()));
  std::vector<uint8_t> z(bound);
  REQUIRE(compress2(z.data(), &bound, raw.data(), uLong(raw.size()), 6) == Z_OK);
  z.resize(bound);

  std::vector<uint8_t> out{137, 80, 78, 71, 13, 10, 26, 10};
  auto chunk = [&](const char type[4], const std::vector<uint8_t>& body) {
    detail::put_be32(out, uint32_t(body.size()));
    size_t at = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), body.begin(), body.end());
    detail::put_be32(out, uint32_t(crc32(0, out.data() + at, uInt(4 + body.size()))));
  };
  std::vector<uint8_t> ihdr;
  detail::put_be32(ihdr, uint32_t(w));
  detail::put_be32(ihdr, uint32_t(h));
  ihdr.insert(ihdr.end(), {8, 0, 0, 0, 0});
  chunk("IHDR", ihdr);
  chunk("IDAT", z);
  chunk("IEND", {});
  return out;
}

}  // namespace

TEST_CASE("PNG decoder inverts every scanline filter type") {
  TempDir tmp;
  auto img = random_image(13, 21, 5);
  for (uint8_t filter = 0; filter <= 4; ++filter) {
    auto bytes = png_with_filter(img, filter);
    const std::string path = tmp.file("f" + std::to_string(filter) + ".png");
    detail::write_file(path, bytes.data(), bytes.size());
    INFO("filter type " << int(filter));
    CHECK(read_png(path) == img);
  }
}

TEST_CASE("unsupported inputs are refused with typed errors") {
  TempDir tmp;
  {
    std::ofstream f(tmp.file("junk.bin"), std::ios::binary);
    f << "not an image at all";
  }
  CHECK_THROWS_AS(load_grayscale(tmp.file("junk.bin")), UnsupportedFormat);
  {
    std::ofstream f(tmp.file("trunc.png"), std::ios::binary);
    const uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    f.write(reinterpret_cast<const char*>(sig), 8);
  }
  CHECK_THROWS_AS(load_grayscale(tmp.file("trunc.png")), DecodeError);
}
