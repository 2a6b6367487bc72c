#pragma once

#include <stdexcept>

#include "rdcnn/config.hpp"
#include "rdcnn/gene.hpp"
#include "rdcnn/grid.hpp"
#include "rdcnn/image.hpp"
#include "rdcnn/rng.hpp"

namespace rdcnn {

struct GridTooSmall : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ImageTooSmall : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kSeedSquare = 11;

/// typ=2: every cell of u then of v drawn uniform on [0,1), row-major.
template <class T>
GridState<T> init_full_random(int nn, int nm, uint64_t seed) {
  GridState<T> s(nn, nm);
  SeededRng rng(seed);
  for (auto& x : s.u) x = rng.next_unit<T>();
  for (auto& x : s.v) x = rng.next_unit<T>();
  return s;
}

/// typ=1: zero grid except an 11x11 random block, floor-centered. The block
/// consumes the stream in the same order as typ=2 restricted to the block.
template <class T>
GridState<T> init_center_square(int nn, int nm, uint64_t seed) {
  if (nn < kSeedSquare || nm < kSeedSquare)
    throw GridTooSmall("typ=1 needs a grid of at least 11x11, got " +
                       std::to_string(nn) + "x" + std::to_string(nm));
  GridState<T> s(nn, nm);
  const int i0 = (nn - kSeedSquare) / 2;
  const int j0 = (nm - kSeedSquare) / 2;
  SeededRng rng(seed);
  for (int i = i0; i < i0 + kSeedSquare; ++i)
    for (int j = j0; j < j0 + kSeedSquare; ++j) s.at_u(i, j) = rng.next_unit<T>();
  for (int i = i0; i < i0 + kSeedSquare; ++i)
    for (int j = j0; j < j0 + kSeedSquare; ++j) s.at_v(i, j) = rng.next_unit<T>();
  return s;
}

/// typ=3: u = ka*x and v = ka*x; the grid adopts the image's dimensions.
template <class T>
GridState<T> init_from_image(const GrayImage& img, const Gene& gene) {
  if (img.rows < 3 || img.cols < 3)
    throw ImageTooSmall("image must be at least 3x3, got " +
                        std::to_string(img.rows) + "x" + std::to_string(img.cols));
  GridState<T> s(img.rows, img.cols);
  const T ka = T(gene.ka);
  for (size_t k = 0; k < img.px.size(); ++k) {
    T x = ka * T(img.px[k]);
    s.u[k] = x;
    s.v[k] = x;
  }
  return s;
}

/// Builds the initial state a validated RunConfig describes.
template <class T>
GridState<T> initial_state(const RunConfig& cfg, const Gene& gene) {
  switch (cfg.init_mode) {
    case InitMode::CenterSquare:
      return init_center_square<T>(cfg.nn, cfg.nm, cfg.seed);
    case InitMode::FullRandom:
      return init_full_random<T>(cfg.nn, cfg.nm, cfg.seed);
    case InitMode::Image: {
      if (!cfg.image_path)
        throw std::invalid_argument("typ=3 requires an image path");
      GrayImage img = load_grayscale(*cfg.image_path, cfg.image_size);
      return init_from_image<T>(img, gene);
    }
  }
  throw std::logic_error("unreachable init mode");
}

}  // namespace rdcnn
