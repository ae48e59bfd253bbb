#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "prpca/interpolation.hpp"
#include "prpca/io.hpp"
#include "prpca/linalg.hpp"
#include "prpca/rng.hpp"
#include "prpca/simulation.hpp"
#include "prpca/solver.hpp"

namespace prpca {

// Grayscale image; pixels(row, col) with rows = height.
struct GrayImage {
  Matrix pixels;
  Index width() const { return pixels.cols(); }
  Index height() const { return pixels.rows(); }
};

namespace detail {

inline bool pgm_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

// Header tokens may be separated by whitespace and '#' comments running to end of line.
inline std::int64_t pgm_header_int(std::string_view data, std::size_t& pos, const char* what,
                                   std::size_t* token_start = nullptr) {
  for (;;) {
    while (pos < data.size() && pgm_space(data[pos])) ++pos;
    if (pos < data.size() && data[pos] == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  const std::size_t start = pos;
  if (token_start) *token_start = start;
  std::int64_t v = 0;
  while (pos < data.size() && data[pos] >= '0' && data[pos] <= '9') {
    v = v * 10 + (data[pos] - '0');
    if (v > (std::int64_t{1} << 31)) throw FormatError(start, std::string(what) + " is too large");
    ++pos;
  }
  if (pos == start) throw FormatError(start, std::string("expected ") + what);
  return v;
}

}  // namespace detail

inline GrayImage parse_pgm(std::string_view data) {
  if (data.size() < 2 || data[0] != 'P' || data[1] != '5') throw FormatError(0, "not a binary PGM (magic P5)");
  std::size_t pos = 2;
  if (pos >= data.size() || !detail::pgm_space(data[pos])) throw FormatError(pos, "expected whitespace after magic");
  const std::int64_t w = detail::pgm_header_int(data, pos, "width");
  const std::int64_t h = detail::pgm_header_int(data, pos, "height");
  std::size_t maxval_pos = pos;
  const std::int64_t maxval = detail::pgm_header_int(data, pos, "maxval", &maxval_pos);
  if (w <= 0 || h <= 0) throw FormatError(maxval_pos, "image dimensions must be positive");
  if (maxval != 255) throw FormatError(maxval_pos, "only maxval 255 is supported, got " + std::to_string(maxval));
  if (pos >= data.size() || !detail::pgm_space(data[pos])) throw FormatError(pos, "expected whitespace after maxval");
  ++pos;
  const auto need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (data.size() - pos < need) throw FormatError(data.size(), "truncated pixel data");
  if (data.size() - pos > need) throw FormatError(pos + need, "trailing bytes after pixel data");
  GrayImage img{Matrix(h, w)};
  for (Index i = 0; i < h; ++i) {
    for (Index j = 0; j < w; ++j) {
      const auto byte = static_cast<unsigned char>(data[pos + static_cast<std::size_t>(i * w + j)]);
      img.pixels(i, j) = static_cast<double>(byte) / 255.0;
    }
  }
  return img;
}

inline GrayImage load_pgm(const std::string& path) { return parse_pgm(read_file(path)); }

struct EncodedPgm {
  std::string bytes;
  Index clamped = 0;  // pixels outside [0, 1] before quantisation
};

inline EncodedPgm encode_pgm(const GrayImage& img) {
  detail::require(img.pixels.size() > 0, Errc::InvalidMatrix, "empty image");
  require_finite(img.pixels, "image");
  EncodedPgm out;
  out.bytes = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  out.bytes.reserve(out.bytes.size() + static_cast<std::size_t>(img.pixels.size()));
  for (Index i = 0; i < img.height(); ++i) {
    for (Index j = 0; j < img.width(); ++j) {
      double p = img.pixels(i, j);
      if (p < 0.0 || p > 1.0) {
        ++out.clamped;
        p = std::clamp(p, 0.0, 1.0);
      }
      out.bytes.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(p * 255.0))));
    }
  }
  return out;
}

inline Index save_pgm(const std::string& path, const GrayImage& img) {
  const EncodedPgm e = encode_pgm(img);
  write_file(path, e.bytes);
  return e.clamped;
}

// Adds i.i.d. N(0, sigma^2) noise; pixels are not clamped.
inline GrayImage add_noise(const GrayImage& img, double sigma, std::uint64_t seed) {
  detail::require(sigma >= 0.0 && std::isfinite(sigma), Errc::InvalidParameter, "sigma must be >= 0");
  GrayImage out = img;
  if (sigma == 0.0) return out;
  const Stream s(seed, 0, Purpose::ImageNoise);
  for (Index i = 0; i < img.height(); ++i) {
    for (Index j = 0; j < img.width(); ++j) {
      out.pixels(i, j) += sigma * s.gaussian(static_cast<std::uint64_t>(i * img.width() + j));
    }
  }
  return out;
}

struct RecoverOverrides {
  std::optional<double> lambda1;
  std::optional<double> lambda2;
  std::optional<int> max_iters;
  std::optional<double> rel_tol;
  const GrayImage* clean = nullptr;
};

struct RecoverMetrics {
  std::optional<double> rmse;  // of the clamped output against the clean image
  double seconds = 0.0;
  int iterations = 0;
  bool converged = false;
  Index clamped = 0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  Index svd_rows = 0;
  Index svd_cols = 0;
};

struct RecoverResult {
  GrayImage image;  // unclamped estimate P Xhat Q^T + Yhat
  RecoverMetrics metrics;
};

inline RecoverResult recover(const GrayImage& noisy, PairKind kind, double sigma, const RecoverOverrides& ov = {}) {
  detail::require(kind == PairKind::Identity || kind == PairKind::Single || kind == PairKind::Double,
                  Errc::InvalidParameter, "recover supports identity, single and double");
  const Index H = noisy.height();
  const Index W = noisy.width();
  detail::require(H > 0 && W > 0, Errc::InvalidMatrix, "empty image");
  Penalties pen{0.0, 0.0};
  if (!(ov.lambda1 && ov.lambda2)) {
    // Non-square images use the larger side in the default penalty.
    pen = default_penalties(std::max(H, W), sigma);
  }
  if (ov.lambda1) pen.lambda1 = *ov.lambda1;
  if (ov.lambda2) pen.lambda2 = *ov.lambda2;

  SolveConfig cfg(noisy.pixels, projector_pair(kind, H, W), pen.lambda1, pen.lambda2);
  cfg.accelerate = true;
  if (ov.max_iters) cfg.max_iters = *ov.max_iters;
  if (ov.rel_tol) cfg.rel_tol = *ov.rel_tol;
  const SolveResult res = solve(cfg);

  RecoverResult out{GrayImage{res.ThetaHat}, {}};
  RecoverMetrics& m = out.metrics;
  m.seconds = res.wall_time;
  m.iterations = res.iterations;
  m.converged = res.converged;
  m.lambda1 = pen.lambda1;
  m.lambda2 = pen.lambda2;
  m.svd_rows = res.svd_rows;
  m.svd_cols = res.svd_cols;
  m.clamped = (res.ThetaHat.array() < 0.0 || res.ThetaHat.array() > 1.0).count();
  if (ov.clean) {
    require_same_shape(ov.clean->pixels, noisy.pixels, "clean image");
    m.rmse = rmse(res.ThetaHat.cwiseMax(0.0).cwiseMin(1.0), ov.clean->pixels);
  }
  return out;
}

}  // namespace prpca
