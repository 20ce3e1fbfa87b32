#pragma once

// Shared helpers for the test binaries: seeded random volumes, error norms
// and brute-force O(n^2) reference implementations of the spectral ops.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "acorr/spectral.hpp"
#include "acorr/volume.hpp"

namespace acorr::testing {

inline Volume random_volume(Dims d, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Volume v(d);
  for (auto& x : v.data()) x = static_cast<float>(u(rng));
  return v;
}

inline Volume delta(Dims d, std::size_t x, std::size_t y, std::size_t z, float value = 1.0f) {
  Volume v(d);
  v(x, y, z) = value;
  return v;
}

inline double rel_linf(const Volume& got, const Volume& want) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    num = std::max(num, std::abs(static_cast<double>(got[i]) - want[i]));
    den = std::max(den, std::abs(static_cast<double>(want[i])));
  }
  return den > 0.0 ? num / den : num;
}

inline double rel_l2(const Volume& got, const Volume& want) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    const double d = static_cast<double>(got[i]) - want[i];
    num += d * d;
    den += static_cast<double>(want[i]) * want[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline std::size_t wrap(std::ptrdiff_t i, std::size_t n) {
  const auto m = static_cast<std::ptrdiff_t>(n);
  return static_cast<std::size_t>(((i % m) + m) % m);
}

/// Cyclic convolution by direct summation.
inline Volume brute_convolve_circular(const Volume& a, const Volume& b) {
  const Dims d = a.dims();
  Volume out(d);
  for (std::size_t z = 0; z < d.nz; ++z)
    for (std::size_t y = 0; y < d.ny; ++y)
      for (std::size_t x = 0; x < d.nx; ++x) {
        double acc = 0.0;
        for (std::size_t k = 0; k < d.nz; ++k)
          for (std::size_t j = 0; j < d.ny; ++j)
            for (std::size_t i = 0; i < d.nx; ++i)
              acc += static_cast<double>(a(i, j, k)) *
                     b(wrap(static_cast<std::ptrdiff_t>(x - i), d.nx),
                       wrap(static_cast<std::ptrdiff_t>(y - j), d.ny),
                       wrap(static_cast<std::ptrdiff_t>(z - k), d.nz));
        out(x, y, z) = static_cast<float>(acc);
      }
  return out;
}

/// Zero-padded convolution cropped to a's dims, with b's voxel floor(n/2) as
/// kernel origin.
inline Volume brute_convolve_same(const Volume& a, const Volume& b) {
  const Dims d = a.dims();
  const std::ptrdiff_t cx = d.nx / 2, cy = d.ny / 2, cz = d.nz / 2;
  Volume out(d);
  for (std::ptrdiff_t z = 0; z < static_cast<std::ptrdiff_t>(d.nz); ++z)
    for (std::ptrdiff_t y = 0; y < static_cast<std::ptrdiff_t>(d.ny); ++y)
      for (std::ptrdiff_t x = 0; x < static_cast<std::ptrdiff_t>(d.nx); ++x) {
        double acc = 0.0;
        for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(d.nz); ++k)
          for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(d.ny); ++j)
            for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(d.nx); ++i) {
              const std::ptrdiff_t bx = x - i + cx, by = y - j + cy, bz = z - k + cz;
              if (bx < 0 || by < 0 || bz < 0 || bx >= static_cast<std::ptrdiff_t>(d.nx) ||
                  by >= static_cast<std::ptrdiff_t>(d.ny) || bz >= static_cast<std::ptrdiff_t>(d.nz))
                continue;
              acc += static_cast<double>(a(i, j, k)) * b(bx, by, bz);
            }
        out(x, y, z) = static_cast<float>(acc);
      }
  return out;
}

/// out(xi) = sum_x a(x) b(x + xi), cyclic.
inline Volume brute_crosscorrelate_circular(const Volume& a, const Volume& b) {
  const Dims d = a.dims();
  Volume out(d);
  for (std::size_t z = 0; z < d.nz; ++z)
    for (std::size_t y = 0; y < d.ny; ++y)
      for (std::size_t x = 0; x < d.nx; ++x) {
        double acc = 0.0;
        for (std::size_t k = 0; k < d.nz; ++k)
          for (std::size_t j = 0; j < d.ny; ++j)
            for (std::size_t i = 0; i < d.nx; ++i)
              acc += static_cast<double>(a(i, j, k)) * b((i + x) % d.nx, (j + y) % d.ny, (k + z) % d.nz);
        out(x, y, z) = static_cast<float>(acc);
      }
  return out;
}

/// Non-cyclic cross-correlation over every lag in (-n, n), written in
/// fft-native order onto a `grid`-sized volume.
inline Volume brute_crosscorrelate_linear(const Volume& a, const Volume& b, Dims grid) {
  const Dims d = a.dims();
  Volume out(grid);
  const auto nx = static_cast<std::ptrdiff_t>(d.nx), ny = static_cast<std::ptrdiff_t>(d.ny),
             nz = static_cast<std::ptrdiff_t>(d.nz);
  for (std::ptrdiff_t lz = -(nz - 1); lz < nz; ++lz)
    for (std::ptrdiff_t ly = -(ny - 1); ly < ny; ++ly)
      for (std::ptrdiff_t lx = -(nx - 1); lx < nx; ++lx) {
        double acc = 0.0;
        for (std::ptrdiff_t k = 0; k < nz; ++k)
          for (std::ptrdiff_t j = 0; j < ny; ++j)
            for (std::ptrdiff_t i = 0; i < nx; ++i) {
              const std::ptrdiff_t x = i + lx, y = j + ly, z = k + lz;
              if (x < 0 || y < 0 || z < 0 || x >= nx || y >= ny || z >= nz) continue;
              acc += static_cast<double>(a(i, j, k)) * b(x, y, z);
            }
        out(wrap(lx, grid.nx), wrap(ly, grid.ny), wrap(lz, grid.nz)) = static_cast<float>(acc);
      }
  return out;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("acorr_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace acorr::testing
