#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace acorr {

/// Voxel counts along x (lateral), y (transverse, vertical) and z (longitudinal).
struct Dims {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::size_t nz = 0;

  constexpr std::size_t size() const { return nx * ny * nz; }
  constexpr std::size_t operator[](int axis) const { return axis == 0 ? nx : axis == 1 ? ny : nz; }
  auto operator<=>(const Dims&) const = default;
};

inline constexpr Dims cube(std::size_t n) { return {n, n, n}; }

struct Index3 {
  std::ptrdiff_t x = 0;
  std::ptrdiff_t y = 0;
  std::ptrdiff_t z = 0;

  constexpr std::ptrdiff_t operator[](int axis) const { return axis == 0 ? x : axis == 1 ? y : z; }
  auto operator<=>(const Index3&) const = default;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](int axis) const { return axis == 0 ? x : axis == 1 ? y : z; }
  bool operator==(const Vec3&) const = default;
};

/// Dense 3D scalar grid, 32-bit float samples, x-fastest layout.
///
/// Every field of the pipeline (objects, views, PSFs, auto-correlations) is a
/// Volume. Sums and means over a Volume are accumulated in double.
class Volume {
 public:
  Volume() = default;
  explicit Volume(Dims dims, Vec3 voxel_size = {1.0, 1.0, 1.0});
  Volume(Dims dims, std::vector<float> data, Vec3 voxel_size = {1.0, 1.0, 1.0});

  const Dims& dims() const { return dims_; }
  const Vec3& voxel_size() const { return voxel_size_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const {
    return x + dims_.nx * (y + dims_.ny * z);
  }
  float& operator()(std::size_t x, std::size_t y, std::size_t z) { return data_[index(x, y, z)]; }
  float operator()(std::size_t x, std::size_t y, std::size_t z) const { return data_[index(x, y, z)]; }
  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  double sum() const;
  float max() const;
  float min() const;
  /// Linear index of the first maximum.
  std::size_t argmax() const;
  Index3 unravel(std::size_t i) const;
  bool all_finite() const;

  void set_voxel_size(Vec3 voxel_size);

  bool operator==(const Volume&) const = default;

 private:
  Dims dims_{};
  Vec3 voxel_size_{1.0, 1.0, 1.0};
  std::vector<float> data_;
};

/// Axis-aligned voxel box used to select a dark (sample-free) region.
struct Region {
  Index3 origin;
  Dims extent;
};

/// One acquisition: a volume plus the sample rotation it was taken at.
struct ViewStack {
  Volume volume;
  double angle_deg = 0.0;
  bool preprocessed = false;
};

/// Normalize an angle to [0, 360).
double wrap_degrees(double angle_deg);

/// Sidecar path for a raw volume file: same stem, `.json` extension.
std::filesystem::path sidecar_path(const std::filesystem::path& raw_path);

/// Reads a little-endian float32 payload and its JSON sidecar.
Volume load_volume(const std::filesystem::path& path);
nlohmann::json load_sidecar(const std::filesystem::path& raw_path);

/// Writes payload + sidecar. Keys in `extra` are merged into the sidecar.
void save_volume(const Volume& v, const std::filesystem::path& path,
                 const nlohmann::json& extra = nlohmann::json::object());

/// Zero-pads `v` so that it sits centered in `target` (offset floor((T-n)/2)).
Volume pad_to(const Volume& v, Dims target);
/// Central `target` block of `v`; exact inverse of pad_to.
Volume crop_center(const Volume& v, Dims target);

/// Circular coordinate reversal: out[i,j,k] = v[-i mod nx, -j mod ny, -k mod nz].
Volume flip(const Volume& v);

/// Circular integer translation: out(x) = v(x - s).
Volume shift_circular(const Volume& v, Index3 s);

/// Trilinear sample at a continuous voxel position; outside samples read as 0.
double sample_trilinear(const Volume& v, Vec3 pos);

/// Rotation about the vertical (y) axis through the grid center
/// ((nx-1)/2, (nz-1)/2). Multiples of 90 degrees are exact index permutations
/// whenever the permuted grid fits (always for 180, nx == nz for 90/270).
Volume rotate_about_vertical(const Volume& v, double angle_deg);

/// v minus the mean of v over `dark`. No clamping.
Volume subtract_background(const Volume& v, const Region& dark);

enum class Axis { x, y, z };

Axis parse_axis(const std::string& s);
std::string to_string(Axis a);

struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<float> data;  // row-major, width fastest

  float operator()(std::size_t col, std::size_t row) const { return data[col + width * row]; }
};

/// Maximum intensity projection along `axis`.
/// Image axes: z -> (x cols, y rows); y -> (x cols, z rows); x -> (y cols, z rows).
Image mip(const Volume& v, Axis axis);

/// 16-bit big-endian binary PGM with linear min-max scaling; the scaling is
/// written to `<stem>.json` next to the image.
void save_pgm16(const Image& img, const std::filesystem::path& path,
                const nlohmann::json& extra = nlohmann::json::object());

}  // namespace acorr
