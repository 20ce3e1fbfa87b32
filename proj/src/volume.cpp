#include "acorr/volume.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>

#include "acorr/error.hpp"

namespace acorr {

namespace fs = std::filesystem;

namespace {

void check_voxel_size(const Vec3& s) {
  if (!(s.x > 0.0 && s.y > 0.0 && s.z > 0.0) || !std::isfinite(s.x) || !std::isfinite(s.y) ||
      !std::isfinite(s.z)) {
    throw ContractError("voxel size must be strictly positive");
  }
}

std::size_t wrap_index(std::ptrdiff_t i, std::size_t n) {
  const auto m = static_cast<std::ptrdiff_t>(n);
  auto r = i % m;
  return static_cast<std::size_t>(r < 0 ? r + m : r);
}

}  // namespace

Volume::Volume(Dims dims, Vec3 voxel_size)
    : dims_(dims), voxel_size_(voxel_size), data_(dims.size(), 0.0f) {
  check_voxel_size(voxel_size_);
}

Volume::Volume(Dims dims, std::vector<float> data, Vec3 voxel_size)
    : dims_(dims), voxel_size_(voxel_size), data_(std::move(data)) {
  check_voxel_size(voxel_size_);
  if (data_.size() != dims_.size()) {
    throw ContractError("volume data length " + std::to_string(data_.size()) +
                        " does not match dims product " + std::to_string(dims_.size()));
  }
}

double Volume::sum() const {
  double s = 0.0;
  for (float v : data_) s += v;
  return s;
}

float Volume::max() const {
  return data_.empty() ? 0.0f : *std::max_element(data_.begin(), data_.end());
}

float Volume::min() const {
  return data_.empty() ? 0.0f : *std::min_element(data_.begin(), data_.end());
}

std::size_t Volume::argmax() const {
  return static_cast<std::size_t>(std::max_element(data_.begin(), data_.end()) - data_.begin());
}

Index3 Volume::unravel(std::size_t i) const {
  const auto x = i % dims_.nx;
  const auto y = (i / dims_.nx) % dims_.ny;
  const auto z = i / (dims_.nx * dims_.ny);
  return {static_cast<std::ptrdiff_t>(x), static_cast<std::ptrdiff_t>(y),
          static_cast<std::ptrdiff_t>(z)};
}

bool Volume::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

void Volume::set_voxel_size(Vec3 voxel_size) {
  check_voxel_size(voxel_size);
  voxel_size_ = voxel_size;
}

double wrap_degrees(double angle_deg) {
  double a = std::fmod(angle_deg, 360.0);
  if (a < 0.0) a += 360.0;
  if (a >= 360.0) a -= 360.0;
  return a;
}

// ---------------------------------------------------------------------------
// I/O

fs::path sidecar_path(const fs::path& raw_path) {
  fs::path p = raw_path;
  p.replace_extension(".json");
  return p;
}

nlohmann::json load_sidecar(const fs::path& raw_path) {
  const auto side = sidecar_path(raw_path);
  std::ifstream in(side);
  if (!in) throw IoError("missing sidecar " + side.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed sidecar " + side.string() + ": " + e.what());
  }
}

Volume load_volume(const fs::path& path) {
  const auto meta = load_sidecar(path);
  Dims dims;
  Vec3 voxel{1.0, 1.0, 1.0};
  try {
    const auto& d = meta.at("dims");
    if (d.size() != 3) throw IoError("sidecar dims must have 3 entries");
    dims = {d[0].get<std::size_t>(), d[1].get<std::size_t>(), d[2].get<std::size_t>()};
    if (meta.contains("voxel_size_um")) {
      const auto& s = meta["voxel_size_um"];
      voxel = {s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad sidecar for " + path.string() + ": " + e.what());
  }
  if (dims.size() == 0) throw IoError("sidecar dims must be positive: " + path.string());

  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  if (bytes != dims.size() * sizeof(float)) {
    throw IoError("size mismatch for " + path.string() + ": sidecar dims need " +
                  std::to_string(dims.size() * sizeof(float)) + " bytes, file has " +
                  std::to_string(bytes));
  }
  std::vector<float> data(dims.size());
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw IoError("short read on " + path.string());
  if constexpr (std::endian::native == std::endian::big) {
    for (auto& f : data) f = std::bit_cast<float>(__builtin_bswap32(std::bit_cast<std::uint32_t>(f)));
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      throw IoError("non-finite value at voxel " + std::to_string(i) + " in " + path.string());
    }
  }
  try {
    return Volume(dims, std::move(data), voxel);
  } catch (const ContractError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void save_volume(const Volume& v, const fs::path& path, const nlohmann::json& extra) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    if constexpr (std::endian::native == std::endian::little) {
      out.write(reinterpret_cast<const char*>(v.data().data()),
                static_cast<std::streamsize>(v.size() * sizeof(float)));
    } else {
      for (float f : v.data()) {
        const auto w = __builtin_bswap32(std::bit_cast<std::uint32_t>(f));
        out.write(reinterpret_cast<const char*>(&w), sizeof w);
      }
    }
    if (!out) throw IoError("write failed for " + path.string());
  }
  nlohmann::json meta = extra.is_object() ? extra : nlohmann::json::object();
  meta["dims"] = {v.dims().nx, v.dims().ny, v.dims().nz};
  meta["voxel_size_um"] = {v.voxel_size().x, v.voxel_size().y, v.voxel_size().z};
  std::ofstream side(sidecar_path(path), std::ios::trunc);
  if (!side) throw IoError("cannot write sidecar for " + path.string());
  side << meta.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Geometry

Volume pad_to(const Volume& v, Dims target) {
  const Dims& d = v.dims();
  if (target.nx < d.nx || target.ny < d.ny || target.nz < d.nz) {
    throw ContractError("pad_to: target dims smaller than source");
  }
  Volume out(target, v.voxel_size());
  const std::size_t ox = (target.nx - d.nx) / 2;
  const std::size_t oy = (target.ny - d.ny) / 2;
  const std::size_t oz = (target.nz - d.nz) / 2;
  for (std::size_t z = 0; z < d.nz; ++z)
    for (std::size_t y = 0; y < d.ny; ++y)
      std::copy_n(v.data().begin() + v.index(0, y, z), d.nx, &out(ox, oy + y, oz + z));
  return out;
}

Volume crop_center(const Volume& v, Dims target) {
  const Dims& d = v.dims();
  if (target.nx > d.nx || target.ny > d.ny || target.nz > d.nz) {
    throw ContractError("crop_center: target dims larger than source");
  }
  Volume out(target, v.voxel_size());
  const std::size_t ox = (d.nx - target.nx) / 2;
  const std::size_t oy = (d.ny - target.ny) / 2;
  const std::size_t oz = (d.nz - target.nz) / 2;
  for (std::size_t z = 0; z < target.nz; ++z)
    for (std::size_t y = 0; y < target.ny; ++y)
      std::copy_n(v.data().begin() + v.index(ox, oy + y, oz + z), target.nx, &out(0, y, z));
  return out;
}

Volume flip(const Volume& v) {
  const Dims& d = v.dims();
  Volume out(d, v.voxel_size());
  for (std::size_t z = 0; z < d.nz; ++z) {
    const std::size_t sz = (d.nz - z) % d.nz;
    for (std::size_t y = 0; y < d.ny; ++y) {
      const std::size_t sy = (d.ny - y) % d.ny;
      for (std::size_t x = 0; x < d.nx; ++x) out(x, y, z) = v((d.nx - x) % d.nx, sy, sz);
    }
  }
  return out;
}

Volume shift_circular(const Volume& v, Index3 s) {
  const Dims& d = v.dims();
  Volume out(d, v.voxel_size());
  for (std::size_t z = 0; z < d.nz; ++z) {
    const std::size_t sz = wrap_index(static_cast<std::ptrdiff_t>(z) - s.z, d.nz);
    for (std::size_t y = 0; y < d.ny; ++y) {
      const std::size_t sy = wrap_index(static_cast<std::ptrdiff_t>(y) - s.y, d.ny);
      for (std::size_t x = 0; x < d.nx; ++x)
        out(x, y, z) = v(wrap_index(static_cast<std::ptrdiff_t>(x) - s.x, d.nx), sy, sz);
    }
  }
  return out;
}

double sample_trilinear(const Volume& v, Vec3 pos) {
  const Dims& d = v.dims();
  const double fx = std::floor(pos.x), fy = std::floor(pos.y), fz = std::floor(pos.z);
  const double tx = pos.x - fx, ty = pos.y - fy, tz = pos.z - fz;
  const auto x0 = static_cast<std::ptrdiff_t>(fx);
  const auto y0 = static_cast<std::ptrdiff_t>(fy);
  const auto z0 = static_cast<std::ptrdiff_t>(fz);
  auto at = [&](std::ptrdiff_t x, std::ptrdiff_t y, std::ptrdiff_t z) -> double {
    if (x < 0 || y < 0 || z < 0 || x >= static_cast<std::ptrdiff_t>(d.nx) ||
        y >= static_cast<std::ptrdiff_t>(d.ny) || z >= static_cast<std::ptrdiff_t>(d.nz))
      return 0.0;
    return v(static_cast<std::size_t>(x), static_cast<std::size_t>(y), static_cast<std::size_t>(z));
  };
  double acc = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double wz = k ? tz : 1.0 - tz;
    if (wz == 0.0) continue;
    for (int j = 0; j < 2; ++j) {
      const double wy = j ? ty : 1.0 - ty;
      if (wy == 0.0) continue;
      for (int i = 0; i < 2; ++i) {
        const double wx = i ? tx : 1.0 - tx;
        if (wx == 0.0) continue;
        acc += wx * wy * wz * at(x0 + i, y0 + j, z0 + k);
      }
    }
  }
  return acc;
}

Volume rotate_about_vertical(const Volume& v, double angle_deg) {
  const Dims& d = v.dims();
  const double a = wrap_degrees(angle_deg);
  const double quarter = a / 90.0;
  const long k = std::lround(quarter);
  const bool right_angle = std::abs(quarter - static_cast<double>(k)) < 1e-12;

  // Source position for output (qx, qz):
  //   x = c*(qx-cx) - s*(qz-cz) + cx,  z = s*(qx-cx) + c*(qz-cz) + cz
  if (right_angle && (k % 2 == 0 || d.nx == d.nz)) {
    const int c = (k % 4 == 0) ? 1 : (k % 4 == 2) ? -1 : 0;
    const int s = (k % 4 == 1) ? 1 : (k % 4 == 3) ? -1 : 0;
    const auto nx1 = static_cast<std::ptrdiff_t>(d.nx) - 1;
    const auto nz1 = static_cast<std::ptrdiff_t>(d.nz) - 1;
    Volume out(d, v.voxel_size());
    for (std::size_t qz = 0; qz < d.nz; ++qz) {
      for (std::size_t qx = 0; qx < d.nx; ++qx) {
        // Doubled coordinates keep the half-voxel center exact.
        const std::ptrdiff_t dx = 2 * static_cast<std::ptrdiff_t>(qx) - nx1;
        const std::ptrdiff_t dz = 2 * static_cast<std::ptrdiff_t>(qz) - nz1;
        const std::ptrdiff_t sx2 = c * dx - s * dz + nx1;
        const std::ptrdiff_t sz2 = s * dx + c * dz + nz1;
        const std::ptrdiff_t sx = sx2 / 2, sz = sz2 / 2;
        if (sx < 0 || sz < 0 || sx > nx1 || sz > nz1) continue;
        for (std::size_t y = 0; y < d.ny; ++y)
          out(qx, y, qz) = v(static_cast<std::size_t>(sx), y, static_cast<std::size_t>(sz));
      }
    }
    return out;
  }

  const double rad = a * std::numbers::pi / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  const double cx = (static_cast<double>(d.nx) - 1.0) / 2.0;
  const double cz = (static_cast<double>(d.nz) - 1.0) / 2.0;
  Volume out(d, v.voxel_size());
  for (std::size_t qz = 0; qz < d.nz; ++qz) {
    for (std::size_t qx = 0; qx < d.nx; ++qx) {
      const double dx = static_cast<double>(qx) - cx;
      const double dz = static_cast<double>(qz) - cz;
      const double sx = c * dx - s * dz + cx;
      const double sz = s * dx + c * dz + cz;
      if (sx <= -1.0 || sz <= -1.0 || sx >= static_cast<double>(d.nx) ||
          sz >= static_cast<double>(d.nz))
        continue;
      for (std::size_t y = 0; y < d.ny; ++y)
        out(qx, y, qz) =
            static_cast<float>(sample_trilinear(v, {sx, static_cast<double>(y), sz}));
    }
  }
  return out;
}

Volume subtract_background(const Volume& v, const Region& dark) {
  const Dims& d = v.dims();
  const Dims& e = dark.extent;
  if (e.size() == 0) throw ContractError("subtract_background: empty dark region");
  if (dark.origin.x < 0 || dark.origin.y < 0 || dark.origin.z < 0 ||
      static_cast<std::size_t>(dark.origin.x) + e.nx > d.nx ||
      static_cast<std::size_t>(dark.origin.y) + e.ny > d.ny ||
      static_cast<std::size_t>(dark.origin.z) + e.nz > d.nz) {
    throw ContractError("subtract_background: dark region outside the volume");
  }
  double acc = 0.0;
  for (std::size_t z = 0; z < e.nz; ++z)
    for (std::size_t y = 0; y < e.ny; ++y)
      for (std::size_t x = 0; x < e.nx; ++x)
        acc += v(static_cast<std::size_t>(dark.origin.x) + x,
                 static_cast<std::size_t>(dark.origin.y) + y,
                 static_cast<std::size_t>(dark.origin.z) + z);
  const double mean = acc / static_cast<double>(e.size());
  Volume out(d, v.voxel_size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = static_cast<float>(static_cast<double>(v[i]) - mean);
  return out;
}

// ---------------------------------------------------------------------------
// Projections

Axis parse_axis(const std::string& s) {
  if (s == "x") return Axis::x;
  if (s == "y") return Axis::y;
  if (s == "z") return Axis::z;
  throw ContractError("unknown axis '" + s + "'");
}

std::string to_string(Axis a) {
  switch (a) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    case Axis::z: return "z";
  }
  return "?";
}

Image mip(const Volume& v, Axis axis) {
  const Dims& d = v.dims();
  Image img;
  switch (axis) {
    case Axis::z: img.width = d.nx; img.height = d.ny; break;
    case Axis::y: img.width = d.nx; img.height = d.nz; break;
    case Axis::x: img.width = d.ny; img.height = d.nz; break;
  }
  img.data.assign(img.width * img.height, -std::numeric_limits<float>::infinity());
  for (std::size_t z = 0; z < d.nz; ++z)
    for (std::size_t y = 0; y < d.ny; ++y)
      for (std::size_t x = 0; x < d.nx; ++x) {
        std::size_t pix = 0;
        switch (axis) {
          case Axis::z: pix = x + img.width * y; break;
          case Axis::y: pix = x + img.width * z; break;
          case Axis::x: pix = y + img.width * z; break;
        }
        img.data[pix] = std::max(img.data[pix], v(x, y, z));
      }
  return img;
}

void save_pgm16(const Image& img, const fs::path& path, const nlohmann::json& extra) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  float lo = 0.0f, hi = 0.0f;
  if (!img.data.empty()) {
    const auto [mn, mx] = std::minmax_element(img.data.begin(), img.data.end());
    lo = *mn;
    hi = *mx;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << img.width << ' ' << img.height << "\n65535\n";
  const double range = static_cast<double>(hi) - static_cast<double>(lo);
  for (float f : img.data) {
    const double t = range > 0.0 ? (static_cast<double>(f) - lo) / range : 0.0;
    const auto s = static_cast<std::uint16_t>(std::lround(std::clamp(t, 0.0, 1.0) * 65535.0));
    const unsigned char be[2] = {static_cast<unsigned char>(s >> 8),
                                 static_cast<unsigned char>(s & 0xff)};
    out.write(reinterpret_cast<const char*>(be), 2);
  }
  if (!out) throw IoError("write failed for " + path.string());

  nlohmann::json meta = extra.is_object() ? extra : nlohmann::json::object();
  meta["width"] = img.width;
  meta["height"] = img.height;
  meta["min"] = lo;
  meta["max"] = hi;
  meta["scaling"] = "linear";
  std::ofstream side(sidecar_path(path), std::ios::trunc);
  if (!side) throw IoError("cannot write sidecar for " + path.string());
  side << meta.dump(2) << '\n';
}

}  // namespace acorr
