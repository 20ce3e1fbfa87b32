#include "acorr/psf.hpp"

#include <cmath>
#include <numbers>

#include "acorr/error.hpp"
#include "acorr/parallel.hpp"

namespace acorr {

void PsfModel::validate() const {
  if (!(sigma.x > 0.0 && sigma.y > 0.0 && sigma.z > 0.0))
    throw ContractError("PSF sigmas must be positive");
}

namespace {

// Continuous Gaussian mass inside the voxel span [-c-0.5, n-1-c+0.5].
double captured_fraction(std::size_t n, double sigma) {
  const double c = static_cast<double>(n / 2);
  const double lo = (-c - 0.5) / (sigma * std::numbers::sqrt2);
  const double hi = (static_cast<double>(n) - 1.0 - c + 0.5) / (sigma * std::numbers::sqrt2);
  return 0.5 * (std::erf(hi) - std::erf(lo));
}

std::vector<double> gaussian_axis(std::size_t n, double sigma) {
  std::vector<double> g(n);
  const double c = static_cast<double>(n / 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(i) - c;
    g[i] = std::exp(-0.5 * d * d / (sigma * sigma));
  }
  return g;
}

Volume normalized(Volume v) {
  const double s = v.sum();
  if (!(s > 0.0)) throw NumericError("PSF has no mass on the grid");
  for (auto& x : v.data()) x = static_cast<float>(x / s);
  return v;
}

void require_angles(const std::vector<double>& angles) {
  if (angles.empty()) throw ContractError("PSF averaging needs at least one angle");
}

}  // namespace

Volume rasterize_psf(const PsfModel& m, Dims dims) {
  m.validate();
  const double captured = captured_fraction(dims.nx, m.sigma.x) *
                          captured_fraction(dims.ny, m.sigma.y) *
                          captured_fraction(dims.nz, m.sigma.z);
  if (1.0 - captured > 1e-6)
    throw ContractError("grid too small for the requested PSF sigma (truncated mass " +
                        std::to_string(1.0 - captured) + ")");
  const auto gx = gaussian_axis(dims.nx, m.sigma.x);
  const auto gy = gaussian_axis(dims.ny, m.sigma.y);
  const auto gz = gaussian_axis(dims.nz, m.sigma.z);
  Volume v(dims);
  double total = 0.0;
  for (std::size_t z = 0; z < dims.nz; ++z)
    for (std::size_t y = 0; y < dims.ny; ++y)
      for (std::size_t x = 0; x < dims.nx; ++x) total += gx[x] * gy[y] * gz[z];
  for (std::size_t z = 0; z < dims.nz; ++z)
    for (std::size_t y = 0; y < dims.ny; ++y)
      for (std::size_t x = 0; x < dims.nx; ++x)
        v(x, y, z) = static_cast<float>(gx[x] * gy[y] * gz[z] / total);
  return v;
}

Volume psf_for_view(const PsfModel& m, double angle_deg, Dims dims) {
  if (wrap_degrees(angle_deg) == 0.0) return rasterize_psf(m, dims);
  // A convolution kernel turns about its own center voxel floor(n/2), while
  // rotate_about_vertical turns about (n-1)/2. Odd x and z extents make the two
  // coincide; the extra trailing plane is dropped afterwards.
  const Dims odd{dims.nx | 1, dims.ny, dims.nz | 1};
  const Volume h = rotate_about_vertical(rasterize_psf(m, odd), -angle_deg);
  Volume out(dims, h.voxel_size());
  for (std::size_t z = 0; z < dims.nz; ++z)
    for (std::size_t y = 0; y < dims.ny; ++y)
      for (std::size_t x = 0; x < dims.nx; ++x) out(x, y, z) = h(x, y, z);
  return normalized(out);
}

Volume average_direct_psf(const PsfModel& m, const std::vector<double>& angles, Dims dims) {
  require_angles(angles);
  std::vector<Volume> views(angles.size());
  parallel_for(angles.size(), [&](std::size_t i) { views[i] = psf_for_view(m, angles[i], dims); });
  std::vector<double> acc(dims.size(), 0.0);
  for (const auto& h : views)
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += h[i];
  Volume out(dims);
  const double n = static_cast<double>(angles.size());
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<float>(acc[i] / n);
  return out;
}

AutocorrVolume average_autocorr_psf(const PsfModel& m, const std::vector<double>& angles, Dims dims,
                                    PadPolicy policy) {
  require_angles(angles);
  std::vector<AutocorrVolume> parts(angles.size());
  parallel_for(angles.size(), [&](std::size_t i) {
    parts[i] = autocorrelate(psf_for_view(m, angles[i], dims), policy);
  });
  AutocorrVolume out = parts.front();
  std::vector<double> acc(out.volume.size(), 0.0);
  for (const auto& p : parts)
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += p.volume[i];
  const double n = static_cast<double>(angles.size());
  for (std::size_t i = 0; i < acc.size(); ++i) out.volume[i] = static_cast<float>(acc[i] / n);
  return out;
}

Volume effective_psf(const AutocorrVolume& Hbar, const PsfModel& m, const SolverOptions& opts) {
  const Dims n = Hbar.source_dims.size() ? Hbar.source_dims : Hbar.volume.dims();
  const Volume init = rasterize_psf(m, n);
  const SolverState s = solve(Hbar, init, Method::ss, std::nullopt, opts);
  return normalized(s.volume());
}

}  // namespace acorr
