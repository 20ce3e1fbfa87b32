#include "acorr/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "acorr/error.hpp"

namespace acorr {

void* fft_alloc(std::size_t bytes) {
  void* p = fftw_malloc(bytes == 0 ? 1 : bytes);
  if (p == nullptr) throw std::bad_alloc();
  return p;
}

void fft_free(void* p) noexcept { fftw_free(p); }

std::size_t next_fft_size(std::size_t n) {
  if (n <= 1) return 1;
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t f : {2u, 3u, 5u, 7u})
      while (r % f == 0) r /= f;
    if (r == 1) return m;
  }
}

std::string to_string(PadMode m) { return m == PadMode::linear ? "linear" : "circular"; }

PadMode parse_pad_mode(const std::string& s) {
  if (s == "linear") return PadMode::linear;
  if (s == "circular") return PadMode::circular;
  throw ContractError("unknown pad policy '" + s + "' (expected linear|circular)");
}

Dims PadPolicy::grid_for(Dims n) const {
  if (mode == PadMode::circular) return n;
  auto full = [](std::size_t k) { return next_fft_size(2 * k - 1); };
  return {full(n.nx), full(n.ny), full(n.nz)};
}

std::string to_string(Layout l) { return l == Layout::fft_native ? "fft-native" : "centered"; }

Layout parse_layout(const std::string& s) {
  if (s == "fft-native") return Layout::fft_native;
  if (s == "centered") return Layout::centered;
  throw ContractError("unknown layout '" + s + "'");
}

nlohmann::json AutocorrVolume::sidecar_fields() const {
  return {{"layout", to_string(layout)},
          {"zero_shift_index", {zero_shift.x, zero_shift.y, zero_shift.z}},
          {"pad", to_string(pad)},
          {"source_dims", {source_dims.nx, source_dims.ny, source_dims.nz}}};
}

// ---------------------------------------------------------------------------
// Plan cache

struct FftGrid::Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
  ~Plans() {
    if (forward) fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
  }
};

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

FftGrid::FftGrid(Dims dims) : dims_(dims) {
  if (dims.size() == 0) throw ContractError("FftGrid: empty dims");
  static std::map<Dims, std::shared_ptr<const Plans>> cache;
  std::lock_guard lock(planner_mutex());
  auto it = cache.find(dims);
  if (it != cache.end()) {
    plans_ = it->second;
    return;
  }
  auto plans = std::make_shared<Plans>();
  RealBuffer r(real_size());
  SpectrumBuffer c(spectrum_size());
  const int nz = static_cast<int>(dims.nz), ny = static_cast<int>(dims.ny),
            nx = static_cast<int>(dims.nx);
  // FFTW_ESTIMATE keeps plan choice (and therefore rounding) reproducible.
  plans->forward = fftw_plan_dft_r2c_3d(nz, ny, nx, r.data(),
                                        reinterpret_cast<fftw_complex*>(c.data()), FFTW_ESTIMATE);
  plans->inverse = fftw_plan_dft_c2r_3d(nz, ny, nx, reinterpret_cast<fftw_complex*>(c.data()),
                                        r.data(), FFTW_ESTIMATE);
  if (!plans->forward || !plans->inverse) throw NumericError("FFTW planning failed");
  plans_ = plans;
  cache.emplace(dims, plans_);
}

void FftGrid::forward(const RealBuffer& in, SpectrumBuffer& out) const {
  if (in.size() != real_size() || out.size() != spectrum_size())
    throw ContractError("FftGrid::forward: buffer size mismatch");
  // r2c leaves its input untouched.
  fftw_execute_dft_r2c(plans_->forward, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void FftGrid::inverse(SpectrumBuffer& in, RealBuffer& out) const {
  if (out.size() != real_size() || in.size() != spectrum_size())
    throw ContractError("FftGrid::inverse: buffer size mismatch");
  fftw_execute_dft_c2r(plans_->inverse, reinterpret_cast<fftw_complex*>(in.data()), out.data());
  const double scale = 1.0 / static_cast<double>(real_size());
  for (double& v : out) v *= scale;
}

// ---------------------------------------------------------------------------

RealBuffer embed(const Volume& v, Dims grid, Index3 origin) {
  const Dims& d = v.dims();
  if (origin.x < 0 || origin.y < 0 || origin.z < 0 ||
      static_cast<std::size_t>(origin.x) + d.nx > grid.nx ||
      static_cast<std::size_t>(origin.y) + d.ny > grid.ny ||
      static_cast<std::size_t>(origin.z) + d.nz > grid.nz)
    throw ContractError("embed: volume does not fit the grid");
  RealBuffer out(grid.size(), 0.0);
  for (std::size_t z = 0; z < d.nz; ++z)
    for (std::size_t y = 0; y < d.ny; ++y) {
      const std::size_t row = static_cast<std::size_t>(origin.x) +
                              grid.nx * (static_cast<std::size_t>(origin.y) + y +
                                         grid.ny * (static_cast<std::size_t>(origin.z) + z));
      for (std::size_t x = 0; x < d.nx; ++x) out[row + x] = v(x, y, z);
    }
  return out;
}

Volume extract(const RealBuffer& buf, Dims grid, Dims dims, Index3 origin, Vec3 voxel_size) {
  if (buf.size() != grid.size()) throw ContractError("extract: buffer/grid mismatch");
  if (origin.x < 0 || origin.y < 0 || origin.z < 0 ||
      static_cast<std::size_t>(origin.x) + dims.nx > grid.nx ||
      static_cast<std::size_t>(origin.y) + dims.ny > grid.ny ||
      static_cast<std::size_t>(origin.z) + dims.nz > grid.nz)
    throw ContractError("extract: block does not fit the grid");
  Volume out(dims, voxel_size);
  for (std::size_t z = 0; z < dims.nz; ++z)
    for (std::size_t y = 0; y < dims.ny; ++y) {
      const std::size_t row = static_cast<std::size_t>(origin.x) +
                              grid.nx * (static_cast<std::size_t>(origin.y) + y +
                                         grid.ny * (static_cast<std::size_t>(origin.z) + z));
      for (std::size_t x = 0; x < dims.nx; ++x) out(x, y, z) = static_cast<float>(buf[row + x]);
    }
  return out;
}

namespace {

void require_same_dims(const Volume& a, const Volume& b, const char* op) {
  if (a.dims() != b.dims()) throw ContractError(std::string(op) + ": dims mismatch");
}

enum class Pairing { convolve, correlate };

// Both inputs placed at the grid origin; the result spans the whole grid.
RealBuffer spectral_product(const Volume& a, const Volume& b, Dims grid, Pairing kind) {
  const FftGrid fft(grid);
  auto fa = fft.make_spectrum();
  auto fb = fft.make_spectrum();
  fft.forward(embed(a, grid), fa);
  fft.forward(embed(b, grid), fb);
  for (std::size_t i = 0; i < fa.size(); ++i)
    fa[i] = (kind == Pairing::convolve ? fa[i] : std::conj(fa[i])) * fb[i];
  auto out = fft.make_real();
  fft.inverse(fa, out);
  return out;
}

Volume roll(const Volume& v, Index3 s) { return shift_circular(v, s); }

Index3 half(Dims d) {
  return {static_cast<std::ptrdiff_t>(d.nx / 2), static_cast<std::ptrdiff_t>(d.ny / 2),
          static_cast<std::ptrdiff_t>(d.nz / 2)};
}

}  // namespace

Volume fft_convolve(const Volume& a, const Volume& b, PadPolicy policy) {
  require_same_dims(a, b, "fft_convolve");
  const Dims grid = policy.grid_for(a.dims());
  const auto full = spectral_product(a, b, grid, Pairing::convolve);
  if (policy.mode == PadMode::circular) return extract(full, grid, grid, {}, a.voxel_size());
  return extract(full, grid, a.dims(), half(b.dims()), a.voxel_size());
}

Volume fft_crosscorrelate(const Volume& a, const Volume& b, PadPolicy policy) {
  require_same_dims(a, b, "fft_crosscorrelate");
  const Dims grid = policy.grid_for(a.dims());
  return extract(spectral_product(a, b, grid, Pairing::correlate), grid, grid, {},
                 a.voxel_size());
}

AutocorrVolume autocorrelate(const Volume& a, PadPolicy policy) {
  const Dims grid = policy.grid_for(a.dims());
  const FftGrid fft(grid);
  auto spec = fft.make_spectrum();
  fft.forward(embed(a, grid), spec);
  for (auto& c : spec) c = std::norm(c);
  auto out = fft.make_real();
  fft.inverse(spec, out);
  return {extract(out, grid, grid, {}, a.voxel_size()), Layout::fft_native, {0, 0, 0},
          policy.mode, a.dims()};
}

AutocorrVolume to_centered(const AutocorrVolume& x) {
  if (x.layout == Layout::centered) throw ContractError("to_centered: already centered");
  AutocorrVolume out = x;
  const Index3 h = half(x.volume.dims());
  out.volume = roll(x.volume, h);
  out.layout = Layout::centered;
  out.zero_shift = {x.zero_shift.x + h.x, x.zero_shift.y + h.y, x.zero_shift.z + h.z};
  return out;
}

AutocorrVolume to_native(const AutocorrVolume& x) {
  if (x.layout == Layout::fft_native) throw ContractError("to_native: already fft-native");
  AutocorrVolume out = x;
  const Index3 h = half(x.volume.dims());
  out.volume = roll(x.volume, {-h.x, -h.y, -h.z});
  out.layout = Layout::fft_native;
  out.zero_shift = {x.zero_shift.x - h.x, x.zero_shift.y - h.y, x.zero_shift.z - h.z};
  return out;
}

Volume fourier_shift(const Volume& v, Vec3 s) {
  const Dims& d = v.dims();
  const FftGrid fft(d);
  auto spec = fft.make_spectrum();
  fft.forward(embed(v, d), spec);

  auto axis_factors = [](std::size_t n, std::size_t count, double shift) {
    std::vector<Complex> f(count);
    for (std::size_t k = 0; k < count; ++k) {
      if (n % 2 == 0 && k == n / 2) {
        f[k] = {std::cos(std::numbers::pi * shift), 0.0};
        continue;
      }
      const double freq = k <= n / 2 ? static_cast<double>(k)
                                     : static_cast<double>(k) - static_cast<double>(n);
      const double phase = -2.0 * std::numbers::pi * freq * shift / static_cast<double>(n);
      f[k] = {std::cos(phase), std::sin(phase)};
    }
    return f;
  };
  const Dims sd = fft.spectrum_dims();
  const auto fx = axis_factors(d.nx, sd.nx, s.x);
  const auto fy = axis_factors(d.ny, sd.ny, s.y);
  const auto fz = axis_factors(d.nz, sd.nz, s.z);
  for (std::size_t z = 0; z < sd.nz; ++z)
    for (std::size_t y = 0; y < sd.ny; ++y) {
      const Complex fyz = fy[y] * fz[z];
      for (std::size_t x = 0; x < sd.nx; ++x) spec[x + sd.nx * (y + sd.ny * z)] *= fx[x] * fyz;
    }
  auto out = fft.make_real();
  fft.inverse(spec, out);
  return extract(out, d, d, {}, v.voxel_size());
}

void save_autocorr(const AutocorrVolume& x, const std::filesystem::path& path,
                   const nlohmann::json& extra) {
  nlohmann::json meta = x.sidecar_fields();
  if (extra.is_object()) meta.update(extra);
  save_volume(x.volume, path, meta);
}

AutocorrVolume load_autocorr(const std::filesystem::path& path) {
  AutocorrVolume x;
  x.volume = load_volume(path);
  const auto meta = load_sidecar(path);
  try {
    x.layout = parse_layout(meta.value("layout", std::string("fft-native")));
    if (meta.contains("zero_shift_index")) {
      const auto& z = meta["zero_shift_index"];
      x.zero_shift = {z.at(0).get<std::ptrdiff_t>(), z.at(1).get<std::ptrdiff_t>(),
                      z.at(2).get<std::ptrdiff_t>()};
    } else if (x.layout == Layout::centered) {
      x.zero_shift = half(x.volume.dims());
    }
    x.pad = parse_pad_mode(meta.value("pad", std::string("circular")));
    if (meta.contains("source_dims")) {
      const auto& s = meta["source_dims"];
      x.source_dims = {s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>(),
                       s.at(2).get<std::size_t>()};
    } else {
      x.source_dims = x.volume.dims();
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad auto-correlation sidecar for " + path.string() + ": " + e.what());
  } catch (const ContractError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return x;
}

}  // namespace acorr
