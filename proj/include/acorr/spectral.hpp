#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "acorr/volume.hpp"

namespace acorr {

using Complex = std::complex<double>;

void* fft_alloc(std::size_t bytes);
void fft_free(void* p) noexcept;

/// SIMD-aligned allocation so buffers can be handed to any cached FFT plan.
template <class T>
struct FftAllocator {
  using value_type = T;
  FftAllocator() = default;
  template <class U>
  FftAllocator(const FftAllocator<U>&) noexcept {}
  T* allocate(std::size_t n) { return static_cast<T*>(fft_alloc(n * sizeof(T))); }
  void deallocate(T* p, std::size_t) noexcept { fft_free(p); }
  template <class U>
  bool operator==(const FftAllocator<U>&) const noexcept { return true; }
};

using RealBuffer = std::vector<double, FftAllocator<double>>;
using SpectrumBuffer = std::vector<Complex, FftAllocator<Complex>>;

/// Smallest 2^a 3^b 5^c 7^d >= n.
std::size_t next_fft_size(std::size_t n);

enum class PadMode { linear, circular };

std::string to_string(PadMode m);
PadMode parse_pad_mode(const std::string& s);

/// How correlation-type operations embed their inputs.
///
/// linear: zero-pad every axis to an FFT-friendly size >= 2n-1, so that the
/// full shift-space of an n-sample signal fits without wrap-around.
/// circular: operate on the input grid directly (cyclic shifts).
struct PadPolicy {
  PadMode mode = PadMode::linear;

  static PadPolicy linear() { return {PadMode::linear}; }
  static PadPolicy circular() { return {PadMode::circular}; }

  /// Working grid for a source of dims `n`.
  Dims grid_for(Dims n) const;
};

enum class Layout { fft_native, centered };

std::string to_string(Layout l);
Layout parse_layout(const std::string& s);

/// A volume over shift-space. In fft-native layout the zero shift is index 0
/// and negative shifts wrap to the end of each axis.
struct AutocorrVolume {
  Volume volume;
  Layout layout = Layout::fft_native;
  Index3 zero_shift{0, 0, 0};
  PadMode pad = PadMode::linear;
  /// Dims of the direct-space signal(s) this was computed from.
  Dims source_dims{};

  nlohmann::json sidecar_fields() const;
};

/// Forward/inverse real 3D transforms for one grid size. Plans are created
/// once per dims and shared process-wide; executing them is thread-safe.
class FftGrid {
 public:
  explicit FftGrid(Dims dims);

  const Dims& dims() const { return dims_; }
  std::size_t real_size() const { return dims_.size(); }
  /// Half-spectrum along x: (nx/2+1, ny, nz).
  Dims spectrum_dims() const { return {dims_.nx / 2 + 1, dims_.ny, dims_.nz}; }
  std::size_t spectrum_size() const { return spectrum_dims().size(); }

  RealBuffer make_real() const { return RealBuffer(real_size(), 0.0); }
  SpectrumBuffer make_spectrum() const { return SpectrumBuffer(spectrum_size()); }

  void forward(const RealBuffer& in, SpectrumBuffer& out) const;
  /// Normalized inverse (includes the 1/N factor). Overwrites `in`.
  void inverse(SpectrumBuffer& in, RealBuffer& out) const;

 private:
  struct Plans;
  Dims dims_;
  std::shared_ptr<const Plans> plans_;
};

/// Copies `v` into a zero buffer of dims `grid`, at offset `origin`.
RealBuffer embed(const Volume& v, Dims grid, Index3 origin = {0, 0, 0});
/// Extracts a `dims` block starting at `origin` of a `grid`-sized buffer.
Volume extract(const RealBuffer& buf, Dims grid, Dims dims, Index3 origin = {0, 0, 0},
               Vec3 voxel_size = {1.0, 1.0, 1.0});

/// a * b. Circular: cyclic convolution on the shared grid. Linear: zero-padded
/// convolution cropped back to the input dims with b's center (floor(n/2))
/// taken as the kernel origin, i.e. the classic "same" crop.
Volume fft_convolve(const Volume& a, const Volume& b, PadPolicy policy = PadPolicy::circular());

/// out(xi) = sum_x a(x) b(x + xi), fft-native layout. Linear mode returns the
/// padded shift-space grid.
Volume fft_crosscorrelate(const Volume& a, const Volume& b,
                          PadPolicy policy = PadPolicy::circular());

/// Inverse transform of |F{a}|^2.
AutocorrVolume autocorrelate(const Volume& a, PadPolicy policy = PadPolicy::linear());

AutocorrVolume to_centered(const AutocorrVolume& x);
AutocorrVolume to_native(const AutocorrVolume& x);

/// Real-valued circular translation by the Fourier phase ramp: out(x) = v(x - s).
/// The Nyquist bin of even axes receives the real factor cos(pi s).
Volume fourier_shift(const Volume& v, Vec3 s);

void save_autocorr(const AutocorrVolume& x, const std::filesystem::path& path,
                   const nlohmann::json& extra = nlohmann::json::object());
AutocorrVolume load_autocorr(const std::filesystem::path& path);

}  // namespace acorr
