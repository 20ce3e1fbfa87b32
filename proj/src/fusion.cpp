#include "acorr/fusion.hpp"

#include <cmath>
#include <limits>

#include "acorr/error.hpp"
#include "acorr/parallel.hpp"

namespace acorr {

ViewStack preprocess_view(const ViewStack& raw, const std::optional<Region>& dark) {
  if (raw.preprocessed) throw ContractError("view is already preprocessed");
  ViewStack out;
  out.angle_deg = wrap_degrees(raw.angle_deg);
  const Volume base = dark ? subtract_background(raw.volume, *dark) : raw.volume;
  out.volume = out.angle_deg == 0.0 ? base : rotate_about_vertical(base, -out.angle_deg);
  out.preprocessed = true;
  return out;
}

namespace {

void check_views(const std::vector<ViewStack>& views) {
  if (views.empty()) throw ContractError("fusion needs at least one view");
  for (const auto& v : views) {
    if (!v.preprocessed) throw ContractError("fusion needs preprocessed views");
    if (v.volume.dims() != views.front().volume.dims())
      throw ContractError("fusion views must share dims");
  }
}

std::ptrdiff_t signed_lag(std::size_t i, std::size_t n) {
  return i <= n / 2 ? static_cast<std::ptrdiff_t>(i)
                    : static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(n);
}

}  // namespace

AutocorrVolume fuse_autocorrelations(const std::vector<ViewStack>& views, PadPolicy policy) {
  check_views(views);
  std::vector<AutocorrVolume> parts(views.size());
  parallel_for(views.size(),
               [&](std::size_t i) { parts[i] = autocorrelate(views[i].volume, policy); });
  AutocorrVolume out = parts.front();
  std::vector<double> acc(out.volume.size(), 0.0);
  for (const auto& p : parts)
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += p.volume[i];
  const double n = static_cast<double>(views.size());
  for (std::size_t i = 0; i < acc.size(); ++i)
    out.volume[i] = static_cast<float>(std::abs(acc[i] / n));
  return out;
}

Displacement register_pair(const Volume& ref, const Volume& mov) {
  if (ref.dims() != mov.dims()) throw ContractError("register_pair: dims mismatch");
  auto nonzero = [](const Volume& v) {
    for (float x : v.data())
      if (x != 0.0f) return true;
    return false;
  };
  if (!nonzero(ref) || !nonzero(mov)) throw ContractError("register_pair: all-zero input has no peak");

  const Dims& d = ref.dims();
  const FftGrid fft(d);
  auto fr = fft.make_spectrum();
  auto fm = fft.make_spectrum();
  fft.forward(embed(ref, d), fr);
  fft.forward(embed(mov, d), fm);
  for (std::size_t i = 0; i < fr.size(); ++i) fr[i] = std::conj(fr[i]) * fm[i];
  auto xc = fft.make_real();
  fft.inverse(fr, xc);

  Displacement best{};
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t z = 0; z < d.nz; ++z)
    for (std::size_t y = 0; y < d.ny; ++y)
      for (std::size_t x = 0; x < d.nx; ++x) {
        const double v = xc[x + d.nx * (y + d.ny * z)];
        const Displacement m{signed_lag(x, d.nx), signed_lag(y, d.ny), signed_lag(z, d.nz)};
        if (v > best_value || (v == best_value && m < best)) {
          best_value = v;
          best = m;
        }
      }
  return best;
}

DirectFusion fuse_direct(const std::vector<ViewStack>& views) {
  check_views(views);
  DirectFusion out;
  for (std::size_t i = 0; i < views.size(); ++i)
    if (wrap_degrees(views[i].angle_deg) == 0.0) {
      out.reference = i;
      break;
    }
  const Volume& ref = views[out.reference].volume;
  std::vector<Volume> aligned(views.size());
  out.displacements.resize(views.size());
  parallel_for(views.size(), [&](std::size_t i) {
    if (i == out.reference) {
      aligned[i] = ref;
      return;
    }
    const Displacement m = register_pair(ref, views[i].volume);
    out.displacements[i] = m;
    aligned[i] = shift_circular(views[i].volume, {-m.x, -m.y, -m.z});
  });
  std::vector<double> acc(ref.size(), 0.0);
  for (const auto& v : aligned)
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
  out.mean = Volume(ref.dims(), ref.voxel_size());
  const double n = static_cast<double>(views.size());
  for (std::size_t i = 0; i < acc.size(); ++i) out.mean[i] = static_cast<float>(acc[i] / n);
  return out;
}

}  // namespace acorr
