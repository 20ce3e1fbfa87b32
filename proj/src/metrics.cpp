#include "acorr/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "acorr/error.hpp"
#include "acorr/fusion.hpp"

namespace acorr {

double zncc(const Volume& a, const Volume& b) {
  if (a.dims() != b.dims()) throw ContractError("zncc: dims mismatch");
  const double n = static_cast<double>(a.size());
  const double ma = a.sum() / n, mb = b.sum() / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) throw ContractError("zncc: zero-variance input");
  return sab / std::sqrt(saa * sbb);
}

namespace {

Volume registered(const Volume& a, const Volume& b) {
  const Displacement m = register_pair(a, b);
  return shift_circular(b, {-m.x, -m.y, -m.z});
}

}  // namespace

Volume align_to(const Volume& a, const Volume& b, bool allow_flip) {
  Volume best = registered(a, b);
  if (!allow_flip) return best;
  Volume mirrored = registered(a, flip(b));
  return zncc(a, mirrored) > zncc(a, best) ? mirrored : best;
}

double ncc_after_alignment(const Volume& a, const Volume& b, bool allow_flip) {
  double best = zncc(a, registered(a, b));
  if (allow_flip) best = std::max(best, zncc(a, registered(a, flip(b))));
  return best;
}

namespace {

// Half-maximum width of the lobe around sample p, by linear interpolation of
// the first crossings on either side.
std::optional<double> width_at_half(const std::vector<ProfileSample>& s, std::size_t p) {
  const double half = 0.5 * s[p].intensity;
  std::optional<double> left, right;
  for (std::size_t i = p; i > 0; --i)
    if (s[i - 1].intensity < half) {
      const double t = (half - s[i - 1].intensity) / (s[i].intensity - s[i - 1].intensity);
      left = s[i - 1].position_um + t * (s[i].position_um - s[i - 1].position_um);
      break;
    }
  for (std::size_t i = p; i + 1 < s.size(); ++i)
    if (s[i + 1].intensity < half) {
      const double t = (s[i].intensity - half) / (s[i].intensity - s[i + 1].intensity);
      right = s[i].position_um + t * (s[i + 1].position_um - s[i].position_um);
      break;
    }
  if (left && right) return *right - *left;
  return std::nullopt;
}

}  // namespace

std::optional<double> main_lobe_fwhm(const std::vector<ProfileSample>& samples) {
  if (samples.size() < 3) return std::nullopt;
  std::size_t p = 0;
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (samples[i].intensity > samples[p].intensity) p = i;
  if (!(samples[p].intensity > 0.0)) return std::nullopt;
  return width_at_half(samples, p);
}

ProfileReport analyze_profile(std::vector<ProfileSample> samples) {
  ProfileReport r;
  r.samples = std::move(samples);
  const auto& s = r.samples;
  if (s.size() < 3) return r;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!(s[i].position_um > s[i - 1].position_um))
      throw ContractError("profile positions must be strictly increasing");

  double hi = s.front().intensity, lo = hi;
  for (const auto& p : s) {
    hi = std::max(hi, p.intensity);
    lo = std::min(lo, p.intensity);
  }
  if (!(hi > 0.0) || hi - lo <= 1e-12 * std::abs(hi)) return r;

  // Plateau-aware local maxima above 10% of the maximum.
  std::vector<std::size_t> peaks;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t j = i;
    while (j + 1 < s.size() && s[j + 1].intensity == s[i].intensity) ++j;
    const bool left_lower = i == 0 || s[i - 1].intensity < s[i].intensity;
    const bool right_lower = j + 1 == s.size() || s[j + 1].intensity < s[i].intensity;
    if (left_lower && right_lower && s[i].intensity >= 0.1 * hi) peaks.push_back((i + j) / 2);
    i = j + 1;
  }
  r.peaks = peaks.size();

  if (peaks.size() == 1) {
    r.fwhm_um = width_at_half(s, peaks.front());
  } else if (peaks.size() >= 2) {
    std::vector<std::size_t> top = peaks;
    std::partial_sort(top.begin(), top.begin() + 2, top.end(), [&](std::size_t a, std::size_t b) {
      return s[a].intensity > s[b].intensity;
    });
    const std::size_t a = std::min(top[0], top[1]), b = std::max(top[0], top[1]);
    double valley = s[a].intensity;
    for (std::size_t i = a; i <= b; ++i) valley = std::min(valley, s[i].intensity);
    r.dip_contrast = (hi - valley) / hi;
  }
  return r;
}

ProfileReport line_profile(const Volume& v, Vec3 p0, Vec3 p1, std::size_t samples) {
  if (samples < 2) throw ContractError("line_profile needs at least 2 samples");
  const Vec3& s = v.voxel_size();
  const Dims& d = v.dims();
  auto to_voxel = [&](const Vec3& p) { return Vec3{p.x / s.x, p.y / s.y, p.z / s.z}; };
  const Vec3 a = to_voxel(p0), b = to_voxel(p1);
  for (const Vec3& q : {a, b})
    for (int ax = 0; ax < 3; ++ax)
      if (q[ax] < -1e-9 || q[ax] > static_cast<double>(d[ax]) - 1.0 + 1e-9)
        throw ContractError("line_profile endpoint outside the volume");
  const double length =
      std::sqrt((p1.x - p0.x) * (p1.x - p0.x) + (p1.y - p0.y) * (p1.y - p0.y) +
                (p1.z - p0.z) * (p1.z - p0.z));
  if (!(length > 0.0)) throw ContractError("line_profile endpoints coincide");

  std::vector<ProfileSample> out(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(samples - 1);
    const Vec3 q{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), a.z + t * (b.z - a.z)};
    out[k] = {t * length, sample_trilinear(v, q)};
  }
  return analyze_profile(std::move(out));
}

double mse(const Volume& a, const Volume& b) {
  if (a.dims() != b.dims()) throw ContractError("mse: dims mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return a.size() ? acc / static_cast<double>(a.size()) : 0.0;
}

}  // namespace acorr
