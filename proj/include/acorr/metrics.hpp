#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "acorr/volume.hpp"

namespace acorr {

struct ProfileSample {
  double position_um = 0.0;
  double intensity = 0.0;
};

struct ProfileReport {
  std::vector<ProfileSample> samples;
  /// Single-peak profiles only.
  std::optional<double> fwhm_um;
  /// (max - min between the two highest peaks) / max, two-peak profiles only.
  std::optional<double> dip_contrast;
  std::size_t peaks = 0;
};

/// Zero-normalized cross-correlation at zero offset.
double zncc(const Volume& a, const Volume& b);

/// `b` registered onto `a` (and optionally flip(b), keeping the better match).
Volume align_to(const Volume& a, const Volume& b, bool allow_flip);

/// zncc after registering b (and optionally its point reflection) onto a.
double ncc_after_alignment(const Volume& a, const Volume& b, bool allow_flip = true);

/// Trilinear profile from p0 to p1 (micrometers), `samples` >= 2 points.
ProfileReport line_profile(const Volume& v, Vec3 p0_um, Vec3 p1_um, std::size_t samples);

/// Peak analysis of an arbitrary sampled profile (positions strictly increasing).
ProfileReport analyze_profile(std::vector<ProfileSample> samples);

/// Half-maximum width of the lobe around the global maximum, ignoring any
/// other peaks. Absent when a crossing falls outside the profile.
std::optional<double> main_lobe_fwhm(const std::vector<ProfileSample>& samples);

double mse(const Volume& a, const Volume& b);

}  // namespace acorr
