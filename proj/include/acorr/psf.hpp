#pragma once

#include <vector>

#include "acorr/solvers.hpp"
#include "acorr/spectral.hpp"
#include "acorr/volume.hpp"

namespace acorr {

/// Anisotropic Gaussian PSF, sigmas in voxels. Light-sheet scanning runs along
/// z, so sigma.z is normally the largest.
struct PsfModel {
  Vec3 sigma{1.0, 1.0, 3.0};

  void validate() const;
};

/// Separable Gaussian centered on voxel floor(n/2), normalized to unit sum.
/// Throws if more than 1e-6 of the continuous mass falls outside the grid.
Volume rasterize_psf(const PsfModel& m, Dims dims);

/// PSF of a view taken at `angle_deg`, expressed in the reference frame
/// (rotated by -angle_deg) and renormalized to unit sum.
Volume psf_for_view(const PsfModel& m, double angle_deg, Dims dims);

/// Mean of psf_for_view over `angles` (the blur of the aligned average).
Volume average_direct_psf(const PsfModel& m, const std::vector<double>& angles, Dims dims);

/// Mean over `angles` of the auto-correlation of each view PSF.
AutocorrVolume average_autocorr_psf(const PsfModel& m, const std::vector<double>& angles, Dims dims,
                                    PadPolicy policy = PadPolicy::linear());

/// Inverts `Hbar` with Schulz-Snyder iterations starting from the 0-degree
/// PSF; the result is normalized to unit sum.
Volume effective_psf(const AutocorrVolume& Hbar, const PsfModel& m, const SolverOptions& opts);

}  // namespace acorr
