#pragma once

#include <optional>
#include <vector>

#include "acorr/spectral.hpp"
#include "acorr/volume.hpp"

namespace acorr {

/// Integer voxel shift of a view relative to the reference, components in
/// (-n/2, n/2].
using Displacement = Index3;

/// Background subtraction (when a dark region is given) followed by rotation
/// back to the 0-degree reference orientation.
ViewStack preprocess_view(const ViewStack& raw, const std::optional<Region>& dark);

/// |mean_i A{o_i}| over preprocessed views. No registration is performed.
AutocorrVolume fuse_autocorrelations(const std::vector<ViewStack>& views,
                                     PadPolicy policy = PadPolicy::linear());

/// Integer argmax of the circular cross-correlation ref (corr) mov, reported
/// relative to zero shift: mov ~= shift_circular(ref, m). Ties go to the
/// lexicographically smallest (mx, my, mz).
Displacement register_pair(const Volume& ref, const Volume& mov);

struct DirectFusion {
  Volume mean;
  /// Per-view displacement, in input order.
  std::vector<Displacement> displacements;
  std::size_t reference = 0;
};

/// Registers every view to the 0-degree view (the first view when none is at
/// 0 degrees), translates it back by -m circularly, and averages.
DirectFusion fuse_direct(const std::vector<ViewStack>& views);

struct FusedDataset {
  AutocorrVolume chi_bar;
  std::optional<Volume> o_bar_direct;
  std::optional<AutocorrVolume> H_bar;
  std::size_t n_views = 0;
  std::vector<double> angles;
};

}  // namespace acorr
