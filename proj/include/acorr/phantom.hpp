#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "acorr/psf.hpp"
#include "acorr/volume.hpp"

namespace acorr {

enum class PhantomKind { beads, spheres, shells, tubes };

std::string to_string(PhantomKind k);
PhantomKind parse_phantom_kind(const std::string& s);

/// Ball (beads, spheres) or hollow ball (shells). Radius 0 is a single voxel.
struct Blob {
  Vec3 center;
  double radius = 0.0;
  double intensity = 1.0;
  /// Wall thickness for shells; ignored otherwise.
  double thickness = 0.0;
};

/// Polyline tube of constant radius.
struct Tube {
  std::vector<Vec3> waypoints;
  double radius = 1.0;
  double intensity = 1.0;
};

struct Phantom {
  PhantomKind kind = PhantomKind::spheres;
  Dims dims = cube(64);
  std::uint64_t seed = 0;
  std::vector<Blob> blobs;
  std::vector<Tube> tubes;
};

/// Random geometry of the given kind inside the central half of the grid,
/// fully determined by `seed`. count 0 picks a per-kind default.
Phantom random_phantom(PhantomKind kind, Dims dims, std::uint64_t seed, std::size_t count = 0);

/// Voxelizes a phantom. Boundary voxels get the linear coverage
/// clamp(r + 1/2 - d, 0, 1); overlapping shapes combine by maximum.
Volume make_phantom(const Phantom& p);

struct AcquisitionSpec {
  std::vector<double> angles;
  /// Blur in the 0-degree frame; nullopt means no blur.
  std::optional<PsfModel> psf = PsfModel{};
  /// Shift applied by forward_view.
  Vec3 shift{};
  /// Bound for the per-view random shifts drawn by simulate_views.
  double shift_max = 0.0;
  /// Additive Gaussian noise sigma relative to the noise-free view peak.
  double noise = 0.0;
  std::uint64_t seed = 0;

  /// 12 views, 30 degrees apart.
  static std::vector<double> default_angles();
};

/// rotate(+angle) -> blur -> Fourier shift -> noise (clamped at 0 when noise > 0).
ViewStack forward_view(const Volume& truth, double angle_deg, const AcquisitionSpec& spec);

/// Per-view seed derived from the master seed and view index.
std::uint64_t view_seed(std::uint64_t master, std::size_t index);

struct SimulatedView {
  ViewStack view;
  Vec3 shift;
  std::uint64_t seed = 0;
};

/// One view per spec angle with independent uniform shifts in +-shift_max.
std::vector<SimulatedView> simulate_views(const Volume& truth, const AcquisitionSpec& spec);

/// Writes truth.raw, views/view_NNN.raw and manifest.json under `outdir`;
/// returns the manifest.
nlohmann::json make_dataset(const Volume& truth, const AcquisitionSpec& spec,
                            const std::filesystem::path& outdir,
                            const nlohmann::json& phantom_info = nlohmann::json::object());

}  // namespace acorr
