#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include "acorr/error.hpp"
#include "acorr/fusion.hpp"
#include "acorr/phantom.hpp"
#include "support.hpp"

using namespace acorr;
using namespace acorr::testing;
namespace fs = std::filesystem;

namespace {

Vec3 centroid(const Volume& v) {
  double s = 0, x = 0, y = 0, z = 0;
  const Dims& d = v.dims();
  for (std::size_t k = 0; k < d.nz; ++k)
    for (std::size_t j = 0; j < d.ny; ++j)
      for (std::size_t i = 0; i < d.nx; ++i) {
        const double w = v(i, j, k);
        s += w;
        x += w * i;
        y += w * j;
        z += w * k;
      }
  return {x / s, y / s, z / s};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(MakePhantom, ZeroRadiusBeadIsADelta) {
  Phantom p;
  p.kind = PhantomKind::beads;
  p.dims = cube(16);
  p.blobs = {{{8, 8, 8}, 0.0, 1.0}};
  EXPECT_EQ(make_phantom(p), delta(cube(16), 8, 8, 8));
}

TEST(MakePhantom, SphereVolumeMatchesAnalyticVolume) {
  for (double r : {4.0, 5.5, 7.0}) {
    Phantom p;
    p.dims = cube(32);
    p.blobs = {{{15.3, 16.0, 15.7}, r, 1.0}};
    const double want = 4.0 / 3.0 * std::numbers::pi * r * r * r;
    EXPECT_NEAR(make_phantom(p).sum(), want, 0.05 * want) << r;
  }
}

TEST(MakePhantom, ShellsAreHollow) {
  Phantom p;
  p.kind = PhantomKind::shells;
  p.dims = cube(32);
  p.blobs = {{{16, 16, 16}, 6.0, 1.0, 1.5}};
  const Volume v = make_phantom(p);
  EXPECT_EQ(v(16, 16, 16), 0.0f);
  EXPECT_EQ(v(21, 16, 16), 1.0f);
}

TEST(MakePhantom, TubesCoverTheirAxis) {
  Phantom p;
  p.kind = PhantomKind::tubes;
  p.dims = cube(32);
  p.tubes = {{{{10, 12, 16}, {20, 12, 16}, {20, 20, 16}}, 1.2, 0.7}};
  const Volume v = make_phantom(p);
  EXPECT_FLOAT_EQ(v(15, 12, 16), 0.7f);
  EXPECT_FLOAT_EQ(v(20, 16, 16), 0.7f);
  EXPECT_EQ(v(15, 16, 16), 0.0f);
}

TEST(MakePhantom, GeometryOutsideCentralHalfIsRejected) {
  Phantom p;
  p.dims = cube(32);
  p.blobs = {{{16, 16, 16}, 9.0, 1.0}};
  EXPECT_THROW(make_phantom(p), ContractError);
  p.blobs = {{{3, 16, 16}, 0.0, 1.0}};
  EXPECT_THROW(make_phantom(p), ContractError);
}

TEST(RandomPhantom, SameSeedIsDeterministic) {
  for (PhantomKind k : {PhantomKind::beads, PhantomKind::spheres, PhantomKind::shells, PhantomKind::tubes}) {
    const Volume a = make_phantom(random_phantom(k, cube(32), 7));
    EXPECT_EQ(a, make_phantom(random_phantom(k, cube(32), 7))) << to_string(k);
    EXPECT_NE(a, make_phantom(random_phantom(k, cube(32), 8))) << to_string(k);
    EXPECT_GE(a.min(), 0.0f);
    EXPECT_GT(a.max(), 0.0f);
  }
}

TEST(RandomPhantom, KindNamesRoundTrip) {
  for (PhantomKind k : {PhantomKind::beads, PhantomKind::spheres, PhantomKind::shells, PhantomKind::tubes})
    EXPECT_EQ(parse_phantom_kind(to_string(k)), k);
  EXPECT_THROW(parse_phantom_kind("cubes"), ContractError);
}

TEST(ForwardView, IdentityPipeline) {
  const Volume truth = make_phantom(random_phantom(PhantomKind::spheres, cube(16), 1));
  AcquisitionSpec spec;
  spec.psf = std::nullopt;
  EXPECT_EQ(forward_view(truth, 0.0, spec).volume, truth);
}

TEST(ForwardView, HalfVoxelShiftMovesCentroid) {
  Phantom p;
  p.dims = cube(32);
  p.blobs = {{{16, 16, 16}, 3.0, 1.0}};
  const Volume truth = make_phantom(p);
  AcquisitionSpec spec;
  spec.shift = {0.5, 0.0, 0.0};
  const Vec3 c0 = centroid(truth), c1 = centroid(forward_view(truth, 0.0, spec).volume);
  EXPECT_NEAR(c1.x - c0.x, 0.5, 0.02);
  EXPECT_NEAR(c1.y - c0.y, 0.0, 0.02);
  EXPECT_NEAR(c1.z - c0.z, 0.0, 0.02);
}

TEST(ForwardView, QuarterTurnAutocorrelationIgnoresShift) {
  // The shift is a circular phase ramp, so the cyclic auto-correlation is the
  // quantity it leaves untouched.
  const Volume truth = make_phantom(random_phantom(PhantomKind::spheres, cube(32), 2));
  for (double angle : {0.0, 90.0, 180.0, 270.0}) {
    AcquisitionSpec still, moved;
    moved.shift = {1.3, -0.5, 2.7};
    const PadPolicy cyclic = PadPolicy::circular();
    const AutocorrVolume a = autocorrelate(forward_view(truth, angle, still).volume, cyclic);
    const AutocorrVolume b = autocorrelate(forward_view(truth, angle, moved).volume, cyclic);
    EXPECT_LE(rel_linf(b.volume, a.volume), 1e-5) << angle;
  }
}

TEST(ForwardView, ShiftsLeaveAutocorrelationUnchanged) {
  const Volume truth = make_phantom(random_phantom(PhantomKind::spheres, cube(32), 3));
  AcquisitionSpec still;
  const AutocorrVolume a = autocorrelate(forward_view(truth, 30.0, still).volume);
  for (Vec3 s : {Vec3{0.5, 0.5, 0.5}, Vec3{-2.0, 1.5, 0.25}}) {
    AcquisitionSpec moved;
    moved.shift = s;
    EXPECT_LE(rel_l2(autocorrelate(forward_view(truth, 30.0, moved).volume).volume, a.volume), 1e-4);
  }
}

TEST(ForwardView, LinearInIntensity) {
  const Volume truth = make_phantom(random_phantom(PhantomKind::tubes, cube(32), 4));
  Volume scaled = truth;
  for (auto& x : scaled.data()) x *= 3.0f;
  AcquisitionSpec spec;
  spec.shift = {0.3, 0.0, -1.1};
  const Volume a = forward_view(truth, 60.0, spec).volume;
  Volume b = forward_view(scaled, 60.0, spec).volume;
  for (auto& x : b.data()) x /= 3.0f;
  EXPECT_LE(rel_linf(b, a), 1e-6);
}

TEST(ForwardView, NoiseIsSeededAndClamped) {
  const Volume truth = make_phantom(random_phantom(PhantomKind::beads, cube(16), 5));
  AcquisitionSpec spec;
  spec.psf = PsfModel{{1.0, 1.0, 1.4}};
  spec.noise = 0.1;
  spec.seed = 9;
  const Volume a = forward_view(truth, 0.0, spec).volume;
  EXPECT_EQ(a, forward_view(truth, 0.0, spec).volume);
  EXPECT_GE(a.min(), 0.0f);
  spec.seed = 10;
  EXPECT_NE(a, forward_view(truth, 0.0, spec).volume);
}

TEST(ForwardView, RejectsLargeShiftsAndNegativeNoise) {
  const Volume truth(cube(16));
  AcquisitionSpec spec;
  spec.shift = {2.5, 0, 0};
  EXPECT_THROW(forward_view(truth, 0.0, spec), ContractError);
  spec.shift = {};
  spec.noise = -0.1;
  EXPECT_THROW(forward_view(truth, 0.0, spec), ContractError);
}

TEST(SimulateViews, PerViewShiftsAreBoundedAndDistinct) {
  const Volume truth = make_phantom(random_phantom(PhantomKind::spheres, cube(32), 6));
  AcquisitionSpec spec;
  spec.angles = AcquisitionSpec::default_angles();
  spec.shift_max = 2.0;
  spec.seed = 1;
  const auto views = simulate_views(truth, spec);
  ASSERT_EQ(views.size(), 12u);
  for (std::size_t i = 0; i < views.size(); ++i) {
    EXPECT_DOUBLE_EQ(views[i].view.angle_deg, 30.0 * i);
    for (int a = 0; a < 3; ++a) EXPECT_LE(std::abs(views[i].shift[a]), 2.0);
    if (i) EXPECT_NE(views[i].shift, views[i - 1].shift);
  }
  spec.shift_max = 5.0;
  EXPECT_THROW(simulate_views(truth, spec), ContractError);
}

TEST(MakeDataset, SingleViewIsTheBlurredTruth) {
  const fs::path dir = scratch_dir("dataset_one");
  const Volume truth = make_phantom(random_phantom(PhantomKind::spheres, cube(16), 7));
  AcquisitionSpec spec;
  spec.angles = {0.0};
  spec.psf = PsfModel{{1.0, 1.0, 1.4}};
  const auto manifest = make_dataset(truth, spec, dir);
  ASSERT_EQ(manifest["views"].size(), 1u);
  const Volume view = load_volume(dir / manifest["views"][0]["file"].get<std::string>());
  EXPECT_EQ(view, forward_view(truth, 0.0, spec).volume);
  EXPECT_EQ(load_volume(dir / "truth.raw"), truth);
}

TEST(MakeDataset, TwelveViewsAndByteIdenticalRerun) {
  const Volume truth = make_phantom(random_phantom(PhantomKind::shells, cube(32), 8));
  AcquisitionSpec spec;
  spec.angles = AcquisitionSpec::default_angles();
  spec.shift_max = 2.0;
  spec.noise = 0.01;
  spec.seed = 3;
  const fs::path a = scratch_dir("dataset_a"), b = scratch_dir("dataset_b");
  const auto manifest = make_dataset(truth, spec, a);
  make_dataset(truth, spec, b);
  ASSERT_EQ(manifest["views"].size(), 12u);
  EXPECT_EQ(slurp(a / "manifest.json"), slurp(b / "manifest.json"));
  for (const auto& v : manifest["views"]) {
    const std::string f = v["file"].get<std::string>();
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(ViewSeed, DistinctPerIndexAndMaster) {
  EXPECT_NE(view_seed(1, 0), view_seed(1, 1));
  EXPECT_NE(view_seed(1, 0), view_seed(2, 0));
  EXPECT_EQ(view_seed(5, 3), view_seed(5, 3));
}
