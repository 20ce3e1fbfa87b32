#include <gtest/gtest.h>

#include <cmath>

#include "acorr/error.hpp"
#include "acorr/metrics.hpp"
#include "acorr/phantom.hpp"
#include "acorr/psf.hpp"
#include "support.hpp"

using namespace acorr;
using namespace acorr::testing;

namespace {

Volume structured(std::uint64_t seed) {
  return make_phantom(random_phantom(PhantomKind::spheres, cube(16), seed));
}

}  // namespace

TEST(Zncc, LoopOracleAndScaleInvariance) {
  const Volume a = random_volume(cube(5), 1), b = random_volume(cube(5), 2);
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= a.size();
  mb /= b.size();
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += (a[i] - ma) * (b[i] - mb);
    aa += (a[i] - ma) * (a[i] - ma);
    bb += (b[i] - mb) * (b[i] - mb);
  }
  EXPECT_NEAR(zncc(a, b), ab / std::sqrt(aa * bb), 1e-12);
  Volume c = b;
  for (auto& x : c.data()) x = 4.0f * x + 1.0f;
  EXPECT_NEAR(zncc(a, c), zncc(a, b), 1e-6);
}

TEST(NccAfterAlignment, IdenticalIsOne) {
  const Volume a = structured(1);
  EXPECT_NEAR(ncc_after_alignment(a, a), 1.0, 1e-12);
}

TEST(NccAfterAlignment, ShiftAbsorbed) {
  const Volume a = structured(2);
  EXPECT_NEAR(ncc_after_alignment(a, shift_circular(a, {2, -3, 1}), false), 1.0, 1e-6);
}

TEST(NccAfterAlignment, ReflectionAbsorbedOnlyWhenAllowed) {
  const Volume a = structured(3);
  const Volume b = flip(a);
  EXPECT_NEAR(ncc_after_alignment(a, b, true), 1.0, 1e-6);
  EXPECT_LT(ncc_after_alignment(a, b, false), 0.999);
}

TEST(NccAfterAlignment, SymmetricAndScaleInvariant) {
  const Volume a = structured(4), b = structured(5);
  EXPECT_NEAR(ncc_after_alignment(a, b), ncc_after_alignment(b, a), 1e-6);
  Volume c = b;
  for (auto& x : c.data()) x *= 7.0f;
  EXPECT_NEAR(ncc_after_alignment(a, c), ncc_after_alignment(a, b), 1e-6);
}

TEST(NccAfterAlignment, ZeroVarianceIsRejected) {
  Volume flat(cube(4));
  for (auto& x : flat.data()) x = 1.0f;
  EXPECT_THROW(ncc_after_alignment(random_volume(cube(4), 1), flat), ContractError);
}

TEST(AlignTo, ReturnsRegisteredCopy) {
  const Volume a = structured(6);
  EXPECT_EQ(align_to(a, shift_circular(a, {1, 2, -2}), false), a);
  EXPECT_EQ(align_to(a, flip(a), true), a);
}

TEST(LineProfile, GaussianFwhm) {
  for (double sigma : {1.5, 2.0, 3.0}) {
    const Volume g = rasterize_psf(PsfModel{{sigma, 1.0, 1.0}}, cube(32));
    const ProfileReport r = line_profile(g, {4, 16, 16}, {28, 16, 16}, 241);
    ASSERT_TRUE(r.fwhm_um) << sigma;
    EXPECT_EQ(r.peaks, 1u);
    EXPECT_NEAR(*r.fwhm_um, 2.0 * std::sqrt(2.0 * std::log(2.0)) * sigma,
                0.05 * 2.355 * sigma);
  }
}

TEST(LineProfile, ReportsMicrometers) {
  Volume g = rasterize_psf(PsfModel{{2.0, 1.0, 1.0}}, cube(32));
  g.set_voxel_size({0.5, 0.5, 0.5});
  const ProfileReport r = line_profile(g, {2, 8, 8}, {14, 8, 8}, 241);
  ASSERT_TRUE(r.fwhm_um);
  EXPECT_NEAR(*r.fwhm_um, 0.5 * 2.0 * 2.3548, 0.05 * 2.355);
  EXPECT_DOUBLE_EQ(r.samples.front().position_um, 0.0);
  EXPECT_DOUBLE_EQ(r.samples.back().position_um, 12.0);
}

TEST(LineProfile, ConstantVolumeHasNoPeaks) {
  Volume v(cube(8));
  for (auto& x : v.data()) x = 2.0f;
  const ProfileReport r = line_profile(v, {1, 1, 1}, {6, 6, 6}, 50);
  EXPECT_FALSE(r.fwhm_um);
  EXPECT_FALSE(r.dip_contrast);
  for (const auto& s : r.samples) EXPECT_NEAR(s.intensity, 2.0, 1e-6);
}

TEST(LineProfile, SeparatedBeadsHaveFullDip) {
  Volume v(cube(16));
  v(5, 8, 8) = 1.0f;
  v(10, 8, 8) = 1.0f;
  const ProfileReport r = line_profile(v, {2, 8, 8}, {13, 8, 8}, 111);
  ASSERT_TRUE(r.dip_contrast);
  EXPECT_EQ(r.peaks, 2u);
  EXPECT_DOUBLE_EQ(*r.dip_contrast, 1.0);
}

TEST(LineProfile, EndpointsOutsideAreRejected) {
  const Volume v(cube(8));
  EXPECT_THROW(line_profile(v, {-1, 0, 0}, {3, 3, 3}, 10), ContractError);
  EXPECT_THROW(line_profile(v, {0, 0, 0}, {3, 3, 8}, 10), ContractError);
  EXPECT_THROW(line_profile(v, {0, 0, 0}, {3, 3, 3}, 1), ContractError);
}

TEST(AnalyzeProfile, RejectsNonIncreasingPositions) {
  EXPECT_THROW(analyze_profile({{0, 1}, {1, 2}, {1, 1}}), ContractError);
}

TEST(MainLobeFwhm, IgnoresSecondaryPeaks) {
  std::vector<ProfileSample> s;
  for (int i = 0; i <= 40; ++i) {
    const double x = i * 0.5;
    s.push_back({x, std::exp(-0.5 * (x - 6) * (x - 6)) + 0.6 * std::exp(-0.5 * (x - 14) * (x - 14))});
  }
  const auto f = main_lobe_fwhm(s);
  ASSERT_TRUE(f);
  EXPECT_NEAR(*f, 2.3548, 0.1);
  EXPECT_FALSE(analyze_profile(s).fwhm_um);
}

TEST(Mse, ClosedFormsAndOracle) {
  const Volume a = random_volume(cube(5), 7), b = random_volume(cube(5), 8);
  EXPECT_EQ(mse(a, a), 0.0);
  Volume one(cube(5));
  for (auto& x : one.data()) x = 1.0f;
  EXPECT_DOUBLE_EQ(mse(Volume(cube(5)), one), 1.0);
  double want = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) want += (double(a[i]) - b[i]) * (double(a[i]) - b[i]);
  want /= a.size();
  EXPECT_NEAR(mse(a, b), want, 1e-12);
  EXPECT_THROW(mse(a, Volume(cube(4))), ContractError);
}
