#include "acorr/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "acorr/error.hpp"
#include "acorr/parallel.hpp"

namespace acorr {

namespace fs = std::filesystem;

std::string to_string(PhantomKind k) {
  switch (k) {
    case PhantomKind::beads: return "beads";
    case PhantomKind::spheres: return "spheres";
    case PhantomKind::shells: return "shells";
    case PhantomKind::tubes: return "tubes";
  }
  return "?";
}

PhantomKind parse_phantom_kind(const std::string& s) {
  if (s == "beads") return PhantomKind::beads;
  if (s == "spheres") return PhantomKind::spheres;
  if (s == "shells") return PhantomKind::shells;
  if (s == "tubes") return PhantomKind::tubes;
  throw ContractError("unknown phantom kind '" + s + "'");
}

namespace {

struct Bounds {
  double lo[3];
  double hi[3];
};

// Central half of the grid, inclusive voxel coordinates.
Bounds central_half(Dims d) {
  Bounds b{};
  for (int a = 0; a < 3; ++a) {
    const auto n = static_cast<double>(d[a]);
    b.lo[a] = std::floor(n / 4.0);
    b.hi[a] = std::ceil(3.0 * n / 4.0) - 1.0;
  }
  return b;
}

void check_inside(const Bounds& b, const Vec3& c, double r, const char* what) {
  for (int a = 0; a < 3; ++a)
    if (c[a] - r < b.lo[a] - 1e-9 || c[a] + r > b.hi[a] + 1e-9)
      throw ContractError(std::string(what) + " leaves the central half of the grid");
}

double coverage(double radius, double dist) { return std::clamp(radius + 0.5 - dist, 0.0, 1.0); }

double segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const double abx = b.x - a.x, aby = b.y - a.y, abz = b.z - a.z;
  const double len2 = abx * abx + aby * aby + abz * abz;
  double t = 0.0;
  if (len2 > 0.0)
    t = std::clamp(((p.x - a.x) * abx + (p.y - a.y) * aby + (p.z - a.z) * abz) / len2, 0.0, 1.0);
  const double dx = p.x - (a.x + t * abx), dy = p.y - (a.y + t * aby), dz = p.z - (a.z + t * abz);
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t view_seed(std::uint64_t master, std::size_t index) {
  return splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(index) + 1));
}

Phantom random_phantom(PhantomKind kind, Dims dims, std::uint64_t seed, std::size_t count) {
  Phantom p;
  p.kind = kind;
  p.dims = dims;
  p.seed = seed;
  std::mt19937_64 rng(splitmix64(seed));
  auto uniform = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  const Bounds b = central_half(dims);
  double half_span = 1e300;
  for (int a = 0; a < 3; ++a) half_span = std::min(half_span, (b.hi[a] - b.lo[a]) / 2.0);

  auto center_for = [&](double r) {
    Vec3 c;
    c.x = uniform(b.lo[0] + r, b.hi[0] - r);
    c.y = uniform(b.lo[1] + r, b.hi[1] - r);
    c.z = uniform(b.lo[2] + r, b.hi[2] - r);
    return c;
  };

  switch (kind) {
    case PhantomKind::beads: {
      const std::size_t n = count ? count : 6;
      for (std::size_t i = 0; i < n; ++i) {
        Blob bead;
        bead.center = center_for(0.0);
        bead.center = {std::round(bead.center.x), std::round(bead.center.y), std::round(bead.center.z)};
        bead.intensity = uniform(0.5, 1.0);
        p.blobs.push_back(bead);
      }
      break;
    }
    case PhantomKind::spheres:
    case PhantomKind::shells: {
      const bool shells = kind == PhantomKind::shells;
      const std::size_t n = count ? count : (shells ? 3 : 5);
      const double rmax = std::min(shells ? 5.0 : 4.0, half_span);
      const double rmin = std::min(shells ? 3.0 : 2.0, rmax);
      for (std::size_t i = 0; i < n; ++i) {
        Blob s;
        s.radius = uniform(rmin, rmax);
        s.center = center_for(s.radius);
        s.intensity = uniform(0.4, 1.0);
        s.thickness = shells ? 1.5 : 0.0;
        p.blobs.push_back(s);
      }
      break;
    }
    case PhantomKind::tubes: {
      const std::size_t n = count ? count : 2;
      const double r = std::min(1.2, half_span);
      for (std::size_t i = 0; i < n; ++i) {
        Tube t;
        t.radius = r;
        t.intensity = uniform(0.5, 1.0);
        for (int k = 0; k < 4; ++k) t.waypoints.push_back(center_for(r));
        p.tubes.push_back(t);
      }
      break;
    }
  }
  return p;
}

Volume make_phantom(const Phantom& p) {
  const Bounds b = central_half(p.dims);
  for (const auto& blob : p.blobs) {
    if (blob.radius < 0.0 || blob.intensity < 0.0) throw ContractError("invalid blob geometry");
    check_inside(b, blob.center, blob.radius, "blob");
  }
  for (const auto& t : p.tubes) {
    if (t.radius < 0.0 || t.intensity < 0.0 || t.waypoints.empty())
      throw ContractError("invalid tube geometry");
    for (const auto& w : t.waypoints) check_inside(b, w, t.radius, "tube");
  }

  Volume v(p.dims);
  auto put = [&](std::size_t x, std::size_t y, std::size_t z, double value) {
    float& dst = v(x, y, z);
    dst = std::max(dst, static_cast<float>(value));
  };
  const Dims& d = p.dims;
  for (const auto& blob : p.blobs) {
    if (blob.radius == 0.0) {
      put(static_cast<std::size_t>(std::lround(blob.center.x)),
          static_cast<std::size_t>(std::lround(blob.center.y)),
          static_cast<std::size_t>(std::lround(blob.center.z)), blob.intensity);
      continue;
    }
    const bool hollow = p.kind == PhantomKind::shells && blob.thickness > 0.0;
    const double inner = blob.radius - blob.thickness;
    for (std::size_t z = 0; z < d.nz; ++z)
      for (std::size_t y = 0; y < d.ny; ++y)
        for (std::size_t x = 0; x < d.nx; ++x) {
          const double dx = static_cast<double>(x) - blob.center.x;
          const double dy = static_cast<double>(y) - blob.center.y;
          const double dz = static_cast<double>(z) - blob.center.z;
          const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
          double c = coverage(blob.radius, dist);
          if (hollow && inner > 0.0) c -= coverage(inner, dist);
          if (c > 0.0) put(x, y, z, blob.intensity * c);
        }
  }
  for (const auto& t : p.tubes) {
    for (std::size_t z = 0; z < d.nz; ++z)
      for (std::size_t y = 0; y < d.ny; ++y)
        for (std::size_t x = 0; x < d.nx; ++x) {
          const Vec3 q{static_cast<double>(x), static_cast<double>(y), static_cast<double>(z)};
          double dist = 1e300;
          if (t.waypoints.size() == 1) dist = segment_distance(q, t.waypoints[0], t.waypoints[0]);
          for (std::size_t k = 1; k < t.waypoints.size(); ++k)
            dist = std::min(dist, segment_distance(q, t.waypoints[k - 1], t.waypoints[k]));
          const double c = coverage(t.radius, dist);
          if (c > 0.0) put(x, y, z, t.intensity * c);
        }
  }
  return v;
}

std::vector<double> AcquisitionSpec::default_angles() {
  std::vector<double> a;
  for (int i = 0; i < 12; ++i) a.push_back(30.0 * i);
  return a;
}

ViewStack forward_view(const Volume& truth, double angle_deg, const AcquisitionSpec& spec) {
  const Dims& d = truth.dims();
  for (int a = 0; a < 3; ++a)
    if (std::abs(spec.shift[a]) > static_cast<double>(d[a]) / 8.0)
      throw ContractError("acquisition shift exceeds dims/8");
  if (spec.noise < 0.0) throw ContractError("noise sigma must be non-negative");

  const double angle = wrap_degrees(angle_deg);
  Volume v = angle == 0.0 ? truth : rotate_about_vertical(truth, angle);
  if (spec.psf) {
    const Volume h = rasterize_psf(*spec.psf, d);
    const Index3 c{static_cast<std::ptrdiff_t>(d.nx / 2), static_cast<std::ptrdiff_t>(d.ny / 2),
                   static_cast<std::ptrdiff_t>(d.nz / 2)};
    v = fft_convolve(v, shift_circular(h, {-c.x, -c.y, -c.z}), PadPolicy::circular());
  }
  if (spec.shift != Vec3{}) v = fourier_shift(v, spec.shift);
  if (spec.noise > 0.0) {
    const double sigma = spec.noise * static_cast<double>(v.max());
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    for (auto& x : v.data()) x = static_cast<float>(std::max(0.0, x + gauss(rng)));
  }
  v.set_voxel_size(truth.voxel_size());
  return {std::move(v), angle, false};
}

std::vector<SimulatedView> simulate_views(const Volume& truth, const AcquisitionSpec& spec) {
  if (spec.angles.empty()) throw ContractError("acquisition needs at least one angle");
  for (int a = 0; a < 3; ++a)
    if (spec.shift_max < 0.0 || spec.shift_max > static_cast<double>(truth.dims()[a]) / 8.0)
      throw ContractError("shift_max must lie in [0, dims/8]");
  std::vector<SimulatedView> out(spec.angles.size());
  parallel_for(spec.angles.size(), [&](std::size_t i) {
    AcquisitionSpec per = spec;
    per.seed = view_seed(spec.seed, i);
    std::mt19937_64 rng(per.seed);
    std::uniform_real_distribution<double> u(-spec.shift_max, spec.shift_max);
    per.shift = spec.shift_max > 0.0 ? Vec3{u(rng), u(rng), u(rng)} : Vec3{};
    per.seed = rng();
    out[i] = {forward_view(truth, spec.angles[i], per), per.shift, view_seed(spec.seed, i)};
  });
  return out;
}

nlohmann::json make_dataset(const Volume& truth, const AcquisitionSpec& spec, const fs::path& outdir,
                            const nlohmann::json& phantom_info) {
  const auto views = simulate_views(truth, spec);
  fs::create_directories(outdir / "views");
  save_volume(truth, outdir / "truth.raw");

  nlohmann::json manifest;
  manifest["dims"] = {truth.dims().nx, truth.dims().ny, truth.dims().nz};
  manifest["voxel_size_um"] = {truth.voxel_size().x, truth.voxel_size().y, truth.voxel_size().z};
  manifest["truth"] = "truth.raw";
  manifest["phantom"] = phantom_info;
  nlohmann::json acq;
  acq["angles_deg"] = spec.angles;
  acq["psf_sigma"] = spec.psf ? nlohmann::json{spec.psf->sigma.x, spec.psf->sigma.y, spec.psf->sigma.z}
                              : nlohmann::json(nullptr);
  acq["shift_max"] = spec.shift_max;
  acq["noise"] = spec.noise;
  acq["seed"] = spec.seed;
  manifest["acquisition"] = acq;
  manifest["views"] = nlohmann::json::array();
  for (std::size_t i = 0; i < views.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "view_%03zu.raw", i);
    const fs::path rel = fs::path("views") / name;
    const auto& sv = views[i];
    nlohmann::json shift = {sv.shift.x, sv.shift.y, sv.shift.z};
    save_volume(sv.view.volume, outdir / rel, {{"angle_deg", sv.view.angle_deg}, {"shift", shift}});
    manifest["views"].push_back(
        {{"file", rel.generic_string()}, {"angle_deg", sv.view.angle_deg}, {"shift", shift},
         {"seed", sv.seed}});
  }
  std::ofstream out(outdir / "manifest.json", std::ios::trunc);
  if (!out) throw IoError("cannot write manifest in " + outdir.string());
  out << manifest.dump(2) << '\n';
  return manifest;
}

}  // namespace acorr
