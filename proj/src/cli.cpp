#include "acorr/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "acorr/error.hpp"
#include "acorr/fusion.hpp"
#include "acorr/metrics.hpp"
#include "acorr/parallel.hpp"
#include "acorr/phantom.hpp"
#include "acorr/psf.hpp"
#include "acorr/solvers.hpp"

namespace acorr::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr const char* kExitCodes =
    "Exit codes:\n"
    "  0  success\n"
    "  1  internal error\n"
    "  2  usage error (unknown subcommand or flag, malformed value)\n"
    "  3  I/O error (missing or malformed input, unwritable output)\n"
    "  4  contract violation (inputs incompatible with the operation)\n"
    "  5  numerical failure (non-finite values)\n";

// ---------------------------------------------------------------------------
// Parsing helpers

std::vector<double> parse_numbers(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size() && item.find_first_not_of(" \t", used) != std::string::npos)
        throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CLI::ValidationError(what, "cannot parse '" + item + "' as a number");
    }
  }
  return out;
}

/// "0,30,60" or "start:step:stop" (inclusive).
std::vector<double> parse_angles(const std::string& text) {
  if (text.find(':') != std::string::npos) {
    std::string t = text;
    std::replace(t.begin(), t.end(), ':', ',');
    const auto r = parse_numbers(t, "--angles");
    if (r.size() != 3 || !(r[1] > 0.0))
      throw CLI::ValidationError("--angles", "range form is start:step:stop with step > 0");
    std::vector<double> out;
    for (double a = r[0]; a <= r[2] + 1e-9; a += r[1]) out.push_back(a);
    return out;
  }
  auto a = parse_numbers(text, "--angles");
  if (a.empty()) throw CLI::ValidationError("--angles", "empty angle list");
  return a;
}

Vec3 parse_vec3(const std::string& text, const char* what) {
  const auto v = parse_numbers(text, what);
  if (v.size() != 3) throw CLI::ValidationError(what, "expected three comma-separated values");
  return {v[0], v[1], v[2]};
}

Region parse_region(const std::string& text) {
  const auto v = parse_numbers(text, "--dark");
  if (v.size() != 6) throw CLI::ValidationError("--dark", "expected x0,y0,z0,dx,dy,dz");
  for (double x : v)
    if (x < 0.0 || x != std::floor(x))
      throw CLI::ValidationError("--dark", "region entries must be non-negative integers");
  return {{static_cast<std::ptrdiff_t>(v[0]), static_cast<std::ptrdiff_t>(v[1]),
           static_cast<std::ptrdiff_t>(v[2])},
          {static_cast<std::size_t>(v[3]), static_cast<std::size_t>(v[4]),
           static_cast<std::size_t>(v[5])}};
}

// ---------------------------------------------------------------------------
// Provenance

std::string fnv1a_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return "unreadable";
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

class Provenance {
 public:
  Provenance(std::string subcommand, json config)
      : start_(std::chrono::steady_clock::now()) {
    record_["tool"] = "acorr";
    record_["version"] = kVersion;
    record_["subcommand"] = std::move(subcommand);
    record_["config"] = std::move(config);
    record_["threads"] = thread_count();
    record_["inputs"] = json::object();
  }

  void input(const fs::path& p) {
    record_["inputs"][p.generic_string()] = {{"fnv1a64", fnv1a_file(p)}};
    const auto side = sidecar_path(p);
    if (side != p && fs::exists(side))
      record_["inputs"][side.generic_string()] = {{"fnv1a64", fnv1a_file(side)}};
  }

  void output(const fs::path& p) { record_["outputs"].push_back(p.generic_string()); }

  void write(const fs::path& file) {
    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start_;
    record_["wall_time_s"] = wall.count();
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::trunc);
    if (!out) throw IoError("cannot write " + file.string());
    out << record_.dump(2) << '\n';
  }

 private:
  std::chrono::steady_clock::time_point start_;
  json record_;
};

void write_json(const fs::path& file, const json& j) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  out << j.dump(2) << '\n';
}

fs::path with_suffix(const fs::path& vol, const std::string& suffix) {
  return vol.parent_path() / (vol.stem().string() + suffix);
}

void export_mips(const Volume& v, const fs::path& vol_path, Provenance& prov) {
  for (Axis a : {Axis::x, Axis::y, Axis::z}) {
    const auto p = with_suffix(vol_path, "_mip_" + to_string(a) + ".pgm");
    save_pgm16(mip(v, a), p, {{"axis", to_string(a)}, {"source", vol_path.filename().string()}});
    prov.output(p);
  }
}

// ---------------------------------------------------------------------------
// Views on disk

struct LoadedViews {
  std::vector<ViewStack> views;
  std::vector<fs::path> files;
};

LoadedViews load_views(const fs::path& dir, const std::string& angles_text) {
  if (!fs::is_directory(dir)) throw IoError("views directory not found: " + dir.string());
  LoadedViews out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".raw") out.files.push_back(e.path());
  std::sort(out.files.begin(), out.files.end());
  if (out.files.empty()) throw IoError("no .raw views in " + dir.string());

  std::vector<double> angles;
  if (!angles_text.empty()) {
    angles = parse_angles(angles_text);
    if (angles.size() != out.files.size())
      throw ContractError("--angles lists " + std::to_string(angles.size()) + " angles for " +
                          std::to_string(out.files.size()) + " views");
  }
  for (std::size_t i = 0; i < out.files.size(); ++i) {
    ViewStack v;
    v.volume = load_volume(out.files[i]);
    if (!angles.empty()) {
      v.angle_deg = angles[i];
    } else {
      const auto meta = load_sidecar(out.files[i]);
      if (!meta.contains("angle_deg"))
        throw ContractError("no --angles given and " + out.files[i].string() +
                            " has no angle_deg in its sidecar");
      v.angle_deg = meta["angle_deg"].get<double>();
    }
    out.views.push_back(std::move(v));
  }
  return out;
}

json displacement_table(const LoadedViews& lv, const DirectFusion& df) {
  json table = json::array();
  for (std::size_t i = 0; i < lv.views.size(); ++i) {
    const auto& m = df.displacements[i];
    table.push_back({{"file", lv.files[i].filename().string()},
                     {"angle_deg", lv.views[i].angle_deg},
                     {"m", {m.x, m.y, m.z}},
                     {"reference", i == df.reference}});
  }
  return table;
}

void write_trace(const fs::path& p, const std::vector<TraceRow>& trace) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << "t,idiv,flux\n";
  char line[128];
  for (const auto& r : trace) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g\n", r.t, r.idiv, r.flux);
    out << line;
  }
}

void write_profile_csv(const fs::path& p, const ProfileReport& r) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << "position_um,intensity\n";
  char line[96];
  for (const auto& s : r.samples) {
    std::snprintf(line, sizeof line, "%.9g,%.9g\n", s.position_um, s.intensity);
    out << line;
  }
}

// ---------------------------------------------------------------------------
// Subcommands

struct SimulateArgs {
  std::string phantom = "spheres";
  std::size_t dims = 64;
  std::size_t count = 0;
  std::string angles = "0:30:330";
  std::string sigma = "1,1,3";
  double shift_max = 2.0;
  double noise = 0.0;
  std::uint64_t seed = 1;
  std::string out;
};

int do_simulate(const SimulateArgs& a) {
  json config = {{"phantom", a.phantom}, {"dims", a.dims},         {"count", a.count},
                 {"angles", a.angles},   {"sigma", a.sigma},       {"shift_max", a.shift_max},
                 {"noise", a.noise},     {"seed", a.seed},         {"out", a.out}};
  Provenance prov("simulate", config);
  const Phantom ph = random_phantom(parse_phantom_kind(a.phantom), cube(a.dims), a.seed, a.count);
  const Volume truth = make_phantom(ph);
  AcquisitionSpec spec;
  spec.angles = parse_angles(a.angles);
  spec.psf = PsfModel{parse_vec3(a.sigma, "--sigma")};
  spec.shift_max = a.shift_max;
  spec.noise = a.noise;
  spec.seed = a.seed;
  const fs::path out(a.out);
  json info = {{"kind", a.phantom}, {"seed", a.seed}, {"count", a.count}};
  make_dataset(truth, spec, out, info);
  prov.output(out / "manifest.json");
  prov.write(out / "run.json");
  return kOk;
}

struct FuseArgs {
  std::string views;
  std::string angles;
  std::string dark;
  std::string pad = "linear";
  bool baseline = false;
  bool mips = false;
  std::string out;
};

std::vector<ViewStack> preprocess_all(const LoadedViews& lv, const std::string& dark_text) {
  std::optional<Region> dark;
  if (!dark_text.empty()) dark = parse_region(dark_text);
  std::vector<ViewStack> out(lv.views.size());
  parallel_for(lv.views.size(), [&](std::size_t i) { out[i] = preprocess_view(lv.views[i], dark); });
  return out;
}

std::size_t reference_index(const std::vector<ViewStack>& views) {
  for (std::size_t i = 0; i < views.size(); ++i)
    if (views[i].angle_deg == 0.0) return i;
  return 0;
}

int do_fuse(const FuseArgs& a, bool baseline_only) {
  json config = {{"views", a.views}, {"angles", a.angles},     {"dark", a.dark}, {"pad", a.pad},
                 {"baseline", a.baseline || baseline_only}, {"out", a.out}};
  Provenance prov(baseline_only ? "baseline" : "fuse", config);
  const auto lv = load_views(a.views, a.angles);
  for (const auto& f : lv.files) prov.input(f);
  const auto views = preprocess_all(lv, a.dark);
  const fs::path out(a.out);
  fs::create_directories(out);

  json record;
  std::vector<double> angles;
  for (const auto& v : views) angles.push_back(v.angle_deg);
  record["angles_deg"] = angles;
  record["n_views"] = views.size();
  record["dark"] = a.dark.empty() ? json(nullptr) : json(a.dark);

  if (!baseline_only) {
    const PadPolicy policy{parse_pad_mode(a.pad)};
    const AutocorrVolume chi = fuse_autocorrelations(views, policy);
    save_autocorr(chi, out / "chi_bar.raw", {{"angles_deg", angles}});
    prov.output(out / "chi_bar.raw");
    const std::size_t ref = reference_index(views);
    save_volume(views[ref].volume, out / "init.raw", {{"angle_deg", views[ref].angle_deg}});
    prov.output(out / "init.raw");
    record["pad"] = a.pad;
  }
  if (a.baseline || baseline_only) {
    const DirectFusion df = fuse_direct(views);
    save_volume(df.mean, out / "o_bar.raw");
    prov.output(out / "o_bar.raw");
    record["displacements"] = displacement_table(lv, df);
    if (a.mips) export_mips(df.mean, out / "o_bar.raw", prov);
  }
  write_json(out / (baseline_only ? "baseline.json" : "fuse.json"), record);
  prov.write(out / "run.json");
  return kOk;
}

struct ReconstructArgs {
  std::string chi;
  std::string init = "auto";
  bool random_init = false;
  std::uint64_t seed = 1;
  std::string method = "ss";
  std::string psf_acorr;
  std::size_t iters = 1000;
  std::size_t log_every = 10;
  double epsilon = 1e-12;
  bool mips = false;
  std::string out;
};

int do_reconstruct(const ReconstructArgs& a) {
  json config = {{"chi", a.chi},         {"init", a.init},       {"random_init", a.random_init},
                 {"seed", a.seed},       {"method", a.method},   {"psf_acorr", a.psf_acorr},
                 {"iters", a.iters},     {"log_every", a.log_every}, {"epsilon", a.epsilon},
                 {"out", a.out}};
  Provenance prov("reconstruct", config);
  const fs::path chi_path(a.chi);
  const AutocorrVolume chi = load_autocorr(chi_path);
  prov.input(chi_path);
  const Method method = parse_method(a.method);

  Volume init;
  if (a.random_init) {
    const Dims n = chi.source_dims.size() ? chi.source_dims : chi.volume.dims();
    std::mt19937_64 rng(a.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    init = Volume(n, chi.volume.voxel_size());
    for (auto& x : init.data()) x = static_cast<float>(u(rng));
  } else {
    fs::path init_path(a.init);
    if (a.init == "auto") {
      const auto dir = chi_path.parent_path();
      init_path = fs::exists(dir / "o_bar.raw") ? dir / "o_bar.raw" : dir / "init.raw";
    }
    init = load_volume(init_path);
    prov.input(init_path);
    // Negative samples from background subtraction cannot seed a multiplicative update.
    for (auto& x : init.data()) x = std::max(x, 0.0f);
  }

  std::optional<AutocorrVolume> H;
  if (method == Method::au) {
    if (a.psf_acorr.empty()) throw ContractError("--method au needs --psf-acorr");
    H = load_autocorr(a.psf_acorr);
    prov.input(a.psf_acorr);
  }
  SolverOptions opts;
  opts.iterations = a.iters;
  opts.log_every = a.log_every;
  opts.epsilon = a.epsilon;
  opts.pad = PadPolicy{chi.pad};
  const SolverState state = solve(chi, init, method, H, opts);
  const Volume recon = state.volume();

  const fs::path out(a.out);
  save_volume(recon, out, {{"method", a.method}, {"iterations", state.t}});
  prov.output(out);
  const auto trace_path = with_suffix(out, "_trace.csv");
  write_trace(trace_path, state.trace);
  prov.output(trace_path);
  if (a.mips) export_mips(recon, out, prov);
  prov.write(with_suffix(out, ".run.json"));
  return kOk;
}

struct MetricsArgs {
  std::string recon;
  std::string truth;
  bool no_flip = false;
  std::string profile;
  std::size_t samples = 101;
  std::string out;
};

int do_metrics(const MetricsArgs& a) {
  json config = {{"recon", a.recon},     {"truth", a.truth},     {"no_flip", a.no_flip},
                 {"profile", a.profile}, {"samples", a.samples}, {"out", a.out}};
  Provenance prov("metrics", config);
  const Volume recon = load_volume(a.recon);
  const Volume truth = load_volume(a.truth);
  prov.input(a.recon);
  prov.input(a.truth);
  if (recon.dims() != truth.dims()) throw ContractError("metrics: recon and truth dims differ");

  const Volume aligned = align_to(truth, recon, !a.no_flip);
  json result;
  result["ncc"] = ncc_after_alignment(truth, recon, !a.no_flip);
  result["mse"] = mse(truth, aligned);
  const fs::path out(a.out);
  fs::create_directories(out);
  if (!a.profile.empty()) {
    const auto p = parse_numbers(a.profile, "--profile");
    if (p.size() != 6) throw CLI::ValidationError("--profile", "expected x0,y0,z0,x1,y1,z1 in um");
    const Vec3 p0{p[0], p[1], p[2]}, p1{p[3], p[4], p[5]};
    for (const auto& [name, vol] : {std::pair<const char*, const Volume*>{"recon", &aligned},
                                    std::pair<const char*, const Volume*>{"truth", &truth}}) {
      const auto rep = line_profile(*vol, p0, p1, a.samples);
      const auto csv = out / (std::string("profile_") + name + ".csv");
      write_profile_csv(csv, rep);
      prov.output(csv);
      json pr;
      pr["fwhm_um"] = rep.fwhm_um ? json(*rep.fwhm_um) : json(nullptr);
      pr["dip_contrast"] = rep.dip_contrast ? json(*rep.dip_contrast) : json(nullptr);
      pr["peaks"] = rep.peaks;
      result["profile_" + std::string(name)] = pr;
    }
  }
  write_json(out / "metrics.json", result);
  prov.output(out / "metrics.json");
  prov.write(out / "run.json");
  return kOk;
}

struct PsfArgs {
  std::string sigma = "1,1,3";
  std::size_t dims = 32;
  std::string angles = "0:30:330";
  std::string pad = "linear";
  std::size_t iters = 5000;
  std::string out;
};

int do_psf(const PsfArgs& a) {
  json config = {{"sigma", a.sigma}, {"dims", a.dims},   {"angles", a.angles},
                 {"pad", a.pad},     {"iters", a.iters}, {"out", a.out}};
  Provenance prov("psf", config);
  const PsfModel m{parse_vec3(a.sigma, "--sigma")};
  const auto angles = parse_angles(a.angles);
  const Dims d = cube(a.dims);
  const PadPolicy policy{parse_pad_mode(a.pad)};
  const Volume hbar = average_direct_psf(m, angles, d);
  const AutocorrVolume Hbar = average_autocorr_psf(m, angles, d, policy);
  SolverOptions opts;
  opts.iterations = a.iters;
  opts.log_every = 0;
  opts.pad = policy;
  const Volume heff = effective_psf(Hbar, m, opts);

  const fs::path out(a.out);
  save_volume(hbar, out / "h_bar.raw");
  save_autocorr(Hbar, out / "H_bar.raw");
  save_volume(heff, out / "h_eff.raw");
  for (const char* f : {"h_bar.raw", "H_bar.raw", "h_eff.raw"}) prov.output(out / f);

  // Profiles along each axis through the PSF center / zero shift.
  const AutocorrVolume Hc = to_centered(Hbar);
  std::ofstream csv(out / "psf_profiles.csv", std::ios::trunc);
  if (!csv) throw IoError("cannot write psf_profiles.csv");
  csv << "axis,offset,h_bar,h_eff,H_bar\n";
  const auto half = static_cast<std::ptrdiff_t>(a.dims / 2);
  for (int axis = 0; axis < 3; ++axis) {
    for (std::ptrdiff_t k = -half; k < static_cast<std::ptrdiff_t>(a.dims) - half; ++k) {
      auto at = [&](const Volume& v, Index3 c) {
        Index3 p = c;
        if (axis == 0) p.x += k;
        if (axis == 1) p.y += k;
        if (axis == 2) p.z += k;
        return v(static_cast<std::size_t>(p.x), static_cast<std::size_t>(p.y),
                 static_cast<std::size_t>(p.z));
      };
      const Index3 c{half, half, half};
      char line[160];
      std::snprintf(line, sizeof line, "%c,%td,%.9g,%.9g,%.9g\n", "xyz"[axis], k, at(hbar, c),
                    at(heff, c), at(Hc.volume, Hc.zero_shift));
      csv << line;
    }
  }
  prov.output(out / "psf_profiles.csv");
  prov.write(out / "run.json");
  return kOk;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Multi-view fusion and reconstruction in auto-correlation space", "acorr"};
  app.footer(kExitCodes);
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  std::size_t threads = thread_count();
  app.add_option("--threads", threads, "Worker thread cap (default: $ACORR_THREADS or 1)")
      ->check(CLI::PositiveNumber);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Generate a phantom and a simulated multi-view dataset");
  s->add_option("--phantom", sim.phantom, "beads|spheres|shells|tubes")
      ->check(CLI::IsMember({"beads", "spheres", "shells", "tubes"}));
  s->add_option("--dims", sim.dims, "Cubic grid size")->check(CLI::PositiveNumber);
  s->add_option("--count", sim.count, "Number of shapes (0 = default for the kind)");
  s->add_option("--angles", sim.angles, "Comma list or start:step:stop, degrees");
  s->add_option("--sigma", sim.sigma, "PSF sigma sx,sy,sz in voxels");
  s->add_option("--shift-max", sim.shift_max, "Per-view random shift bound, voxels");
  s->add_option("--noise", sim.noise, "Gaussian noise sigma relative to view peak");
  s->add_option("--seed", sim.seed, "Master seed");
  s->add_option("--out", sim.out, "Output directory")->required();

  FuseArgs fuse;
  auto* f = app.add_subcommand("fuse", "Average view auto-correlations (no registration)");
  f->add_option("--views", fuse.views, "Directory of view volumes")->required();
  f->add_option("--angles", fuse.angles, "View angles (default: sidecar angle_deg)");
  f->add_option("--dark", fuse.dark, "Dark region x0,y0,z0,dx,dy,dz");
  f->add_option("--pad", fuse.pad, "linear|circular")->check(CLI::IsMember({"linear", "circular"}));
  f->add_flag("--baseline", fuse.baseline, "Also emit the registered direct-space mean");
  f->add_flag("--mip", fuse.mips, "Export PGM MIPs of the baseline");
  f->add_option("--out", fuse.out, "Output directory")->required();

  FuseArgs base;
  auto* b = app.add_subcommand("baseline", "Register views by cross-correlation peak and average");
  b->add_option("--views", base.views, "Directory of view volumes")->required();
  b->add_option("--angles", base.angles, "View angles (default: sidecar angle_deg)");
  b->add_option("--dark", base.dark, "Dark region x0,y0,z0,dx,dy,dz");
  b->add_flag("--mip", base.mips, "Export PGM MIPs");
  b->add_option("--out", base.out, "Output directory")->required();

  ReconstructArgs rec;
  auto* r = app.add_subcommand("reconstruct", "Invert a fused auto-correlation (SS or AU)");
  r->add_option("--chi", rec.chi, "Fused auto-correlation volume")->required();
  r->add_option("--init", rec.init, "Initial estimate volume, or 'auto'");
  r->add_flag("--random-init", rec.random_init, "Start from uniform noise (often fails to converge)");
  r->add_option("--seed", rec.seed, "Seed for --random-init");
  r->add_option("--method", rec.method, "ss|au")->check(CLI::IsMember({"ss", "au"}));
  r->add_option("--psf-acorr", rec.psf_acorr, "PSF auto-correlation volume (AU)");
  r->add_option("--iters", rec.iters, "Iteration count");
  r->add_option("--log-every", rec.log_every, "Trace row interval (0 = none)");
  r->add_option("--epsilon", rec.epsilon, "Denominator floor relative to its maximum");
  r->add_flag("--mip", rec.mips, "Export PGM MIPs of the result");
  r->add_option("--out", rec.out, "Output volume path")->required();

  MetricsArgs met;
  auto* m = app.add_subcommand("metrics", "Compare a reconstruction with ground truth");
  m->add_option("--recon", met.recon, "Reconstruction volume")->required();
  m->add_option("--truth", met.truth, "Ground-truth volume")->required();
  m->add_flag("--no-flip", met.no_flip, "Do not consider the point reflection");
  m->add_option("--profile", met.profile, "Line x0,y0,z0,x1,y1,z1 in um");
  m->add_option("--samples", met.samples, "Profile sample count")->check(CLI::Range(2, 1000000));
  m->add_option("--out", met.out, "Output directory")->required();

  PsfArgs psf;
  auto* p = app.add_subcommand("psf", "Direct, auto-correlation and effective PSFs");
  p->add_option("--sigma", psf.sigma, "PSF sigma sx,sy,sz in voxels");
  p->add_option("--dims", psf.dims, "Cubic grid size")->check(CLI::PositiveNumber);
  p->add_option("--angles", psf.angles, "Comma list or start:step:stop, degrees");
  p->add_option("--pad", psf.pad, "linear|circular")->check(CLI::IsMember({"linear", "circular"}));
  p->add_option("--iters", psf.iters, "SS iterations for the effective PSF");
  p->add_option("--out", psf.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const auto extra = app.remaining();
    if (app.get_subcommands().empty() && !extra.empty() && extra.front().rfind('-', 0) != 0)
      std::cerr << "acorr: usage error: unknown subcommand '" << extra.front() << "'\n";
    else
      std::cerr << "acorr: usage error: " << one_line(e.what()) << '\n';
    return kUsage;
  }

  try {
    set_thread_count(threads);
    if (s->parsed()) return do_simulate(sim);
    if (f->parsed()) return do_fuse(fuse, false);
    if (b->parsed()) return do_fuse(base, true);
    if (r->parsed()) return do_reconstruct(rec);
    if (m->parsed()) return do_metrics(met);
    if (p->parsed()) return do_psf(psf);
  } catch (const CLI::ParseError& e) {
    std::cerr << "acorr: usage error: " << one_line(e.what()) << '\n';
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "acorr: I/O error: " << one_line(e.what()) << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "acorr: I/O error: " << one_line(e.what()) << '\n';
    return kIo;
  } catch (const ContractError& e) {
    std::cerr << "acorr: invalid input: " << one_line(e.what()) << '\n';
    return kContract;
  } catch (const NumericError& e) {
    std::cerr << "acorr: numerical failure: " << one_line(e.what()) << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "acorr: internal error: " << one_line(e.what()) << '\n';
    return kInternal;
  }
  return kUsage;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("acorr");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace acorr::cli
