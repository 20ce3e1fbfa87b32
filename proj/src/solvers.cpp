#include "acorr/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "acorr/error.hpp"

namespace acorr {

std::string to_string(Method m) { return m == Method::ss ? "ss" : "au"; }

Method parse_method(const std::string& s) {
  if (s == "ss") return Method::ss;
  if (s == "au") return Method::au;
  throw ContractError("unknown method '" + s + "' (expected ss|au)");
}

void SolverOptions::validate() const {
  if (!(epsilon > 0.0 && epsilon <= 1e-6))
    throw ContractError("solver epsilon must lie in (0, 1e-6]");
}

SolverState SolverState::from(const Volume& init) {
  SolverState s;
  s.dims = init.dims();
  s.voxel_size = init.voxel_size();
  s.estimate.assign(init.data().begin(), init.data().end());
  return s;
}

Volume SolverState::volume() const {
  std::vector<float> data(estimate.size());
  std::transform(estimate.begin(), estimate.end(), data.begin(),
                 [](double v) { return static_cast<float>(v); });
  return Volume(dims, std::move(data), voxel_size);
}

double SolverState::flux() const {
  double s = 0.0;
  for (double v : estimate) s += v;
  return s;
}

namespace {

double idiv_term(double m, double p) {
  if (m <= 0.0) return p;
  if (p <= 0.0) return std::numeric_limits<double>::infinity();
  return m * std::log(m / p) - m + p;
}

/// Precomputed per-problem data for repeated steps on one grid.
class Iteration {
 public:
  Iteration(const AutocorrVolume& chi, Dims object_dims, const AutocorrVolume* anchor,
            const SolverOptions& opts)
      : grid_(chi.volume.dims()), fft_(grid_), opts_(opts), object_dims_(object_dims) {
    opts.validate();
    check_grid(object_dims);
    const AutocorrVolume native = chi.layout == Layout::fft_native ? chi : to_native(chi);
    chi_ = load_measured(native.volume, "measured auto-correlation");
    chi_sum_ = 0.0;
    for (double v : chi_) chi_sum_ += v;
    if (!(chi_sum_ > 0.0)) throw ContractError("measured auto-correlation has no positive mass");
    origin_ = {static_cast<std::ptrdiff_t>((grid_.nx - object_dims.nx) / 2),
               static_cast<std::ptrdiff_t>((grid_.ny - object_dims.ny) / 2),
               static_cast<std::ptrdiff_t>((grid_.nz - object_dims.nz) / 2)};

    if (anchor != nullptr) {
      if (anchor->volume.dims() != grid_)
        throw ContractError("anchor PSF auto-correlation must share the measured grid");
      const AutocorrVolume h = anchor->layout == Layout::fft_native ? *anchor : to_native(*anchor);
      const auto hbuf = load_measured(h.volume, "anchor PSF auto-correlation");
      double hsum = 0.0;
      for (double v : hbuf) hsum += v;
      if (!(hsum > 0.0)) throw ContractError("anchor PSF auto-correlation must have positive sum");
      anchor_sum_ = hsum;
      anchor_spec_ = fft_.make_spectrum();
      fft_.forward(hbuf, anchor_spec_);
    }
    obj_ = fft_.make_real();
    obj_spec_ = fft_.make_spectrum();
    work_spec_ = fft_.make_spectrum();
    work_ = fft_.make_real();
  }

  /// Advances `o` in place; returns the I-divergence of the incoming estimate.
  double step(std::vector<double>& o, Method method, std::size_t t) {
    const double idiv = model_and_ratio(o, method);
    // work_ now holds the ratio r; back-project it.
    fft_.forward(work_, work_spec_);
    double scale = 0.0;
    if (method == Method::ss) {
      // r * o + r (corr) o  ->  (R + conj R) O
      for (std::size_t i = 0; i < work_spec_.size(); ++i)
        work_spec_[i] = 2.0 * work_spec_[i].real() * obj_spec_[i];
      scale = 1.0 / (2.0 * std::sqrt(chi_sum_));
    } else {
      // r * flip(K), K = o (corr) H  ->  R conj(conj(O) Hs)
      for (std::size_t i = 0; i < work_spec_.size(); ++i)
        work_spec_[i] *= obj_spec_[i] * std::conj(anchor_spec_[i]);
      scale = 1.0 / std::sqrt(chi_sum_ * anchor_sum_);
    }
    fft_.inverse(work_spec_, work_);

    const Dims& d = object_dims_;
    bool finite = true;
    for (std::size_t z = 0; z < d.nz; ++z)
      for (std::size_t y = 0; y < d.ny; ++y) {
        const std::size_t row = grid_index(0, y, z);
        const std::size_t orow = d.nx * (y + d.ny * z);
        for (std::size_t x = 0; x < d.nx; ++x) {
          double& v = o[orow + x];
          v *= std::max(work_[row + x], 0.0) * scale;
          finite = finite && std::isfinite(v);
        }
      }
    if (!finite)
      throw NumericError("solver produced non-finite values at iteration " + std::to_string(t));
    return idiv;
  }

  /// I-divergence of `o` without updating it.
  double evaluate(const std::vector<double>& o, Method method) { return model_and_ratio(o, method); }

 private:
  void check_grid(Dims n) const {
    if (opts_.pad.mode == PadMode::circular) {
      if (grid_ != n)
        throw ContractError("circular pad policy needs the estimate and auto-correlation dims to match");
      return;
    }
    for (int a = 0; a < 3; ++a)
      if (grid_[a] < 2 * n[a] - 1)
        throw ContractError("linear pad policy needs an auto-correlation grid of at least 2n-1 per axis");
  }

  RealBuffer load_measured(const Volume& v, const char* what) const {
    RealBuffer buf(v.size());
    const double tol = 1e-6 * std::max(static_cast<double>(v.max()), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double x = v[i];
      if (x < -tol) throw ContractError(std::string(what) + " has negative samples");
      buf[i] = std::max(x, 0.0);
    }
    return buf;
  }

  std::size_t grid_index(std::size_t x, std::size_t y, std::size_t z) const {
    return static_cast<std::size_t>(origin_.x) + x +
           grid_.nx * (static_cast<std::size_t>(origin_.y) + y +
                       grid_.ny * (static_cast<std::size_t>(origin_.z) + z));
  }

  // Forward model for `o`, I-divergence against chi, and the floored ratio
  // chi / model left in work_. obj_spec_ keeps F{o}.
  double model_and_ratio(const std::vector<double>& o, Method method) {
    std::fill(obj_.begin(), obj_.end(), 0.0);
    const Dims& d = object_dims_;
    for (std::size_t z = 0; z < d.nz; ++z)
      for (std::size_t y = 0; y < d.ny; ++y) {
        const std::size_t row = grid_index(0, y, z);
        const std::size_t orow = d.nx * (y + d.ny * z);
        for (std::size_t x = 0; x < d.nx; ++x) obj_[row + x] = o[orow + x];
      }
    fft_.forward(obj_, obj_spec_);
    for (std::size_t i = 0; i < obj_spec_.size(); ++i) {
      const double power = std::norm(obj_spec_[i]);
      work_spec_[i] = method == Method::ss ? Complex(power, 0.0) : power * anchor_spec_[i];
    }
    fft_.inverse(work_spec_, work_);

    double peak = 0.0;
    for (double v : work_) peak = std::max(peak, v);
    const double floor = opts_.epsilon * peak;
    double idiv = 0.0;
    for (std::size_t i = 0; i < work_.size(); ++i) {
      const double p = std::max(work_[i], floor);
      idiv += idiv_term(chi_[i], p);
      work_[i] = p > 0.0 ? chi_[i] / p : 0.0;
    }
    return idiv;
  }

  Dims grid_;
  FftGrid fft_;
  SolverOptions opts_;
  Dims object_dims_;
  Index3 origin_{};
  RealBuffer chi_;
  double chi_sum_ = 0.0;
  SpectrumBuffer anchor_spec_;
  double anchor_sum_ = 1.0;
  RealBuffer obj_;
  SpectrumBuffer obj_spec_;
  SpectrumBuffer work_spec_;
  RealBuffer work_;
};

void check_init(const SolverState& s) {
  if (s.estimate.size() != s.dims.size()) throw ContractError("solver state has inconsistent dims");
  bool any = false;
  for (double v : s.estimate) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ContractError("solver estimate must be finite and non-negative");
    any = any || v > 0.0;
  }
  if (!any) throw ContractError("solver estimate is identically zero");
}

}  // namespace

double i_divergence(std::span<const float> measured, std::span<const float> model) {
  if (measured.size() != model.size()) throw ContractError("i_divergence: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) acc += idiv_term(measured[i], model[i]);
  return acc;
}

double i_divergence(const AutocorrVolume& measured, const AutocorrVolume& model) {
  if (measured.volume.dims() != model.volume.dims())
    throw ContractError("i_divergence: dims mismatch");
  const AutocorrVolume& m = measured;
  if (m.layout == model.layout) return i_divergence(m.volume.data(), model.volume.data());
  const AutocorrVolume aligned = model.layout == Layout::fft_native ? to_centered(model) : to_native(model);
  return i_divergence(m.volume.data(), aligned.volume.data());
}

SolverState ss_step(const SolverState& state, const AutocorrVolume& chi, const SolverOptions& opts) {
  check_init(state);
  Iteration it(chi, state.dims, nullptr, opts);
  SolverState next = state;
  const double idiv = it.step(next.estimate, Method::ss, state.t);
  next.trace.push_back({state.t, idiv, state.flux()});
  ++next.t;
  return next;
}

SolverState au_step(const SolverState& state, const AutocorrVolume& chi, const AutocorrVolume& H,
                    const SolverOptions& opts) {
  check_init(state);
  Iteration it(chi, state.dims, &H, opts);
  SolverState next = state;
  const double idiv = it.step(next.estimate, Method::au, state.t);
  next.trace.push_back({state.t, idiv, state.flux()});
  ++next.t;
  return next;
}

SolverState solve(const AutocorrVolume& chi, const Volume& init, Method method,
                  const std::optional<AutocorrVolume>& H, const SolverOptions& opts) {
  if (method == Method::au && !H) throw ContractError("AU solver needs the PSF auto-correlation");
  SolverState state = SolverState::from(init);
  check_init(state);
  if (opts.iterations == 0) return state;

  Iteration it(chi, state.dims, method == Method::au ? &*H : nullptr, opts);
  for (std::size_t k = 0; k < opts.iterations; ++k) {
    const double flux = opts.log_every ? state.flux() : 0.0;
    const double idiv = it.step(state.estimate, method, state.t);
    if (opts.log_every && state.t % opts.log_every == 0) state.trace.push_back({state.t, idiv, flux});
    ++state.t;
  }
  if (opts.log_every) state.trace.push_back({state.t, it.evaluate(state.estimate, method), state.flux()});
  return state;
}

}  // namespace acorr
