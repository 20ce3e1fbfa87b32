#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "acorr/spectral.hpp"
#include "acorr/volume.hpp"

namespace acorr {

enum class Method { ss, au };

std::string to_string(Method m);
Method parse_method(const std::string& s);

struct SolverOptions {
  std::size_t iterations = 1000;
  /// Denominator floor as a fraction of the denominator's maximum.
  double epsilon = 1e-12;
  /// Trace row every `log_every` iterations (0 disables the trace).
  std::size_t log_every = 1;
  /// Must describe how the measured auto-correlation was padded.
  PadPolicy pad = PadPolicy::linear();

  void validate() const;
};

struct TraceRow {
  std::size_t t = 0;
  double idiv = 0.0;
  double flux = 0.0;
};

/// Current object estimate o^t and its telemetry. The iterate is kept in
/// double precision; `volume()` rounds it to the float Volume type.
struct SolverState {
  Dims dims{};
  Vec3 voxel_size{1.0, 1.0, 1.0};
  std::vector<double> estimate;
  std::size_t t = 0;
  std::vector<TraceRow> trace;

  static SolverState from(const Volume& init);
  Volume volume() const;
  double flux() const;
};

/// Csiszar I-divergence  sum m ln(m/p) - m + p,  with 0 ln(0/p) = 0 and
/// +infinity wherever m > 0 meets p <= 0.
double i_divergence(const AutocorrVolume& measured, const AutocorrVolume& model);
double i_divergence(std::span<const float> measured, std::span<const float> model);

/// One Schulz-Snyder step towards chi = o * o (correlation):
///
///   o' = o / (2 sqrt(sum chi)) * [ r * o + r (corr) o ],   r = chi / max(o (corr) o, floor)
///
/// The two bracketed terms are the derivatives of the model with respect to
/// each of its two factors; for an even ratio r they coincide.
SolverState ss_step(const SolverState& state, const AutocorrVolume& chi, const SolverOptions& opts);

/// One Anchor-Update step towards chi = (o (corr) o) * H:
///
///   K = o (corr) H,   o' = o / sqrt(sum chi * sum H) * [ (chi / max(o * K, floor)) * flip(K) ]
SolverState au_step(const SolverState& state, const AutocorrVolume& chi, const AutocorrVolume& H,
                    const SolverOptions& opts);

/// Runs `opts.iterations` steps of the chosen method from `init`.
/// H is required for AU and ignored for SS.
SolverState solve(const AutocorrVolume& chi, const Volume& init, Method method,
                  const std::optional<AutocorrVolume>& H, const SolverOptions& opts);

}  // namespace acorr
