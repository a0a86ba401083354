#pragma once

#include <cstdint>
#include <vector>

#include "attnedit/attention.hpp"
#include "attnedit/directions.hpp"

namespace attnedit {

/// Timestep-gated constant-strength edit. The edit is active for
/// t_low_frac·T < t < t_high_frac·T (both strict).
struct InjectionSchedule {
  std::uint32_t total_steps = 1000;
  double t_low_frac = 0.5;
  double t_high_frac = 0.8;
  double alpha = 0.0;

  /// Throws Domain unless T > 0, 0 <= t_low < t_high <= 1 and alpha is finite.
  void validate() const;
  bool active(std::uint32_t t) const;
};

struct SweepSpec {
  double alpha_min = -0.4;
  double alpha_max = 0.4;
  std::size_t n_points = 5;

  void validate() const;
  /// Evenly spaced, endpoints included. Points symmetric about the centre of
  /// the range are exact negatives of each other around that centre.
  std::vector<double> alphas() const;
};

/// Adds sched.alpha · dir.vector to every token row when z.timestep is inside
/// the window. Otherwise (or for alpha = 0) the result is a bitwise copy.
LatentTokens apply_edit(const LatentTokens& z, const EditDirection& dir,
                        const InjectionSchedule& sched);

struct SweepPoint {
  double alpha;
  LatentTokens tokens;
};

/// One edit per sweep alpha, each computed from the base latents; sched.alpha
/// is ignored.
std::vector<SweepPoint> sweep_edits(const LatentTokens& z, const EditDirection& dir,
                                    const InjectionSchedule& sched, const SweepSpec& sweep);

}  // namespace attnedit
