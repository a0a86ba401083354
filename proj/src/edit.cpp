#include "attnedit/edit.hpp"

#include <cmath>

#include "attnedit/error.hpp"

namespace attnedit {

void InjectionSchedule::validate() const {
  if (total_steps == 0) throw Error(ErrorKind::Domain, "total_steps must be positive");
  if (!(0.0 <= t_low_frac && t_low_frac < t_high_frac && t_high_frac <= 1.0)) {
    throw Error(ErrorKind::Domain, "timestep window must satisfy 0 <= t_low < t_high <= 1, got (" +
                                       std::to_string(t_low_frac) + ", " +
                                       std::to_string(t_high_frac) + ")");
  }
  if (!std::isfinite(alpha)) throw Error(ErrorKind::Domain, "alpha must be finite");
}

bool InjectionSchedule::active(std::uint32_t t) const {
  // Compare t/T with the fractions so that e.g. t = 800, T = 1000 sits exactly
  // on the 0.8 boundary.
  const double frac = static_cast<double>(t) / static_cast<double>(total_steps);
  return t_low_frac < frac && frac < t_high_frac;
}

void SweepSpec::validate() const {
  if (!std::isfinite(alpha_min) || !std::isfinite(alpha_max) || !(alpha_min < alpha_max)) {
    throw Error(ErrorKind::Domain, "sweep requires finite alpha_min < alpha_max");
  }
  if (n_points < 2) throw Error(ErrorKind::Domain, "sweep requires at least 2 points");
}

std::vector<double> SweepSpec::alphas() const {
  validate();
  const double centre = 0.5 * (alpha_min + alpha_max);
  const double half = 0.5 * (alpha_max - alpha_min);
  const double steps = static_cast<double>(n_points - 1);
  std::vector<double> out(n_points);
  for (std::size_t k = 0; k < n_points; ++k) {
    const double u = (2.0 * static_cast<double>(k) - steps) / steps;  // in [-1, 1]
    out[k] = centre + half * u;
  }
  out.front() = alpha_min;
  out.back() = alpha_max;
  return out;
}

LatentTokens apply_edit(const LatentTokens& z, const EditDirection& dir,
                        const InjectionSchedule& sched) {
  sched.validate();
  if (!z.timestep) throw Error(ErrorKind::Domain, "apply_edit: latent tokens carry no timestep");
  if (dir.vector.size() != z.d()) {
    throw Error(ErrorKind::Dimension, "apply_edit: direction of length " +
                                          std::to_string(dir.vector.size()) +
                                          " for tokens " + z.z.shape());
  }
  if (sched.alpha == 0.0 || !sched.active(*z.timestep)) return z;

  LatentTokens out = z;
  for (std::size_t i = 0; i < out.n_tokens(); ++i) {
    auto row = out.z.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += sched.alpha * dir.vector[j];
  }
  return out;
}

std::vector<SweepPoint> sweep_edits(const LatentTokens& z, const EditDirection& dir,
                                    const InjectionSchedule& sched, const SweepSpec& sweep) {
  std::vector<SweepPoint> out;
  for (double a : sweep.alphas()) {
    InjectionSchedule point = sched;
    point.alpha = a;
    out.push_back({a, apply_edit(z, dir, point)});
  }
  return out;
}

}  // namespace attnedit
