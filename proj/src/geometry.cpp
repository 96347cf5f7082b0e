#include "spindyn/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "spindyn/errors.hpp"
#include "spindyn/rng.hpp"

namespace spindyn {

double coupling_strength(double r_nm, double theta_rad, const Constants& c) {
  if (!(r_nm > 0.0)) {
    throw std::domain_error("coupling_strength: r must be positive, got " +
                            std::to_string(r_nm));
  }
  const double ct = std::cos(theta_rad);
  return c.j0 * (1.0 - 3.0 * ct * ct) / (r_nm * r_nm * r_nm);
}

SpinEnsemble sample_ensemble(double density, int count, double min_radius,
                             std::uint64_t seed, const SampleOptions& opts) {
  if (!(density > 0.0)) throw ConfigError("sample_ensemble: density must be positive");
  if (count < 1) throw ConfigError("sample_ensemble: count must be >= 1");
  if (min_radius < 0.0) throw ConfigError("sample_ensemble: min_radius must be >= 0");

  // annulus area fixed by count/density so the point process has the
  // requested intensity
  const double r0sq = min_radius * min_radius;
  const double rmax = std::sqrt(r0sq + static_cast<double>(count) / (3.14159265358979323846 * density));
  if (rmax > opts.max_radius) {
    throw ConfigError("sample_ensemble: sampling radius " + std::to_string(rmax) +
                      " nm exceeds configured maximum " + std::to_string(opts.max_radius) + " nm");
  }

  Rng rng(seed);
  SpinEnsemble e;
  e.density = density;
  e.min_radius = min_radius;
  e.seed = seed;
  e.positions.reserve(count);
  for (int k = 0; k < count; ++k) {
    const double r = std::sqrt(r0sq + rng.uniform() * (rmax * rmax - r0sq));
    const double phi = rng.uniform() * 2.0 * 3.14159265358979323846;
    e.positions.push_back({r * std::cos(phi), r * std::sin(phi)});
  }
  return e;
}

double inplane_theta(const Vec2& d, double axis_tilt) {
  const double r = std::hypot(d[0], d[1]);
  if (!(r > 0.0)) throw std::domain_error("inplane_theta: zero separation");
  double c = d[0] * std::sin(axis_tilt) / r;
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  return std::acos(c);
}

CouplingSet ensemble_couplings(const SpinEnsemble& e, const Constants& c) {
  const int n = static_cast<int>(e.positions.size()) + 1;
  CouplingSet cs;
  cs.couplings.assign(static_cast<std::size_t>(n) * (n - 1) / 2, 0.0);
  auto pos = [&](int i) -> Vec2 {
    return i == 0 ? Vec2{0.0, 0.0} : e.positions[i - 1];
  };
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Vec2 a = pos(i), b = pos(j);
      const Vec2 d{a[0] - b[0], a[1] - b[1]};
      const double r = std::hypot(d[0], d[1]);
      const double theta = inplane_theta(d, e.quantization_axis_tilt);
      cs.couplings[pair_index(i, j, n)] = coupling_strength(r, theta, c);
    }
  }
  return cs;
}

}  // namespace spindyn
