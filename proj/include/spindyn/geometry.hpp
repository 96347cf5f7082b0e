#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "spindyn/constants.hpp"

namespace spindyn {

using Vec2 = std::array<double, 2>;

constexpr double kMagicAngle = 0.9553166181245093;  // arccos(1/sqrt(3))

// Default quantization-axis tilt from the surface normal; corresponds to an
// external field along [1,1,1]/sqrt(3).
constexpr double kDefaultAxisTilt = kMagicAngle;

// Bath-spin positions on the z=0 plane around a central spin at the origin.
// Immutable after construction; the azimuth of the tilted field axis is fixed
// to the x-z plane (the ensemble statistics are isotropic in-plane).
struct SpinEnsemble {
  std::vector<Vec2> positions;               // nm
  double density = 0.0;                      // nm^-2
  double quantization_axis_tilt = kDefaultAxisTilt;  // rad
  double min_radius = 0.0;                   // nm
  std::uint64_t seed = 0;
};

// Pairwise couplings, upper-triangular order over spin indices (0 = central).
struct CouplingSet {
  std::vector<double> couplings;     // J_ij, rad/us, signed
  std::vector<double> nv_couplings;  // optional NV-to-spin couplings k_i, rad/us
};

inline int pair_index(int i, int j, int n) {
  // i < j < n
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

// Secular dipolar coupling J0 (1 - 3 cos^2 theta) / r^3 in rad/us.
// Throws std::domain_error for non-positive r.
double coupling_strength(double r_nm, double theta_rad, const Constants& c = {});

struct SampleOptions {
  double max_radius = 1e5;  // nm; larger sampling discs are a configuration error
};

// Draws `count` bath spins uniformly over the annulus [min_radius, R] with R
// fixed by count/density. Deterministic for fixed seed.
SpinEnsemble sample_ensemble(double density, int count, double min_radius,
                             std::uint64_t seed, const SampleOptions& opts = {});

// Angle between the tilted field axis and an in-plane vector d (from the
// origin): cos(theta) = d_x sin(tilt)/|d|.
double inplane_theta(const Vec2& d, double axis_tilt);

// Couplings for the central spin plus all bath spins (all pairs, triangular
// order with the central spin as index 0).
CouplingSet ensemble_couplings(const SpinEnsemble& e, const Constants& c = {});

}  // namespace spindyn
