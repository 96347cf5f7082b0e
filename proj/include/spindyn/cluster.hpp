#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "spindyn/geometry.hpp"
#include "spindyn/noise.hpp"
#include "spindyn/sequence.hpp"

namespace spindyn {

// One disorder realization: the central spin (index 0) plus bath spins with
// fixed pair couplings, per-spin independent noise trajectories sharing dt,
// and an optional resonant drive about +y on all spins.
struct Cluster {
  int n_spins = 1;
  CouplingSet couplings;                // size n_spins*(n_spins-1)/2
  std::vector<NoiseTrajectory> onsite;  // size n_spins, or empty for noise-free
  double drive = 0.0;                   // rad/us
  bool flip_flop = true;
};

// Piecewise-constant propagator over the trajectory grid:
// U = prod_k exp(-i H(t_k) dt). Throws std::out_of_range when t exceeds the
// trajectory duration.
Eigen::MatrixXcd propagate(const Cluster& c, double t);

// Generator for disorder realizations: positions (resampled per realization
// unless fixed_positions is set) and fresh noise trajectories per spin.
struct ClusterTemplate {
  int n_spins = 6;
  double density = 0.0142;  // nm^-2
  double min_radius = 2.0;  // nm
  double axis_tilt = kDefaultAxisTilt;
  NoiseModel noise;         // w == 0 disables on-site noise
  double dt = 0.05;         // us; trajectory step (reduced if guards require)
  bool flip_flop = true;
  std::vector<Vec2> fixed_positions;  // optional; size n_spins-1
  Constants constants;
  int max_spins = 10;

  void validate() const;
};

// Infinite-temperature autocorrelation 4 <S^a(t) S^a(0)> with standard errors
// over disorder realizations.
struct CorrelationResult {
  std::vector<double> times;
  std::vector<double> correlation;
  std::vector<double> std_error;
  int n_disorder = 0;
};

// 4 <S_0^z(t) S_0^z(0)>; free evolution, no pulses.
CorrelationResult sz_autocorrelation(const ClusterTemplate& tpl,
                                     std::span<const double> t_grid,
                                     int n_realizations, std::uint64_t seed,
                                     int threads = 0);

// 4 <S_0^y(t) S_0^y(0)> under drive omega * sum_i S_i^y.
CorrelationResult spin_lock_decay(const ClusterTemplate& tpl, double omega,
                                  std::span<const double> t_grid,
                                  int n_realizations, std::uint64_t seed,
                                  int threads = 0);

// Transverse correlation 4 <S_0^x(t) S_0^x(0)> with ideal instantaneous global
// pulses of the given sequence (Ramsey, Echo, XY4, MREV8InEcho).
CorrelationResult sequence_response(const ClusterTemplate& tpl,
                                    const PulseSequence& seq,
                                    std::span<const double> t_grid,
                                    int n_realizations, std::uint64_t seed,
                                    int threads = 0);

// Ideal global pulses of a sequence over total time t: (time, axis, angle)
// with axis in {'x','y'} and angle in rad (pi or at pulse granularity).
struct Pulse {
  double time;
  char axis;
  double angle;
};
std::vector<Pulse> sequence_pulses(SequenceKind kind, double t);

}  // namespace spindyn
