#pragma once

#include <span>

#include "spindyn/noise.hpp"

namespace spindyn {

enum class SequenceKind { Ramsey, Echo, XY4, MREV8InEcho, DEER, SpinLock, FreeDecay };

const char* to_string(SequenceKind k);

// Control-protocol description and timing.
struct PulseSequence {
  SequenceKind kind = SequenceKind::Ramsey;
  double detuning = 0.0;  // rad/us, Ramsey only
  double drive = 0.0;     // rad/us, SpinLock only
  double pi_time = 0.0;   // us, finite-pulse correction

  void validate() const;
};

// Scalar filter functions F(omega t):
//   Ramsey 2 sin^2(wt/2); Echo 8 sin^4(wt/4);
//   XY4    128 sin^6(wt/16) (cos(3wt/16)+cos(5wt/16))^2;
//   MREV8InEcho 16 (1+2cos(wt/12))^2 (sin(wt/12)-sin(wt/6))^4
//               (3-4cos(wt/24)+3cos(wt/12)-2cos(wt/8)+cos(wt/6)).
// Throws std::invalid_argument for kinds without a scalar filter function.
double filter_function(SequenceKind k, double omega, double t);

// F(omega t)/omega^2 with the finite omega->0 limit taken analytically.
double filter_over_omega_sq(SequenceKind k, double omega, double t);

struct ChiOptions {
  double rel_tol = 1e-6;
  int max_depth = 20;
};

// Decoherence exponent chi(t) = gamma_e^2 Int dw/2pi V(w)/w^2 F(wt): the
// zero-frequency Lorentzian is integrated numerically on [0, w_cut] with
// w_cut = max(20/tau, 20/t, 4 omega_l); the Larmor peak is added analytically
// in the delta-function convention, (5/9) W^2 F(omega_l t)/omega_l^2.
double chi_numeric(SequenceKind k, double t, const NoiseModel& m,
                   const ChiOptions& opts = {});

// Nuclear-bath factor of the closed-form decay laws: slow-noise envelope
// exp(-c W^2 t^3/tau) with c = {1/12 (Echo), 13/4500 (XY4), 49/2592 (MREV)},
// the Ramsey special case exp(-(Wt)^2/2 + W^2 t^3/(6 tau)), and the Larmor
// modulation exp(-(5/9)(W/omega_l)^2 F(omega_l t)).
double bath_decay_factor(SequenceKind k, double t, const NoiseModel& m);

// Full closed-form signal: bath factor x dipolar envelope exp(-(t/T2)^2)
// (Ramsey/Echo/XY4 only; pass t2_dipolar = infinity for bath-only mode)
// x cos(detuning * t) for Ramsey.
double closed_form_decay(SequenceKind k, double t, const NoiseModel& m,
                         double t2_dipolar, double detuning = 0.0);

// Validity of the Ramsey t^3 correction term (requires t <= tau); other
// kinds are unrestricted here.
bool closed_form_in_validity(SequenceKind k, double t, const NoiseModel& m);

// Two-spin transverse signal under Ramsey/Echo/XY4:
// (1/2)[cos(3 J1 t/4) + cos(J1 t/4)].
double two_spin_signal(double j1, double t);

// DEER signal (1/2)[1 + prod_i cos(k_i t/2)]; empty coupling list gives 1.
double deer_signal(std::span<const double> couplings, double t);

// Number of pi-pulse equivalents of drive per sequence:
// Ramsey 1, Echo 2, XY4 5, MREV8InEcho 10.
int pi_equivalents(SequenceKind k);

// Total evolution time = free time + pi-equivalents * pi_time. The overload
// with an explicit count serves nonstandard sequences.
double finite_pulse_time(SequenceKind k, double free_time, double pi_time);
double finite_pulse_time(int pi_equivalents, double free_time, double pi_time);

}  // namespace spindyn
