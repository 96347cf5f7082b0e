#pragma once

namespace spindyn {

// Unit system: distances in nm, times in us, magnetic fields in G.
// All rates, couplings and detunings are angular frequencies in rad/us.
struct Constants {
  double gamma_e = 17.5929188601;  // electron gyromagnetic ratio, rad us^-1 G^-1 (2*pi*2.80)
  double gamma_n = 0.0267513;      // proton gyromagnetic ratio, rad us^-1 G^-1 (2*pi*4.2577e-3)
  double j0 = 326.7;               // dipolar coupling prefactor hbar*gamma_e^2, nm^3/us
  double hbar = 1.054571817;       // G^2 nm^3 us
};

}  // namespace spindyn
