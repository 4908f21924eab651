#ifndef WW_CONSTANTS_HPP
#define WW_CONSTANTS_HPP

#include <complex>

// Internal unit system: energies in eV, lengths in nm, wavevectors in 1/nm.
// Reciprocal-lattice integer coordinates are in units of 2*pi/a.

namespace ww {

using Complex = std::complex<double>;

inline constexpr double hbar2_over_2me = 0.0380998;  // eV nm^2
inline constexpr double rydberg_ev     = 13.605693;  // eV per Ry
inline constexpr double si_lattice_nm  = 0.543;      // Si lattice constant a
inline constexpr double valley_k0      = 0.84;       // conduction minimum, units 2*pi/a

inline constexpr double pi = 3.14159265358979323846;

}  // namespace ww

#endif
