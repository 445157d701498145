#pragma once

#include <numbers>

namespace eprsim {

/// Physical constants and unit conversions for the 6Li platform.
///
/// Internal units: lengths in micrometers, momenta in hbar/um (so hbar = 1
/// in position-momentum arithmetic), times in seconds, frequencies in Hz.
struct PhysicalConstants {
    static constexpr double pi = std::numbers::pi;

    static constexpr double hbar_si = 1.054571817e-34;       // J s
    static constexpr double mass_li6_kg = 9.9883414e-27;     // 6.0151228874 u
    static constexpr double recoil_wavelength_um = 0.671;    // 671 nm resonance

    /// Recoil wavenumber k_rec = 2*pi / 671 nm, in 1/um.  Multiplying a
    /// momentum given in hbar*k_rec units by this factor yields hbar/um.
    static constexpr double k_rec_per_um = 2.0 * pi / recoil_wavelength_um;

    /// m/hbar in s/um^2.  Ballistic time of flight maps momentum to
    /// position as x(t) = x0 + p * t / m, i.e. p[hbar/um] =
    /// (m/hbar)[s/um^2] * x[um] / t[s] when x0 is neglected.
    static constexpr double mass_over_hbar_s_per_um2 =
        mass_li6_kg / hbar_si * 1e-12;

    static constexpr double hbar_over_two = 0.5;  // Heisenberg bound in hbar units
};

}  // namespace eprsim
