#pragma once

// Closed-form line profiles. Frequencies are in Hz; the Lorentzian is
// peak-normalised (unitless, max 1) while the Doppler Gaussian is a
// probability density per Hz. Amplitude scaling belongs to the spectrum model.

namespace sas {

struct LorentzianParams {
    double nu0 = 0.0;
    double gamma_fwhm = 1.0;  // > 0

    bool valid() const { return gamma_fwhm > 0.0; }
};

struct GaussianParams {
    double nu0 = 0.0;
    double fwhm = 1.0;  // Doppler width, > 0

    bool valid() const { return fwhm > 0.0; }
};

/// CODATA 2018 exact values.
struct PhysicalConstants {
    double boltzmann = 1.380649e-23;     // J/K
    double speed_of_light = 299792458.0;  // m/s
};

/// 1 / (1 + 4 (nu - nu0)^2 / Gamma^2)
double lorentzian(double nu, const LorentzianParams& p);

/// (2 sqrt(ln2) / (sqrt(pi) dnuD)) exp(-(2 sqrt(ln2) (nu - nu0) / dnuD)^2)
double doppler_gaussian(double nu, const GaussianParams& p);

/// Gaussian of the same width scaled to 1 at nu0.
double doppler_gaussian_unit_peak(double nu, const GaussianParams& p);

/// dnuD = 2 sqrt(2 kB T ln2 / (m c^2)) nu0. Throws ValidationError on non-positive input.
double doppler_fwhm(double temperature_k, double mass_kg, double nu0_abs_hz,
                    const PhysicalConstants& c = PhysicalConstants{});

/// Gamma sqrt(1 + s). Throws ValidationError if s < 0 or gamma <= 0.
double saturation_broadened_width(double gamma_fwhm, double s);

}  // namespace sas
