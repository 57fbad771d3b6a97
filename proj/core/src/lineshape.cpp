#include "sas/lineshape.hpp"

#include <cmath>
#include <numbers>

#include "sas/error.hpp"

namespace sas {

namespace {
const double kSqrtLn2 = std::sqrt(std::numbers::ln2);
}

double lorentzian(double nu, const LorentzianParams& p) {
    const double x = (nu - p.nu0) / p.gamma_fwhm;
    return 1.0 / (1.0 + 4.0 * x * x);
}

double doppler_gaussian(double nu, const GaussianParams& p) {
    const double x = 2.0 * kSqrtLn2 * (nu - p.nu0) / p.fwhm;
    return 2.0 * kSqrtLn2 / (std::sqrt(std::numbers::pi) * p.fwhm) * std::exp(-x * x);
}

double doppler_gaussian_unit_peak(double nu, const GaussianParams& p) {
    const double x = 2.0 * kSqrtLn2 * (nu - p.nu0) / p.fwhm;
    return std::exp(-x * x);
}

double doppler_fwhm(double temperature_k, double mass_kg, double nu0_abs_hz, const PhysicalConstants& c) {
    if (!(temperature_k > 0.0) || !(mass_kg > 0.0) || !(nu0_abs_hz > 0.0))
        throw ValidationError("doppler_fwhm requires positive temperature, mass and frequency");
    const double c2 = c.speed_of_light * c.speed_of_light;
    return 2.0 * std::sqrt(2.0 * c.boltzmann * temperature_k * std::numbers::ln2 / (mass_kg * c2)) * nu0_abs_hz;
}

double saturation_broadened_width(double gamma_fwhm, double s) {
    if (!(gamma_fwhm > 0.0)) throw ValidationError("linewidth must be positive");
    if (!(s >= 0.0)) throw ValidationError("saturation parameter must be non-negative");
    return gamma_fwhm * std::sqrt(1.0 + s);
}

}  // namespace sas
