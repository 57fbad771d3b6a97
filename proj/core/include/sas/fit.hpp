#pragma once

#include <span>
#include <string_view>

#include "sas/spectrum.hpp"

namespace sas {

enum class LineModel { Lorentzian, Gaussian };

LineModel parse_line_model(std::string_view text);

enum class Channel { Reference, Probe, Differential };

struct FitOptions {
    int max_iterations = 200;
    double tolerance = 1e-14;  // relative change of the cost
};

/// y = offset + amplitude * shape((x - center) / width), shape peak-normalised,
/// width = FWHM.
struct FitResult {
    double amplitude = 0.0;
    double center_hz = 0.0;
    double width_hz = 0.0;
    double offset = 0.0;
    double rms_residual = 0.0;
    int iterations = 0;
};

/// Levenberg-Marquardt fit started from center = extremum location and width =
/// half the segment span. Throws ValidationError for fewer than 8 samples and
/// FitError when the iteration cap is reached.
FitResult fit_lineshape(std::span<const double> x, std::span<const double> y, LineModel model,
                        const FitOptions& options = {});

FitResult fit_lineshape(const SweepTrace& segment, LineModel model, Channel channel = Channel::Differential,
                        const FitOptions& options = {});

}  // namespace sas
