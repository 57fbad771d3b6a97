#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sas/atomic_data.hpp"

namespace sas {

/// Vapour-cell parameters of the saturated-absorption model.
struct MediumConfig {
    double temperature_k = 312.65;
    double peak_optical_depth = 2.0;  // of the strongest manifold
    double saturation_s = 2.0;        // pump intensity / saturation intensity
    double crossover_enhancement = 1.5;
    double dip_contrast = 0.8;        // geometry/overlap factor in [0,1]

    /// Throws ValidationError.
    void validate() const;
};

/// Additive white Gaussian detector noise; one seed feeds independent
/// reference and probe streams.
struct NoiseConfig {
    bool enabled = true;
    double sigma_v = 0.002;
    std::uint64_t seed = 1;
};

struct SweepSpec {
    double start_hz = -1.0e9;
    double stop_hz = 7.5e9;
    std::size_t samples = 34001;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double x) const { return x >= lo && x <= hi; }
};

struct TraceMeta {
    std::size_t samples_per_ramp = 0;
    std::uint64_t noise_seed = 0;
    std::string config_hash;
};

/// Detector channels (volts) over a monotone detuning axis (Hz).
struct SweepTrace {
    std::vector<double> detuning_hz;
    std::vector<double> reference_v;
    std::vector<double> probe_v;
    std::vector<double> differential_v;
    TraceMeta meta;

    std::size_t size() const { return detuning_hz.size(); }
    SweepTrace slice(std::size_t first, std::size_t count) const;
    /// Samples whose detuning lies inside `window`.
    SweepTrace slice(Interval window) const;
    /// Throws ValidationError when lengths differ, size < 2 or the axis is not strictly monotone.
    void validate() const;
};

/// Noise-free transmission model: Doppler envelopes in optical depth with
/// saturation dips multiplying it locally.
class SpectrumModel {
public:
    struct Feature {
        TransitionLine line;
        double dip_amplitude;  // fraction of OD removed at the feature centre
        double dip_fwhm_hz;
    };

    struct Transmission {
        double reference;
        double probe;
    };

    SpectrumModel(const LineTable& table, const MediumConfig& medium);

    double optical_depth(double nu) const;
    double dip_fraction(double nu) const;
    Transmission transmission(double nu) const;

    const std::vector<Feature>& features() const { return features_; }
    /// Saturation-broadened width of the strongest line.
    double dip_fwhm_hz() const { return dip_fwhm_; }
    double doppler_fwhm_hz(IsotopeId isotope) const;
    /// One window per manifold: [first line - k*dnuD, last line + k*dnuD].
    std::vector<Interval> doppler_windows(double halfwidth_factor = 1.5) const;
    const LineTable& table() const { return table_; }
    const MediumConfig& medium() const { return medium_; }

private:
    struct DopplerTerm {
        double center;
        double fwhm;
        double weight;
    };

    LineTable table_;
    MediumConfig medium_;
    std::vector<DopplerTerm> doppler_;
    std::vector<Feature> features_;
    double dip_fwhm_ = 0.0;
};

/// Reference = exp(-OD), probe = exp(-OD (1 - dips)), differential = probe - reference.
/// Throws ValidationError on an empty table or invalid sweep.
SweepTrace synthesize_sweep(const LineTable& table, const MediumConfig& medium, const SweepSpec& sweep,
                            const NoiseConfig& noise);
SweepTrace synthesize_sweep(const SpectrumModel& model, const SweepSpec& sweep, const NoiseConfig& noise);

// --- Depth markers --------------------------------------------------------

/// Symbols of the Doppler/hyperfine/crossover depth ratios, in volts.
struct DepthMarkers {
    double a = 0.0;  // off-resonance baseline
    double b = 0.0;  // Doppler valley floor with sub-Doppler features suppressed
    double c = 0.0;  // weakest selected hyperfine feature, reflected through B
    double d = 0.0;  // probe at the selected crossover extremum
};

/// Percentages: 100 (A-B)/A, 100 (B-C)/A, 100 (D-B)/A.
struct DepthMetrics {
    double doppler_depth = 0.0;
    double hyperfine_depth = 0.0;
    double crossover_depth = 0.0;
};

struct MarkerSelection {
    std::vector<FeatureRef> hyperfine;
    FeatureRef crossover;

    static MarkerSelection defaults();
};

struct MarkerOptions {
    std::vector<Interval> doppler_windows;  // excluded when estimating A
    double median_window_hz = 50e6;
    double search_halfwidth_hz = 10e6;
    double min_relative_prominence = 1e-4;  // relative to A
};

MarkerOptions default_marker_options(const SpectrumModel& model);

/// C is reported as B minus the prominence of the weakest selected hyperfine
/// feature, so (B-C)/A is that feature's height above the Doppler background.
/// Throws NoFeaturesError when a selected feature shows no sub-Doppler peak,
/// NotFoundError for unknown features, ValidationError for a bad window.
DepthMarkers extract_markers(const SweepTrace& trace, const LineTable& table, Interval manifold_window,
                             const MarkerSelection& selection, const MarkerOptions& options);

/// Throws ValidationError if A == 0.
DepthMetrics depth_metrics(const DepthMarkers& m);

/// Local maxima of the differential channel inside `window` that exceed
/// `relative_threshold` times the window maximum.
std::size_t count_sub_doppler_extrema(const SweepTrace& trace, Interval window,
                                      double relative_threshold = 1e-3);

/// Centred moving median with replicated edges; `window` must be odd.
std::vector<double> moving_median(std::span<const double> y, std::size_t window);
/// Centred moving average with replicated edges; `window` must be odd.
std::vector<double> moving_average(std::span<const double> y, std::size_t window);

// --- Error signal -----------------------------------------------------------

enum class ErrorMode { Differential, Derivative };

ErrorMode parse_error_mode(std::string_view text);
std::string_view to_string(ErrorMode mode);

/// Differential: the differential channel unchanged. Derivative: centred
/// difference (V/Hz) of the moving-average-smoothed differential. Output has the
/// trace length. Throws ValidationError for an even, zero or oversize window.
std::vector<double> error_signal(const SweepTrace& trace, ErrorMode mode, std::size_t smoothing_window);

}  // namespace sas
