#include "sas/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include <fmt/format.h>

#include "sas/error.hpp"
#include "sas/lineshape.hpp"

namespace sas {

void MediumConfig::validate() const {
    if (!(temperature_k > 0.0)) throw ValidationError("medium.temperature_k must be positive");
    if (!(peak_optical_depth > 0.0)) throw ValidationError("medium.peak_optical_depth must be positive");
    if (!(saturation_s >= 0.0)) throw ValidationError("medium.saturation_s must be non-negative");
    if (!(crossover_enhancement > 0.0)) throw ValidationError("medium.crossover_enhancement must be positive");
    if (!(dip_contrast >= 0.0 && dip_contrast <= 1.0)) throw ValidationError("medium.dip_contrast must be in [0,1]");
}

SweepTrace SweepTrace::slice(std::size_t first, std::size_t count) const {
    if (first > size() || count > size() - first) throw ValidationError("trace slice out of range");
    SweepTrace out;
    auto cut = [&](const std::vector<double>& v) {
        return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(first),
                                   v.begin() + static_cast<std::ptrdiff_t>(first + count));
    };
    out.detuning_hz = cut(detuning_hz);
    out.reference_v = cut(reference_v);
    out.probe_v = cut(probe_v);
    out.differential_v = cut(differential_v);
    out.meta = meta;
    return out;
}

SweepTrace SweepTrace::slice(Interval window) const {
    std::size_t first = size();
    std::size_t last = 0;
    for (std::size_t i = 0; i < size(); ++i) {
        if (window.contains(detuning_hz[i])) {
            first = std::min(first, i);
            last = i;
        }
    }
    if (first == size()) return slice(0, 0);
    return slice(first, last - first + 1);
}

void SweepTrace::validate() const {
    const auto n = detuning_hz.size();
    if (n < 2) throw ValidationError("trace needs at least 2 samples");
    if (reference_v.size() != n || probe_v.size() != n || differential_v.size() != n)
        throw ValidationError("trace channels differ in length");
    const bool rising = detuning_hz[1] > detuning_hz[0];
    for (std::size_t i = 1; i < n; ++i) {
        if (rising ? !(detuning_hz[i] > detuning_hz[i - 1]) : !(detuning_hz[i] < detuning_hz[i - 1]))
            throw ValidationError(fmt::format("trace axis not strictly monotone at sample {}", i));
    }
}

// --- SpectrumModel ----------------------------------------------------------

SpectrumModel::SpectrumModel(const LineTable& table, const MediumConfig& medium) : table_(table), medium_(medium) {
    medium_.validate();
    auto groups = manifolds(table_);
    if (groups.empty()) throw ValidationError("line table has no transitions");

    // Normalise so a manifold with all its strength at one frequency peaks at OD0.
    double max_weight = 0.0;
    for (const auto& m : groups) {
        double w = 0.0;
        for (const auto& l : m.direct) w += l.strength;
        max_weight = std::max(max_weight, table_.isotope(m.isotope).abundance * w);
    }

    const double sat = medium_.saturation_s / (1.0 + medium_.saturation_s);
    for (const auto& m : groups) {
        const auto& iso = table_.isotope(m.isotope);
        double strongest = 0.0;
        for (const auto& l : m.direct) {
            const double fwhm = doppler_fwhm(medium_.temperature_k, iso.mass_kg, table_.carrier_hz + l.detuning_hz);
            doppler_.push_back({l.detuning_hz, fwhm, medium_.peak_optical_depth * iso.abundance * l.strength / max_weight});
            strongest = std::max(strongest, l.strength);
        }
        auto add_feature = [&](const TransitionLine& l) {
            const double width = saturation_broadened_width(l.gamma_natural_hz, medium_.saturation_s);
            features_.push_back({l, medium_.dip_contrast * sat * l.strength / strongest, width});
        };
        for (const auto& l : m.direct) add_feature(l);
        for (const auto& l : derive_crossovers(m.direct, medium_.crossover_enhancement)) add_feature(l);
    }
    std::stable_sort(features_.begin(), features_.end(),
                     [](const Feature& a, const Feature& b) { return a.line.detuning_hz < b.line.detuning_hz; });

    const Feature* strongest = nullptr;
    for (const auto& f : features_) {
        if (!f.line.is_crossover && (!strongest || f.line.strength > strongest->line.strength)) strongest = &f;
    }
    dip_fwhm_ = strongest->dip_fwhm_hz;
}

double SpectrumModel::optical_depth(double nu) const {
    double od = 0.0;
    for (const auto& t : doppler_) od += t.weight * doppler_gaussian_unit_peak(nu, {t.center, t.fwhm});
    return od;
}

double SpectrumModel::dip_fraction(double nu) const {
    double dips = 0.0;
    for (const auto& f : features_) {
        if (f.dip_amplitude == 0.0) continue;
        dips += f.dip_amplitude * lorentzian(nu, {f.line.detuning_hz, f.dip_fwhm_hz});
    }
    return dips;
}

SpectrumModel::Transmission SpectrumModel::transmission(double nu) const {
    const double od = optical_depth(nu);
    const double remaining = std::max(0.0, 1.0 - dip_fraction(nu));
    return {std::exp(-od), std::exp(-od * remaining)};
}

double SpectrumModel::doppler_fwhm_hz(IsotopeId isotope) const {
    return doppler_fwhm(medium_.temperature_k, table_.isotope(isotope).mass_kg, table_.carrier_hz);
}

std::vector<Interval> SpectrumModel::doppler_windows(double halfwidth_factor) const {
    std::vector<Interval> out;
    for (const auto& m : manifolds(table_)) {
        const double width = halfwidth_factor * doppler_fwhm_hz(m.isotope);
        double lo = m.direct.front().detuning_hz;
        double hi = lo;
        for (const auto& l : m.direct) {
            lo = std::min(lo, l.detuning_hz);
            hi = std::max(hi, l.detuning_hz);
        }
        out.push_back({lo - width, hi + width});
    }
    return out;
}

// --- Synthesis --------------------------------------------------------------

SweepTrace synthesize_sweep(const SpectrumModel& model, const SweepSpec& sweep, const NoiseConfig& noise) {
    if (!(sweep.start_hz < sweep.stop_hz)) throw ValidationError("sweep start must be below stop");
    if (sweep.samples < 16) throw ValidationError("sweep needs at least 16 samples");
    if (!(noise.sigma_v >= 0.0)) throw ValidationError("noise sigma must be non-negative");

    SweepTrace trace;
    const auto n = sweep.samples;
    trace.detuning_hz.resize(n);
    trace.reference_v.resize(n);
    trace.probe_v.resize(n);
    trace.differential_v.resize(n);
    trace.meta.samples_per_ramp = n;
    trace.meta.noise_seed = noise.seed;

    // Independent reference and probe streams derived from one seed.
    auto stream = [&](std::uint32_t channel) {
        std::seed_seq seq{static_cast<std::uint32_t>(noise.seed), static_cast<std::uint32_t>(noise.seed >> 32), channel};
        return std::mt19937_64(seq);
    };
    auto ref_rng = stream(1);
    auto probe_rng = stream(2);
    std::normal_distribution<double> ref_noise(0.0, noise.sigma_v);
    std::normal_distribution<double> probe_noise(0.0, noise.sigma_v);

    const double step = (sweep.stop_hz - sweep.start_hz) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double nu = (i + 1 == n) ? sweep.stop_hz : sweep.start_hz + step * static_cast<double>(i);
        auto t = model.transmission(nu);
        double ref = t.reference;
        double probe = t.probe;
        if (noise.enabled && noise.sigma_v > 0.0) {
            ref = std::max(0.0, ref + ref_noise(ref_rng));
            probe = std::max(0.0, probe + probe_noise(probe_rng));
        }
        trace.detuning_hz[i] = nu;
        trace.reference_v[i] = ref;
        trace.probe_v[i] = probe;
        trace.differential_v[i] = probe - ref;
    }
    return trace;
}

SweepTrace synthesize_sweep(const LineTable& table, const MediumConfig& medium, const SweepSpec& sweep,
                            const NoiseConfig& noise) {
    if (table.lines.empty()) throw ValidationError("line table is empty");
    return synthesize_sweep(SpectrumModel(table, medium), sweep, noise);
}

// --- Filters ----------------------------------------------------------------

namespace {

void check_window(std::size_t window, std::size_t n) {
    if (window == 0 || window % 2 == 0) throw ValidationError("smoothing window must be odd and >= 1");
    if (window >= n && window > 1) throw ValidationError("smoothing window must be shorter than the trace");
}

double median_of(std::vector<double>& buf) {
    const auto mid = buf.size() / 2;
    std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(mid), buf.end());
    double m = buf[mid];
    if (buf.size() % 2 == 0) {
        m = 0.5 * (m + *std::max_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(mid)));
    }
    return m;
}

}  // namespace

std::vector<double> moving_median(std::span<const double> y, std::size_t window) {
    check_window(window, y.size());
    const auto n = static_cast<std::ptrdiff_t>(y.size());
    const auto half = static_cast<std::ptrdiff_t>(window / 2);
    std::vector<double> out(y.size());
    std::vector<double> buf(window);
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        for (std::ptrdiff_t k = -half; k <= half; ++k) {
            buf[static_cast<std::size_t>(k + half)] = y[static_cast<std::size_t>(std::clamp(i + k, std::ptrdiff_t{0}, n - 1))];
        }
        out[static_cast<std::size_t>(i)] = median_of(buf);
    }
    return out;
}

std::vector<double> moving_average(std::span<const double> y, std::size_t window) {
    check_window(window, y.size());
    const auto n = static_cast<std::ptrdiff_t>(y.size());
    const auto half = static_cast<std::ptrdiff_t>(window / 2);
    std::vector<double> out(y.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::ptrdiff_t k = -half; k <= half; ++k)
            sum += y[static_cast<std::size_t>(std::clamp(i + k, std::ptrdiff_t{0}, n - 1))];
        out[static_cast<std::size_t>(i)] = sum / static_cast<double>(window);
    }
    return out;
}

// --- Markers ----------------------------------------------------------------

MarkerSelection MarkerSelection::defaults() {
    MarkerSelection s;
    s.hyperfine = {{IsotopeId::Rb87, 2, "F'=3"}, {IsotopeId::Rb87, 2, "F'=2"}};
    s.crossover = {IsotopeId::Rb87, 2, "co(2,3)"};
    return s;
}

MarkerOptions default_marker_options(const SpectrumModel& model) {
    MarkerOptions o;
    o.doppler_windows = model.doppler_windows();
    o.median_window_hz = 5.0 * model.dip_fwhm_hz();
    o.search_halfwidth_hz = model.dip_fwhm_hz();
    return o;
}

namespace {

// Doppler background under a narrow feature at index k: the reference
// channel there, plus the median probe-reference offset on the flanks gap_hz
// to 2 gap_hz away. The median filter alone is lifted by the feature's own
// wings, and the median keeps neighbouring features from biasing the offset.
std::optional<double> flank_background(const SweepTrace& t, std::size_t k, double gap_hz) {
    const double x0 = t.detuning_hz[k];
    std::vector<double> offset;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double d = std::abs(t.detuning_hz[i] - x0);
        if (d >= gap_hz && d <= 2.0 * gap_hz) offset.push_back(t.probe_v[i] - t.reference_v[i]);
    }
    if (offset.size() < 6) return std::nullopt;
    return t.reference_v[k] + median_of(offset);
}

}  // namespace

DepthMarkers extract_markers(const SweepTrace& trace, const LineTable& table, Interval window,
                             const MarkerSelection& selection, const MarkerOptions& options) {
    trace.validate();
    const auto n = trace.size();
    const double axis_lo = std::min(trace.detuning_hz.front(), trace.detuning_hz.back());
    const double axis_hi = std::max(trace.detuning_hz.front(), trace.detuning_hz.back());
    if (!(window.lo < window.hi) || window.lo < axis_lo || window.hi > axis_hi)
        throw ValidationError("manifold window must lie inside the trace span");
    if (selection.hyperfine.empty()) throw ValidationError("marker selection names no hyperfine feature");

    // A: median probe level away from every Doppler valley.
    std::vector<double> outside;
    for (std::size_t i = 0; i < n; ++i) {
        const double nu = trace.detuning_hz[i];
        bool in_valley = std::any_of(options.doppler_windows.begin(), options.doppler_windows.end(),
                                     [nu](const Interval& w) { return w.contains(nu); });
        if (!in_valley) outside.push_back(trace.probe_v[i]);
    }
    if (outside.empty()) throw ValidationError("trace has no samples outside the Doppler windows");
    DepthMarkers m;
    m.a = median_of(outside);
    if (!(m.a > 0.0)) throw ValidationError("off-resonance baseline is not positive");

    std::size_t first = n, last = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (window.contains(trace.detuning_hz[i])) {
            first = std::min(first, i);
            last = i;
        }
    }
    if (first == n || last - first < 4) throw ValidationError("manifold window holds too few samples");

    const double spacing = std::abs(trace.detuning_hz[last] - trace.detuning_hz[first]) / static_cast<double>(last - first);
    auto win = static_cast<std::size_t>(std::llround(options.median_window_hz / spacing));
    win = std::max<std::size_t>(3, win | 1u);

    // Dip-suppressed probe over the window plus a margin for the filter.
    const std::size_t lo = first > win ? first - win : 0;
    const std::size_t hi = std::min(n - 1, last + win);
    std::span<const double> region(trace.probe_v.data() + lo, hi - lo + 1);
    if (win >= region.size()) throw ValidationError("median window wider than the manifold window");
    const auto smooth = moving_median(region, win);
    auto smoothed_at = [&](std::size_t i) { return smooth[i - lo]; };

    m.b = smoothed_at(first);
    std::vector<double> resid;
    for (std::size_t i = first; i <= last; ++i) {
        m.b = std::min(m.b, smoothed_at(i));
        resid.push_back(std::abs(trace.probe_v[i] - smoothed_at(i)));
    }
    const double noise_sigma = 1.4826 * median_of(resid);
    const double threshold = std::max(5.0 * noise_sigma, options.min_relative_prominence * m.a);

    struct Peak {
        double value;
        double prominence;
    };
    auto locate = [&](const FeatureRef& ref) -> Peak {
        const auto feature = find_feature(table, ref);
        if (!window.contains(feature.detuning_hz))
            throw NotFoundError("feature " + ref.str() + " lies outside the manifold window");
        std::size_t best = n;
        std::size_t s_lo = n, s_hi = 0;
        for (std::size_t i = first; i <= last; ++i) {
            if (std::abs(trace.detuning_hz[i] - feature.detuning_hz) > options.search_halfwidth_hz) continue;
            s_lo = std::min(s_lo, i);
            s_hi = i;
            if (best == n || trace.probe_v[i] > trace.probe_v[best]) best = i;
        }
        if (best == n) throw NoFeaturesError("no samples near feature " + ref.str());
        const double background = flank_background(trace, best, 0.5 * options.median_window_hz).value_or(smoothed_at(best));
        const double prominence = trace.probe_v[best] - background;
        const bool interior = best > s_lo && best < s_hi;
        if (!interior || prominence < threshold)
            throw NoFeaturesError("no sub-Doppler feature found at " + ref.str());
        return {trace.probe_v[best], prominence};
    };

    double weakest = 0.0;
    bool have = false;
    for (const auto& ref : selection.hyperfine) {
        auto p = locate(ref);
        if (!have || p.prominence < weakest) weakest = p.prominence;
        have = true;
    }
    m.c = m.b - weakest;
    m.d = locate(selection.crossover).value;
    return m;
}

DepthMetrics depth_metrics(const DepthMarkers& m) {
    if (m.a == 0.0) throw ValidationError("depth metrics undefined for A = 0");
    return {100.0 * (m.a - m.b) / m.a, 100.0 * (m.b - m.c) / m.a, 100.0 * (m.d - m.b) / m.a};
}

std::size_t count_sub_doppler_extrema(const SweepTrace& trace, Interval window, double relative_threshold) {
    const auto& d = trace.differential_v;
    double peak = 0.0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (window.contains(trace.detuning_hz[i])) peak = std::max(peak, d[i]);
    }
    if (!(peak > 0.0)) return 0;
    std::size_t count = 0;
    for (std::size_t i = 1; i + 1 < trace.size(); ++i) {
        if (!window.contains(trace.detuning_hz[i])) continue;
        if (d[i] > d[i - 1] && d[i] >= d[i + 1] && d[i] > relative_threshold * peak) ++count;
    }
    return count;
}

// --- Error signal -----------------------------------------------------------

ErrorMode parse_error_mode(std::string_view text) {
    if (text == "derivative") return ErrorMode::Derivative;
    if (text == "differential") return ErrorMode::Differential;
    throw ParseError(fmt::format("unknown error mode '{}'", text));
}

std::string_view to_string(ErrorMode mode) {
    return mode == ErrorMode::Derivative ? "derivative" : "differential";
}

std::vector<double> error_signal(const SweepTrace& trace, ErrorMode mode, std::size_t smoothing_window) {
    const auto n = trace.size();
    if (smoothing_window == 0 || smoothing_window % 2 == 0 || smoothing_window >= n)
        throw ValidationError("smoothing window must be odd, >= 1 and shorter than the trace");
    if (mode == ErrorMode::Differential) return trace.differential_v;

    const auto smooth = moving_average(trace.differential_v, smoothing_window);
    const auto& x = trace.detuning_hz;
    std::vector<double> out(n);
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (smooth[i + 1] - smooth[i - 1]) / (x[i + 1] - x[i - 1]);
    out.front() = n > 2 ? out[1] : (smooth[1] - smooth[0]) / (x[1] - x[0]);
    out.back() = n > 2 ? out[n - 2] : out.front();
    return out;
}

}  // namespace sas
