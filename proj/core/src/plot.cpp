#include "sas/plot.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

#include <fmt/format.h>

#include "sas/error.hpp"
#include "sas/trace_io.hpp"

namespace sas {

namespace {

constexpr double kWidth = 960.0;
constexpr double kLeft = 80.0, kRight = 20.0;
constexpr std::size_t kMaxPoints = 4000;

struct Panel {
    double top, height;
    double x0, x1, y0, y1;

    double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
    double py(double y) const { return top + height - (y - y0) / (y1 - y0) * height; }
};

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// Range padded by 5% so the curves clear the frame.
std::pair<double, double> padded(double lo, double hi) {
    if (!(hi > lo)) {
        double d = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
        return {lo - d, hi + d};
    }
    double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

void frame(fmt::memory_buffer& buf, const Panel& p, std::string_view xlabel, std::string_view ylabel, bool xticks) {
    auto it = std::back_inserter(buf);
    const double right = kWidth - kRight;
    fmt::format_to(it, "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" stroke=\"#000\"/>\n",
                   kLeft, p.top, right - kLeft, p.height);
    for (int i = 0; i <= 4; ++i) {
        const double y = p.y0 + (p.y1 - p.y0) * i / 4.0;
        fmt::format_to(it, "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"11\" text-anchor=\"end\">{:.4g}</text>\n",
                       kLeft - 6.0, p.py(y) + 4.0, y);
    }
    if (xticks) {
        for (int i = 0; i <= 5; ++i) {
            const double x = p.x0 + (p.x1 - p.x0) * i / 5.0;
            fmt::format_to(it, "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"11\" text-anchor=\"middle\">{:.5g}</text>\n",
                           p.px(x), p.top + p.height + 16.0, x);
        }
        fmt::format_to(it, "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
                       0.5 * (kLeft + right), p.top + p.height + 36.0, escape(xlabel));
    }
    fmt::format_to(it,
                   "<text x=\"18\" y=\"{:.2f}\" font-size=\"13\" text-anchor=\"middle\" "
                   "transform=\"rotate(-90 18 {:.2f})\">{}</text>\n",
                   p.top + 0.5 * p.height, p.top + 0.5 * p.height, escape(ylabel));
}

void polyline(fmt::memory_buffer& buf, const Panel& p, const std::vector<double>& x, const std::vector<double>& y,
              std::string_view colour, std::string_view name) {
    auto it = std::back_inserter(buf);
    const std::size_t stride = std::max<std::size_t>(1, (x.size() + kMaxPoints - 1) / kMaxPoints);
    fmt::format_to(it, "<polyline data-channel=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1\" points=\"", name,
                   colour);
    for (std::size_t i = 0; i < x.size(); i += stride) {
        if (i) fmt::format_to(it, " ");
        fmt::format_to(it, "{:.2f},{:.2f}", p.px(x[i]), p.py(y[i]));
    }
    fmt::format_to(it, "\"/>\n");
}

std::string header(double height, std::string_view title) {
    return fmt::format(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n"
        "<text x=\"{:.2f}\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
        kWidth, height, kWidth, height, 0.5 * kWidth, escape(title));
}

}  // namespace

std::string render_trace_svg(const SweepTrace& trace, std::span<const TransitionLine> annotations,
                             std::string_view title) {
    if (trace.size() == 0) throw ValidationError("cannot plot an empty trace");
    trace.validate();

    std::vector<double> mhz(trace.size());
    std::transform(trace.detuning_hz.begin(), trace.detuning_hz.end(), mhz.begin(), [](double v) { return v * 1e-6; });
    double lo = 0.0, hi = 0.0;
    for (const auto* ch : {&trace.reference_v, &trace.probe_v, &trace.differential_v}) {
        auto [a, b] = std::minmax_element(ch->begin(), ch->end());
        lo = std::min(lo, *a);
        hi = std::max(hi, *b);
    }
    auto [y0, y1] = padded(lo, hi);
    Panel p{60.0, 380.0, mhz.front(), mhz.back(), y0, y1};
    if (p.x1 < p.x0) std::swap(p.x0, p.x1);

    fmt::memory_buffer buf;
    auto it = std::back_inserter(buf);
    fmt::format_to(it, "{}", header(500.0, title));
    frame(buf, p, "detuning (MHz)", "signal (V)", true);
    polyline(buf, p, mhz, trace.reference_v, "#1f77b4", "reference");
    polyline(buf, p, mhz, trace.probe_v, "#d62728", "probe");
    polyline(buf, p, mhz, trace.differential_v, "#2ca02c", "differential");
    for (const auto& line : annotations) {
        const double x = line.detuning_hz * 1e-6;
        if (x < p.x0 || x > p.x1) continue;
        fmt::format_to(it,
                       "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#888\" "
                       "stroke-dasharray=\"2,2\"/>\n",
                       p.px(x), p.top, p.px(x), p.top + 10.0);
        fmt::format_to(it,
                       "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"9\" transform=\"rotate(-60 {:.2f} {:.2f})\">{}</text>\n",
                       p.px(x), p.top - 2.0, p.px(x), p.top - 2.0,
                       escape(fmt::format("{} F={} {}", to_string(line.isotope), line.f_ground, line.f_excited_label)));
    }
    fmt::format_to(it, "</svg>\n");
    return fmt::to_string(buf);
}

std::string render_log_svg(const TimeSeriesLog& log, std::string_view title) {
    if (log.size() == 0) throw ValidationError("cannot plot an empty log");
    auto range = [](const std::vector<double>& v) {
        auto [a, b] = std::minmax_element(v.begin(), v.end());
        return padded(*a, *b);
    };
    double t0 = log.t_s.front(), t1 = log.t_s.back();
    if (!(t1 > t0)) t1 = t0 + 1.0;
    auto [e0, e1] = range(log.error_v);
    auto [c0, c1] = range(log.control_v);
    Panel top{50.0, 240.0, t0, t1, e0, e1};
    Panel bottom{320.0, 240.0, t0, t1, c0, c1};

    fmt::memory_buffer buf;
    auto it = std::back_inserter(buf);
    fmt::format_to(it, "{}", header(620.0, title));
    frame(buf, top, "", "error (V)", false);
    frame(buf, bottom, "time (s)", "control (V)", true);
    polyline(buf, top, log.t_s, log.error_v, "#d62728", "error");
    polyline(buf, bottom, log.t_s, log.control_v, "#1f77b4", "control");
    fmt::format_to(it, "</svg>\n");
    return fmt::to_string(buf);
}

void emit_plot(const SweepTrace& trace, const std::filesystem::path& path, std::span<const TransitionLine> annotations,
               std::string_view title) {
    write_file(path, render_trace_svg(trace, annotations, title));
}

void emit_plot(const TimeSeriesLog& log, const std::filesystem::path& path, std::string_view title) {
    write_file(path, render_log_svg(log, title));
}

}  // namespace sas
