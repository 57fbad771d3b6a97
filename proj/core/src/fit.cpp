#include "sas/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "sas/error.hpp"

namespace sas {

LineModel parse_line_model(std::string_view text) {
    if (text == "lorentzian") return LineModel::Lorentzian;
    if (text == "gaussian") return LineModel::Gaussian;
    throw ParseError(fmt::format("unknown line model '{}'", text));
}

namespace {

using Vec4 = Eigen::Vector4d;

struct ShapeEval {
    double value;
    double d_du;
};

ShapeEval shape(LineModel model, double u) {
    if (model == LineModel::Lorentzian) {
        const double q = 1.0 / (1.0 + 4.0 * u * u);
        return {q, -8.0 * u * q * q};
    }
    const double k = 4.0 * std::numbers::ln2;
    const double g = std::exp(-k * u * u);
    return {g, -2.0 * k * u * g};
}

double median(std::vector<double> v) {
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    return v[mid];
}

}  // namespace

FitResult fit_lineshape(std::span<const double> x, std::span<const double> y, LineModel model,
                        const FitOptions& options) {
    const auto n = x.size();
    if (n < 8 || y.size() != n) throw ValidationError("fit needs at least 8 samples of matching x and y");

    // Work in a unit box so Hz-scale centres and volt-scale amplitudes condition alike.
    const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
    const double xm = 0.5 * (*xmin_it + *xmax_it);
    const double xs = 0.5 * (*xmax_it - *xmin_it);
    if (!(xs > 0.0)) throw ValidationError("fit segment has zero span");
    const double ym = median({y.begin(), y.end()});
    double ys = 0.0;
    for (double v : y) ys = std::max(ys, std::abs(v - ym));
    if (ys == 0.0) ys = 1.0;

    std::vector<double> xn(n), yn(n);
    for (std::size_t i = 0; i < n; ++i) {
        xn[i] = (x[i] - xm) / xs;
        yn[i] = (y[i] - ym) / ys;
    }

    std::size_t k = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs(yn[i]) > std::abs(yn[k])) k = i;
    }
    Vec4 p(yn[k], xn[k], 1.0, 0.0);  // amplitude, centre, width, offset

    auto cost_of = [&](const Vec4& q) {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = q[3] + q[0] * shape(model, (xn[i] - q[1]) / q[2]).value - yn[i];
            c += r * r;
        }
        return c;
    };

    double cost = cost_of(p);
    double lambda = 1e-3;
    bool converged = cost <= 1e-28;
    int it = 0;
    while (!converged && it < options.max_iterations) {
        ++it;
        Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
        Vec4 jtr = Vec4::Zero();
        for (std::size_t i = 0; i < n; ++i) {
            const double u = (xn[i] - p[1]) / p[2];
            const auto s = shape(model, u);
            const double r = p[3] + p[0] * s.value - yn[i];
            Vec4 j(s.value, -p[0] * s.d_du / p[2], -p[0] * s.d_du * u / p[2], 1.0);
            jtj.noalias() += j * j.transpose();
            jtr.noalias() += j * r;
        }

        bool improved = false;
        while (lambda < 1e12) {
            Eigen::Matrix4d a = jtj;
            for (int d = 0; d < 4; ++d) a(d, d) += lambda * std::max(jtj(d, d), 1e-12);
            Vec4 step = a.ldlt().solve(-jtr);
            Vec4 trial = p + step;
            if (!(trial[2] > 0.0)) trial[2] = 0.5 * p[2];
            const double trial_cost = cost_of(trial);
            if (std::isfinite(trial_cost) && trial_cost <= cost) {
                const double change = cost - trial_cost;
                p = trial;
                cost = trial_cost;
                lambda = std::max(lambda * 0.1, 1e-12);
                improved = true;
                converged = change <= options.tolerance * std::max(cost, 1e-30) || step.norm() < 1e-13 ||
                            cost <= 1e-28;
                break;
            }
            lambda *= 10.0;
        }
        // No downhill step at any damping: already at the minimum.
        if (!improved) converged = true;
    }
    if (!converged)
        throw FitError(fmt::format("line-shape fit did not converge in {} iterations", options.max_iterations));

    FitResult out;
    out.amplitude = p[0] * ys;
    out.center_hz = p[1] * xs + xm;
    out.width_hz = std::abs(p[2]) * xs;
    out.offset = p[3] * ys + ym;
    out.rms_residual = std::sqrt(cost / static_cast<double>(n)) * ys;
    out.iterations = it;
    return out;
}

FitResult fit_lineshape(const SweepTrace& segment, LineModel model, Channel channel, const FitOptions& options) {
    const auto& y = channel == Channel::Reference ? segment.reference_v
                    : channel == Channel::Probe   ? segment.probe_v
                                                  : segment.differential_v;
    return fit_lineshape(segment.detuning_hz, y, model, options);
}

}  // namespace sas
