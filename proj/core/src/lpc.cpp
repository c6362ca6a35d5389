#include "vcmorph/lpc.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <iostream>
#include <numbers>

#include "vcmorph/errors.hpp"

namespace vc {

std::vector<double> autocorrelate(std::span<const double> frame, int max_lag) {
    if (static_cast<int>(frame.size()) <= max_lag) {
        throw DataError("autocorrelate: frame length " + std::to_string(frame.size()) +
                        " <= max_lag " + std::to_string(max_lag));
    }
    std::vector<double> r(max_lag + 1, 0.0);
    const std::size_t n = frame.size();
    for (int k = 0; k <= max_lag; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i + k < n; ++i) acc += frame[i] * frame[i + k];
        r[k] = acc;
    }
    return r;
}

LpcModel levinson_durbin(std::span<const double> r, int order) {
    if (static_cast<int>(r.size()) < order + 1) {
        throw DataError("levinson_durbin: need " + std::to_string(order + 1) +
                        " autocorrelation lags, got " + std::to_string(r.size()));
    }
    if (r[0] <= 0.0) {
        throw NumericalError("levinson_durbin: degenerate signal (r[0] <= 0)");
    }

    std::vector<double> a(order, 0.0);
    double err = r[0];
    for (int m = 0; m < order; ++m) {
        if (err <= 0.0) {
            std::cerr << "warning: Levinson-Durbin terminated early at order " << m
                      << " (zero prediction error)\n";
            break;
        }
        double acc = r[m + 1];
        for (int k = 0; k < m; ++k) acc -= a[k] * r[m - k];
        const double reflection = acc / err;

        std::vector<double> prev(a.begin(), a.begin() + m);
        a[m] = reflection;
        for (int k = 0; k < m; ++k) a[k] = prev[k] - reflection * prev[m - 1 - k];
        err *= (1.0 - reflection * reflection);
    }

    LpcModel m;
    m.order = order;
    m.coeffs = std::move(a);
    // gain² = prediction-error power; callers that need the exact per-frame
    // residual RMS recompute it from the residual.
    m.gain = err > 0.0 ? std::sqrt(err) : 0.0;
    return m;
}

std::vector<double> inverse_filter(std::span<const double> frame, const LpcModel& m,
                                   std::span<const double> history) {
    const int p = m.order;
    std::vector<double> e(frame.size());
    auto sample_at = [&](std::ptrdiff_t idx) -> double {
        if (idx >= 0) return frame[static_cast<std::size_t>(idx)];
        std::ptrdiff_t h = static_cast<std::ptrdiff_t>(history.size()) + idx;
        return h >= 0 ? history[static_cast<std::size_t>(h)] : 0.0;
    };
    for (std::size_t n = 0; n < frame.size(); ++n) {
        double pred = 0.0;
        for (int k = 1; k <= p; ++k) {
            pred += m.coeffs[k - 1] * sample_at(static_cast<std::ptrdiff_t>(n) - k);
        }
        e[n] = frame[n] - pred;
    }
    return e;
}

std::vector<double> synthesize(const LpcModel& m, std::span<const double> excitation,
                               std::span<const double> history) {
    const int p = m.order;
    std::vector<double> y(excitation.size());
    auto out_at = [&](std::ptrdiff_t idx) -> double {
        if (idx >= 0) return y[static_cast<std::size_t>(idx)];
        std::ptrdiff_t h = static_cast<std::ptrdiff_t>(history.size()) + idx;
        return h >= 0 ? history[static_cast<std::size_t>(h)] : 0.0;
    };
    for (std::size_t n = 0; n < excitation.size(); ++n) {
        double acc = excitation[n];
        for (int k = 1; k <= p; ++k) {
            acc += m.coeffs[k - 1] * out_at(static_cast<std::ptrdiff_t>(n) - k);
        }
        if (!std::isfinite(acc)) {
            throw NumericalError("synthesize: filter diverged at sample " + std::to_string(n));
        }
        y[n] = acc;
    }
    return y;
}

std::vector<double> spectral_envelope(const LpcModel& m, int n_points) {
    if (n_points < 2) throw DataError("spectral_envelope: n_points must be >= 2");
    std::vector<double> env(n_points);
    const double g = m.gain > 0.0 ? m.gain : 1e-12;
    for (int i = 0; i < n_points; ++i) {
        const double w = std::numbers::pi * i / (n_points - 1);
        double re = 1.0, im = 0.0;
        for (int k = 1; k <= m.order; ++k) {
            re -= m.coeffs[k - 1] * std::cos(w * k);
            im += m.coeffs[k - 1] * std::sin(w * k);
        }
        const double mag = std::sqrt(re * re + im * im);
        env[i] = 20.0 * std::log10(g / std::max(mag, 1e-300));
    }
    return env;
}

bool is_stable(const LpcModel& m) {
    const int p = m.order;
    if (p == 0) return true;
    // Roots of z^p - a_1 z^{p-1} - ... - a_p via the companion matrix.
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(p, p);
    for (int k = 0; k < p; ++k) c(0, k) = m.coeffs[k];
    for (int k = 1; k < p; ++k) c(k, k - 1) = 1.0;
    Eigen::VectorXcd roots = c.eigenvalues();
    for (int k = 0; k < p; ++k) {
        if (std::abs(roots[k]) >= 1.0 - 1e-12) return false;
    }
    return true;
}

LpcModel bandwidth_expand(const LpcModel& m, double factor) {
    LpcModel out = m;
    double f = factor;
    for (int k = 0; k < m.order; ++k) {
        out.coeffs[k] *= f;
        f *= factor;
    }
    return out;
}

double max_root_radius(const LpcModel& m) {
    const int p = m.order;
    if (p == 0) return 0.0;
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(p, p);
    for (int k = 0; k < p; ++k) c(0, k) = m.coeffs[k];
    for (int k = 1; k < p; ++k) c(k, k - 1) = 1.0;
    const Eigen::VectorXcd roots = c.eigenvalues();
    double r = 0.0;
    for (int k = 0; k < p; ++k) r = std::max(r, std::abs(roots[k]));
    return r;
}

LpcModel cap_pole_radius(LpcModel m, double max_radius) {
    for (int tries = 0; tries < 64 && max_root_radius(m) >= max_radius; ++tries) {
        m = bandwidth_expand(m, 0.994);
    }
    return m;
}

std::vector<double> hann_window(std::size_t n) {
    std::vector<double> w(n);
    if (n == 1) {
        w[0] = 1.0;
        return w;
    }
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
    }
    return w;
}

}  // namespace vc
