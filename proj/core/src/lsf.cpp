#include "vcmorph/lsf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vcmorph/errors.hpp"

namespace vc {

namespace {

constexpr int kGridPoints = 4096;
constexpr int kBisectIters = 64;

// Polynomials are coefficient vectors in z^{-1}, lowest power first.

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

// Exact synthetic division by (1 + c·z^{-1} + d·z^{-2}) style linear/quadratic
// factors used below.
std::vector<double> poly_div_linear(const std::vector<double>& a, double root_coef) {
    // divide by (1 + root_coef z^{-1}); remainder discarded (zero by construction)
    std::vector<double> out(a.size() - 1, 0.0);
    double carry = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = a[i] - carry;
        carry = out[i] * root_coef;
    }
    return out;
}

std::vector<double> poly_div_quadratic(const std::vector<double>& a, double c1, double c2) {
    // divide by (1 + c1 z^{-1} + c2 z^{-2})
    std::vector<double> out(a.size() - 2, 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double v = a[i];
        if (i >= 1) v -= c1 * out[i - 1];
        if (i >= 2) v -= c2 * out[i - 2];
        out[i] = v;
    }
    return out;
}

// Value of a palindromic polynomial of even degree 2m on the unit circle,
// with the e^{-jmω} phase factored out:
//   g(ω) = b_m + 2 Σ_{i=1..m} b_{m-i} cos(iω)
double sym_eval(const std::vector<double>& b, double w) {
    const int m = static_cast<int>(b.size() - 1) / 2;
    double acc = b[m];
    for (int i = 1; i <= m; ++i) acc += 2.0 * b[m - i] * std::cos(i * w);
    return acc;
}

std::vector<double> find_zeros(const std::vector<double>& b, int expected) {
    std::vector<double> zeros;
    const double lo = 0.0, hi = std::numbers::pi;
    double prev_w = lo;
    double prev_g = sym_eval(b, prev_w);
    for (int i = 1; i <= kGridPoints; ++i) {
        const double w = lo + (hi - lo) * i / kGridPoints;
        const double g = sym_eval(b, w);
        if (g == 0.0) {
            if (w > 0.0 && w < std::numbers::pi) zeros.push_back(w);
        } else if (prev_g * g < 0.0) {
            double a = prev_w, c = w, ga = prev_g;
            for (int it = 0; it < kBisectIters; ++it) {
                const double mid = 0.5 * (a + c);
                const double gm = sym_eval(b, mid);
                if (gm == 0.0) {
                    a = c = mid;
                    break;
                }
                if (ga * gm < 0.0) {
                    c = mid;
                } else {
                    a = mid;
                    ga = gm;
                }
            }
            zeros.push_back(0.5 * (a + c));
        } else if (prev_g == 0.0 && prev_w == 0.0) {
            // leading boundary zero is not an LSF
        }
        prev_w = w;
        prev_g = g;
    }
    if (static_cast<int>(zeros.size()) != expected) {
        throw NumericalError("LSF root search found " + std::to_string(zeros.size()) +
                             " zeros, expected " + std::to_string(expected) +
                             " (unstable or ill-conditioned model)");
    }
    return zeros;
}

}  // namespace

LsfVector lpc_to_lsf(const LpcModel& m) {
    const int p = m.order;
    if (p == 0) return {};

    // A(z) = 1 - Σ a_k z^{-k}
    std::vector<double> c(p + 2, 0.0);
    c[0] = 1.0;
    for (int k = 1; k <= p; ++k) c[k] = -m.coeffs[k - 1];

    std::vector<double> sum(p + 2), diff(p + 2);
    for (int i = 0; i <= p + 1; ++i) {
        sum[i] = c[i] + c[p + 1 - i];
        diff[i] = c[i] - c[p + 1 - i];
    }

    std::vector<double> sum_d, diff_d;
    int n_sum, n_diff;
    if (p % 2 == 0) {
        sum_d = poly_div_linear(sum, 1.0);    // remove root at z = -1
        diff_d = poly_div_linear(diff, -1.0); // remove root at z = +1
        n_sum = p / 2;
        n_diff = p / 2;
    } else {
        sum_d = sum;                           // already even-degree palindrome
        diff_d = poly_div_quadratic(diff, 0.0, -1.0);  // remove z = ±1
        n_sum = (p + 1) / 2;
        n_diff = (p - 1) / 2;
    }

    auto sum_zeros = find_zeros(sum_d, n_sum);
    auto diff_zeros = find_zeros(diff_d, n_diff);

    LsfVector v;
    v.freqs.resize(p);
    // The sum-polynomial zero is always the lower one of each pair.
    std::size_t si = 0, di = 0;
    for (int i = 0; i < p; ++i) {
        v.freqs[i] = (i % 2 == 0) ? sum_zeros[si++] : diff_zeros[di++];
    }
    for (int i = 1; i < p; ++i) {
        if (!(v.freqs[i] > v.freqs[i - 1])) {
            throw NumericalError("LSFs do not interleave: model is unstable");
        }
    }
    return v;
}

LpcModel lsf_to_lpc(const LsfVector& v, double gain) {
    const int p = v.order();
    for (int i = 0; i < p; ++i) {
        const double f = v.freqs[i];
        if (!(f > 0.0) || !(f < std::numbers::pi)) {
            throw DataError("LSF out of (0, pi): " + std::to_string(f));
        }
        if (i > 0 && !(f > v.freqs[i - 1])) {
            throw DataError("LSFs not strictly increasing");
        }
    }

    std::vector<double> sum{1.0}, diff{1.0};
    for (int i = 0; i < p; ++i) {
        const std::vector<double> factor{1.0, -2.0 * std::cos(v.freqs[i]), 1.0};
        if (i % 2 == 0) {
            sum = poly_mul(sum, factor);
        } else {
            diff = poly_mul(diff, factor);
        }
    }
    if (p % 2 == 0) {
        sum = poly_mul(sum, {1.0, 1.0});
        diff = poly_mul(diff, {1.0, -1.0});
    } else {
        diff = poly_mul(diff, {1.0, 0.0, -1.0});
    }

    LpcModel m;
    m.order = p;
    m.gain = gain;
    m.coeffs.resize(p);
    for (int k = 1; k <= p; ++k) {
        m.coeffs[k - 1] = -0.5 * (sum[k] + diff[k]);
    }
    return m;
}

LsfVector enforce_lsf_ordering(std::vector<double> freqs, double min_gap) {
    const int p = static_cast<int>(freqs.size());
    std::sort(freqs.begin(), freqs.end());

    // Pool-adjacent-violators on f_i - i·gap gives the closest non-decreasing
    // sequence with the required spacing.
    std::vector<double> g(p), block_sum(p);
    std::vector<int> block_len(p);
    int nb = 0;
    for (int i = 0; i < p; ++i) {
        g[i] = freqs[i] - i * min_gap;
        block_sum[nb] = g[i];
        block_len[nb] = 1;
        ++nb;
        while (nb > 1 && block_sum[nb - 1] / block_len[nb - 1] <
                             block_sum[nb - 2] / block_len[nb - 2]) {
            block_sum[nb - 2] += block_sum[nb - 1];
            block_len[nb - 2] += block_len[nb - 1];
            --nb;
        }
    }
    std::vector<double> out;
    out.reserve(p);
    for (int b = 0; b < nb; ++b) {
        const double mean = block_sum[b] / block_len[b];
        for (int i = 0; i < block_len[b]; ++i) out.push_back(mean);
    }
    for (int i = 0; i < p; ++i) out[i] += i * min_gap;

    double lo = min_gap;
    for (int i = 0; i < p; ++i) {
        out[i] = std::max(out[i], lo);
        lo = out[i] + min_gap;
    }
    double hi = std::numbers::pi - min_gap;
    for (int i = p - 1; i >= 0; --i) {
        out[i] = std::min(out[i], hi);
        hi = out[i] - min_gap;
    }
    return LsfVector{std::move(out)};
}

}  // namespace vc
