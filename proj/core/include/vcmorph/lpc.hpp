#pragma once

#include <span>
#include <vector>

namespace vc {

/// All-pole model in prediction form: x̂[n] = Σ_{k=1..p} coeffs[k-1]·x[n-k].
/// The inverse filter is A(z) = 1 - Σ coeffs[k-1] z^{-k}.
struct LpcModel {
    int order = 0;
    std::vector<double> coeffs;  // a_1 .. a_p
    double gain = 0.0;           // residual RMS
};

/// r[k] = Σ_n x[n]·x[n+k] for k = 0..max_lag.
std::vector<double> autocorrelate(std::span<const double> frame, int max_lag);

/// Solves the Yule-Walker equations by Levinson-Durbin recursion.
/// gain is the prediction-error RMS. Throws NumericalError when r[0] <= 0.
LpcModel levinson_durbin(std::span<const double> r, int order);

/// e[n] = x[n] - Σ a_k x[n-k]; history supplies the p samples preceding
/// the frame (short histories are zero-padded on the left).
std::vector<double> inverse_filter(std::span<const double> frame,
                                   const LpcModel& m,
                                   std::span<const double> history);

/// y[n] = e[n] + Σ a_k y[n-k]. Exact inverse of inverse_filter for the same
/// history. Throws NumericalError if the recursion diverges to non-finite.
std::vector<double> synthesize(const LpcModel& m,
                               std::span<const double> excitation,
                               std::span<const double> history);

/// 20·log10(gain / |A(e^{jω})|) at n_points uniform frequencies in [0, π].
std::vector<double> spectral_envelope(const LpcModel& m, int n_points);

/// True when all roots of A(z) lie strictly inside the unit circle.
bool is_stable(const LpcModel& m);

/// Scales a_k by factor^k, pulling roots toward the origin.
LpcModel bandwidth_expand(const LpcModel& m, double factor);

/// Largest root magnitude of A(z), via the companion matrix.
double max_root_radius(const LpcModel& m);

/// Repeated bandwidth expansion (factor 0.994 per pass) until every root has
/// magnitude below max_radius. A pole hugging the unit circle is stable on
/// paper but rings for hundreds of milliseconds when driven by an
/// excitation; real vocal-tract resonances have bandwidths of tens of Hz at
/// minimum, so models used for synthesis are capped away from the circle.
LpcModel cap_pole_radius(LpcModel m, double max_radius);

std::vector<double> hann_window(std::size_t n);

}  // namespace vc
