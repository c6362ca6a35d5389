#pragma once

#include <vector>

#include "vcmorph/lpc.hpp"

namespace vc {

/// Line spectral frequencies: strictly increasing values in (0, π).
struct LsfVector {
    std::vector<double> freqs;

    int order() const { return static_cast<int>(freqs.size()); }
};

/// Converts a stable LPC model to LSFs by locating the unit-circle zeros of
/// the sum/difference polynomials with a dense grid scan plus bisection.
/// Throws NumericalError when the zeros do not interleave (unstable model).
LsfVector lpc_to_lsf(const LpcModel& m);

/// Rebuilds the (stable) LPC polynomial from LSFs. `gain` is carried through
/// unchanged. Throws DataError on non-increasing or out-of-range frequencies.
LpcModel lsf_to_lpc(const LsfVector& v, double gain = 1.0);

/// Projects an arbitrary vector onto the strictly-increasing LSF cone in
/// (0, π) with minimum spacing `min_gap`. Used after mixture regression,
/// which can violate ordering.
LsfVector enforce_lsf_ordering(std::vector<double> freqs, double min_gap);

}  // namespace vc
