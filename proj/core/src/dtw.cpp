#include "vcmorph/dtw.hpp"

#include <cmath>
#include <limits>

#include "vcmorph/errors.hpp"

namespace vc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Backpointer codes, in tie-break priority order.
enum Step : unsigned char { kDiag = 0, kLeft = 1, kDown = 2, kNone = 3 };

}  // namespace

WarpPath dtw_align(const FeatureSequence& src, const FeatureSequence& tgt,
                   const DtwOptions& opts) {
    if (src.empty() || tgt.empty()) throw DataError("dtw_align: empty feature sequence");
    if (src.dim() != tgt.dim()) {
        throw DataError("dtw_align: dimension mismatch " + std::to_string(src.dim()) +
                        " vs " + std::to_string(tgt.dim()));
    }

    const int n = static_cast<int>(src.size());
    const int m = static_cast<int>(tgt.size());

    auto local = [&](int i, int j) {
        double d = (src.frames[i] - tgt.frames[j]).norm();
        if (!src.voiced.empty() && !tgt.voiced.empty() && src.voiced[i] != tgt.voiced[j]) {
            d += opts.vu_penalty;
        }
        return d;
    };

    std::vector<double> cost(static_cast<std::size_t>(n) * m, kInf);
    std::vector<unsigned char> back(static_cast<std::size_t>(n) * m, kNone);
    auto at = [m](int i, int j) { return static_cast<std::size_t>(i) * m + j; };

    for (int i = 0; i < n; ++i) {
        int j_lo = 0, j_hi = m - 1;
        if (opts.band >= 0) {
            // Sakoe-Chiba band around the stretched diagonal.
            const double slope = n > 1 ? static_cast<double>(m - 1) / (n - 1) : 0.0;
            const int center = static_cast<int>(std::lround(i * slope));
            j_lo = std::max(0, center - opts.band);
            j_hi = std::min(m - 1, center + opts.band);
        }
        for (int j = j_lo; j <= j_hi; ++j) {
            const double d = local(i, j);
            if (i == 0 && j == 0) {
                cost[at(i, j)] = d;
                back[at(i, j)] = kNone;
                continue;
            }
            double best = kInf;
            unsigned char step = kNone;
            // tie-break preference: diagonal, then (1,0), then (0,1)
            if (i > 0 && j > 0 && cost[at(i - 1, j - 1)] < best) {
                best = cost[at(i - 1, j - 1)];
                step = kDiag;
            }
            if (i > 0 && cost[at(i - 1, j)] < best) {
                best = cost[at(i - 1, j)];
                step = kLeft;
            }
            if (j > 0 && cost[at(i, j - 1)] < best) {
                best = cost[at(i, j - 1)];
                step = kDown;
            }
            if (best == kInf) continue;
            cost[at(i, j)] = best + d;
            back[at(i, j)] = step;
        }
    }

    if (cost[at(n - 1, m - 1)] == kInf) {
        throw NumericalError("dtw_align: no admissible path (band too narrow)");
    }

    WarpPath path;
    path.total_cost = cost[at(n - 1, m - 1)];
    int i = n - 1, j = m - 1;
    while (true) {
        path.pairs.emplace_back(i, j);
        const unsigned char step = back[at(i, j)];
        if (step == kNone) break;
        if (step == kDiag) {
            --i;
            --j;
        } else if (step == kLeft) {
            --i;
        } else {
            --j;
        }
    }
    std::reverse(path.pairs.begin(), path.pairs.end());
    return path;
}

std::vector<Eigen::VectorXd> paired_vectors(const FeatureSequence& src,
                                            const FeatureSequence& tgt,
                                            const WarpPath& path) {
    const int d = src.dim();
    std::vector<Eigen::VectorXd> out;
    out.reserve(path.pairs.size());
    for (const auto& [i, j] : path.pairs) {
        Eigen::VectorXd z(2 * d);
        z.head(d) = src.frames[i];
        z.tail(d) = tgt.frames[j];
        out.push_back(std::move(z));
    }
    return out;
}

}  // namespace vc
