#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "jndq/dataset.hpp"

namespace jndq {

// Per-content mean opinion score with a normal-quantile 95% interval.
struct MosResult {
    std::vector<double> mean;
    std::vector<double> stddev;        // n-1 denominator
    std::vector<double> ci_halfwidth;  // 1.96 * stddev / sqrt(n)
    std::vector<std::size_t> n;
};

struct ZScoreReport {
    std::vector<double> max_abs_z;       // per subject, across contents
    std::vector<std::size_t> flagged;    // subject indices, ascending
    double threshold = 3.0;
};

inline MosResult mos_estimate(const Observations& obs) {
    validate(obs);
    const std::size_t C = obs.contents.size();
    MosResult mos;
    mos.mean.assign(C, 0.0);
    mos.stddev.assign(C, 0.0);
    mos.ci_halfwidth.assign(C, 0.0);
    mos.n.assign(C, 0);
    for (const auto& cell : obs.cells) {
        mos.mean[cell.content] += cell.jnd;
        ++mos.n[cell.content];
    }
    for (std::size_t c = 0; c < C; ++c)
        mos.mean[c] /= static_cast<double>(mos.n[c]);
    for (const auto& cell : obs.cells) {
        const double d = cell.jnd - mos.mean[cell.content];
        mos.stddev[cell.content] += d * d;
    }
    for (std::size_t c = 0; c < C; ++c) {
        mos.stddev[c] = mos.n[c] > 1
                            ? std::sqrt(mos.stddev[c] /
                                        static_cast<double>(mos.n[c] - 1))
                            : 0.0;
        mos.ci_halfwidth[c] =
            1.96 * mos.stddev[c] / std::sqrt(static_cast<double>(mos.n[c]));
    }
    return mos;
}

// z_cs = (y_cs - mean_c) / std_c against the per-content statistics over all
// subjects; a subject is flagged when its largest |z| across contents
// exceeds the threshold.  Contents with zero spread contribute z = 0.
inline ZScoreReport zscore_screen(const Observations& obs,
                                  double threshold = 3.0) {
    const MosResult mos = mos_estimate(obs);
    ZScoreReport report;
    report.threshold = threshold;
    report.max_abs_z.assign(obs.subjects.size(), 0.0);
    for (const auto& cell : obs.cells) {
        const double sd = mos.stddev[cell.content];
        const double z =
            sd > 0.0 ? (cell.jnd - mos.mean[cell.content]) / sd : 0.0;
        if (std::abs(z) > report.max_abs_z[cell.subject])
            report.max_abs_z[cell.subject] = std::abs(z);
    }
    for (std::size_t s = 0; s < obs.subjects.size(); ++s)
        if (report.max_abs_z[s] > threshold) report.flagged.push_back(s);
    return report;
}

}  // namespace jndq
