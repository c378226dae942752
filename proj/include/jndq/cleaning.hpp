#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "jndq/dataset.hpp"
#include "jndq/errors.hpp"
#include "jndq/model.hpp"

namespace jndq {

enum class ThresholdMode { absolute, robust };

// Thresholds are QP values in absolute mode and multiples of the MAD-scaled
// spread (1.4826 * MAD) in robust mode.
struct CleaningConfig {
    ThresholdMode bias_mode = ThresholdMode::robust;
    double bias_threshold = 2.0;
    ThresholdMode inconsistency_mode = ThresholdMode::robust;
    double inconsistency_threshold = 2.0;
};

// Conventional default when a mode is chosen without an explicit threshold.
inline double default_threshold(ThresholdMode mode) {
    return mode == ThresholdMode::absolute ? 10.0 : 2.0;
}

enum class FlagReason { bias, inconsistency, both };

struct CleaningReport {
    std::vector<std::size_t> flagged;  // subject indices, ascending
    std::vector<FlagReason> reasons;   // parallel to flagged
    CleaningConfig config;             // thresholds echoed
    std::size_t removed_cell_count = 0;
    double fraction_removed = 0.0;     // removed subjects / total subjects
};

namespace detail {

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double mad_spread(const std::vector<double>& v, double med) {
    std::vector<double> dev(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) dev[i] = std::abs(v[i] - med);
    return 1.4826 * median(std::move(dev));
}

}  // namespace detail

// Bias flag: |b_s| beyond the bias rule (two-sided; in robust mode the band
// is median +- threshold * 1.4826 * MAD of the b_s population).
// Inconsistency flag: v_s beyond the rule on the high side only; an
// unusually small spread is not a defect.
inline CleaningReport flag_subjects(const ModelParams& params,
                                    const CleaningConfig& config) {
    const std::size_t S = params.b_s.size();
    if (config.bias_threshold <= 0.0 || config.inconsistency_threshold <= 0.0)
        throw ConfigError("cleaning thresholds must be > 0");
    if ((config.bias_mode == ThresholdMode::robust ||
         config.inconsistency_mode == ThresholdMode::robust) &&
        S < 4)
        throw ConfigError(
            "robust thresholds need at least 4 subjects (MAD unstable)");

    std::vector<bool> bias_flag(S, false), incons_flag(S, false);
    if (config.bias_mode == ThresholdMode::absolute) {
        for (std::size_t s = 0; s < S; ++s)
            bias_flag[s] = std::abs(params.b_s[s]) > config.bias_threshold;
    } else {
        const double med = detail::median(params.b_s);
        const double band =
            config.bias_threshold * detail::mad_spread(params.b_s, med);
        for (std::size_t s = 0; s < S; ++s)
            bias_flag[s] = std::abs(params.b_s[s] - med) > band;
    }
    if (config.inconsistency_mode == ThresholdMode::absolute) {
        for (std::size_t s = 0; s < S; ++s)
            incons_flag[s] = params.v_s[s] > config.inconsistency_threshold;
    } else {
        const double med = detail::median(params.v_s);
        const double band = config.inconsistency_threshold *
                            detail::mad_spread(params.v_s, med);
        for (std::size_t s = 0; s < S; ++s)
            incons_flag[s] = params.v_s[s] - med > band;
    }

    CleaningReport report;
    report.config = config;
    for (std::size_t s = 0; s < S; ++s) {
        if (!bias_flag[s] && !incons_flag[s]) continue;
        report.flagged.push_back(s);
        report.reasons.push_back(bias_flag[s] && incons_flag[s]
                                     ? FlagReason::both
                                     : (bias_flag[s] ? FlagReason::bias
                                                     : FlagReason::inconsistency));
    }
    report.fraction_removed =
        S ? static_cast<double>(report.flagged.size()) / static_cast<double>(S)
          : 0.0;
    return report;
}

// Removes every cell of each flagged subject and re-validates the survivors.
// Fills in report.removed_cell_count.  Surviving cells are untouched.
inline Observations filter_dataset(const Observations& obs,
                                   CleaningReport& report) {
    for (std::size_t s : report.flagged)
        if (s >= obs.subjects.size())
            throw DataError("flagged subject index out of range");

    std::vector<bool> drop(obs.subjects.size(), false);
    for (std::size_t s : report.flagged) drop[s] = true;

    Observations out;
    std::vector<std::size_t> remap(obs.subjects.size());
    for (std::size_t s = 0; s < obs.subjects.size(); ++s) {
        remap[s] = out.subjects.size();
        if (!drop[s]) out.subjects.push_back(obs.subjects[s]);
    }
    out.contents = obs.contents;
    report.removed_cell_count = 0;
    for (const auto& cell : obs.cells) {
        if (drop[cell.subject]) {
            ++report.removed_cell_count;
            continue;
        }
        out.cells.push_back({cell.content, remap[cell.subject], cell.jnd});
    }
    validate(out);
    return out;
}

}  // namespace jndq
