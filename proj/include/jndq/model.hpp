#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "jndq/errors.hpp"

namespace jndq {

// Binary-search schedule: round l probes an interval of initial_interval/2^l.
struct SearchSchedule {
    double initial_interval = 51.0;
    int rounds = 6;
};

// Mean confidence mu_l = (1 + e^(-gamma*l))/2, decreasing from 1 toward 1/2.
struct ConfidenceSchedule {
    double gamma = 0.7;
};

// Hyperparameters of the generative model.  Per round l of the search for
// cell (c, s), the "unnoticeable" probability is
//     p = clamp(mu_l + alpha*eps_c + beta*delta_s, 0, 1)
// with eps_c ~ N(content_mu[c], content_sigma[c]^2) drawn once per content
// and delta_s ~ N(subject_mu[s], subject_sigma[s]^2) once per subject.
struct GenerativeParams {
    SearchSchedule schedule;
    ConfidenceSchedule confidence;
    double alpha = 1.0;
    double beta = 1.0;
    std::vector<double> content_mu;
    std::vector<double> content_sigma;
    std::vector<double> subject_mu;
    std::vector<double> subject_sigma;
};

// Observation-space decomposition: a cell mean y_c + b_s with spread
// sqrt(v_c^2 + v_s^2), where kappa converts confidence units to QP.
// Convention: sum of b_s is zero; the common level lives in y_c.
struct ModelParams {
    std::vector<double> y_c;
    std::vector<double> v_c;
    std::vector<double> b_s;
    std::vector<double> v_s;
    double kappa = 0.0;
};

inline double interval(const SearchSchedule& sch, int l) {
    if (l < 1 || l > sch.rounds)
        throw std::out_of_range("round index out of range");
    return std::ldexp(sch.initial_interval, -l);
}

inline double mean_confidence(const ConfidenceSchedule& conf, int l) {
    if (l < 1) throw std::out_of_range("round index must be >= 1");
    return 0.5 * (1.0 + std::exp(-conf.gamma * static_cast<double>(l)));
}

inline double accumulate_jnd(const SearchSchedule& sch,
                             const std::vector<int>& decisions) {
    if (static_cast<int>(decisions.size()) != sch.rounds)
        throw std::invalid_argument("decision sequence length != rounds");
    double jnd = 0.0;
    for (int l = 1; l <= sch.rounds; ++l) {
        int x = decisions[static_cast<std::size_t>(l - 1)];
        if (x != 0 && x != 1)
            throw std::invalid_argument("decisions must be 0 or 1");
        if (x) jnd += std::ldexp(sch.initial_interval, -l);
    }
    return jnd;
}

inline double expected_jnd(const SearchSchedule& sch,
                           const std::vector<double>& p) {
    if (static_cast<int>(p.size()) != sch.rounds)
        throw std::invalid_argument("confidence sequence length != rounds");
    double jnd = 0.0;
    for (int l = 1; l <= sch.rounds; ++l) {
        double pl = p[static_cast<std::size_t>(l - 1)];
        if (!(pl >= 0.0 && pl <= 1.0))
            throw std::invalid_argument("confidence outside [0, 1]");
        jnd += pl * std::ldexp(sch.initial_interval, -l);
    }
    return jnd;
}

// kappa = sum over rounds of initial_interval/2^l.  Computed, not hard-coded:
// defaults give exactly 50.203125.
inline double kappa(const SearchSchedule& sch) {
    double k = 0.0;
    for (int l = 1; l <= sch.rounds; ++l)
        k += std::ldexp(sch.initial_interval, -l);
    return k;
}

// Closed-form observation-space parameters implied by the hyperparameters,
// using the unclamped linear algebra (clamping matters only to the
// simulator's tails).  The mean-confidence term contributes the same base
// level to every content.
inline ModelParams decompose(const GenerativeParams& gen) {
    ModelParams out;
    const double k = kappa(gen.schedule);
    double base = 0.0;
    for (int l = 1; l <= gen.schedule.rounds; ++l)
        base += mean_confidence(gen.confidence, l) *
                std::ldexp(gen.schedule.initial_interval, -l);

    const std::size_t C = gen.content_mu.size();
    const std::size_t S = gen.subject_mu.size();
    out.y_c.resize(C);
    out.v_c.resize(C);
    for (std::size_t c = 0; c < C; ++c) {
        out.y_c[c] = base + k * gen.alpha * gen.content_mu[c];
        out.v_c[c] = k * gen.alpha * gen.content_sigma[c];
    }
    out.b_s.resize(S);
    out.v_s.resize(S);
    for (std::size_t s = 0; s < S; ++s) {
        out.b_s[s] = k * gen.beta * gen.subject_mu[s];
        out.v_s[s] = k * gen.beta * gen.subject_sigma[s];
    }

    // Re-center so the subject biases sum to zero; the offset is part of the
    // common level and belongs to y_c.
    if (S > 0) {
        double off = 0.0;
        for (double b : out.b_s) off += b;
        off /= static_cast<double>(S);
        for (double& b : out.b_s) b -= off;
        for (double& y : out.y_c) y += off;
    }
    out.kappa = k;
    return out;
}

}  // namespace jndq
