#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include "jndq/dataset.hpp"
#include "jndq/errors.hpp"
#include "jndq/model.hpp"
#include "jndq/prng.hpp"

namespace jndq {

struct FitConfig {
    int max_iterations = 1000;
    double tolerance = 1e-6;      // max absolute parameter change per sweep
    double variance_floor = 1e-2; // lower bound on the spreads v_c, v_s (QP)
    bool backtracking = true;
    int restarts = 1;
};

struct FitResult {
    ModelParams params;
    // 95% halfwidths per parameter; NaN where the curvature is not negative.
    std::vector<double> ci_y_c;
    std::vector<double> ci_b_s;
    std::vector<double> ci_v_c;
    std::vector<double> ci_v_s;
    std::vector<double> loglik_trace;  // initial point, then one entry per sweep
    int iterations = 0;
    bool converged = false;
};

// First and second partials of the log-likelihood with respect to each
// scalar parameter (diagonal curvature only).
struct Derivatives {
    std::vector<double> d1_y_c, d2_y_c;
    std::vector<double> d1_b_s, d2_b_s;
    std::vector<double> d1_v_c, d2_v_c;
    std::vector<double> d1_v_s, d2_v_s;
};

inline void check_dimensions(const ModelParams& params,
                             const Observations& obs) {
    if (params.y_c.size() != obs.contents.size() ||
        params.v_c.size() != obs.contents.size() ||
        params.b_s.size() != obs.subjects.size() ||
        params.v_s.size() != obs.subjects.size())
        throw DataError("parameter dimensions do not match dataset");
}

// Full Gaussian log-likelihood of the observed cells:
//   sum over cells of  -log(2*pi)/2 - log(V)/2 - r^2/(2V)
// with r = y_cs - y_c - b_s and V = v_c^2 + v_s^2.  Constants are kept so
// the reported values are interpretable densities; Newton steps are
// invariant to any positive rescaling anyway.  Cells are accumulated in
// index order so results are bit-reproducible.
inline double log_likelihood(const ModelParams& params,
                             const Observations& obs) {
    check_dimensions(params, obs);
    constexpr double half_log_2pi = 0.5 * 1.8378770664093453;
    double total = 0.0;
    for (const auto& cell : obs.cells) {
        const double vc = params.v_c[cell.content];
        const double vs = params.v_s[cell.subject];
        const double V = vc * vc + vs * vs;
        const double r = cell.jnd - params.y_c[cell.content] -
                         params.b_s[cell.subject];
        total += -half_log_2pi - 0.5 * std::log(V) - r * r / (2.0 * V);
    }
    return total;
}

inline Derivatives derivatives(const ModelParams& params,
                               const Observations& obs) {
    check_dimensions(params, obs);
    const std::size_t C = obs.contents.size();
    const std::size_t S = obs.subjects.size();
    Derivatives d;
    d.d1_y_c.assign(C, 0.0); d.d2_y_c.assign(C, 0.0);
    d.d1_b_s.assign(S, 0.0); d.d2_b_s.assign(S, 0.0);
    d.d1_v_c.assign(C, 0.0); d.d2_v_c.assign(C, 0.0);
    d.d1_v_s.assign(S, 0.0); d.d2_v_s.assign(S, 0.0);
    for (const auto& cell : obs.cells) {
        const std::size_t c = cell.content, s = cell.subject;
        const double vc = params.v_c[c], vs = params.v_s[s];
        const double w = 1.0 / (vc * vc + vs * vs);
        const double r = cell.jnd - params.y_c[c] - params.b_s[s];
        const double rw = r * w;

        d.d1_y_c[c] += rw;
        d.d2_y_c[c] -= w;
        d.d1_b_s[s] += rw;
        d.d2_b_s[s] -= w;

        // d/dv of -log(V)/2 - r^2/(2V) with V = vc^2 + vs^2:
        //   L'  = v*w*(r^2*w - 1)
        //   L'' = r^2*w^2*(1 - 4*v^2*w) - w + 2*v^2*w^2
        const double r2w = r * rw;
        d.d1_v_c[c] += vc * w * (r2w - 1.0);
        d.d2_v_c[c] += r2w * w * (1.0 - 4.0 * vc * vc * w) - w +
                       2.0 * vc * vc * w * w;
        d.d1_v_s[s] += vs * w * (r2w - 1.0);
        d.d2_v_s[s] += r2w * w * (1.0 - 4.0 * vs * vs * w) - w +
                       2.0 * vs * vs * w * w;
    }
    return d;
}

namespace detail {

// Initialization from the MOS solution: per-content means, per-subject mean
// residuals (re-centered), residual standard deviations for the spreads.
inline ModelParams warm_start(const Observations& obs, double floor) {
    const std::size_t C = obs.contents.size();
    const std::size_t S = obs.subjects.size();
    ModelParams p;
    p.y_c.assign(C, 0.0);
    p.b_s.assign(S, 0.0);
    p.kappa = kappa(SearchSchedule{});

    std::vector<std::size_t> nc(C, 0), ns(S, 0);
    for (const auto& cell : obs.cells) {
        p.y_c[cell.content] += cell.jnd;
        ++nc[cell.content];
    }
    for (std::size_t c = 0; c < C; ++c)
        p.y_c[c] /= static_cast<double>(nc[c]);
    for (const auto& cell : obs.cells) {
        p.b_s[cell.subject] += cell.jnd - p.y_c[cell.content];
        ++ns[cell.subject];
    }
    for (std::size_t s = 0; s < S; ++s)
        p.b_s[s] /= static_cast<double>(ns[s]);
    double off = 0.0;
    for (double b : p.b_s) off += b;
    off /= static_cast<double>(S);
    for (double& b : p.b_s) b -= off;
    for (double& y : p.y_c) y += off;

    std::vector<double> ssc(C, 0.0), sss(S, 0.0);
    for (const auto& cell : obs.cells) {
        const double r = cell.jnd - p.y_c[cell.content] - p.b_s[cell.subject];
        ssc[cell.content] += r * r;
        sss[cell.subject] += r * r;
    }
    p.v_c.assign(C, floor);
    p.v_s.assign(S, floor);
    for (std::size_t c = 0; c < C; ++c)
        if (nc[c] > 1)
            p.v_c[c] = std::max(
                floor, std::sqrt(ssc[c] / static_cast<double>(nc[c] - 1)));
    for (std::size_t s = 0; s < S; ++s)
        if (ns[s] > 1)
            p.v_s[s] = std::max(
                floor, std::sqrt(sss[s] / static_cast<double>(ns[s] - 1)));
    return p;
}

struct SweepOutcome {
    ModelParams params;
    std::vector<double> trace;
    int iterations = 0;
    bool converged = false;
};

// Block-coordinate ascent: per sweep, Newton-update all y_c, then all b_s,
// then all v_c, then all v_s.  A coordinate falls back to a clamped gradient
// step when its curvature is not negative; a decrease in likelihood triggers
// block-level step halving; spreads are projected onto [floor, inf).  After
// each sweep the subject biases are re-centered to sum to zero, the offset
// moving into y_c (the likelihood is invariant under that shift).
inline SweepOutcome run_sweeps(const Observations& obs, ModelParams params,
                               const FitConfig& config) {
    const std::size_t C = obs.contents.size();
    const std::size_t S = obs.subjects.size();
    const double floor = config.variance_floor;
    SweepOutcome out;

    double L = log_likelihood(params, obs);
    out.trace.push_back(L);

    std::vector<double> prev(2 * C + 2 * S);
    auto snapshot = [&](const ModelParams& p, std::vector<double>& dst) {
        std::size_t i = 0;
        for (double v : p.y_c) dst[i++] = v;
        for (double v : p.b_s) dst[i++] = v;
        for (double v : p.v_c) dst[i++] = v;
        for (double v : p.v_s) dst[i++] = v;
    };

    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        out.iterations = iter;
        snapshot(params, prev);

        for (int block = 0; block < 4; ++block) {
            const Derivatives d = derivatives(params, obs);
            const std::vector<double>* g = nullptr;
            const std::vector<double>* h = nullptr;
            std::vector<double>* target = nullptr;
            bool is_spread = false;
            switch (block) {
                case 0: g = &d.d1_y_c; h = &d.d2_y_c; target = &params.y_c; break;
                case 1: g = &d.d1_b_s; h = &d.d2_b_s; target = &params.b_s; break;
                case 2: g = &d.d1_v_c; h = &d.d2_v_c; target = &params.v_c;
                        is_spread = true; break;
                default: g = &d.d1_v_s; h = &d.d2_v_s; target = &params.v_s;
                         is_spread = true; break;
            }
            std::vector<double> delta(target->size());
            for (std::size_t i = 0; i < delta.size(); ++i)
                delta[i] = (*h)[i] < 0.0
                               ? -(*g)[i] / (*h)[i]
                               : std::clamp((*g)[i], -1.0, 1.0);

            const std::vector<double> base = *target;
            double step = 1.0;
            while (true) {
                for (std::size_t i = 0; i < delta.size(); ++i) {
                    double v = base[i] + step * delta[i];
                    (*target)[i] = is_spread ? std::max(floor, v) : v;
                }
                const double Lnew = log_likelihood(params, obs);
                if (!config.backtracking || Lnew >= L - 1e-12) {
                    L = Lnew;
                    break;
                }
                step *= 0.5;
                if (step < 0x1.0p-60) {  // no acceptable step; keep the block
                    *target = base;
                    break;
                }
            }
        }

        double off = 0.0;
        for (double b : params.b_s) off += b;
        off /= static_cast<double>(S);
        for (double& b : params.b_s) b -= off;
        for (double& y : params.y_c) y += off;
        L = log_likelihood(params, obs);
        out.trace.push_back(L);

        double change = 0.0;
        std::size_t i = 0;
        for (double v : params.y_c) change = std::max(change, std::abs(v - prev[i++]));
        for (double v : params.b_s) change = std::max(change, std::abs(v - prev[i++]));
        for (double v : params.v_c) change = std::max(change, std::abs(v - prev[i++]));
        for (double v : params.v_s) change = std::max(change, std::abs(v - prev[i++]));
        if (change <= config.tolerance) {
            out.converged = true;
            break;
        }
    }
    out.params = std::move(params);
    return out;
}

}  // namespace detail

// Per-parameter 95% intervals from the diagonal curvature at the fit:
// halfwidth = 1.96 / sqrt(-L'').  Parameters whose curvature is not negative
// get NaN (interval unavailable) rather than an imaginary width.
inline void confidence_intervals(FitResult& result, const Observations& obs) {
    const Derivatives d = derivatives(result.params, obs);
    auto halfwidths = [](const std::vector<double>& d2) {
        std::vector<double> hw(d2.size());
        for (std::size_t i = 0; i < d2.size(); ++i)
            hw[i] = d2[i] < 0.0
                        ? 1.96 / std::sqrt(-d2[i])
                        : std::numeric_limits<double>::quiet_NaN();
        return hw;
    };
    result.ci_y_c = halfwidths(d.d2_y_c);
    result.ci_b_s = halfwidths(d.d2_b_s);
    result.ci_v_c = halfwidths(d.d2_v_c);
    result.ci_v_s = halfwidths(d.d2_v_s);
}

inline FitResult fit(const Observations& obs, const FitConfig& config = {}) {
    validate(obs);
    if (config.tolerance <= 0.0 || config.variance_floor <= 0.0 ||
        config.max_iterations < 0 || config.restarts < 1)
        throw ConfigError("invalid fit configuration");

    detail::SweepOutcome best;
    bool have_best = false;
    for (int restart = 0; restart < config.restarts; ++restart) {
        ModelParams init = detail::warm_start(obs, config.variance_floor);
        if (restart > 0) {
            // Jittered re-initialization; deterministic per restart index.
            SplitMix64 rng = substream(0x6a6e6466u, static_cast<std::uint64_t>(restart));
            for (double& y : init.y_c) y += rng.next_normal();
            double off = 0.0;
            for (double& b : init.b_s) {
                b += rng.next_normal();
                off += b;
            }
            off /= static_cast<double>(init.b_s.size());
            for (double& b : init.b_s) b -= off;
            for (double& y : init.y_c) y += off;
            for (double& v : init.v_c)
                v = std::max(config.variance_floor,
                             v * std::exp(0.25 * rng.next_normal()));
            for (double& v : init.v_s)
                v = std::max(config.variance_floor,
                             v * std::exp(0.25 * rng.next_normal()));
        }
        detail::SweepOutcome outcome =
            detail::run_sweeps(obs, std::move(init), config);
        if (!have_best || outcome.trace.back() > best.trace.back()) {
            best = std::move(outcome);
            have_best = true;
        }
    }

    FitResult result;
    result.params = std::move(best.params);
    result.loglik_trace = std::move(best.trace);
    result.iterations = best.iterations;
    result.converged = best.converged;
    confidence_intervals(result, obs);
    return result;
}

}  // namespace jndq
