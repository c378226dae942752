#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "jndq/dataset.hpp"
#include "jndq/errors.hpp"
#include "jndq/model.hpp"
#include "jndq/prng.hpp"

namespace jndq {

enum class SimMode { continuous, discrete };

struct SimulationConfig {
    GenerativeParams gen;
    std::size_t n_contents = 0;
    std::size_t n_subjects = 0;
    std::uint64_t seed = 0;
    SimMode mode = SimMode::continuous;
};

// The exact per-content/per-subject draws behind a simulated dataset, plus
// the observation-space parameters they imply.
struct GroundTruth {
    ModelParams model;
    std::vector<double> realized_epsilon;
    std::vector<double> realized_delta;
};

inline double sample_confidence(const GenerativeParams& gen, double eps_c,
                                double delta_s, int l) {
    const double p = mean_confidence(gen.confidence, l) +
                     gen.alpha * eps_c + gen.beta * delta_s;
    return std::clamp(p, 0.0, 1.0);
}

// One binary search: per round an independent Bernoulli "still unnoticeable"
// decision at probability sample_confidence, accumulating interval lengths.
// Discrete mode rounds the final location to the nearest integer QP, the
// form a real test would log.
inline std::pair<std::vector<int>, double> simulate_sequence(
    const GenerativeParams& gen, double eps_c, double delta_s, SimMode mode,
    SplitMix64& rng) {
    std::vector<int> decisions(static_cast<std::size_t>(gen.schedule.rounds));
    for (int l = 1; l <= gen.schedule.rounds; ++l) {
        const double p = sample_confidence(gen, eps_c, delta_s, l);
        decisions[static_cast<std::size_t>(l - 1)] =
            rng.next_double() < p ? 1 : 0;
    }
    double jnd = accumulate_jnd(gen.schedule, decisions);
    if (mode == SimMode::discrete)
        jnd = std::clamp(std::round(jnd), 0.0, 51.0);
    return {std::move(decisions), jnd};
}

inline void check_simulation_config(const SimulationConfig& config) {
    if (config.n_contents < 2 || config.n_subjects < 2)
        throw ConfigError("need at least 2 contents and 2 subjects");
    if (config.gen.content_mu.size() != config.n_contents ||
        config.gen.content_sigma.size() != config.n_contents ||
        config.gen.subject_mu.size() != config.n_subjects ||
        config.gen.subject_sigma.size() != config.n_subjects)
        throw ConfigError("hyperparameter vectors must match content/subject counts");
    for (double v : config.gen.content_sigma)
        if (v < 0.0) throw ConfigError("content_sigma must be >= 0");
    for (double v : config.gen.subject_sigma)
        if (v < 0.0) throw ConfigError("subject_sigma must be >= 0");
    if (config.gen.schedule.initial_interval <= 0.0 ||
        config.gen.schedule.rounds < 1)
        throw ConfigError("invalid search schedule");
    if (config.gen.confidence.gamma <= 0.0)
        throw ConfigError("gamma must be > 0");
}

// Content ids "c01".., subject ids "s01".., zero-padded so lexicographic
// order equals numeric order.
inline std::vector<std::string> numbered_ids(char prefix, std::size_t count) {
    const std::size_t width = std::to_string(count).size();
    std::vector<std::string> ids(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::string num = std::to_string(i + 1);
        ids[i] = prefix + std::string(width - num.size(), '0') + num;
    }
    return ids;
}

// Substream layout: stream 0 draws eps_c (ascending c), stream 1 draws
// delta_s (ascending s), stream 2 + c*S + s drives the search for cell
// (c, s).  Cells therefore do not share state and could be simulated in any
// order, or in parallel, with identical results.
inline std::pair<Observations, GroundTruth> simulate_dataset(
    const SimulationConfig& config) {
    check_simulation_config(config);
    const std::size_t C = config.n_contents;
    const std::size_t S = config.n_subjects;

    GroundTruth truth;
    truth.model = decompose(config.gen);
    truth.realized_epsilon.resize(C);
    truth.realized_delta.resize(S);
    SplitMix64 content_rng = substream(config.seed, 0);
    for (std::size_t c = 0; c < C; ++c)
        truth.realized_epsilon[c] = config.gen.content_mu[c] +
                                    config.gen.content_sigma[c] *
                                        content_rng.next_normal();
    SplitMix64 subject_rng = substream(config.seed, 1);
    for (std::size_t s = 0; s < S; ++s)
        truth.realized_delta[s] = config.gen.subject_mu[s] +
                                  config.gen.subject_sigma[s] *
                                      subject_rng.next_normal();

    Observations obs;
    obs.contents = numbered_ids('c', C);
    obs.subjects = numbered_ids('s', S);
    obs.cells.reserve(C * S);
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t s = 0; s < S; ++s) {
            SplitMix64 cell_rng = substream(config.seed, 2 + c * S + s);
            const double jnd =
                simulate_sequence(config.gen, truth.realized_epsilon[c],
                                  truth.realized_delta[s], config.mode,
                                  cell_rng)
                    .second;
            obs.cells.push_back({c, s, jnd});
        }
    validate(obs);
    return {std::move(obs), std::move(truth)};
}

}  // namespace jndq
