#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "jndq/baselines.hpp"
#include "jndq/cleaning.hpp"
#include "jndq/dataset.hpp"
#include "jndq/errors.hpp"
#include "jndq/mle.hpp"
#include "jndq/model.hpp"
#include "jndq/simulator.hpp"

namespace jndq {

// Insertion-ordered documents so serialized field order is stable.
using Json = nlohmann::ordered_json;

inline Json to_json(const GenerativeParams& gen) {
    Json j;
    j["schedule"] = {{"initial_interval", gen.schedule.initial_interval},
                     {"rounds", gen.schedule.rounds}};
    j["confidence"] = {{"gamma", gen.confidence.gamma}};
    j["alpha"] = gen.alpha;
    j["beta"] = gen.beta;
    j["content_mu"] = gen.content_mu;
    j["content_sigma"] = gen.content_sigma;
    j["subject_mu"] = gen.subject_mu;
    j["subject_sigma"] = gen.subject_sigma;
    return j;
}

inline GenerativeParams generative_params_from_json(const Json& j) {
    try {
        GenerativeParams gen;
        if (j.contains("schedule")) {
            gen.schedule.initial_interval =
                j["schedule"].value("initial_interval", 51.0);
            gen.schedule.rounds = j["schedule"].value("rounds", 6);
        }
        if (j.contains("confidence"))
            gen.confidence.gamma = j["confidence"].value("gamma", 0.7);
        gen.alpha = j.value("alpha", 1.0);
        gen.beta = j.value("beta", 1.0);
        gen.content_mu = j.value("content_mu", std::vector<double>{});
        gen.content_sigma = j.value("content_sigma", std::vector<double>{});
        gen.subject_mu = j.value("subject_mu", std::vector<double>{});
        gen.subject_sigma = j.value("subject_sigma", std::vector<double>{});
        return gen;
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("bad generative params JSON: ") + e.what());
    }
}

inline Json to_json(const SimulationConfig& config) {
    Json j;
    j["gen"] = to_json(config.gen);
    j["n_contents"] = config.n_contents;
    j["n_subjects"] = config.n_subjects;
    j["seed"] = config.seed;
    j["mode"] = config.mode == SimMode::continuous ? "continuous" : "discrete";
    return j;
}

inline SimulationConfig simulation_config_from_json(const Json& j) {
    try {
        SimulationConfig config;
        if (j.contains("gen"))
            config.gen = generative_params_from_json(j["gen"]);
        config.n_contents = j.value("n_contents", std::size_t{0});
        config.n_subjects = j.value("n_subjects", std::size_t{0});
        config.seed = j.value("seed", std::uint64_t{0});
        const std::string mode = j.value("mode", "continuous");
        if (mode == "continuous") config.mode = SimMode::continuous;
        else if (mode == "discrete") config.mode = SimMode::discrete;
        else throw ConfigError("mode must be continuous or discrete");
        return config;
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("bad simulation config JSON: ") + e.what());
    }
}

inline Json to_json(const GroundTruth& truth) {
    Json j;
    j["model"] = {{"y_c", truth.model.y_c},
                  {"v_c", truth.model.v_c},
                  {"b_s", truth.model.b_s},
                  {"v_s", truth.model.v_s},
                  {"kappa", truth.model.kappa}};
    j["realized_epsilon"] = truth.realized_epsilon;
    j["realized_delta"] = truth.realized_delta;
    return j;
}

namespace detail {

// NaN serializes to null already; this keeps the intent explicit.
inline Json ci_value(double halfwidth) {
    if (std::isnan(halfwidth)) return nullptr;
    return halfwidth;
}

inline Json estimate_rows(const std::vector<std::string>& ids,
                          const char* id_key,
                          const std::vector<double>& estimates,
                          const std::vector<double>& cis) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        Json row;
        row[id_key] = ids[i];
        row["estimate"] = estimates[i];
        row["ci"] = ci_value(cis[i]);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace detail

inline Json to_json(const FitResult& result, const Observations& obs) {
    Json j;
    j["y"] = detail::estimate_rows(obs.contents, "content",
                                   result.params.y_c, result.ci_y_c);
    j["b"] = detail::estimate_rows(obs.subjects, "subject",
                                   result.params.b_s, result.ci_b_s);
    j["v_c"] = detail::estimate_rows(obs.contents, "content",
                                     result.params.v_c, result.ci_v_c);
    j["v_s"] = detail::estimate_rows(obs.subjects, "subject",
                                     result.params.v_s, result.ci_v_s);
    j["kappa_context"] = result.params.kappa;
    j["loglik"] = result.loglik_trace;
    j["iterations"] = result.iterations;
    j["converged"] = result.converged;
    return j;
}

// Rebuilds ModelParams from a fit document, ordered to match obs.  Subjects
// and contents are matched by id so the fit may come from a different row
// ordering of the same dataset.
inline ModelParams model_params_from_fit_json(const Json& j,
                                              const Observations& obs) {
    try {
        std::map<std::string, double> y, vc, b, vs;
        for (const auto& row : j.at("y"))
            y[row.at("content").get<std::string>()] = row.at("estimate").get<double>();
        for (const auto& row : j.at("v_c"))
            vc[row.at("content").get<std::string>()] = row.at("estimate").get<double>();
        for (const auto& row : j.at("b"))
            b[row.at("subject").get<std::string>()] = row.at("estimate").get<double>();
        for (const auto& row : j.at("v_s"))
            vs[row.at("subject").get<std::string>()] = row.at("estimate").get<double>();

        ModelParams params;
        params.kappa = j.value("kappa_context", 0.0);
        for (const auto& id : obs.contents) {
            if (!y.count(id) || !vc.count(id))
                throw DataError("fit result missing content " + id);
            params.y_c.push_back(y[id]);
            params.v_c.push_back(vc[id]);
        }
        for (const auto& id : obs.subjects) {
            if (!b.count(id) || !vs.count(id))
                throw DataError("fit result missing subject " + id);
            params.b_s.push_back(b[id]);
            params.v_s.push_back(vs[id]);
        }
        return params;
    } catch (const Json::exception& e) {
        throw DataError(std::string("bad fit result JSON: ") + e.what());
    }
}

inline Json to_json(const MosResult& mos, const Observations& obs) {
    Json rows = Json::array();
    for (std::size_t c = 0; c < obs.contents.size(); ++c) {
        Json row;
        row["content"] = obs.contents[c];
        row["mean"] = mos.mean[c];
        row["std"] = mos.stddev[c];
        row["ci"] = mos.ci_halfwidth[c];
        row["n"] = mos.n[c];
        rows.push_back(std::move(row));
    }
    return rows;
}

inline const char* to_string(FlagReason reason) {
    switch (reason) {
        case FlagReason::bias: return "bias";
        case FlagReason::inconsistency: return "inconsistency";
        default: return "both";
    }
}

inline const char* to_string(ThresholdMode mode) {
    return mode == ThresholdMode::absolute ? "absolute" : "robust";
}

inline Json to_json(const CleaningReport& report, const Observations& obs) {
    Json j;
    Json flagged = Json::array();
    for (std::size_t i = 0; i < report.flagged.size(); ++i) {
        Json row;
        row["subject"] = obs.subjects[report.flagged[i]];
        row["reason"] = to_string(report.reasons[i]);
        flagged.push_back(std::move(row));
    }
    j["flagged"] = std::move(flagged);
    j["thresholds"] = {
        {"bias_mode", to_string(report.config.bias_mode)},
        {"bias_threshold", report.config.bias_threshold},
        {"inconsistency_mode", to_string(report.config.inconsistency_mode)},
        {"inconsistency_threshold", report.config.inconsistency_threshold}};
    j["removed_cell_count"] = report.removed_cell_count;
    j["fraction_removed"] = report.fraction_removed;
    return j;
}

inline Json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

inline void write_json(const Json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << j.dump(2) << '\n';
    if (!out) throw DataError("write failed: " + path);
}

}  // namespace jndq
