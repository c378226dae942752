// jndq: simulate JND subjective tests, fit the observer model, screen
// unreliable subjects, and render comparison reports.
//
// Pipeline: simulate -> estimate (mle|mos) -> clean -> report, all file
// based.  Every command writes a manifest next to its first output; the
// manifest's timing section is the only part of any output that varies
// between identical runs.

#include <chrono>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jndq/baselines.hpp"
#include "jndq/cleaning.hpp"
#include "jndq/dataset.hpp"
#include "jndq/errors.hpp"
#include "jndq/mle.hpp"
#include "jndq/model.hpp"
#include "jndq/prng.hpp"
#include "jndq/report.hpp"
#include "jndq/serialize.hpp"
#include "jndq/simulator.hpp"
#include "jndq/version.hpp"

namespace {

using jndq::Json;

class Timer {
  public:
    double seconds() const {
        return std::chrono::duration<double>(
                   std::chrono::steady_clock::now() - start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_ =
        std::chrono::steady_clock::now();
};

void write_manifest(const std::string& path, const std::string& command,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs,
                    const Json& config, const Json& seed,
                    const Timer& timer) {
    Json manifest;
    manifest["command"] = command;
    manifest["version"] = jndq::kVersion;
    manifest["inputs"] = inputs;
    manifest["outputs"] = outputs;
    manifest["config"] = config;
    manifest["seed"] = seed;
    manifest["timing"] = {{"duration_seconds", timer.seconds()}};
    jndq::write_json(manifest, path);
}

std::string file_stem(const std::string& path) {
    const std::size_t slash = path.find_last_of("/\\");
    std::string name =
        slash == std::string::npos ? path : path.substr(slash + 1);
    const std::size_t dot = name.find_last_of('.');
    return dot == std::string::npos || dot == 0 ? name : name.substr(0, dot);
}

struct SimulateArgs {
    std::string config_path;
    std::size_t contents = 0;
    std::size_t subjects = 0;
    std::uint64_t seed = 0;
    double gamma = 0.7;
    double alpha = 1.0;
    double beta = 1.0;
    double content_sigma = 0.0;
    double subject_sigma = 0.0;
    double subject_mu_spread = 0.0;
    std::size_t outlier_subjects = 0;
    double outlier_bias = 0.0;
    std::string mode = "continuous";
    std::string out_csv;
    std::string out_truth;
};

int cmd_simulate(const SimulateArgs& args, bool inline_flags_used) {
    Timer timer;
    jndq::SimulationConfig config;
    std::vector<std::string> inputs;
    if (!args.config_path.empty()) {
        if (inline_flags_used)
            throw jndq::ConfigError(
                "--config cannot be combined with inline generator flags");
        config = jndq::simulation_config_from_json(
            jndq::load_json(args.config_path));
        inputs.push_back(args.config_path);
    } else {
        const std::size_t C = args.contents, S = args.subjects;
        if (C == 0 || S == 0)
            throw jndq::ConfigError(
                "--contents and --subjects are required without --config");
        config.n_contents = C;
        config.n_subjects = S;
        config.seed = args.seed;
        config.mode = args.mode == "discrete" ? jndq::SimMode::discrete
                                              : jndq::SimMode::continuous;
        config.gen.confidence.gamma = args.gamma;
        config.gen.alpha = args.alpha;
        config.gen.beta = args.beta;
        config.gen.content_mu.assign(C, 0.0);
        config.gen.content_sigma.assign(C, args.content_sigma);
        config.gen.subject_mu.assign(S, 0.0);
        config.gen.subject_sigma.assign(S, args.subject_sigma);
        // Subject bias population: mu_s drawn as N(0, spread^2) from the
        // substream after the per-cell ones, so the draw does not disturb
        // the cell-level streams.
        if (args.subject_mu_spread != 0.0) {
            jndq::SplitMix64 rng = jndq::substream(config.seed, 2 + C * S);
            for (std::size_t s = 0; s < S; ++s)
                config.gen.subject_mu[s] =
                    args.subject_mu_spread * rng.next_normal();
        }
        // Planted outliers: add a fixed bias (in QP, converted through
        // kappa) to the last few subjects.
        if (args.outlier_subjects > 0) {
            if (args.outlier_subjects > S)
                throw jndq::ConfigError("more outlier subjects than subjects");
            const double mu_shift =
                args.outlier_bias / jndq::kappa(config.gen.schedule);
            for (std::size_t s = S - args.outlier_subjects; s < S; ++s)
                config.gen.subject_mu[s] += mu_shift;
        }
    }

    auto [obs, truth] = jndq::simulate_dataset(config);
    jndq::write_csv(obs, args.out_csv);
    jndq::write_json(jndq::to_json(truth), args.out_truth);
    write_manifest(args.out_csv + ".manifest.json", "simulate", inputs,
                   {args.out_csv, args.out_truth}, jndq::to_json(config),
                   Json(config.seed), timer);
    return 0;
}

struct EstimateArgs {
    std::string input;
    std::string method;
    std::string out;
    jndq::FitConfig fit;
    bool no_backtracking = false;
};

int cmd_estimate(const EstimateArgs& args) {
    Timer timer;
    const jndq::Observations obs = jndq::load_csv(args.input);
    Json config_echo;
    config_echo["method"] = args.method;
    int rc = 0;
    Json result_json;
    if (args.method == "mle") {
        jndq::FitConfig config = args.fit;
        config.backtracking = !args.no_backtracking;
        const jndq::FitResult result = jndq::fit(obs, config);
        result_json = jndq::to_json(result, obs);
        config_echo["max_iterations"] = config.max_iterations;
        config_echo["tolerance"] = config.tolerance;
        config_echo["variance_floor"] = config.variance_floor;
        config_echo["backtracking"] = config.backtracking;
        config_echo["restarts"] = config.restarts;
        if (!result.converged) rc = 3;
    } else {
        result_json = jndq::to_json(jndq::mos_estimate(obs), obs);
    }
    jndq::write_json(result_json, args.out);
    write_manifest(args.out + ".manifest.json", "estimate", {args.input},
                   {args.out}, config_echo, nullptr, timer);
    if (rc == 3)
        std::cerr << "estimate: fit did not converge within the iteration "
                     "limit (result written)\n";
    return rc;
}

struct CleanArgs {
    std::string input;
    std::string params;
    std::string out_csv;
    std::string out_report;
    std::string bias_mode = "robust";
    std::string inconsistency_mode = "robust";
    double bias_threshold = 0.0;
    double inconsistency_threshold = 0.0;
    bool bias_threshold_set = false;
    bool inconsistency_threshold_set = false;
};

jndq::ThresholdMode parse_mode(const std::string& mode) {
    if (mode == "absolute") return jndq::ThresholdMode::absolute;
    if (mode == "robust") return jndq::ThresholdMode::robust;
    throw jndq::ConfigError("threshold mode must be absolute or robust");
}

int cmd_clean(const CleanArgs& args) {
    Timer timer;
    const jndq::Observations obs = jndq::load_csv(args.input);
    const jndq::ModelParams params = jndq::model_params_from_fit_json(
        jndq::load_json(args.params), obs);

    jndq::CleaningConfig config;
    config.bias_mode = parse_mode(args.bias_mode);
    config.inconsistency_mode = parse_mode(args.inconsistency_mode);
    config.bias_threshold = args.bias_threshold_set
                                ? args.bias_threshold
                                : jndq::default_threshold(config.bias_mode);
    config.inconsistency_threshold =
        args.inconsistency_threshold_set
            ? args.inconsistency_threshold
            : jndq::default_threshold(config.inconsistency_mode);

    jndq::CleaningReport report = jndq::flag_subjects(params, config);
    const jndq::Observations cleaned = jndq::filter_dataset(obs, report);
    jndq::write_csv(cleaned, args.out_csv);
    jndq::write_json(jndq::to_json(report, obs), args.out_report);

    Json config_echo;
    config_echo["bias_mode"] = args.bias_mode;
    config_echo["bias_threshold"] = config.bias_threshold;
    config_echo["inconsistency_mode"] = args.inconsistency_mode;
    config_echo["inconsistency_threshold"] = config.inconsistency_threshold;
    write_manifest(args.out_csv + ".manifest.json", "clean",
                   {args.input, args.params}, {args.out_csv, args.out_report},
                   config_echo, nullptr, timer);
    return 0;
}

struct ReportArgs {
    std::string input;
    std::string compare;
    std::string out_prefix;
};

int cmd_report(const ReportArgs& args) {
    Timer timer;
    const Json primary = jndq::load_json(args.input);
    std::vector<std::string> inputs = {args.input};
    std::vector<std::string> written;
    if (!args.compare.empty()) {
        const Json other = jndq::load_json(args.compare);
        inputs.push_back(args.compare);
        written = jndq::write_report(primary, file_stem(args.input), &other,
                                     file_stem(args.compare), args.out_prefix);
    } else {
        written = jndq::write_report(primary, file_stem(args.input), nullptr,
                                     "", args.out_prefix);
    }
    Json config_echo;
    config_echo["out_prefix"] = args.out_prefix;
    write_manifest(args.out_prefix + ".manifest.json", "report", inputs,
                   written, config_echo, nullptr, timer);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"JND quality model: simulate, estimate, clean, report"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("jndq ") + jndq::kVersion);

    SimulateArgs sim;
    CLI::App* simulate = app.add_subcommand(
        "simulate", "Generate a synthetic JND dataset with ground truth");
    auto* sc = simulate->add_option("--contents", sim.contents,
                                    "Number of video contents");
    auto* ss = simulate->add_option("--subjects", sim.subjects,
                                    "Number of subjects");
    auto* se = simulate->add_option("--seed", sim.seed, "PRNG seed");
    auto* sg = simulate->add_option("--gamma", sim.gamma,
                                    "Confidence decay rate");
    auto* sa = simulate->add_option("--alpha", sim.alpha, "Content weight");
    auto* sb = simulate->add_option("--beta", sim.beta, "Subject weight");
    auto* scs = simulate->add_option("--content-sigma", sim.content_sigma,
                                     "Content effect spread (confidence units)");
    auto* sss = simulate->add_option("--subject-sigma", sim.subject_sigma,
                                     "Subject effect spread (confidence units)");
    auto* sms = simulate->add_option(
        "--subject-mu-spread", sim.subject_mu_spread,
        "Std dev of the per-subject bias population (confidence units)");
    auto* sos = simulate->add_option("--outlier-subjects", sim.outlier_subjects,
                                     "Plant this many biased subjects at the end");
    auto* sob = simulate->add_option("--outlier-bias", sim.outlier_bias,
                                     "Planted subject bias in QP");
    auto* smo = simulate->add_option("--mode", sim.mode,
                                     "continuous or discrete JND values")
                    ->check(CLI::IsMember({"continuous", "discrete"}));
    simulate->add_option("--config", sim.config_path,
                         "Simulation config JSON (instead of inline flags)");
    simulate->add_option("--out-csv", sim.out_csv, "Output dataset CSV")
        ->required();
    simulate->add_option("--out-truth", sim.out_truth,
                         "Output ground-truth JSON")
        ->required();

    EstimateArgs est;
    CLI::App* estimate = app.add_subcommand(
        "estimate", "Fit the observer model (mle) or compute MOS (mos)");
    estimate->add_option("--input", est.input, "Dataset CSV")->required();
    estimate->add_option("--method", est.method, "mle or mos")
        ->required()
        ->check(CLI::IsMember({"mle", "mos"}));
    estimate->add_option("--out", est.out, "Output result JSON")->required();
    estimate->add_option("--max-iterations", est.fit.max_iterations,
                         "Newton sweep limit");
    estimate->add_option("--tolerance", est.fit.tolerance,
                         "Convergence tolerance (max parameter change)");
    estimate->add_option("--variance-floor", est.fit.variance_floor,
                         "Lower bound on fitted spreads (QP)");
    estimate->add_flag("--no-backtracking", est.no_backtracking,
                       "Disable the likelihood-guarding line search");
    estimate->add_option("--restarts", est.fit.restarts,
                         "Independent fits from jittered starts; best kept");

    CleanArgs cln;
    CLI::App* clean = app.add_subcommand(
        "clean", "Flag and remove unreliable subjects using a fitted model");
    clean->add_option("--input", cln.input, "Dataset CSV")->required();
    clean->add_option("--params", cln.params, "Fitted model JSON (from estimate --method mle)")
        ->required();
    clean->add_option("--out-csv", cln.out_csv, "Cleaned dataset CSV")
        ->required();
    clean->add_option("--out-report", cln.out_report, "Cleaning report JSON")
        ->required();
    clean->add_option("--bias-mode", cln.bias_mode, "absolute or robust")
        ->check(CLI::IsMember({"absolute", "robust"}));
    auto* bth = clean->add_option("--bias-threshold", cln.bias_threshold,
                                  "QP (absolute) or MAD multiples (robust)");
    clean->add_option("--inconsistency-mode", cln.inconsistency_mode,
                      "absolute or robust")
        ->check(CLI::IsMember({"absolute", "robust"}));
    auto* ith = clean->add_option("--inconsistency-threshold",
                                  cln.inconsistency_threshold,
                                  "QP (absolute) or MAD multiples (robust)");

    ReportArgs rep;
    CLI::App* report = app.add_subcommand(
        "report", "Render error-bar SVG charts and a flat estimates CSV");
    report->add_option("--input", rep.input, "Result JSON (fit or MOS)")
        ->required();
    report->add_option("--compare", rep.compare,
                       "Second result JSON to overlay");
    report->add_option("--out-prefix", rep.out_prefix,
                       "Prefix for emitted files")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (simulate->parsed()) {
            const bool inline_used =
                sc->count() || ss->count() || se->count() || sg->count() ||
                sa->count() || sb->count() || scs->count() || sss->count() ||
                sms->count() || sos->count() || sob->count() || smo->count();
            return cmd_simulate(sim, inline_used);
        }
        if (estimate->parsed()) return cmd_estimate(est);
        if (clean->parsed()) {
            cln.bias_threshold_set = bth->count() > 0;
            cln.inconsistency_threshold_set = ith->count() > 0;
            return cmd_clean(cln);
        }
        if (report->parsed()) return cmd_report(rep);
        return 2;
    } catch (const jndq::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const jndq::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return 1;
    }
}
