#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "jndq/dataset.hpp"
#include "jndq/serialize.hpp"
#include "jndq/version.hpp"

using namespace jndq;

namespace {

std::string cli_path() {
    const char* exe = std::getenv("JNDQ_CLI");
    REQUIRE(exe != nullptr);
    return exe;
}

// Runs the binary, returning its exit code; stdout lands in
// cli_test_stdout.txt for tests that want to inspect it.
int run(const std::string& args) {
    const std::string cmd = "\"" + cli_path() + "\" " + args +
                            " >cli_test_stdout.txt 2>cli_test_stderr.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

bool exists(const std::string& path) {
    return std::ifstream(path).good();
}

}  // namespace

TEST_CASE("version flag prints the library version", "[cli]") {
    REQUIRE(run("--version") == 0);
    const std::string out = slurp("cli_test_stdout.txt");
    CHECK(out.rfind("jndq ", 0) == 0);
    CHECK(out.find(kVersion) != std::string::npos);
}

TEST_CASE("the four commands chain into a full pipeline", "[cli]") {
    REQUIRE(run("simulate --contents 6 --subjects 8 --seed 3"
                " --content-sigma 0.02 --subject-sigma 0.03"
                " --out-csv cli_test_data.csv"
                " --out-truth cli_test_truth.json") == 0);
    Observations obs = load_csv("cli_test_data.csv");
    CHECK(obs.contents.size() == 6);
    CHECK(obs.subjects.size() == 8);
    CHECK(obs.cells.size() == 48);
    Json truth = load_json("cli_test_truth.json");
    CHECK(truth["realized_epsilon"].size() == 6);
    CHECK(truth["model"]["kappa"] == 50.203125);
    Json manifest = load_json("cli_test_data.csv.manifest.json");
    CHECK(manifest["command"] == "simulate");
    CHECK(manifest["outputs"].size() == 2);
    CHECK(manifest["timing"]["duration_seconds"].is_number());

    REQUIRE(run("estimate --input cli_test_data.csv --method mle"
                " --out cli_test_fit.json") == 0);
    Json fit = load_json("cli_test_fit.json");
    CHECK(fit["converged"] == true);
    CHECK(fit["y"].size() == 6);
    CHECK(fit["b"].size() == 8);

    REQUIRE(run("estimate --input cli_test_data.csv --method mos"
                " --out cli_test_mos.json") == 0);
    Json mos = load_json("cli_test_mos.json");
    REQUIRE(mos.is_array());
    CHECK(mos.size() == 6);

    REQUIRE(run("clean --input cli_test_data.csv"
                " --params cli_test_fit.json"
                " --out-csv cli_test_cleaned.csv"
                " --out-report cli_test_cleaning.json") == 0);
    Observations cleaned = load_csv("cli_test_cleaned.csv");
    CHECK(cleaned.contents.size() == 6);
    Json creport = load_json("cli_test_cleaning.json");
    CHECK(creport.contains("flagged"));
    CHECK(creport["thresholds"]["bias_mode"] == "robust");

    REQUIRE(run("report --input cli_test_fit.json"
                " --compare cli_test_mos.json"
                " --out-prefix cli_test_rep") == 0);
    CHECK(exists("cli_test_rep_jnd.svg"));
    CHECK(exists("cli_test_rep_bias.svg"));
    const std::string csv = slurp("cli_test_rep_estimates.csv");
    CHECK(csv.rfind("family,id,estimate,ci,source\n", 0) == 0);
    CHECK(csv.find(",cli_test_fit\n") != std::string::npos);
    CHECK(csv.find(",cli_test_mos\n") != std::string::npos);
    Json rmanifest = load_json("cli_test_rep.manifest.json");
    CHECK(rmanifest["outputs"].size() == 5);
}

TEST_CASE("identical invocations produce identical files", "[cli]") {
    const std::string flags =
        " --contents 4 --subjects 5 --seed 21 --content-sigma 0.02"
        " --subject-sigma 0.02 --subject-mu-spread 0.05";
    REQUIRE(run("simulate" + flags +
                " --out-csv cli_test_rep1.csv"
                " --out-truth cli_test_rep1_truth.json") == 0);
    REQUIRE(run("simulate" + flags +
                " --out-csv cli_test_rep2.csv"
                " --out-truth cli_test_rep2_truth.json") == 0);
    CHECK(slurp("cli_test_rep1.csv") == slurp("cli_test_rep2.csv"));
    CHECK(slurp("cli_test_rep1_truth.json") ==
          slurp("cli_test_rep2_truth.json"));

    REQUIRE(run("estimate --input cli_test_rep1.csv --method mle"
                " --out cli_test_repfit1.json") == 0);
    REQUIRE(run("estimate --input cli_test_rep1.csv --method mle"
                " --out cli_test_repfit2.json") == 0);
    CHECK(slurp("cli_test_repfit1.json") == slurp("cli_test_repfit2.json"));
}

TEST_CASE("discrete mode writes whole QP values", "[cli]") {
    REQUIRE(run("simulate --contents 3 --subjects 4 --seed 6"
                " --content-sigma 0.02 --mode discrete"
                " --out-csv cli_test_disc.csv"
                " --out-truth cli_test_disc_truth.json") == 0);
    Observations obs = load_csv("cli_test_disc.csv");
    for (const auto& cell : obs.cells)
        CHECK(cell.jnd == std::round(cell.jnd));
}

TEST_CASE("planted outliers shift only the trailing subjects", "[cli]") {
    REQUIRE(run("simulate --contents 4 --subjects 6 --seed 11"
                " --outlier-subjects 2 --outlier-bias=-10"
                " --out-csv cli_test_out.csv"
                " --out-truth cli_test_out_truth.json") == 0);
    Json manifest = load_json("cli_test_out.csv.manifest.json");
    const auto mu = manifest["config"]["gen"]["subject_mu"];
    REQUIRE(mu.size() == 6);
    CHECK(mu[0] == 0.0);
    CHECK(mu[3] == 0.0);
    // -10 QP through the staircase scale 51 * (1 - 2^-6).
    CHECK_THAT(mu[5].get<double>(),
               Catch::Matchers::WithinRel(-0.19919078742608154, 1e-12));
    // In observation space the recentered biases put two subjects about
    // (1 - 2/6) * 10 QP below the rest.
    Json truth = load_json("cli_test_out_truth.json");
    CHECK_THAT(truth["model"]["b_s"][5].get<double>(),
               Catch::Matchers::WithinAbs(-10.0 * (1.0 - 2.0 / 6.0), 1e-9));
    CHECK_THAT(truth["model"]["b_s"][0].get<double>(),
               Catch::Matchers::WithinAbs(10.0 * (2.0 / 6.0), 1e-9));
}

TEST_CASE("an unconverged fit exits 3 but still writes its result", "[cli]") {
    REQUIRE(run("simulate --contents 4 --subjects 5 --seed 9"
                " --content-sigma 0.02 --subject-sigma 0.02"
                " --out-csv cli_test_nc.csv"
                " --out-truth cli_test_nc_truth.json") == 0);
    std::remove("cli_test_nc_fit.json");
    CHECK(run("estimate --input cli_test_nc.csv --method mle"
              " --max-iterations 0 --out cli_test_nc_fit.json") == 3);
    Json fit = load_json("cli_test_nc_fit.json");
    CHECK(fit["converged"] == false);
    CHECK(fit["iterations"] == 0);
}

TEST_CASE("usage errors exit 2, data errors exit 4", "[cli]") {
    CHECK(run("") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("simulate --contents 4 --subjects 5"
              " --out-truth cli_test_x.json") == 2);
    CHECK(run("estimate --input cli_test_data.csv --method bogus"
              " --out cli_test_x.json") == 2);
    CHECK(run("simulate --config cli_test_missing.json --contents 4"
              " --out-csv cli_test_x.csv --out-truth cli_test_x.json") == 2);
    CHECK(run("simulate --contents 0 --subjects 5 --out-csv cli_test_x.csv"
              " --out-truth cli_test_x.json") == 2);

    CHECK(run("estimate --input cli_test_missing.csv --method mos"
              " --out cli_test_x.json") == 4);
    CHECK(run("simulate --config cli_test_missing.json"
              " --out-csv cli_test_x.csv --out-truth cli_test_x.json") == 4);
    std::ofstream("cli_test_broken.csv") << "not,a,header\n1,2,3\n";
    CHECK(run("estimate --input cli_test_broken.csv --method mos"
              " --out cli_test_x.json") == 4);
    std::remove("cli_test_broken.csv");

    CHECK(run("clean --input cli_test_data.csv --params cli_test_fit.json"
              " --bias-threshold 0 --out-csv cli_test_x.csv"
              " --out-report cli_test_x.json") == 2);
}
