#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "strichartz/experiment.hpp"

using namespace strichartz;
using experiment::json;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class Workspace : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("strichartz_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write_config(const std::string& name, const json& j) const {
        const auto p = dir_ / (name + ".json");
        std::ofstream(p) << j.dump(2);
        return p;
    }

    CliResult cli(const std::string& args) const {
        const auto out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
        const std::string cmd = std::string("\"") + STRICHARTZ_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                                err.string() + "\"";
        const int status = std::system(cmd.c_str());
        return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
    }

    static json shipped(const std::string& name) {
        return json::parse(slurp(fs::path(STRICHARTZ_CONFIG_DIR) / (name + ".json")));
    }

    fs::path dir_;
};

json small_sweep() {
    return {{"kind", "functional-sweep"},
            {"functional", "SP"},
            {"grid", {{"dim", 1}, {"half_extent", 64}, {"points", 512}}},
            {"datum", {{"type", "gaussian"}, {"sigma2", 1}}},
            {"x", {{"variant", "zeta"}, {"a", 1}, {"b", 2}, {"alpha", 1}, {"beta", 1}}},
            {"y", {{"variant", "zeta"}, {"a", 3}, {"b", 6}, {"alpha", 1}, {"beta", 1}}},
            {"times", {{"values", {4, 8, 16, 32, 64}}}}};
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

}  // namespace

TEST_F(Workspace, WitnessCsvAndSummaryContract) {
    const auto r = experiment::run(shipped("witness_sr"), dir_ / "run");
    const auto csv = slurp(dir_ / "run" / "witness.csv");
    EXPECT_EQ(first_line(csv), "t,grid_value,closed_form_value,rel_gap");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 14);

    const auto s = json::parse(slurp(dir_ / "run" / "summary.json"));
    EXPECT_EQ(s["kind"], "witness-sr");
    for (const char* key : {"min", "max", "ratio", "max_rel_gap", "liminf_positive", "fitted_slope", "fit", "provenance",
                            "warnings", "pass"}) {
        EXPECT_TRUE(s.contains(key)) << key;
    }
    EXPECT_EQ(s["provenance"]["grid_value"], "grid");
    EXPECT_EQ(s["provenance"]["closed_form_value"], "closed-form");
    EXPECT_EQ(s["provenance"]["fitted_slope"], "fit");
    EXPECT_TRUE(s["warnings"].empty());
    EXPECT_TRUE(s["pass"].get<bool>());
    EXPECT_EQ(r.files.back(), "summary.json");
}

TEST_F(Workspace, CurveAndMomentLawHeaders) {
    experiment::run(small_sweep(), dir_ / "sweep");
    EXPECT_EQ(first_line(slurp(dir_ / "sweep" / "curve.csv")), "t,value,excluded_flag,reason");
    const auto s = json::parse(slurp(dir_ / "sweep" / "summary.json"));
    EXPECT_TRUE(s.contains("fit"));
    EXPECT_EQ(s["constants"]["K1"], 1.0);

    experiment::run(shipped("moment_law"), dir_ / "moments");
    EXPECT_EQ(first_line(slurp(dir_ / "moments" / "moment_law.csv")),
              "r,fitted_slope,closed_form_slope,predicted_slope,abs_error,rel_error");
}

TEST_F(Workspace, SavedFieldRoundTrips) {
    experiment::run(shipped("propagate"), dir_ / "prop");
    const auto g = make_grid(1, 256.0, 4096);
    const auto f = gaussian_sample(g, {1.0, 1}) + Complex(0.5) * node_aligned_indicator(g, 16);
    const auto expected = propagate(f, PropagatorKind::heat(), 1024.0);
    const auto read = io::grid_function_from_csv(g, slurp(dir_ / "prop" / "field.csv"));
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(read[k], expected[k]);
    EXPECT_EQ(first_line(slurp(dir_ / "prop" / "propagate.csv")), "t,exponent,value,provenance");
}

TEST_F(Workspace, OverlappingSupportsWarnAndProceed) {
    auto cfg = small_sweep();
    cfg["x"] = {{"variant", "zeta"}, {"a", 1}, {"b", 4}, {"alpha", 1}, {"beta", 1}};
    const auto res = cli("run \"" + write_config("overlap", cfg).string() + "\" --out \"" + (dir_ / "run").string() + "\"");
    EXPECT_EQ(res.code, 0) << res.err;
    EXPECT_NE(res.err.find("warning: moment support of X"), std::string::npos) << res.err;
    const auto s = json::parse(slurp(dir_ / "run" / "summary.json"));
    ASSERT_EQ(s["warnings"].size(), 1u);
    EXPECT_NE(s["warnings"][0].get<std::string>().find("does not precede"), std::string::npos);
}

TEST_F(Workspace, MalformedPsiExitsOneWithFieldPath) {
    auto cfg = small_sweep();
    cfg["x"].erase("b");
    auto res = cli("run \"" + write_config("missing", cfg).string() + "\"");
    EXPECT_EQ(res.code, 1);
    EXPECT_NE(res.err.find("'/x/b'"), std::string::npos) << res.err;

    cfg = small_sweep();
    cfg["y"]["variant"] = "lorentz";
    res = cli("run \"" + write_config("variant", cfg).string() + "\"");
    EXPECT_EQ(res.code, 1);
    EXPECT_NE(res.err.find("'/y/variant'"), std::string::npos) << res.err;

    cfg = small_sweep();
    cfg["x"]["a"] = 0.5;
    res = cli("run \"" + write_config("range", cfg).string() + "\"");
    EXPECT_EQ(res.code, 1);
    EXPECT_NE(res.err.find("'/x'"), std::string::npos) << res.err;

    std::ofstream(dir_ / "broken.json") << "{\"kind\": ";
    res = cli("run \"" + (dir_ / "broken.json").string() + "\"");
    EXPECT_EQ(res.code, 1);
}

TEST_F(Workspace, UnsafeWindowNamesTheBound) {
    auto cfg = small_sweep();
    cfg["times"] = {{"values", {4, 8, 1e5}}};
    const auto res = cli("run \"" + write_config("window", cfg).string() + "\"");
    EXPECT_EQ(res.code, 1);
    EXPECT_NE(res.err.find("'/times'"), std::string::npos) << res.err;
    EXPECT_NE(res.err.find("wrap-around-safe bound"), std::string::npos) << res.err;
}

TEST_F(Workspace, SchrodingerIndicatorRejected) {
    auto cfg = small_sweep();
    cfg["functional"] = "SR";
    cfg["datum"] = {{"type", "indicator"}, {"half_width_nodes", 8}};
    const auto res = cli("run \"" + write_config("sr_box", cfg).string() + "\"");
    EXPECT_EQ(res.code, 1);
    EXPECT_NE(res.err.find("no time is wrap-around safe"), std::string::npos) << res.err;
}

TEST_F(Workspace, ZeroDatumIsDomainError) {
    auto cfg = small_sweep();
    cfg["datum"] = {{"type", "mixture"}, {"terms", {{{"weight", 0}, {"type", "gaussian"}, {"sigma2", 1}}}}};
    const auto res = cli("run \"" + write_config("zero", cfg).string() + "\"");
    EXPECT_EQ(res.code, 2) << res.err;
    EXPECT_NE(res.err.find("identically zero"), std::string::npos) << res.err;
}

TEST_F(Workspace, RunsAreByteIdentical) {
    for (const char* name : {"functional_sweep_sp", "witness_sp", "mixed_norm"}) {
        const auto a = experiment::run(shipped(name), dir_ / "a" / name);
        experiment::run(shipped(name), dir_ / "b" / name);
        for (const auto& f : a.files) EXPECT_EQ(slurp(dir_ / "a" / name / f), slurp(dir_ / "b" / name / f)) << name << "/" << f;
    }
}

TEST_F(Workspace, OutFlagOverridesConfigOutput) {
    auto cfg = shipped("fundamental");
    cfg["output"] = (dir_ / "from_config").string();
    const auto p = write_config("fundamental", cfg);
    auto res = cli("run \"" + p.string() + "\" --out \"" + (dir_ / "from_flag").string() + "\"");
    EXPECT_EQ(res.code, 0) << res.err;
    EXPECT_TRUE(fs::exists(dir_ / "from_flag" / "summary.json"));
    EXPECT_FALSE(fs::exists(dir_ / "from_config"));
    res = cli("run \"" + p.string() + "\"");
    EXPECT_EQ(res.code, 0) << res.err;
    EXPECT_TRUE(fs::exists(dir_ / "from_config" / "fundamental.csv"));
}

TEST_F(Workspace, ReportLines) {
    experiment::run(shipped("witness_sp"), dir_ / "runs" / "witness_sp");
    experiment::run(shipped("rate_gls_parabolic"), dir_ / "runs" / "rate");
    const auto res = cli("report \"" + (dir_ / "runs").string() + "\"");
    EXPECT_EQ(res.code, 0) << res.err;
    EXPECT_NE(res.out.find("min=0.502308, max=0.530996, ratio=1.05711, PASS"), std::string::npos) << res.out;
    EXPECT_NE(res.out.find("fitted s="), std::string::npos);
    EXPECT_NE(res.out.find("predicted s=-0.375, Δ="), std::string::npos) << res.out;

    const auto single = cli("report \"" + (dir_ / "runs" / "rate").string() + "\"");
    EXPECT_EQ(single.code, 0);
    EXPECT_EQ(single.out.find("witness"), std::string::npos);
}

TEST_F(Workspace, ReportOnEmptyDirectoryFails) {
    fs::create_directories(dir_ / "empty");
    auto res = cli("report \"" + (dir_ / "empty").string() + "\"");
    EXPECT_EQ(res.code, 1);
    EXPECT_NE(res.err.find("no run artifacts"), std::string::npos) << res.err;
    res = cli("report \"" + (dir_ / "missing").string() + "\"");
    EXPECT_EQ(res.code, 1);
    EXPECT_THROW(experiment::report(dir_ / "empty"), io::ConfigError);
}

TEST_F(Workspace, UnknownKindAndBadArguments) {
    auto res = cli("run \"" + write_config("kind", json{{"kind", "spectrogram"}}).string() + "\"");
    EXPECT_EQ(res.code, 1);
    EXPECT_NE(res.err.find("'/kind'"), std::string::npos) << res.err;
    res = cli("frobnicate");
    EXPECT_NE(res.code, 0);
}
