#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "agewire/experiment.hpp"

using namespace agewire;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.experiment = ExperimentKind::StressHist;
    c.width = 4;
    return c;
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("agewire_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("config JSON round trip and strictness") {
    ExperimentConfig c = small_config();
    c.attacks = {"M-0-0", "M-1-50%"};
    c.seed = 42;
    nlohmann::json j = c;
    auto back = j.get<ExperimentConfig>();
    CHECK(nlohmann::json(back) == j);
    j["tpyo"] = 1;
    CHECK_THROWS_AS(j.get<ExperimentConfig>(), Error);
    nlohmann::json bad = {{"time_grid", {2, 1}}};
    CHECK_THROWS_AS(bad.get<ExperimentConfig>(), Error);
    nlohmann::json tag = {{"attacks", {"M-9-9"}}};
    CHECK_THROWS_AS(tag.get<ExperimentConfig>(), Error);
    CHECK_THROWS_AS(parse_experiment("FIG_99"), Error);
    CHECK(ExperimentConfig{}.time_grid.size() == 9);
}

TEST_CASE("runs are deterministic and manifests verify") {
    auto c = small_config();
    auto r1 = run_experiment(c);
    auto r2 = run_experiment(c);
    CHECK(r1.files == r2.files);
    auto m1 = r1.manifest, m2 = r2.manifest;
    m1.erase("wall_clock_seconds");
    m2.erase("wall_clock_seconds");
    CHECK(m1 == m2);
    CHECK(r1.files.count("stress_hist.csv") == 1);
    CHECK(r1.files.count("stress_hist.gp") == 1);
    CHECK(r1.files.count("plans/M-All-100pct.json") == 1);

    auto dir = scratch("verify");
    write_outputs(r1, dir.string());
    auto ok = verify_manifest((dir / "manifest.json").string(), dir.string());
    CHECK(ok.ok);
    CHECK(ok.checked == r1.files.size());

    {
        std::fstream f(dir / "stress_hist.csv", std::ios::in | std::ios::out | std::ios::binary);
        f.seekg(20);
        char ch = 0;
        f.get(ch);
        f.seekp(20);
        f.put(static_cast<char>(ch ^ 1));
    }
    auto flipped = verify_manifest((dir / "manifest.json").string(), dir.string());
    CHECK_FALSE(flipped.ok);
    REQUIRE(flipped.mismatched.size() == 1);
    CHECK(flipped.mismatched[0] == "stress_hist.csv");

    auto empty = scratch("empty");
    fs::create_directories(empty);
    auto none = verify_manifest((dir / "manifest.json").string(), empty.string());
    CHECK_FALSE(none.ok);
    CHECK(none.missing.size() == r1.files.size());
    CHECK_THROWS_AS(verify_manifest((empty / "manifest.json").string(), empty.string()), Error);
    fs::remove_all(dir);
    fs::remove_all(empty);
}

TEST_CASE("every series CSV carries the normalization base") {
    auto c = small_config();
    c.experiment = ExperimentKind::ErrorLikelihood;
    c.time_grid = {0, 4};
    auto r = run_experiment(c);
    const auto& csv = r.files.at("error_likelihood.csv");
    CHECK(csv.rfind("t_years,metric,value,config_tag,norm_base\n", 0) == 0);
    CHECK(r.manifest.at("details").contains("guard_band"));
    c.experiment = ExperimentKind::MonteCarlo;
    c.attacks = {"PV_TROJAN"};
    CHECK_THROWS_AS(run_experiment(c), Error);
}
