#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fmx/errors.hpp"
#include "fmx/experiment.hpp"

using namespace fmx;
using namespace fmx::experiment;

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string header_of(const std::string& csv) { return csv.substr(0, csv.find('\n')); }

}  // namespace

TEST_CASE("experiment names round-trip") {
    for (auto id : {ExperimentId::fig2, ExperimentId::fig3, ExperimentId::fig4a, ExperimentId::fig4b, ExperimentId::validate})
        CHECK(experiment_from_string(to_string(id)) == id);
    CHECK_THROWS_AS(experiment_from_string("fig9"), ConfigError);
}

TEST_CASE("empty config yields the per-experiment defaults") {
    CHECK(parse_config("", ExperimentId::fig3) == ExperimentConfig::defaults(ExperimentId::fig3));
    const auto fig2 = parse_config("", ExperimentId::fig2);
    CHECK(fig2.plan.M == 1);
    CHECK(fig2.plan.normalized_spacing == doctest::Approx(0.1));
}

TEST_CASE("INI round trip preserves every field") {
    auto c = ExperimentConfig::defaults(ExperimentId::fig4a);
    c.seed = 123456789012345ull;
    c.plan.max_delay = 3.3e-7;
    c.geometry.user = {-1.25, 2.5, 0.1};
    c.sweep.grid_sizes = {1, 3};
    c.sweep.models = {"shared_scatterers"};
    c.geometry.pathloss_interpretation = "power";
    const auto back = parse_config(to_ini(c), ExperimentId::fig2);
    CHECK(back == c);
    CHECK(to_ini(back) == to_ini(c));
}

TEST_CASE("config errors name the offending key") {
    auto key_of = [](const std::string& text) {
        try {
            (void)parse_config(text, ExperimentId::fig4b);
        } catch (const ConfigError& e) {
            return e.key();
        }
        return std::string("<none>");
    };
    CHECK(key_of("[plan]\nbogus = 1\n") == "plan.bogus");
    CHECK(key_of("[plan]\nM = eight\n") == "plan.M");
    CHECK(key_of("[plan]\nM = 0\n") == "plan.M");
    CHECK(key_of("[geometry]\nuser = 1, 2\n") == "geometry.user");
    CHECK(key_of("[sweep]\nmodels = pair_only, fancy\n") == "sweep.models");
    CHECK(key_of("[sweep]\npower_db_step = 0\n") == "sweep.power_db_step");
    CHECK(key_of("[experiment]\nid = fig7\n") == "experiment.id");
    CHECK(key_of("[signal]\nfilter_taps = 1024\n") == "signal.filter_taps");
    CHECK(key_of("[plan]\namplitude_law = gamma\n") == "plan.amplitude_law");
    CHECK(key_of("[geometry\n") == "ini");
    CHECK_THROWS_AS(load_config("/nonexistent/fmx.ini", ExperimentId::fig2), ConfigError);
}

TEST_CASE("linear grid hits integer points exactly") {
    const auto g = linear_grid(0.05, 3.0, 0.05);
    CHECK(g.size() == 60);
    CHECK(g[19] == 1.0);
    CHECK(g.back() == 3.0);
    CHECK(linear_grid(-10, 30, 2).size() == 21);
}

TEST_CASE("fade counting") {
    CHECK(count_fades({0, -5, 0, -5, 0, -5, 0}, 1.0) == 3);
    CHECK(count_fades({0, -0.5, 0, -5, 0}, 1.0) == 1);
    CHECK(count_fades({5, 4, 3, 2, 1}, 1.0) == 0);
    CHECK(count_fades({}, 1.0) == 0);
    CHECK(standard_deviation({1, 1, 1}) == 0.0);
}

TEST_CASE("sha256 known answer") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("csv schema of each experiment") {
    auto small = [](ExperimentId id) {
        auto c = ExperimentConfig::defaults(id);
        c.trials = 50;
        c.signal.scenes = 4;
        return c;
    };
    CHECK(header_of(run_fig2(small(ExperimentId::fig2)).table.to_csv()) ==
          "distance_m,gain_classical_db,gain_direct_db,gain_plus_db,gain_minus_db");
    CHECK(header_of(run_fig3(small(ExperimentId::fig3)).table.to_csv()) ==
          "model,branch,estimator,p_db,nmse,nmse_entrywise,nmse_theory,error_variance");
    CHECK(header_of(run_fig4a(small(ExperimentId::fig4a)).table.to_csv()) == "i,sv,model,cond_db,clipped_eigenvalues");
    CHECK(header_of(run_fig4b(small(ExperimentId::fig4b)).table.to_csv()) ==
          "p_db,p_linear,rate_mc,rate_mc_se,rate_bound,rate_mimo,rate_mimo_se");
    const auto v = run_validate(small(ExperimentId::validate));
    CHECK(header_of(v.table.to_csv()) == "check,value,threshold,pass");
    CHECK(v.summary.contains("all_pass"));
}

TEST_CASE("fig4a rows at integer spacing are perfectly conditioned under the pair-only model") {
    const auto out = run_fig4a(ExperimentConfig::defaults(ExperimentId::fig4a));
    int checked = 0;
    for (const auto& row : out.table.rows)
        if ((row[0] == "1" || row[0] == "2" || row[0] == "3") && row[2] == "pair_only") {
            CHECK(std::stod(row[3]) < 0.01);
            ++checked;
        }
    CHECK(checked == 6);
}

TEST_CASE("run writes csv and manifest, and repeated runs are byte-identical") {
    const auto dir = std::filesystem::temp_directory_path() / "fmx_experiment_test";
    std::filesystem::remove_all(dir);
    auto c = ExperimentConfig::defaults(ExperimentId::fig4b);
    c.trials = 200;
    c.output_dir = (dir / "a").string();
    const auto a = run(c);
    c.output_dir = (dir / "b").string();
    const auto b = run(c);
    CHECK(read_file(a.csv) == read_file(b.csv));
    const auto manifest = nlohmann::json::parse(read_file(a.manifest));
    CHECK(manifest["experiment"] == "fig4b");
    CHECK(manifest["seed"] == 1);
    CHECK(manifest["config_sha256"].get<std::string>().size() == 64);
    CHECK(manifest["config_format"] == kConfigFormat);
    CHECK(parse_config(manifest["config"].get<std::string>(), ExperimentId::fig2) == [&] {
        auto x = c;
        x.output_dir = (dir / "a").string();
        return x;
    }());
    CHECK(manifest.contains("wall_time_s"));
    CHECK(manifest.contains("code_version"));

    c.seed = 2;
    c.output_dir = (dir / "c").string();
    CHECK(read_file(run(c).csv) != read_file(a.csv));
    std::filesystem::remove_all(dir);
}

TEST_CASE("unwritable output directory is reported") {
    auto c = ExperimentConfig::defaults(ExperimentId::fig4a);
    c.output_dir = "/proc/fmx_cannot_write_here";
    CHECK_THROWS_AS(run(c), std::runtime_error);
}
