#include "engel/report.hpp"
#include "engel/sampling.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace engel;

namespace {

struct Run
{
    int code;
    std::string out;
    std::string log;
};

Run run(RunManifest const& m)
{
    std::ostringstream out, log;
    int code = run_command(m, out, log);
    return {code, out.str(), log.str()};
}

RunManifest manifest(std::string command, std::string preset = {})
{
    RunManifest m;
    m.command = std::move(command);
    m.preset = std::move(preset);
    return m;
}

//! Runs the CLI binary; returns its exit status and merged stdout/stderr.
std::pair<int, std::string> cli(std::string const& args)
{
    std::string cmd = std::string(ENGEL_LAB_BINARY) + " " + args + " 2>&1";
    std::string text;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe)
        return {-1, text};
    std::array<char, 512> buf{};
    while (fgets(buf.data(), static_cast<int>(buf.size()), pipe))
        text += buf.data();
    int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, text};
}

std::filesystem::path temp_file(std::string const& name, std::string const& content)
{
    auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream(p) << content;
    return p;
}

}  // namespace

TEST(Json, NumbersUseSeventeenDigits)
{
    json j = {{"b", 0.1}, {"a", 1.0 / 3}, {"n", 5}, {"bad", std::nan("")}};
    std::string s = dump_json(j, -1);
    EXPECT_EQ(s, R"({"a":0.33333333333333331,"b":0.10000000000000001,"bad":null,"n":5})");
    EXPECT_EQ(json::parse(s)["b"].get<double>(), 0.1);
}

TEST(Json, VerifyDocumentIsDeterministic)
{
    auto m = manifest("verify", "cartan-r3");
    m.samples = 200;
    set_worker_count(1);
    auto a = run(m);
    set_worker_count(3);
    auto b = run(m);
    set_worker_count(0);
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    auto doc = json::parse(a.out);
    EXPECT_EQ(doc["schema_version"], schema_version);
    EXPECT_EQ(doc["verification"]["n_points"], 200);
}

TEST(Json, RigidityDocumentIsDeterministic)
{
    auto m = manifest("rigidity");
    m.trials = 100;
    m.format = "json";
    auto a = run(m);
    auto b = run(m);
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    m.seed = 7;
    EXPECT_NE(run(m).out, a.out);
}

TEST(Manifest, ValidationRejectsBadFields)
{
    auto good = manifest("verify", "darboux");
    EXPECT_NO_THROW(validate(good));

    auto cases = std::vector<RunManifest>(8, good);
    cases[0].command = "explode";
    cases[1].preset = "";
    cases[2].dt = 0.0;
    cases[3].T = 1e-3;
    cases[3].dt = 1e-2;  // dt > T
    cases[4].samples = 0;
    cases[5].format = "xml";
    cases[6].artifacts = {"everything"};
    cases[7].tol.rank_tol = 0.5;
    for (auto const& m : cases)
        EXPECT_THROW(validate(m), ConfigError);

    auto k = manifest("verify", "darboux");
    k.params.kappa = 1.0;
    EXPECT_THROW(make_preset(k.preset, k.params), ConfigError);
    EXPECT_THROW(make_preset("lorentz-magnetic"), ConfigError);
    EXPECT_NO_THROW(make_preset("lorentz-magnetic-0.5"));
}

TEST(Manifest, JsonFieldsApply)
{
    RunManifest m;
    apply_manifest_json(m, json::parse(R"({"schema_version": 1, "command": "orbit",
        "preset": "lorentz-magnetic", "kappa": -0.5, "T": 2, "dt": 0.01,
        "tol": {"rank_tol": 1e-9}, "format": "json", "seed": 3})"));
    EXPECT_EQ(m.command, "orbit");
    EXPECT_EQ(*m.params.kappa, -0.5);
    EXPECT_EQ(*m.T, 2.0);
    EXPECT_EQ(m.tol.rank_tol, 1e-9);
    EXPECT_EQ(m.seed, 3u);
    EXPECT_NO_THROW(validate(m));

    EXPECT_THROW(apply_manifest_json(m, json::parse(R"({"colour": 1})")), ConfigError);
    EXPECT_THROW(apply_manifest_json(m, json::parse(R"({"T": "long"})")), ConfigError);
    EXPECT_THROW(apply_manifest_json(m, json::parse(R"({"schema_version": 99})")), ConfigError);
}

TEST(Manifest, MalformedFileIsConfigError)
{
    auto p = temp_file("engel_bad_manifest.json", "{ not json");
    EXPECT_THROW(load_manifest(p.string()), ConfigError);
    EXPECT_THROW(load_manifest("/nonexistent/engel.json"), ConfigError);
}

TEST(Commands, ExitCodes)
{
    EXPECT_EQ(run(manifest("verify", "darboux")).code, 0);
    EXPECT_EQ(run(manifest("verify", "integrable-counterexample")).code, 1);
    EXPECT_EQ(run(manifest("verify", "no-such-preset")).code, 2);
    EXPECT_EQ(run(manifest("dance")).code, 2);
}

TEST(Commands, ClassifySummaryLines)
{
    struct Case
    {
        std::string preset;
        double kappa;
        std::string summary;
    };
    for (auto const& c : {Case{"lorentz-magnetic", 1, "Elliptic"},
                          Case{"lorentz-magnetic", -1, "Parabolic (genuine)"},
                          Case{"lorentz-magnetic", -0.5, "Hyperbolic (genuine)"},
                          Case{"lorentz-product", 0, "Parabolic (genuine)"}})
    {
        auto m = manifest("classify", c.preset);
        m.params.kappa = c.kappa;
        auto r = run(m);
        EXPECT_EQ(r.code, 0);
        EXPECT_EQ(r.log, c.summary + "\n") << c.preset << " " << c.kappa;
        EXPECT_EQ(json::parse(r.out)["classification"]["summary"], c.summary);
    }
}

TEST(Commands, OrbitWritesArtifacts)
{
    auto dir = std::filesystem::temp_directory_path() / "engel_orbit_test";
    std::filesystem::remove_all(dir);
    auto m = manifest("orbit", "lorentz-magnetic");
    m.params.kappa = 1.0;
    m.T = 1.0;
    m.dt = 1e-2;
    m.out_dir = dir.string();
    auto r = run(m);
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "t,p0,p1,p2,p3,m00,m01,m10,m11,angle");
    ASSERT_TRUE(std::filesystem::exists(dir / "orbit.csv"));
    ASSERT_TRUE(std::filesystem::exists(dir / "orbit.json"));
    std::ifstream in(dir / "orbit.json");
    auto doc = json::parse(in);
    EXPECT_LT(doc["holonomy"]["max_abs_error"].get<double>(), 1e-6);
    EXPECT_TRUE(doc["developing"]["monotone"].get<bool>());
    std::filesystem::remove_all(dir);
}

TEST(Commands, KappaSweepAgrees)
{
    auto rows = kappa_sweep({-2, -1, -0.5, 0, 1}, {});
    ASSERT_EQ(rows.size(), 5u);
    for (auto const& r : rows)
    {
        EXPECT_TRUE(r.agree) << r.kappa;
        EXPECT_EQ(r.kappa_kappa1, r.kappa * (r.kappa + 1));
    }
    EXPECT_EQ(rows[2].predicted, GlobalKind::hyperbolic);
    EXPECT_EQ(rows[4].predicted, GlobalKind::elliptic);
}

TEST(Cli, ExitCodesAndOutput)
{
    EXPECT_EQ(cli("verify --preset darboux --samples 50").first, 0);
    EXPECT_EQ(cli("verify --preset integrable-counterexample --samples 50").first, 1);
    EXPECT_EQ(cli("verify --preset nope").first, 2);
    EXPECT_EQ(cli("verify --preset darboux --threads 0").first, 2);
    EXPECT_EQ(cli("verify --preset darboux --format yaml").first, 2);
    EXPECT_EQ(cli("--bogus-flag").first, 2);

    auto [code, text] = cli("classify --preset lorentz-product --kappa -1");
    EXPECT_EQ(code, 0);
    EXPECT_NE(text.find("Hyperbolic (genuine)"), std::string::npos);

    auto listing = cli("presets");
    EXPECT_EQ(listing.first, 0);
    EXPECT_NE(listing.second.find("propellor-cat"), std::string::npos);
}

TEST(Cli, ConfigFileAndOverrides)
{
    auto bad = temp_file("engel_cli_bad.json", R"({"command": "verify", "bogus": 1})");
    EXPECT_EQ(cli("verify --config " + bad.string()).first, 2);
    auto broken = temp_file("engel_cli_broken.json", "{oops");
    EXPECT_EQ(cli("verify --config " + broken.string()).first, 2);

    auto good = temp_file("engel_cli_good.json",
                          R"({"preset": "integrable-counterexample", "samples": 20})");
    EXPECT_EQ(cli("verify --config " + good.string()).first, 1);
    // Flags win over the file.
    EXPECT_EQ(cli("verify --config " + good.string() + " --preset darboux").first, 0);
}
