// engel_lab: command-line front end for the Engel structure experiments.

#include "engel/report.hpp"
#include "engel/sampling.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Flags
{
    std::string preset;
    double kappa = 0;
    double T = 0;
    double dt = 0;
    std::size_t trials = 0;
    std::size_t samples = 0;
    std::size_t orbits = 0;
    std::uint64_t seed = 0;
    double tol = 0;
    std::string out;
    std::string format;
    std::string config;
    std::vector<std::string> artifacts;
    int threads = 0;
};

void add_common(CLI::App* sub, Flags& f)
{
    sub->add_option("--preset", f.preset, "named structure (see `engel_lab presets`)");
    sub->add_option("--kappa", f.kappa, "curvature for lorentz-product / lorentz-magnetic");
    sub->add_option("-T", f.T, "orbit length, classification horizon or D-curve time");
    sub->add_option("--dt", f.dt, "integration step");
    sub->add_option("--trials", f.trials, "rigidity trials");
    sub->add_option("--samples", f.samples, "verification sample points");
    sub->add_option("--orbits", f.orbits, "orbits used by classify/report");
    sub->add_option("--seed", f.seed, "random seed");
    sub->add_option("--tol", f.tol, "singular-value tolerance");
    sub->add_option("--out", f.out, "directory receiving the artifacts");
    sub->add_option("--format", f.format, "json or csv");
    sub->add_option("--config", f.config, "JSON manifest; flags override its fields");
    sub->add_option("--artifacts", f.artifacts,
                    "verification, orbits, holonomy, classification, rigidity");
    sub->add_option("--threads", f.threads, "worker threads (overrides ENGEL_LAB_THREADS)");
}

engel::RunManifest build_manifest(CLI::App const& sub, Flags const& f)
{
    engel::RunManifest m;
    if (sub.count("--config"))
        m = engel::load_manifest(f.config);
    m.command = sub.get_name();
    if (sub.count("--preset"))
        m.preset = f.preset;
    if (sub.count("--kappa"))
        m.params.kappa = f.kappa;
    if (sub.count("-T"))
        m.T = f.T;
    if (sub.count("--dt"))
        m.dt = f.dt;
    if (sub.count("--trials"))
        m.trials = f.trials;
    if (sub.count("--samples"))
        m.samples = f.samples;
    if (sub.count("--orbits"))
        m.n_orbits = f.orbits;
    if (sub.count("--seed"))
        m.seed = f.seed;
    if (sub.count("--tol"))
        m.tol.rank_tol = f.tol;
    if (sub.count("--out"))
        m.out_dir = f.out;
    if (sub.count("--format"))
        m.format = f.format;
    if (sub.count("--artifacts"))
        m.artifacts = f.artifacts;
    return m;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Engel structure laboratory"};
    app.require_subcommand(1);
    Flags f;
    std::vector<CLI::App*> subs;
    for (auto [name, help] : {std::pair{"verify", "rank and Cauchy-line verification"},
                              std::pair{"classify", "global projective type of W-orbits"},
                              std::pair{"orbit", "one W-orbit with transport (CSV)"},
                              std::pair{"rigidity", "accessible-set probe from the origin"},
                              std::pair{"report", "kappa sweep of the magnetic extension"}})
    {
        auto* sub = app.add_subcommand(name, help);
        add_common(sub, f);
        subs.push_back(sub);
    }
    auto* presets = app.add_subcommand("presets", "list the preset names");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::CallForHelp const& e)
    {
        return app.exit(e);
    }
    catch (CLI::ParseError const& e)
    {
        app.exit(e);
        return 2;
    }

    if (*presets)
    {
        for (auto const& p : engel::preset_catalog())
            std::cout << p.name << (p.uses_kappa ? " (--kappa)" : "") << "  " << p.description
                      << "\n";
        return 0;
    }

    for (auto* sub : subs)
    {
        if (!*sub)
            continue;
        try
        {
            if (sub->count("--threads"))
            {
                if (f.threads < 1)
                    throw engel::ConfigError("--threads must be at least 1");
                engel::set_worker_count(f.threads);
            }
            auto m = build_manifest(*sub, f);
            return engel::run_command(m, std::cout, std::cerr);
        }
        catch (engel::ConfigError const& e)
        {
            std::cerr << "configuration error: " << e.what() << "\n";
            return 2;
        }
        catch (std::exception const& e)
        {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
    }
    return 2;
}
