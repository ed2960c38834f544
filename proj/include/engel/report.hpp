#pragma once

#include "engel/characteristic_dynamics.hpp"
#include "engel/engel_verify.hpp"
#include "engel/prolongations.hpp"
#include "engel/rigidity_lab.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace engel {

using json = nlohmann::json;

inline constexpr int schema_version = 1;

//---------------------------------------------------------------------------//
// Presets
//---------------------------------------------------------------------------//

struct PresetInfo
{
    std::string name;
    std::string description;
    bool uses_kappa = false;
};

std::vector<PresetInfo> const& preset_catalog();

//! Parameters a preset may consume besides its name.
struct PresetParams
{
    std::optional<double> kappa;
    std::optional<ConformalSurface> surface;  //!< for "*-surface" presets
};

//! Builds a named structure. Names "lorentz-product-<k>" and
//! "lorentz-magnetic-<k>" carry kappa inline. Throws ConfigError.
EngelStructure make_preset(std::string const& name, PresetParams const& params = {});

//! Lorentz extension behind a lorentz-* preset (for projection checks).
LorentzExtension preset_extension(std::string const& name, PresetParams const& params = {});

//! Default orbit start: box midpoint, periodic coordinates at their lower end.
Vec preset_start(EngelStructure const& s);

//! Surface from {"catalog": name} or {"table": [[...]], "lo": [..], "hi": [..]}.
ConformalSurface surface_from_json(json const& j);

//---------------------------------------------------------------------------//
// Manifest
//---------------------------------------------------------------------------//

struct RunManifest
{
    std::string command;  //!< verify | classify | orbit | rigidity | report
    std::string preset;
    PresetParams params;
    std::optional<double> T;
    std::optional<double> dt;
    std::size_t samples = 1000;
    std::size_t trials = 1000;
    std::size_t n_orbits = 8;
    std::uint64_t seed = 20240501;
    Tolerances tol;
    std::string out_dir;  //!< empty: stdout only
    std::string format;  //!< json | csv; empty picks the command default
    std::vector<std::string> artifacts;
};

//! Range and name checks; throws ConfigError.
void validate(RunManifest const& m);
//! Fields of a JSON manifest override those already in m.
void apply_manifest_json(RunManifest& m, json const& j);
RunManifest load_manifest(std::string const& path);

//---------------------------------------------------------------------------//
// Serialization
//---------------------------------------------------------------------------//

//! Deterministic JSON text: sorted keys, numbers with 17 significant digits.
std::string dump_json(json const& j, int indent = 2);

json to_json(Tolerances const& t);
json to_json(VerificationReport const& r);
json to_json(GlobalTypeEstimate const& g);
json to_json(ProjectiveType const& p);
json to_json(RigidityReport const& r);
json to_json(ProjectionResiduals const& r);

//---------------------------------------------------------------------------//
// Commands (exit codes: 0 success, 1 check failed, 2 configuration error)
//---------------------------------------------------------------------------//

// Each writes its document (JSON or CSV) to `out`, the same document to the
// output directory when one is set, and a one-line summary to `log`.

int cmd_verify(RunManifest const& m, std::ostream& out, std::ostream& log);
int cmd_classify(RunManifest const& m, std::ostream& out, std::ostream& log);
int cmd_orbit(RunManifest const& m, std::ostream& out, std::ostream& log);
int cmd_rigidity(RunManifest const& m, std::ostream& out, std::ostream& log);
int cmd_report(RunManifest const& m, std::ostream& out, std::ostream& log);

//! Validates, dispatches on m.command and maps exceptions to exit codes.
int run_command(RunManifest const& m, std::ostream& out, std::ostream& err);

//! Format used when the manifest leaves it empty (csv for orbit, else json).
std::string effective_format(RunManifest const& m);

//! The kappa sweep behind `report --preset kappa-sweep`.
struct SweepRow
{
    double kappa = 0;
    double kappa_kappa1 = 0;  //!< kappa (kappa + 1)
    GlobalKind predicted = GlobalKind::unknown;  //!< from the sign of kappa (kappa + 1)
    GlobalKind estimated = GlobalKind::unknown;  //!< from orbit dynamics
    std::string closed_form;  //!< classify_projective of exp(A) at t = 1
    bool agree = false;
};

std::vector<SweepRow> kappa_sweep(std::vector<double> const& kappas,
                                  GlobalTypeOptions const& opt);
std::vector<double> default_sweep_kappas();

}  // namespace engel
