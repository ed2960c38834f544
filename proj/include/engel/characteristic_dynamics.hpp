#pragma once

#include "engel/engel_verify.hpp"
#include "engel/geometry_models.hpp"
#include "engel/sl2.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace engel {

//! Sampled W-orbit with the transported E/W frame and developing angle.
struct OrbitTrace
{
    std::vector<double> t;
    std::vector<Vec> points;
    //! Raw pushforward on E/W in the structure's ew_frame (empty until transported).
    std::vector<Mat2> M;
    //! log det M, integrated from tr A (det M itself is lost to rounding once
    //! M is badly conditioned).
    std::vector<double> log_det;
    //! Lifted angle of D/W pulled back to the initial fiber (continuous).
    std::vector<double> angle;
    std::string provenance;

    std::size_t size() const { return t.size(); }
    bool transported() const { return !M.empty(); }
    //! M(i) / sqrt(det M(i)), unimodular.
    Mat2 normalized(std::size_t i) const;
};

//! First-return data: unimodular matrix plus total lifted rotation.
struct HolonomyLift
{
    Mat2 matrix = Mat2::Identity();
    double winding = 0;
};

struct ProjectiveType
{
    enum class Kind
    {
        elliptic,
        parabolic,
        hyperbolic,
        trans_parabolic,
        trans_hyperbolic
    };
    Kind kind = Kind::elliptic;
    double length = 0;  //!< elliptic
    double trace = 0;   //!< hyperbolic variants: |trace|
    int n = 0;          //!< trans variants
    int sign = 0;       //!< trans-parabolic shear direction

    std::string name() const;
};

//---------------------------------------------------------------------------//
// Integration and transport
//---------------------------------------------------------------------------//

//! RK4 W-orbit on charts (steps of size T/round(|T|/dt); negative T runs
//! backwards), exact p0 + tW on Lie models. Throws ChartExit.
OrbitTrace integrate_characteristic(EngelStructure const& s, Vec const& p0, double T,
                                    double dt);

//! Fills M (M' = A M, A the matrix of -ad_W on E/W) and the developing angle,
//! re-integrating the orbit jointly with the same grid.
OrbitTrace transport_EmodW(EngelStructure const& s, OrbitTrace orbit);

//! Both steps in one pass.
OrbitTrace trace_orbit(EngelStructure const& s, Vec const& p0, double T, double dt);

//! Matrix of -ad_W on E/W at p in ew_frame: column a is [e_a, W] mod W.
Mat2 ew_generator(EngelStructure const& s, Vec const& p, double h = 1e-5);

//! Coordinates of D/W at p in ew_frame (a representative vector).
Vec2 dw_coordinates(EngelStructure const& s, Vec const& p);

//---------------------------------------------------------------------------//
// Closed forms
//---------------------------------------------------------------------------//

//! t -> exp(tA) for a constant traceless generator.
std::function<Mat2(double)> holonomy_closed_form(Mat2 const& A);
//! Generator read off a Lie-model structure (constant by construction).
std::function<Mat2(double)> holonomy_closed_form(EngelStructure const& s);
//! [[0, -kappa(kappa+1)], [1, 0]] in (Theta, Yt).
Mat2 magnetic_generator(double kappa);
//! Express M in the basis (K e1, e2), K = sqrt(|kappa(kappa+1)|).
Mat2 rescaled(Mat2 const& M, double K);

//---------------------------------------------------------------------------//
// Classification
//---------------------------------------------------------------------------//

ProjectiveType classify_projective(HolonomyLift const& h, double tol = 1e-6);

struct ClosedOrbit
{
    double period = 0;
    //! Orientation-normalized: winding >= 0 (conjugated by diag(1,-1) if needed).
    HolonomyLift lift;
    OrbitTrace trace;
};

//! First return to p0 within eps_close (chart distance modulo periods and
//! deck translations). Empty if none before T_max.
std::optional<ClosedOrbit> find_closed_orbit(EngelStructure const& s, Vec const& p0,
                                             double T_max, double dt,
                                             double eps_close = 1e-6);

enum class GlobalKind
{
    elliptic,
    parabolic,
    hyperbolic,
    unknown
};

struct OrbitEvidence
{
    Vec start;
    double T = 0;
    double exp_slope = 0;
    double exp_r2 = 0;
    double lin_slope = 0;
    double lin_r2 = 0;
    double max_distortion = 0;
    std::vector<Vec2> invariant_lines;  //!< unstable first for hyperbolic
    bool crosses_invariant = false;
    GlobalKind kind = GlobalKind::unknown;
    std::string note;
};

struct GlobalTypeOptions
{
    std::size_t n_orbits = 8;
    double T_max = 60;
    double dt = 1e-2;
    double c_min = 0.05;
    double r2_min = 0.99;
    double distortion_bound = 1e3;
    std::uint64_t seed = 20240501;
};

struct GlobalTypeEstimate
{
    GlobalKind kind = GlobalKind::unknown;
    bool trans = false;
    std::vector<OrbitEvidence> orbits;
    GlobalTypeOptions options;

    //! "Elliptic", "Parabolic (genuine)", "Hyperbolic (trans)", "Unknown".
    std::string summary() const;
};

GlobalTypeEstimate estimate_global_type(EngelStructure const& s,
                                        GlobalTypeOptions const& opt = {});
//! Serial reference of estimate_global_type; identical output.
GlobalTypeEstimate estimate_global_type_serial(EngelStructure const& s,
                                               GlobalTypeOptions const& opt = {});

std::string to_string(GlobalKind k);

//---------------------------------------------------------------------------//
// Developing map and projections
//---------------------------------------------------------------------------//

struct DevelopingPath
{
    std::vector<double> t;
    std::vector<double> theta;
    double length = 0;  //!< theta(T) - theta(0)
    int direction = 0;  //!< +1 or -1
};

//! Throws MonotonicityViolation unless theta is strictly monotone.
DevelopingPath developing_map(OrbitTrace const& orbit);

struct ProjectionResiduals
{
    std::vector<double> t;
    std::vector<double> speed_error;  //!< |sqrt(lambda)|gamma'| - 1|
    std::vector<double> r1;           //!< kappa_g + kappa
    std::vector<double> r2;           //!< kappa_g - (theta' + 1)
    double max_speed_error = 0;
    double max_r1 = 0;
    double max_r2 = 0;
};

//! Geodesic curvature of the projected curve (Christoffel symbols of
//! lambda (dx^2 + dy^2), five-point differences of the samples).
ProjectionResiduals geodesic_projection_check(LorentzExtension const& ext,
                                              OrbitTrace const& orbit);

//! CSV with header t,p0..,m00,m01,m10,m11,angle (17 significant digits).
std::string orbit_csv(OrbitTrace const& orbit);

}  // namespace engel
