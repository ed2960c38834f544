#pragma once

#include "engel/geometry_models.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace engel {

using Control = std::function<double(double)>;

//! Integral curve of D = <X, d/dw> in the Darboux chart (x,y,z,w):
//! x' = u, y' = z u, z' = w u, w' = v.
struct DCurve
{
    std::vector<double> t;
    std::vector<Vec> points;
    Control u;
    Control v;

    Vec const& end() const { return points.back(); }
};

enum class AccessRegion
{
    APlus,
    AMinus,
    AW,
    Outside
};

std::string to_string(AccessRegion r);

//! Accessible set from the origin; x only matters for A_W.
AccessRegion accessible_membership(Vec const& p);
//! z^2 - 2 y w.
double boundary_cone_value(Vec const& p);

//! RK4 with step T/round(T/dt). Throws StepTooLarge below 8 steps.
DCurve sample_d_curve(Control u, Control v, double T, double dt,
                      Vec const& start = Vec::Zero(4));

//! Max over steps of |dy - z dx| and |dz - w dx| (trapezoid on each step).
double tangency_residual(DCurve const& c);

//! |y(T) - z(T)^2/(2T) - int_0^T z^2/(2 t^2) dt| by composite Simpson.
//! Requires start at the origin, w = t and u(0) = 0 (SingularIntegrand).
double inaba_identity_check(DCurve const& c);

struct EpsilonSample
{
    double eps = 0;
    double y_end = 0;
    double sup_z = 0;
};

struct RigidityReport
{
    double T = 0;
    std::size_t n_trials = 0;
    std::uint64_t seed = 0;
    std::size_t n_aplus = 0;
    std::size_t n_aminus = 0;
    std::size_t n_aw = 0;
    std::size_t n_outside = 0;
    double max_cone_value = 0;  //!< over nontrivial trials (must be < 0)
    std::vector<Vec> endpoints;  //!< in trial order
    //! u = eps sin(pi t / T): |y(T)| and sup|z| for a decreasing eps sweep.
    std::vector<EpsilonSample> sweep;
    bool sweep_monotone = false;
    bool zero_control_in_aw = false;

    bool pass() const;
};

//! Random controls u(t) = sum_k c_k t^k (k < 4, c_k ~ N(0,1)), v = 1.
Control random_control(std::uint64_t seed, std::size_t trial, bool vanish_at_zero = false);

RigidityReport rigidity_probe(double T, std::size_t n_trials, std::uint64_t seed = 20240501,
                              double dt = 1e-3);
RigidityReport rigidity_probe_serial(double T, std::size_t n_trials,
                                     std::uint64_t seed = 20240501, double dt = 1e-3);

//---------------------------------------------------------------------------//
// Infinitesimal rigidity
//---------------------------------------------------------------------------//

enum class VariationKind
{
    w_curve,          //!< long chart, base (0,0,0,theta), theta in [0, length]
    w_curve_darboux,  //!< Darboux chart, base (0,0,0,w), w in [0, length]
    transverse        //!< Darboux chart, base (t,0,0,0), F(s,x) = s f(x)
};

struct VariationSpec
{
    VariationKind kind = VariationKind::w_curve;
    double length = 1.5 * pi;
    //! W-curves: u = s p(t), v = 1 + s q(t).
    Control p;
    Control q;
    //! Transverse: f and its first three derivatives.
    std::array<Control, 4> f;
    double ds = 1e-4;
    double dt = 1e-3;
};

struct RigidityMeasure
{
    double max_dy_ds = 0;       //!< E-transverse derivative, Richardson-extrapolated
    double variation_norm = 0;  //!< max over t of |dGamma/ds|
    double ratio = 0;           //!< max_dy_ds / variation_norm (0 for zero variation)
};

//! Throws VariationNotDCurve if the varied curves leave D.
RigidityMeasure infinitesimal_rigidity_check(VariationSpec const& spec);

//---------------------------------------------------------------------------//
// Null variations on Sigma x R with lambda (dx^2 + dy^2) - d(theta)^2
//---------------------------------------------------------------------------//

struct NullVariation
{
    ConformalSurface surface;
    Vec2 start = Vec2::Zero();
    double heading = 0;
    double length = 3;
    double dt = 1e-3;
    //! eta(0) = 0; gamma_s = gamma + s eta, theta_s = int sqrt(lambda) |gamma_s'|.
    std::function<Vec2(double)> eta;
    std::function<Vec2(double)> eta_dot;
    double ds = 1e-4;
};

struct NullVariationResult
{
    std::vector<double> t;
    std::vector<double> residual;  //!< dg(beta', dB/ds)
    double max_residual = 0;
    double max_speed_error = 0;  //!< base geodesic, |sqrt(lambda)|gamma'| - 1|
};

NullVariationResult null_variation_check(NullVariation const& nv);

}  // namespace engel
