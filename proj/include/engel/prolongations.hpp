#pragma once

#include "engel/engel_verify.hpp"
#include "engel/geometry_models.hpp"
#include "engel/sl2.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>

namespace engel {

//! Contact 3-manifold model: plane field xi, a section transverse to it and
//! a frame of xi used for rotating lines (defaults to xi itself).
struct ContactModel
{
    FrameModel model;
    std::array<Section, 2> xi;
    Section reeb;
    std::optional<std::array<Section, 2>> legendrian;
    std::string label;

    std::array<Section, 2> const& frame() const { return legendrian ? *legendrian : xi; }
};

//! Throws NotContact unless rank(xi + [xi,xi]) = 3 at n quasi-random points.
void check_contact(ContactModel const& c, std::size_t n_samples = 64,
                   double tol = 1e-8);

//! (R^3, ker(dy - z dx)) on (x,y,z), frame (dx + z dy, dz).
ContactModel contact_r3();
//! (x,z,w) chart with xi = ker(dz - w dx), frame (dx + w dz, dw).
ContactModel contact_xzw();
//! Unit tangent bundle Lie model with xi = <Y, Z> (geodesic flow X is Reeb).
ContactModel contact_unit_tangent(double kappa);

//! Circle bundle of xi: D = <d_theta, cos(theta) l1 + sin(theta) l2>.
EngelStructure cartan_prolongation(ContactModel const& c);

//! Product: W = X + Theta, D = <W, Z>, E = <W, Z, Y>.
//! Magnetic: D = <Xt + Zt, Theta>, E = <Xt + Zt, Yt, Theta>,
//! W = Xt + Zt - (1 + kappa) Theta.
EngelStructure lorentz_prolongation(LorentzExtension const& ext);

//! Circle bundle V x S^1 with connection form d(theta) + beta.
struct PrequantumData
{
    ContactModel contact;     //!< chart model on V (dim 3)
    Section w_bar;            //!< Legendrian, volume preserving
    std::function<double(Vec const&)> vol;  //!< vol = f dx1^dx2^dx3
    Section beta;             //!< coefficients (beta_1, beta_2, beta_3) as a field
    std::array<Section, 2> ew;  //!< sections of TV completing w_bar
    double theta_period = 2 * pi;  //!< 0: line fiber on [-2, 2]
    double theta_half_width = 2;
    std::optional<Domain> flow_domain;  //!< V part of the flow region
    std::string label = "prequantum";
};

//! Horizontal lift v -> v - beta(v) d_theta of a section of TV.
Section horizontal_lift(Section const& v, Section const& beta);

//! Max |d(beta) - i_{w_bar} vol| over the 2-form components at the samples.
double curvature_defect(PrequantumData const& d, std::size_t n_samples = 64);

//! E = ker(d theta + beta), D = E cap (D pi)^{-1} xi, W = horizontal lift of w_bar.
EngelStructure prequantum_prolongation(PrequantumData const& d, double tol = 1e-6);

//! The local model reproducing darboux_standard with y = theta.
PrequantumData prequantum_local_model();

//---------------------------------------------------------------------------//
// Propellor constructions on mapping tori of T^2
//---------------------------------------------------------------------------//

enum class PropellorVariant
{
    rotating,        //!< w_bar = d_t, xi = <(a,b), d_t> with (a,b) rotating
    invariant_field  //!< w_bar = a d_x + b d_y itself (identity monodromy)
};

struct PropellorModel
{
    Mat2 monodromy;
    PropellorVariant variant = PropellorVariant::rotating;
    ContactModel contact;
    PrequantumData data;
    EngelStructure engel;
};

//! exp(tL) R(2 pi t) (1, 0) with L = log(monodromy): rotates positively and
//! satisfies u(t + 1) = monodromy u(t).
std::function<Vec2(double)> propellor_default_path(Mat2 const& monodromy);

PropellorModel propellor_structure(Mat2 const& monodromy,
                                   std::function<Vec2(double)> line_path = {},
                                   PropellorVariant variant = PropellorVariant::rotating);

//---------------------------------------------------------------------------//
// Suspension of a contactomorphism
//---------------------------------------------------------------------------//

struct SuspensionData
{
    ContactModel base;
    //! Chart map (unused on Lie models) and its derivative; for Lie models
    //! dphi acts on frame coefficients. Empty phi means the identity.
    std::function<Vec(Vec const&)> phi;
    std::function<Mat(Vec const&)> dphi;
    std::function<double(double, Vec const&)> rho;
    std::function<double(double, Vec const&)> drho_dt;  //!< optional
    int K = 1;
    std::string label = "suspension";
};

//! d(v): minus the oriented angle from l1(v) to Dphi_v^{-1} l1(phi(v)),
//! read in the frame (l1, l2) and reduced to (-pi/2, pi/2].
double twisting_angle(SuspensionData const& sd, Vec const& v);

EngelStructure suspension(SuspensionData const& sd, std::size_t n_checks = 64);

//! Time-2 pi geodesic flow of the kappa = -1 unit tangent bundle, Legendrian
//! line <Z> (plus = true) or <Y> (plus = false); K = 0.
SuspensionData geodesic_suspension_data(bool plus = true);
//! Identity map of contact_r3 with K = 1 and rho = pi t.
SuspensionData identity_suspension_data();

//! Two Engel structures sharing the even contact structure E.
struct BiEngelPair
{
    EngelStructure plus;
    EngelStructure minus;
};
BiEngelPair bi_engel_pair();

}  // namespace engel
