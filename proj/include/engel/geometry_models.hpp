#pragma once

#include "engel/frame_algebra.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>

namespace engel {

//! Lie model of S^1(T Sigma) for constant curvature: frame (X, Y, Z) with
//! [Z,X]=Y, [Z,Y]=-X, [X,Y]=kappa Z.
struct ConstantCurvatureUT
{
    double kappa = 0;
    LieModel model;
};

ConstantCurvatureUT constant_curvature_ut(double kappa);

//! Metric lambda (dx^2 + dy^2) on a chart of R^2, written through
//! u = (1/2) log lambda.
struct ConformalSurface
{
    std::string name;
    Domain domain;  //!< 2-dimensional
    std::function<double(double, double)> u;
    //! Optional analytic (u_x, u_y).
    std::function<Vec2(double, double)> grad_u;
    //! Optional analytic u_xx + u_yy.
    std::function<double(double, double)> laplacian_u;

    double lambda(double x, double y) const;
    Vec2 du(double x, double y, double h = 1e-5) const;
    double lap_u(double x, double y, double h = 1e-3) const;
};

//! Catalog: "flat", "flat-torus" (periodic 2 pi box), "sphere", "disk",
//! "bump" (variable curvature, amplitude a).
ConformalSurface surface_flat(double half_width = 3.0);
ConformalSurface surface_flat_torus();
ConformalSurface surface_sphere(double half_width = 3.0);
ConformalSurface surface_disk(double radius = 0.95);
ConformalSurface surface_bump(double amplitude = 0.3, double half_width = 3.0);
ConformalSurface surface_by_name(std::string const& name);

//! Numeric table of log(lambda) on a uniform grid, bicubic Hermite
//! interpolation (C^1); curvature then comes from finite differences.
ConformalSurface surface_from_table(std::string name, Vec2 lo, Vec2 hi,
                                    Mat const& log_lambda);

//! Curvature -Laplacian(log lambda) / (2 lambda).
double gauss_curvature(ConformalSurface const& s, Vec2 const& p);

//! Chart fields on S^1(T Sigma) with coordinates (x, y, phi).
struct UnitTangentChart
{
    ConformalSurface surface;
    FrameModel model;
    Section X;  //!< horizontal lift of the unit vector at angle phi
    Section Y;  //!< horizontal lift of its rotation by +pi/2
    Section Z;  //!< d/dphi
};

UnitTangentChart unit_tangent_frames(ConformalSurface const& s);

//---------------------------------------------------------------------------//
// Lorentzian extensions
//---------------------------------------------------------------------------//

//! M = S^1(T Sigma) x S^1 with its 4-frame and the pulled-back metric.
struct LorentzExtension
{
    enum class Kind
    {
        product,
        magnetic
    };
    Kind kind = Kind::product;
    FrameModel model;
    //! Product: (X, Y, Z, Theta). Magnetic: (X~, Y~, Z~, Theta).
    std::array<Section, 4> frame;
    //! Pulled-back metric in the 4-frame (degenerate along one direction).
    Eigen::Matrix4d metric = Eigen::Matrix4d::Zero();
    //! Indices of the frame members carrying the signature (2,1) metric.
    std::array<int, 3> lorentz_block = {0, 1, 3};
    std::optional<double> kappa;
    std::optional<ConformalSurface> surface;

    //! Curvature at a model point (constant for Lie models).
    double curvature_at(Vec const& p) const;
    //! Signature counts (positive, negative) of the 3x3 block.
    std::pair<int, int> signature() const;
};

LorentzExtension product_extension(ConstantCurvatureUT const& ut);
LorentzExtension product_extension(UnitTangentChart const& ut);
LorentzExtension magnetic_extension(ConstantCurvatureUT const& ut);
LorentzExtension magnetic_extension(UnitTangentChart const& ut);

}  // namespace engel
