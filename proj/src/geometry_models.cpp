#include "engel/geometry_models.hpp"

#include <algorithm>
#include <cmath>

namespace engel {

ConstantCurvatureUT constant_curvature_ut(double kappa)
{
    LieModel m({"X", "Y", "Z"}, kappa);
    m.set("Z", "X", {{"Y", 1}});
    m.set("Z", "Y", {{"X", -1}});
    m.set("X", "Y", {{"Z", kappa}});
    return {kappa, m};
}

//---------------------------------------------------------------------------//
// Conformal surfaces
//---------------------------------------------------------------------------//

double ConformalSurface::lambda(double x, double y) const
{
    double v = std::exp(2 * u(x, y));
    if (!std::isfinite(v) || v <= 0)
        throw NonFiniteEvaluation("conformal factor is not finite and positive");
    return v;
}

Vec2 ConformalSurface::du(double x, double y, double h) const
{
    Vec2 g;
    if (grad_u)
        g = grad_u(x, y);
    else
        g << (u(x + h, y) - u(x - h, y)) / (2 * h), (u(x, y + h) - u(x, y - h)) / (2 * h);
    if (!g.allFinite())
        throw NonFiniteEvaluation("gradient of log lambda is not finite");
    return g;
}

double ConformalSurface::lap_u(double x, double y, double h) const
{
    double v;
    if (laplacian_u)
        v = laplacian_u(x, y);
    else
    {
        // Fourth-order stencil per axis: roundoff ~ eps/h^2, truncation ~ h^4.
        auto axis = [&](double dx, double dy) {
            return -u(x + 2 * dx, y + 2 * dy) + 16 * u(x + dx, y + dy) - 30 * u(x, y)
                   + 16 * u(x - dx, y - dy) - u(x - 2 * dx, y - 2 * dy);
        };
        v = (axis(h, 0) + axis(0, h)) / (12 * h * h);
    }
    if (!std::isfinite(v))
        throw NonFiniteEvaluation("Laplacian of log lambda is not finite");
    return v;
}

double gauss_curvature(ConformalSurface const& s, Vec2 const& p)
{
    // log lambda = 2u, so -Lap(log lambda)/(2 lambda) = -Lap(u) e^{-2u}.
    return -s.lap_u(p.x(), p.y()) / s.lambda(p.x(), p.y());
}

ConformalSurface surface_flat(double half_width)
{
    ConformalSurface s;
    s.name = "flat";
    s.domain = Domain::cube(2, half_width);
    s.u = [](double, double) { return 0.0; };
    s.grad_u = [](double, double) { return Vec2(0, 0); };
    s.laplacian_u = [](double, double) { return 0.0; };
    return s;
}

ConformalSurface surface_flat_torus()
{
    auto s = surface_flat(pi);
    s.name = "flat-torus";
    s.domain = Domain::box(Vec::Constant(2, 0.0), Vec::Constant(2, 2 * pi));
    s.domain.set_period(0, 2 * pi).set_period(1, 2 * pi);
    return s;
}

ConformalSurface surface_sphere(double half_width)
{
    // lambda = 4 / (1 + r^2)^2
    ConformalSurface s;
    s.name = "sphere";
    s.domain = Domain::cube(2, half_width);
    s.u = [](double x, double y) { return std::log(2.0) - std::log1p(x * x + y * y); };
    s.grad_u = [](double x, double y) {
        double q = 1 + x * x + y * y;
        return Vec2(-2 * x / q, -2 * y / q);
    };
    s.laplacian_u = [](double x, double y) {
        double q = 1 + x * x + y * y;
        return -4 / (q * q);
    };
    return s;
}

ConformalSurface surface_disk(double radius)
{
    // lambda = 4 / (1 - r^2)^2
    ConformalSurface s;
    s.name = "disk";
    s.domain = Domain::cube(2, radius);
    s.domain.predicate = [radius](Vec const& p) { return p.squaredNorm() < radius * radius; };
    s.u = [](double x, double y) { return std::log(2.0) - std::log(1 - x * x - y * y); };
    s.grad_u = [](double x, double y) {
        double q = 1 - x * x - y * y;
        return Vec2(2 * x / q, 2 * y / q);
    };
    s.laplacian_u = [](double x, double y) {
        double q = 1 - x * x - y * y;
        return 4 / (q * q);
    };
    return s;
}

ConformalSurface surface_bump(double a, double half_width)
{
    // u = a exp(-r^2): curvature varies and changes sign.
    ConformalSurface s;
    s.name = "bump";
    s.domain = Domain::cube(2, half_width);
    s.u = [a](double x, double y) { return a * std::exp(-(x * x + y * y)); };
    s.grad_u = [a](double x, double y) {
        double u = a * std::exp(-(x * x + y * y));
        return Vec2(-2 * x * u, -2 * y * u);
    };
    s.laplacian_u = [a](double x, double y) {
        double r2 = x * x + y * y;
        return a * std::exp(-r2) * (4 * r2 - 4);
    };
    return s;
}

ConformalSurface surface_by_name(std::string const& name)
{
    if (name == "flat")
        return surface_flat();
    if (name == "flat-torus")
        return surface_flat_torus();
    if (name == "sphere")
        return surface_sphere();
    if (name == "disk")
        return surface_disk();
    if (name == "bump")
        return surface_bump();
    throw ConfigError("unknown surface '" + name + "'");
}

namespace {
double catmull_rom(double p0, double p1, double p2, double p3, double t)
{
    return 0.5
           * ((2 * p1) + (-p0 + p2) * t + (2 * p0 - 5 * p1 + 4 * p2 - p3) * t * t
              + (-p0 + 3 * p1 - 3 * p2 + p3) * t * t * t);
}
}  // namespace

ConformalSurface surface_from_table(std::string name, Vec2 lo, Vec2 hi,
                                    Mat const& log_lambda)
{
    if (log_lambda.rows() < 4 || log_lambda.cols() < 4)
        throw ConfigError("surface table needs at least 4x4 samples");
    if (!log_lambda.allFinite())
        throw ConfigError("surface table has non-finite entries");
    ConformalSurface s;
    s.name = std::move(name);
    s.domain = Domain::box(lo, hi);
    Mat F = log_lambda;
    s.u = [F, lo, hi](double x, double y) {
        auto nx = F.rows() - 1, ny = F.cols() - 1;
        double gx = (x - lo.x()) / (hi.x() - lo.x()) * static_cast<double>(nx);
        double gy = (y - lo.y()) / (hi.y() - lo.y()) * static_cast<double>(ny);
        auto ix = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(gx)), 0, nx - 1);
        auto iy = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(gy)), 0, ny - 1);
        double tx = gx - static_cast<double>(ix);
        double ty = gy - static_cast<double>(iy);
        auto at = [&](Eigen::Index i, Eigen::Index j) {
            return F(std::clamp<Eigen::Index>(i, 0, nx), std::clamp<Eigen::Index>(j, 0, ny));
        };
        double col[4];
        for (int k = 0; k < 4; ++k)
        {
            auto j = iy - 1 + k;
            col[k] = catmull_rom(at(ix - 1, j), at(ix, j), at(ix + 1, j), at(ix + 2, j), tx);
        }
        return 0.5 * catmull_rom(col[0], col[1], col[2], col[3], ty);
    };
    return s;
}

//---------------------------------------------------------------------------//
// Unit tangent frames
//---------------------------------------------------------------------------//

namespace {
Domain lift_domain(Domain const& base, int extra_periodic)
{
    int n = base.dim() + extra_periodic;
    Vec lo(n), hi(n);
    lo.head(base.dim()) = base.lo;
    hi.head(base.dim()) = base.hi;
    for (int i = base.dim(); i < n; ++i)
    {
        lo[i] = 0;
        hi[i] = 2 * pi;
    }
    Domain d = Domain::box(lo, hi);
    d.period.head(base.dim()) = base.period;
    for (int i = base.dim(); i < n; ++i)
        d.period[i] = 2 * pi;
    if (base.predicate)
    {
        auto pred = base.predicate;
        int k = base.dim();
        d.predicate = [pred, k](Vec const& p) { return pred(p.head(k)); };
    }
    return d;
}

//! Pad a 3-dimensional field to 4 dimensions (zero last component).
Section pad4(Section const& f)
{
    return Section(4, [f](Vec const& p) {
        Vec v = Vec::Zero(4);
        v.head(3) = f(p.head(3));
        return v;
    });
}
}  // namespace

UnitTangentChart unit_tangent_frames(ConformalSurface const& s)
{
    UnitTangentChart ut;
    ut.surface = s;
    ut.model = FrameModel::chart(lift_domain(s.domain, 1), "S1(T " + s.name + ") (x,y,phi)");
    // Orthonormal frame e_i = e^{-u} d/dx_i; Levi-Civita connection form
    // -u_y dx + u_x dy. Horizontal lifts pick up -omega(v) d/dphi.
    ut.X = Section(3, [s](Vec const& p) {
        double e = std::exp(-s.u(p[0], p[1]));
        Vec2 g = s.du(p[0], p[1]);
        double c = std::cos(p[2]), sn = std::sin(p[2]);
        Vec v(3);
        v << e * c, e * sn, e * (g.y() * c - g.x() * sn);
        return v;
    });
    ut.Y = Section(3, [s](Vec const& p) {
        double e = std::exp(-s.u(p[0], p[1]));
        Vec2 g = s.du(p[0], p[1]);
        double c = std::cos(p[2]), sn = std::sin(p[2]);
        Vec v(3);
        v << -e * sn, e * c, -e * (g.x() * c + g.y() * sn);
        return v;
    });
    ut.Z = Section::coordinate(3, 2);
    return ut;
}

//---------------------------------------------------------------------------//
// Lorentzian extensions
//---------------------------------------------------------------------------//

double LorentzExtension::curvature_at(Vec const& p) const
{
    if (kappa)
        return *kappa;
    return gauss_curvature(*surface, Vec2(p[0], p[1]));
}

std::pair<int, int> LorentzExtension::signature() const
{
    Eigen::Matrix3d G;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            G(a, b) = metric(lorentz_block[a], lorentz_block[b]);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(G);
    int pos = 0, neg = 0;
    for (int i = 0; i < 3; ++i)
    {
        pos += es.eigenvalues()[i] > 1e-12;
        neg += es.eigenvalues()[i] < -1e-12;
    }
    return {pos, neg};
}

namespace {
LieModel product_lie(double kappa)
{
    LieModel m({"X", "Y", "Z", "Theta"}, kappa);
    m.set("Z", "X", {{"Y", 1}});
    m.set("Z", "Y", {{"X", -1}});
    m.set("X", "Y", {{"Z", kappa}});
    return m;
}

LieModel magnetic_lie(double kappa)
{
    LieModel m({"Xt", "Yt", "Zt", "Theta"}, kappa);
    m.set("Zt", "Xt", {{"Yt", 1}});
    m.set("Zt", "Yt", {{"Xt", -1}});
    m.set("Xt", "Yt", {{"Zt", kappa}});
    m.set("Theta", "Xt", {{"Yt", 1}});
    m.set("Theta", "Yt", {{"Xt", -1}});
    return m;
}

std::array<Section, 4> unit_frame4()
{
    return {Section::coordinate(4, 0), Section::coordinate(4, 1),
            Section::coordinate(4, 2), Section::coordinate(4, 3)};
}
}  // namespace

LorentzExtension product_extension(ConstantCurvatureUT const& ut)
{
    LorentzExtension ext;
    ext.kind = LorentzExtension::Kind::product;
    ext.model = FrameModel::lie(product_lie(ut.kappa), Domain::cube(4, 1.0),
                                "product extension (Lie)");
    ext.frame = unit_frame4();
    ext.metric.diagonal() << 1, 1, 0, -1;
    ext.lorentz_block = {0, 1, 3};
    ext.kappa = ut.kappa;
    return ext;
}

LorentzExtension product_extension(UnitTangentChart const& ut)
{
    LorentzExtension ext;
    ext.kind = LorentzExtension::Kind::product;
    ext.model = FrameModel::chart(lift_domain(ut.surface.domain, 2),
                                  "product extension over " + ut.surface.name);
    ext.frame = {pad4(ut.X), pad4(ut.Y), pad4(ut.Z), Section::coordinate(4, 3)};
    ext.metric.diagonal() << 1, 1, 0, -1;
    ext.lorentz_block = {0, 1, 3};
    ext.surface = ut.surface;
    return ext;
}

LorentzExtension magnetic_extension(ConstantCurvatureUT const& ut)
{
    LorentzExtension ext;
    ext.kind = LorentzExtension::Kind::magnetic;
    ext.model = FrameModel::lie(magnetic_lie(ut.kappa), Domain::cube(4, 1.0),
                                "magnetic extension (Lie)");
    ext.frame = unit_frame4();
    ext.metric.diagonal() << 1, 1, -1, 0;
    ext.lorentz_block = {0, 1, 2};
    ext.kappa = ut.kappa;
    return ext;
}

LorentzExtension magnetic_extension(UnitTangentChart const& ut)
{
    LorentzExtension ext;
    ext.kind = LorentzExtension::Kind::magnetic;
    ext.model = FrameModel::chart(lift_domain(ut.surface.domain, 2),
                                  "magnetic extension over " + ut.surface.name);
    auto X = ut.X;
    auto Y = ut.Y;
    auto Xt = Section(4, [X, Y](Vec const& p) {
        Vec v = Vec::Zero(4);
        v.head(3) = std::cos(p[3]) * X(p.head(3)) + std::sin(p[3]) * Y(p.head(3));
        return v;
    });
    auto Yt = Section(4, [X, Y](Vec const& p) {
        Vec v = Vec::Zero(4);
        v.head(3) = -std::sin(p[3]) * X(p.head(3)) + std::cos(p[3]) * Y(p.head(3));
        return v;
    });
    ext.frame = {Xt, Yt, pad4(ut.Z), Section::coordinate(4, 3)};
    ext.metric.diagonal() << 1, 1, -1, 0;
    ext.lorentz_block = {0, 1, 2};
    ext.surface = ut.surface;
    return ext;
}

}  // namespace engel
