#include "engel/prolongations.hpp"

#include "engel/sampling.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace engel {

namespace {

//! Extend a field on the first k coordinates to n coordinates (zeros after).
Section pad(Section const& f, int n)
{
    int k = f.dim();
    if (f.is_constant())
    {
        Vec v = Vec::Zero(n);
        v.head(k) = f.constant_value();
        return Section::constant(v);
    }
    Section::JacFn jac;
    if (f.has_jacobian())
    {
        jac = [f, n, k](Vec const& p) {
            Mat J = Mat::Zero(n, n);
            J.topLeftCorner(k, k) = f.jacobian(p.head(k));
            return J;
        };
    }
    return Section(
        n,
        [f, n, k](Vec const& p) {
            Vec v = Vec::Zero(n);
            v.head(k) = f(p.head(k));
            return v;
        },
        jac);
}

//! Append one coordinate to a domain.
Domain extend_domain(Domain const& base, double lo, double hi, double period)
{
    int k = base.dim();
    Vec l(k + 1), h(k + 1);
    l.head(k) = base.lo;
    h.head(k) = base.hi;
    l[k] = lo;
    h[k] = hi;
    Domain d = Domain::box(l, h);
    d.period.head(k) = base.period;
    d.period[k] = period;
    if (base.predicate)
    {
        auto pred = base.predicate;
        d.predicate = [pred, k](Vec const& p) { return pred(p.head(k)); };
    }
    return d;
}

//! cos(a(p)) l1 + sin(a(p)) l2 for fields living on the first 3 coordinates
//! of a 4-dimensional model, with the angle a read from the full point.
Section rotating_line(Section const& l1, Section const& l2,
                      std::function<double(Vec const&)> angle)
{
    auto f1 = pad(l1, 4);
    auto f2 = pad(l2, 4);
    return Section(4, [f1, f2, angle](Vec const& p) {
        double a = angle(p);
        return Vec(std::cos(a) * f1(p) + std::sin(a) * f2(p));
    });
}

}  // namespace

//---------------------------------------------------------------------------//
// Contact models
//---------------------------------------------------------------------------//

void check_contact(ContactModel const& c, std::size_t n_samples, double tol)
{
    if (c.model.dim() != 3)
        throw DimensionMismatch("contact model must be 3-dimensional");
    for (auto const& p : sample_domain(c.model.domain(), n_samples, 7))
    {
        std::vector<Vec> v = {c.model.eval(c.xi[0], p), c.model.eval(c.xi[1], p),
                              c.model.bracket(c.xi[0], c.xi[1], p)};
        if (distribution_rank(v, tol) != 3)
            throw NotContact("plane field is not contact at a sample point");
    }
}

ContactModel contact_r3()
{
    auto l1 = Section(
        3,
        [](Vec const& p) {
            Vec v(3);
            v << 1, p[2], 0;
            return v;
        },
        [](Vec const&) {
            Mat J = Mat::Zero(3, 3);
            J(1, 2) = 1;
            return J;
        });
    ContactModel c;
    c.model = FrameModel::chart(Domain::cube(3, 2.0), "R3 (x,y,z)");
    c.xi = {l1, Section::coordinate(3, 2)};
    c.reeb = Section::coordinate(3, 1);
    c.label = "R3 ker(dy - z dx)";
    return c;
}

ContactModel contact_xzw()
{
    auto l1 = Section(
        3,
        [](Vec const& p) {
            Vec v(3);
            v << 1, p[2], 0;
            return v;
        },
        [](Vec const&) {
            Mat J = Mat::Zero(3, 3);
            J(1, 2) = 1;
            return J;
        });
    ContactModel c;
    c.model = FrameModel::chart(Domain::cube(3, 2.0), "R3 (x,z,w)");
    c.xi = {l1, Section::coordinate(3, 2)};
    c.reeb = Section::coordinate(3, 1);
    c.label = "R3 ker(dz - w dx)";
    return c;
}

ContactModel contact_unit_tangent(double kappa)
{
    auto ut = constant_curvature_ut(kappa);
    ContactModel c;
    c.model = FrameModel::lie(ut.model, Domain::cube(3, 1.0), "S1(T Sigma) Lie");
    auto X = Section::constant(ut.model.unit(0));
    auto Y = Section::constant(ut.model.unit(1));
    auto Z = Section::constant(ut.model.unit(2));
    c.xi = {Y, Z};
    c.reeb = X;
    c.legendrian = std::array<Section, 2>{Z, Y.scaled(-1)};
    c.label = "unit tangent bundle, xi = <Y, Z>";
    return c;
}

//---------------------------------------------------------------------------//
// Cartan prolongation
//---------------------------------------------------------------------------//

EngelStructure cartan_prolongation(ContactModel const& c)
{
    if (c.model.is_lie())
        throw ConfigError("Cartan prolongation is implemented on chart contact models");
    check_contact(c);
    auto const& f = c.frame();

    auto dth = Section::coordinate(4, 3);
    auto l1 = pad(f[0], 4);
    auto l2 = pad(f[1], 4);
    auto L = Section(
        4,
        [l1, l2](Vec const& p) {
            return Vec(std::cos(p[3]) * l1(p) + std::sin(p[3]) * l2(p));
        },
        [l1, l2](Vec const& p) {
            double cs = std::cos(p[3]), sn = std::sin(p[3]);
            Mat J = cs * l1.jacobian(p) + sn * l2.jacobian(p);
            J.col(3) = -sn * l1(p) + cs * l2(p);
            return J;
        });

    EngelStructure s;
    s.model = FrameModel::chart(extend_domain(c.model.domain(), 0, 2 * pi, 2 * pi),
                                "P(xi) over " + c.model.label());
    s.D = {dth, L};
    s.E = {dth, l1, l2};
    s.W = dth;
    s.transverse = pad(c.reeb, 4);
    s.ew_frame = {l1, l2};
    s.provenance = "cartan";
    s.deck_period = Vec::Zero(4);
    s.deck_period[3] = pi;
    return s;
}

//---------------------------------------------------------------------------//
// Lorentz prolongation
//---------------------------------------------------------------------------//

EngelStructure lorentz_prolongation(LorentzExtension const& ext)
{
    if (ext.signature() != std::pair<int, int>{2, 1})
        throw SignatureError("extension metric is not of signature (+,+,-)");
    auto const& F = ext.frame;
    EngelStructure s;
    s.model = ext.model;
    s.deck_period = Vec::Zero(4);
    if (ext.kind == LorentzExtension::Kind::product)
    {
        auto W = F[0] + F[3];
        s.D = {W, F[2]};
        s.E = {W, F[2], F[1]};
        s.W = W;
        s.transverse = F[0];
        s.ew_frame = {F[2], F[1]};
        s.provenance = "lorentz-product";
        return s;
    }

    auto L = F[0] + F[2];
    Section W;
    if (ext.kappa)
    {
        W = L - F[3].scaled(1 + *ext.kappa);
    }
    else
    {
        auto surf = *ext.surface;
        W = L - F[3].times([surf](Vec const& p) {
                return 1 + gauss_curvature(surf, Vec2(p[0], p[1]));
            });
    }
    s.D = {L, F[3]};
    s.E = {L, F[1], F[3]};
    s.W = W;
    s.transverse = F[0];
    s.ew_frame = {F[3], F[1]};
    s.provenance = "lorentz-magnetic";
    return s;
}

//---------------------------------------------------------------------------//
// Pre-quantum prolongation
//---------------------------------------------------------------------------//

Section horizontal_lift(Section const& v, Section const& beta)
{
    if (v.dim() != 3 || beta.dim() != 3)
        throw DimensionMismatch("horizontal lift expects fields on a 3-dimensional base");
    Section::JacFn jac;
    if (v.has_jacobian() && beta.has_jacobian())
    {
        jac = [v, beta](Vec const& p) {
            Vec q = p.head(3);
            Vec vv = v(q), bb = beta(q);
            Mat Jv = v.jacobian(q), Jb = beta.jacobian(q);
            Mat J = Mat::Zero(4, 4);
            J.topLeftCorner(3, 3) = Jv;
            J.block(3, 0, 1, 3) = -(vv.transpose() * Jb + bb.transpose() * Jv);
            return J;
        };
    }
    return Section(
        4,
        [v, beta](Vec const& p) {
            Vec q = p.head(3);
            Vec vv = v(q);
            Vec r(4);
            r.head(3) = vv;
            r[3] = -beta(q).dot(vv);
            return r;
        },
        jac);
}

double curvature_defect(PrequantumData const& d, std::size_t n_samples)
{
    double worst = 0;
    constexpr int pairs[3][3] = {{0, 1, 2}, {0, 2, 1}, {1, 2, 0}};
    for (auto const& p : sample_domain(d.contact.model.domain(), n_samples, 11))
    {
        Mat Jb = d.beta.jacobian(p);
        Vec w = d.w_bar(p);
        double f = d.vol(p);
        for (auto const& [i, j, k] : pairs)
        {
            double db = Jb(j, i) - Jb(i, j);
            // vol(w, e_i, e_j) = f w_k eps(k, i, j)
            double sign = (i == 0 && j == 2) ? -1.0 : 1.0;
            double iw = f * w[k] * sign;
            worst = std::max(worst, std::abs(db - iw));
        }
    }
    return worst;
}

EngelStructure prequantum_prolongation(PrequantumData const& d, double tol)
{
    if (d.contact.model.is_lie() || d.contact.model.dim() != 3)
        throw ConfigError("pre-quantum prolongation needs a 3-dimensional chart base");
    check_contact(d.contact);
    double defect = curvature_defect(d);
    if (!(defect <= tol))
        throw CurvatureMismatch("d(beta) differs from i_{w_bar} vol by "
                                + std::to_string(defect));

    auto const& base = d.contact.model.domain();
    Domain dom = d.theta_period > 0
                     ? extend_domain(base, 0, d.theta_period, d.theta_period)
                     : extend_domain(base, -d.theta_half_width, d.theta_half_width, 0);

    EngelStructure s;
    s.model = FrameModel::chart(dom, "V x S1 over " + d.contact.model.label());
    auto h = [&](Section const& v) { return horizontal_lift(v, d.beta); };
    s.E = {h(Section::coordinate(3, 0)), h(Section::coordinate(3, 1)),
           h(Section::coordinate(3, 2))};
    s.D = {h(d.contact.xi[0]), h(d.contact.xi[1])};
    s.W = h(d.w_bar);
    s.transverse = Section::coordinate(4, 3);
    s.ew_frame = {h(d.ew[0]), h(d.ew[1])};
    s.provenance = d.label;
    s.deck_period = Vec::Zero(4);
    if (d.flow_domain)
    {
        s.flow_domain = d.theta_period > 0
                            ? extend_domain(*d.flow_domain, 0, d.theta_period,
                                            d.theta_period)
                            : extend_domain(*d.flow_domain, -1e6, 1e6, 0);
    }
    return s;
}

PrequantumData prequantum_local_model()
{
    // V = (x, z, w), xi = ker(dz - w dx), w_bar = dw, vol = dx^dz^dw,
    // beta = -z dx so that the connection form is d(theta) - z dx.
    PrequantumData d;
    d.contact = contact_xzw();
    d.contact.xi = {Section::coordinate(3, 2), d.contact.xi[0]};
    d.w_bar = Section::coordinate(3, 2);
    d.vol = [](Vec const&) { return 1.0; };
    d.beta = Section(
        3,
        [](Vec const& p) {
            Vec b = Vec::Zero(3);
            b[0] = -p[1];
            return b;
        },
        [](Vec const&) {
            Mat J = Mat::Zero(3, 3);
            J(0, 1) = -1;
            return J;
        });
    d.ew = {contact_xzw().xi[0], Section::coordinate(3, 1)};
    d.theta_period = 0;
    d.label = "prequantum-local";
    return d;
}

//---------------------------------------------------------------------------//
// Propellors
//---------------------------------------------------------------------------//

std::function<Vec2(double)> propellor_default_path(Mat2 const& monodromy)
{
    Mat2 L = real_log(monodromy);
    return [L](double t) -> Vec2 {
        return exp_traceless(t * L) * rotation(2 * pi * t) * Vec2(1, 0);
    };
}

namespace {
Vec2 path_derivative(std::function<Vec2(double)> const& u, double t)
{
    constexpr double h = 1e-5;
    return (u(t + h) - u(t - h)) / (2 * h);
}

Section planar_field(std::function<Vec2(double)> u)
{
    // (u_1(t), u_2(t), 0) on (x, y, t); jacobian only in the t column.
    return Section(
        3,
        [u](Vec const& p) {
            Vec2 a = u(p[2]);
            Vec v(3);
            v << a.x(), a.y(), 0;
            return v;
        },
        [u](Vec const& p) {
            Vec2 da = path_derivative(u, p[2]);
            Mat J = Mat::Zero(3, 3);
            J(0, 2) = da.x();
            J(1, 2) = da.y();
            return J;
        });
}
}  // namespace

PropellorModel propellor_structure(Mat2 const& monodromy,
                                   std::function<Vec2(double)> line_path,
                                   PropellorVariant variant)
{
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            if (std::abs(monodromy(i, j) - std::round(monodromy(i, j))) > 1e-12)
                throw ConfigError("monodromy must be an integer matrix");
    Mat2 L = real_log(monodromy);

    if (variant == PropellorVariant::invariant_field)
    {
        if (!monodromy.isIdentity(1e-12))
            throw ConfigError("the invariant-field propellor needs identity monodromy");
        if (line_path)
            throw ConfigError("the invariant-field propellor uses its built-in rotation");
        line_path = [](double t) { return Vec2(std::cos(2 * pi * t), std::sin(2 * pi * t)); };
    }
    if (!line_path)
        line_path = propellor_default_path(monodromy);

    // Equivariance and single-signed rotation at samples of one period.
    for (int i = 0; i <= 64; ++i)
    {
        double t = i / 64.0;
        Vec2 a = line_path(t);
        Vec2 b = monodromy * a;
        if (line_angle(line_path(t + 1), b) > 1e-8)
            throw EquivarianceError("line path is not monodromy-equivariant");
        Vec2 da = path_derivative(line_path, t);
        double rot = a.x() * da.y() - a.y() * da.x();
        if (!(rot > 1e-9))
            throw NotContact("line path does not rotate positively");
    }

    Vec lo(3), hi(3);
    lo << -1, -1, 0;
    hi << 1, 1, 1;
    ContactModel c;
    c.model = FrameModel::chart(Domain::box(lo, hi), "mapping torus cover (x,y,t)");
    auto ell = planar_field(line_path);
    auto dt = Section::coordinate(3, 2);
    auto perp = Section(3, [line_path](Vec const& p) {
        Vec2 a = line_path(p[2]);
        Vec v(3);
        v << -a.y(), a.x(), 0;
        return v;
    });
    c.xi = {ell, dt};
    c.reeb = perp;
    c.label = "propellor xi = <(a,b), d_t>";

    PrequantumData d;
    d.contact = c;
    d.vol = [](Vec const&) { return 1.0; };
    d.flow_domain = Domain::cube(3, 1e6);
    if (variant == PropellorVariant::rotating)
    {
        // beta = (x dy - y dx)/2, d(beta) = dx^dy = i_{d_t} vol.
        d.w_bar = dt;
        d.beta = Section(
            3,
            [](Vec const& p) {
                Vec b(3);
                b << -0.5 * p[1], 0.5 * p[0], 0;
                return b;
            },
            [](Vec const&) {
                Mat J = Mat::Zero(3, 3);
                J(0, 1) = -0.5;
                J(1, 0) = 0.5;
                return J;
            });
        // Frame exp(tL)(e1, e2) descends to the mapping torus.
        auto col = [L](int k) {
            return std::function<Vec2(double)>([L, k](double t) -> Vec2 {
                return exp_traceless(t * L).col(k);
            });
        };
        d.ew = {planar_field(col(0)), planar_field(col(1))};
        d.label = "propellor-rotating";
    }
    else
    {
        // beta = B dx - A dy with A' = a, B' = b.
        d.w_bar = ell;
        d.beta = Section(
            3,
            [](Vec const& p) {
                double t = p[2];
                Vec b(3);
                b << -std::cos(2 * pi * t) / (2 * pi), -std::sin(2 * pi * t) / (2 * pi), 0;
                return b;
            },
            [](Vec const& p) {
                double t = p[2];
                Mat J = Mat::Zero(3, 3);
                J(0, 2) = std::sin(2 * pi * t);
                J(1, 2) = -std::cos(2 * pi * t);
                return J;
            });
        d.ew = {dt, perp};
        d.label = "propellor-invariant";
    }

    PropellorModel m;
    m.monodromy = monodromy;
    m.variant = variant;
    m.contact = c;
    m.data = d;
    m.engel = prequantum_prolongation(d);
    if (variant == PropellorVariant::rotating)
    {
        // Back to t in [0, 1) and (x, y) in [-1/2, 1/2)^2 through the deck
        // group of the mapping torus. Translating (x, y) by (a, b) moves the
        // fiber coordinate by -(a y - b x)/2 since beta changes by d((a y - b x)/2).
        Eigen::Matrix2i Ainv;
        Ainv << static_cast<int>(std::lround(monodromy(1, 1))),
            -static_cast<int>(std::lround(monodromy(0, 1))),
            -static_cast<int>(std::lround(monodromy(1, 0))),
            static_cast<int>(std::lround(monodromy(0, 0)));
        Eigen::Matrix2i A = monodromy.array().round().cast<int>().matrix();
        Domain fiber = m.engel.model.domain();
        m.engel.deck_wrap = [Ainv, A, fiber](Vec const& p) {
            Vec q = p;
            auto n = static_cast<long>(std::floor(q[2]));
            Vec2 xy(q[0], q[1]);
            for (long k = 0; k < std::abs(n); ++k)
                xy = (n > 0 ? Ainv : A).cast<double>() * xy;
            q[2] -= static_cast<double>(n);
            double a = -std::round(xy.x()), b = -std::round(xy.y());
            q[3] -= 0.5 * (a * xy.y() - b * xy.x());
            q[0] = xy.x() + a;
            q[1] = xy.y() + b;
            return fiber.wrap(q);
        };
    }
    return m;
}

//---------------------------------------------------------------------------//
// Suspension
//---------------------------------------------------------------------------//

double twisting_angle(SuspensionData const& sd, Vec const& v)
{
    auto const& f = sd.base.frame();
    auto const& model = sd.base.model;
    Vec l1 = model.eval(f[0], v);
    Vec l2 = model.eval(f[1], v);
    Vec target;
    if (!sd.phi && !sd.dphi)
    {
        target = l1;
    }
    else
    {
        Vec w = sd.phi ? sd.phi(v) : v;
        Mat J = sd.dphi(v);
        target = J.fullPivLu().solve(model.eval(f[0], w));
    }
    Mat B(3, 3);
    B << l1, l2, model.eval(sd.base.reeb, v);
    Vec c = B.fullPivLu().solve(target);
    if (std::abs(c[2]) > 1e-8 * c.norm())
        throw ConfigError("map does not preserve the contact planes");
    double a = std::atan2(c[1], c[0]);
    while (a > pi / 2)
        a -= pi;
    while (a <= -pi / 2)
        a += pi;
    return -a;
}

EngelStructure suspension(SuspensionData const& sd, std::size_t n_checks)
{
    auto const& c = sd.base;
    check_contact(c);
    if (!sd.rho)
        throw ConfigError("suspension needs a twist profile");
    if ((sd.phi || sd.dphi) && !sd.dphi)
        throw ConfigError("suspension map needs its derivative");

    auto rho = sd.rho;
    auto drho = sd.drho_dt;
    if (!drho)
    {
        drho = [rho](double t, Vec const& v) {
            constexpr double h = 1e-6;
            return (rho(t + h, v) - rho(t - h, v)) / (2 * h);
        };
    }
    for (auto const& v : sample_domain(c.model.domain(), n_checks, 13))
    {
        if (std::abs(rho(0, v)) > 1e-9)
            throw ConfigError("twist profile must vanish at t = 0");
        double target = sd.K * pi - twisting_angle(sd, v);
        if (std::abs(rho(1, v) - target) > 1e-6)
            throw ConfigError("twist profile must end at K pi - d(v)");
        for (int i = 0; i <= 32; ++i)
            if (!(drho(i / 32.0, v) > 0))
                throw TwistMonotonicityError("twist profile is not increasing in t");
    }

    bool identity = !sd.phi && !sd.dphi;
    Domain dom = extend_domain(c.model.domain(), 0, 1, identity ? 1.0 : 0.0);
    EngelStructure s;
    if (c.model.is_lie())
    {
        auto const& lm = c.model.lie_model();
        auto names = lm.names();
        names.push_back("T");
        LieModel ext(names, lm.curvature_parameter());
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j)
            {
                Vec v = Vec::Zero(4);
                v.head(3) = lm.bracket(lm.unit(i), lm.unit(j));
                ext.set(i, j, v);
            }
        s.model = FrameModel::lie(ext, dom, "suspension over " + c.model.label(), 3);
    }
    else
    {
        s.model = FrameModel::chart(dom, "mapping torus over " + c.model.label());
    }

    auto const& f = c.frame();
    auto T = Section::coordinate(4, 3);
    auto L = rotating_line(f[0], f[1], [rho](Vec const& p) {
        return rho(p[3], Vec(p.head(3)));
    });
    s.D = {T, L};
    s.E = {T, pad(f[0], 4), pad(f[1], 4)};
    s.W = T;
    s.transverse = pad(c.reeb, 4);
    s.ew_frame = {pad(f[0], 4), pad(f[1], 4)};
    s.provenance = sd.label;
    s.deck_period = Vec::Zero(4);
    return s;
}

SuspensionData geodesic_suspension_data(bool plus)
{
    SuspensionData sd;
    sd.base = contact_unit_tangent(-1);
    auto const& lm = sd.base.model.lie_model();
    if (!plus)
    {
        auto Y = Section::constant(lm.unit(1));
        auto Z = Section::constant(lm.unit(2));
        sd.base.legendrian = std::array<Section, 2>{Y, Z.scaled(-1)};
    }
    // Time-2 pi flow of X acts on left-invariant frames by exp(-2 pi ad_X).
    Mat P = (-2 * pi * lm.ad(lm.unit(0))).exp();
    sd.phi = [](Vec const& v) { return v; };
    sd.dphi = [P](Vec const&) { return P; };
    sd.K = 0;
    sd.rho = [](double t, Vec const&) { return std::atan(std::tanh(2 * pi * t)); };
    sd.drho_dt = [](double t, Vec const&) {
        double th = std::tanh(2 * pi * t);
        return 2 * pi * (1 - th * th) / (1 + th * th);
    };
    sd.label = plus ? "suspension-geodesic" : "suspension-geodesic-minus";
    return sd;
}

SuspensionData identity_suspension_data()
{
    SuspensionData sd;
    sd.base = contact_r3();
    sd.K = 1;
    sd.rho = [](double t, Vec const&) { return pi * t; };
    sd.drho_dt = [](double, Vec const&) { return pi; };
    sd.label = "suspension-identity";
    return sd;
}

BiEngelPair bi_engel_pair()
{
    auto plus = suspension(geodesic_suspension_data(true));
    auto minus = suspension(geodesic_suspension_data(false));
    plus.provenance = "bi-engel-plus";
    minus.provenance = "bi-engel-minus";
    return {plus, minus};
}

}  // namespace engel
