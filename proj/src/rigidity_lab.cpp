#include "engel/rigidity_lab.hpp"

#include "engel/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>

namespace engel {

std::string to_string(AccessRegion r)
{
    switch (r)
    {
    case AccessRegion::APlus:
        return "APlus";
    case AccessRegion::AMinus:
        return "AMinus";
    case AccessRegion::AW:
        return "AW";
    case AccessRegion::Outside:
        return "Outside";
    }
    return "?";
}

AccessRegion accessible_membership(Vec const& p)
{
    if (p.size() != 4)
        throw DimensionMismatch("Darboux points have four coordinates");
    double y = p[1], z = p[2], w = p[3];
    if (std::abs(p[0]) <= 1e-12 && std::abs(y) <= 1e-12 && std::abs(z) <= 1e-12)
        return AccessRegion::AW;
    // y > z^2/(2w) with w > 0 is 2yw > z^2; with w < 0 the inequality flips twice.
    if (w > 0 && 2 * y * w > z * z)
        return AccessRegion::APlus;
    if (w < 0 && 2 * y * w > z * z)
        return AccessRegion::AMinus;
    return AccessRegion::Outside;
}

double boundary_cone_value(Vec const& p)
{
    if (p.size() != 4)
        throw DimensionMismatch("Darboux points have four coordinates");
    return p[2] * p[2] - 2 * p[1] * p[3];
}

//---------------------------------------------------------------------------//
// D-curves
//---------------------------------------------------------------------------//

namespace {

using Rhs = std::function<Vec(double, Vec const&)>;

std::vector<Vec> rk4(Rhs const& f, Vec y, double h, long n)
{
    std::vector<Vec> out;
    out.reserve(static_cast<std::size_t>(n + 1));
    out.push_back(y);
    for (long i = 0; i < n; ++i)
    {
        double t = h * static_cast<double>(i);
        Vec k1 = f(t, y);
        Vec k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
        Vec k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
        Vec k4 = f(t + h, y + h * k3);
        y += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
        if (!y.allFinite())
            throw NonFiniteEvaluation("integration produced NaN/inf");
        out.push_back(y);
    }
    return out;
}

long step_count(double T, double dt)
{
    if (!(dt > 0) || !(T > 0))
        throw ConfigError("need T > 0 and dt > 0");
    long n = std::lround(T / dt);
    if (n < 8)
        throw StepTooLarge("fewer than 8 integration steps");
    return n;
}

Vec darboux_rhs(double u, double v, Vec const& p)
{
    Vec d(4);
    d << u, p[2] * u, p[3] * u, v;
    return d;
}

}  // namespace

DCurve sample_d_curve(Control u, Control v, double T, double dt, Vec const& start)
{
    if (!u || !v)
        throw ConfigError("D-curve needs both controls");
    if (start.size() != 4)
        throw DimensionMismatch("Darboux points have four coordinates");
    long n = step_count(T, dt);
    double h = T / static_cast<double>(n);
    DCurve c;
    c.u = u;
    c.v = v;
    c.points = rk4([&](double t, Vec const& p) { return darboux_rhs(u(t), v(t), p); }, start,
                   h, n);
    c.t.resize(c.points.size());
    for (std::size_t i = 0; i < c.t.size(); ++i)
        c.t[i] = h * static_cast<double>(i);
    return c;
}

double tangency_residual(DCurve const& c)
{
    double worst = 0;
    for (std::size_t i = 1; i < c.points.size(); ++i)
    {
        Vec const& a = c.points[i - 1];
        Vec const& b = c.points[i];
        double dx = b[0] - a[0];
        double zm = 0.5 * (a[2] + b[2]);
        double wm = 0.5 * (a[3] + b[3]);
        worst = std::max({worst, std::abs((b[1] - a[1]) - zm * dx),
                          std::abs((b[2] - a[2]) - wm * dx)});
    }
    return worst;
}

double inaba_identity_check(DCurve const& c)
{
    if (c.points.size() < 3)
        throw EmptyInput("curve too short");
    if (c.points.front().norm() > 1e-12)
        throw SingularIntegrand("curve must start at the origin");
    for (std::size_t i = 0; i < c.points.size(); ++i)
        if (std::abs(c.points[i][3] - c.t[i]) > 1e-9 * (1 + c.t[i]))
            throw SingularIntegrand("curve is not parameterized by w = t");
    if (std::abs(c.u(0.0)) > 1e-9)
        throw SingularIntegrand("u(0) must vanish so that z/w -> 0 at t = 0");

    auto g = [&](std::size_t i) {
        double t = c.t[i];
        if (t == 0)
            return 0.0;  // z = O(t^3)
        double z = c.points[i][2];
        return z * z / (2 * t * t);
    };
    std::size_t n = c.points.size() - 1;
    double h = c.t[1] - c.t[0];
    double integral = 0;
    std::size_t even = n - (n % 2);
    for (std::size_t i = 0; i + 2 <= even; i += 2)
        integral += (h / 3) * (g(i) + 4 * g(i + 1) + g(i + 2));
    if (n % 2)
    {
        // Simpson 3/8 on the last three intervals after Simpson on the rest.
        integral = 0;
        std::size_t m = n - 3;
        for (std::size_t i = 0; i + 2 <= m; i += 2)
            integral += (h / 3) * (g(i) + 4 * g(i + 1) + g(i + 2));
        integral += (3 * h / 8) * (g(m) + 3 * g(m + 1) + 3 * g(m + 2) + g(m + 3));
    }
    Vec const& e = c.end();
    double T = c.t.back();
    return std::abs(e[1] - e[2] * e[2] / (2 * T) - integral);
}

//---------------------------------------------------------------------------//
// Rigidity probe
//---------------------------------------------------------------------------//

bool RigidityReport::pass() const
{
    return n_aminus == 0 && n_outside == 0 && n_aw == 0 && max_cone_value < 0
           && zero_control_in_aw && sweep_monotone;
}

Control random_control(std::uint64_t seed, std::size_t trial, bool vanish_at_zero)
{
    std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * (trial + 1));
    std::normal_distribution<double> N(0.0, 1.0);
    std::array<double, 4> c{};
    for (auto& ck : c)
        ck = N(rng);
    if (vanish_at_zero)
        c[0] = 0;
    return [c](double t) { return c[0] + t * (c[1] + t * (c[2] + t * c[3])); };
}

namespace {

Control unit_control()
{
    return [](double) { return 1.0; };
}

void finish_report(RigidityReport& r, double dt)
{
    r.max_cone_value = -std::numeric_limits<double>::infinity();
    for (auto const& e : r.endpoints)
    {
        switch (accessible_membership(e))
        {
        case AccessRegion::APlus:
            ++r.n_aplus;
            break;
        case AccessRegion::AMinus:
            ++r.n_aminus;
            break;
        case AccessRegion::AW:
            ++r.n_aw;
            break;
        case AccessRegion::Outside:
            ++r.n_outside;
            break;
        }
        r.max_cone_value = std::max(r.max_cone_value, boundary_cone_value(e));
    }

    auto zero = sample_d_curve([](double) { return 0.0; }, unit_control(), r.T, dt);
    r.zero_control_in_aw = accessible_membership(zero.end()) == AccessRegion::AW;

    double T = r.T;
    r.sweep_monotone = true;
    for (int k = 0; k <= 10; ++k)
    {
        double eps = std::ldexp(1.0, -k);
        auto c = sample_d_curve([eps, T](double t) { return eps * std::sin(pi * t / T); },
                                unit_control(), T, dt);
        EpsilonSample s;
        s.eps = eps;
        s.y_end = c.end()[1];
        for (auto const& p : c.points)
            s.sup_z = std::max(s.sup_z, std::abs(p[2]));
        if (!r.sweep.empty())
        {
            auto const& prev = r.sweep.back();
            r.sweep_monotone = r.sweep_monotone && std::abs(s.y_end) < std::abs(prev.y_end)
                               && s.sup_z < prev.sup_z;
        }
        r.sweep.push_back(s);
    }
}

RigidityReport probe_header(double T, std::size_t n_trials, std::uint64_t seed)
{
    if (n_trials < 1)
        throw EmptyInput("n_trials must be at least 1");
    RigidityReport r;
    r.T = T;
    r.n_trials = n_trials;
    r.seed = seed;
    r.endpoints.resize(n_trials);
    return r;
}

}  // namespace

RigidityReport rigidity_probe_serial(double T, std::size_t n_trials, std::uint64_t seed,
                                     double dt)
{
    auto r = probe_header(T, n_trials, seed);
    for (std::size_t i = 0; i < n_trials; ++i)
        r.endpoints[i] = sample_d_curve(random_control(seed, i), unit_control(), T, dt).end();
    finish_report(r, dt);
    return r;
}

RigidityReport rigidity_probe(double T, std::size_t n_trials, std::uint64_t seed, double dt)
{
    auto r = probe_header(T, n_trials, seed);
    std::exception_ptr err;
    auto n = static_cast<long>(n_trials);
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (long i = 0; i < n; ++i)
    {
        try
        {
            auto k = static_cast<std::size_t>(i);
            r.endpoints[k] = sample_d_curve(random_control(seed, k), unit_control(), T, dt).end();
        }
        catch (...)
        {
#pragma omp critical(engel_rigidity_error)
            if (!err)
                err = std::current_exception();
        }
    }
    if (err)
        std::rethrow_exception(err);
    finish_report(r, dt);
    return r;
}

//---------------------------------------------------------------------------//
// Infinitesimal rigidity
//---------------------------------------------------------------------------//

namespace {

std::vector<Vec> varied_curve(VariationSpec const& spec, double s, long n, double h)
{
    auto p = spec.p ? spec.p : Control([](double) { return 0.0; });
    auto q = spec.q ? spec.q : Control([](double) { return 0.0; });
    switch (spec.kind)
    {
    case VariationKind::w_curve:
        return rk4(
            [&](double t, Vec const& y) {
                double u = s * p(t), v = 1 + s * q(t);
                Vec d(4);
                d << u * std::cos(y[3]), y[2] * u * std::cos(y[3]), u * std::sin(y[3]), v;
                return d;
            },
            Vec::Zero(4), h, n);
    case VariationKind::w_curve_darboux:
        return rk4([&](double t, Vec const& y) { return darboux_rhs(s * p(t), 1 + s * q(t), y); },
                   Vec::Zero(4), h, n);
    case VariationKind::transverse:
    {
        auto const& f = spec.f;
        Vec start(4);
        start << 0, s * f[0](0), s * f[1](0), s * f[2](0);
        return rk4([&](double t, Vec const& y) { return darboux_rhs(1, s * f[3](t), y); },
                   start, h, n);
    }
    }
    throw ConfigError("unknown variation kind");
}

double curve_tangency(VariationKind kind, std::vector<Vec> const& pts)
{
    double worst = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
    {
        Vec const& a = pts[i - 1];
        Vec const& b = pts[i];
        Vec m = 0.5 * (a + b);
        Vec d = b - a;
        if (kind == VariationKind::w_curve)
        {
            worst = std::max({worst, std::abs(d[1] - m[2] * d[0]),
                              std::abs(std::cos(m[3]) * d[2] - std::sin(m[3]) * d[0])});
        }
        else
        {
            worst = std::max({worst, std::abs(d[1] - m[2] * d[0]),
                              std::abs(d[2] - m[3] * d[0])});
        }
    }
    return worst;
}

//! E-transverse coordinate. On the long chart the tan-chart coordinate y is
//! used where |cos theta| >= |sin theta| and the cot-chart coordinate xz - y
//! elsewhere, following the interval split of the base W-curve.
double transverse_coordinate(VariationKind kind, Vec const& p, double base_theta)
{
    if (kind == VariationKind::w_curve
        && std::abs(std::cos(base_theta)) < std::abs(std::sin(base_theta)))
        return p[0] * p[2] - p[1];
    return p[1];
}

}  // namespace

RigidityMeasure infinitesimal_rigidity_check(VariationSpec const& spec)
{
    if (spec.kind == VariationKind::transverse)
    {
        for (auto const& f : spec.f)
            if (!f)
                throw ConfigError("transverse variation needs f, f', f'', f'''");
    }
    if (!(spec.ds > 0))
        throw ConfigError("ds must be positive");
    long n = step_count(spec.length, spec.dt);
    double h = spec.length / static_cast<double>(n);

    double ds = spec.ds;
    std::array<double, 4> svals = {ds, -ds, ds / 2, -ds / 2};
    std::array<std::vector<Vec>, 4> curves;
    for (std::size_t k = 0; k < 4; ++k)
    {
        curves[k] = varied_curve(spec, svals[k], n, h);
        if (curve_tangency(spec.kind, curves[k]) > 1e-6)
            throw VariationNotDCurve("varied curve is not tangent to D");
    }

    RigidityMeasure m;
    for (std::size_t i = 0; i < curves[0].size(); ++i)
    {
        double t = h * static_cast<double>(i);
        auto Y = [&](std::size_t k) {
            return transverse_coordinate(spec.kind, curves[k][i], t);
        };
        double d1 = (Y(0) - Y(1)) / (2 * ds);
        double d2 = (Y(2) - Y(3)) / ds;
        double dy = (4 * d2 - d1) / 3;
        Vec g1 = (curves[0][i] - curves[1][i]) / (2 * ds);
        Vec g2 = (curves[2][i] - curves[3][i]) / ds;
        Vec dG = (4 * g2 - g1) / 3;
        m.max_dy_ds = std::max(m.max_dy_ds, std::abs(dy));
        m.variation_norm = std::max(m.variation_norm, dG.norm());
    }
    m.ratio = m.variation_norm > 0 ? m.max_dy_ds / m.variation_norm : 0.0;
    return m;
}

//---------------------------------------------------------------------------//
// Null variations
//---------------------------------------------------------------------------//

NullVariationResult null_variation_check(NullVariation const& nv)
{
    auto const& S = nv.surface;
    if (!nv.eta || !nv.eta_dot)
        throw ConfigError("null variation needs eta and its derivative");
    if (nv.eta(0).norm() > 1e-12)
        throw ConfigError("variation must fix the start point (eta(0) = 0)");
    long n = step_count(nv.length, nv.dt);
    if (n % 2)
        ++n;
    double h = nv.length / static_cast<double>(n);

    // Unit-speed geodesic of lambda (dx^2 + dy^2): state (x, y, x', y').
    Vec y0(4);
    double e = std::exp(-S.u(nv.start.x(), nv.start.y()));
    y0 << nv.start.x(), nv.start.y(), e * std::cos(nv.heading), e * std::sin(nv.heading);
    auto geo = rk4(
        [&](double, Vec const& y) {
            Vec2 g = S.du(y[0], y[1]);
            double vx = y[2], vy = y[3];
            Vec d(4);
            d << vx, vy, -(g.x() * vx * vx + 2 * g.y() * vx * vy - g.x() * vy * vy),
                -(-g.y() * vx * vx + 2 * g.x() * vx * vy + g.y() * vy * vy);
            return d;
        },
        y0, h, n);

    NullVariationResult r;
    for (auto const& y : geo)
    {
        if (!S.domain.contains(Vec(y.head(2))))
            throw DomainViolation("base geodesic leaves the surface chart");
        double speed = std::sqrt(S.lambda(y[0], y[1])) * y.tail(2).norm();
        r.max_speed_error = std::max(r.max_speed_error, std::abs(speed - 1));
    }
    if (r.max_speed_error > 1e-6)
        throw NotNull("base curve is not a unit-speed (null-lift) geodesic");

    // theta_s at even nodes by cumulative Simpson.
    auto theta = [&](double s) {
        std::vector<double> f(geo.size());
        for (std::size_t i = 0; i < geo.size(); ++i)
        {
            double t = h * static_cast<double>(i);
            Vec2 g = geo[i].head(2) + s * nv.eta(t);
            Vec2 v = geo[i].tail(2) + s * nv.eta_dot(t);
            f[i] = std::sqrt(S.lambda(g.x(), g.y())) * v.norm();
        }
        std::vector<double> th(geo.size() / 2 + 1, 0.0);
        for (std::size_t k = 1; k < th.size(); ++k)
        {
            std::size_t i = 2 * k;
            th[k] = th[k - 1] + (h / 3) * (f[i - 2] + 4 * f[i - 1] + f[i]);
        }
        return th;
    };
    double ds = nv.ds;
    auto tp = theta(ds), tm = theta(-ds), tp2 = theta(ds / 2), tm2 = theta(-ds / 2);
    for (std::size_t k = 0; k < tp.size(); ++k)
    {
        std::size_t i = 2 * k;
        double t = h * static_cast<double>(i);
        double d1 = (tp[k] - tm[k]) / (2 * ds);
        double d2 = (tp2[k] - tm2[k]) / ds;
        double dtheta = (4 * d2 - d1) / 3;
        Vec2 gdot = geo[i].tail(2);
        double lam = S.lambda(geo[i][0], geo[i][1]);
        double res = lam * gdot.dot(nv.eta(t)) - dtheta;
        r.t.push_back(t);
        r.residual.push_back(res);
        r.max_residual = std::max(r.max_residual, std::abs(res));
    }
    return r;
}

}  // namespace engel
