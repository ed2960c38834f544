#include "engel/characteristic_dynamics.hpp"

#include "engel/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>

namespace engel {

Mat2 OrbitTrace::normalized(std::size_t i) const
{
    Mat2 m = M.at(i);
    if (i < log_det.size())
        return m * std::exp(-0.5 * log_det[i]);
    double d = m.determinant();
    if (!(d > 0))
        throw FrameDegenerate("transported matrix lost orientation");
    return m / std::sqrt(d);
}

std::string ProjectiveType::name() const
{
    switch (kind)
    {
    case Kind::elliptic:
        return "Elliptic";
    case Kind::parabolic:
        return "Parabolic";
    case Kind::hyperbolic:
        return "Hyperbolic";
    case Kind::trans_parabolic:
        return "TransParabolic";
    case Kind::trans_hyperbolic:
        return "TransHyperbolic";
    }
    return "?";
}

std::string to_string(GlobalKind k)
{
    switch (k)
    {
    case GlobalKind::elliptic:
        return "Elliptic";
    case GlobalKind::parabolic:
        return "Parabolic";
    case GlobalKind::hyperbolic:
        return "Hyperbolic";
    case GlobalKind::unknown:
        return "Unknown";
    }
    return "?";
}

std::string GlobalTypeEstimate::summary() const
{
    std::string s = to_string(kind);
    if (kind == GlobalKind::parabolic || kind == GlobalKind::hyperbolic)
        s += trans ? " (trans)" : " (genuine)";
    return s;
}

//---------------------------------------------------------------------------//
// Frame data along orbits
//---------------------------------------------------------------------------//

namespace {

Vec bracket_at(EngelStructure const& s, Section const& a, Section const& b, Vec const& p,
               double h)
{
    if (s.model.is_lie())
        return s.model.bracket(a, b, p, h);
    return bracket_chart(a, b, p, h, &s.flow_region());
}

//! [e1 e2 W] at p with a scale-free degeneracy test.
Mat ew_basis(EngelStructure const& s, Vec const& p)
{
    Mat B(s.dim(), 3);
    B.col(0) = s.model.eval(s.ew_frame[0], p);
    B.col(1) = s.model.eval(s.ew_frame[1], p);
    B.col(2) = s.model.eval(s.W, p);
    Mat Bn = B;
    for (int j = 0; j < 3; ++j)
    {
        double n = Bn.col(j).norm();
        if (n == 0)
            throw FrameDegenerate("E/W frame or W vanishes");
        Bn.col(j) /= n;
    }
    Eigen::JacobiSVD<Mat> svd(Bn);
    if (svd.singularValues()[2] < 1e-10)
        throw FrameDegenerate("E/W frame is dependent modulo W");
    return B;
}

}  // namespace

Mat2 ew_generator(EngelStructure const& s, Vec const& p, double h)
{
    Mat B = ew_basis(s, p);
    auto qr = B.colPivHouseholderQr();
    Mat2 A;
    for (int a = 0; a < 2; ++a)
    {
        Vec b = bracket_at(s, s.ew_frame[static_cast<std::size_t>(a)], s.W, p, h);
        A.col(a) = qr.solve(b).head(2);
    }
    return A;
}

Vec2 dw_coordinates(EngelStructure const& s, Vec const& p)
{
    Mat B = ew_basis(s, p);
    auto qr = B.colPivHouseholderQr();
    Vec2 best = Vec2::Zero();
    for (auto const& d : s.D)
    {
        Vec2 c = qr.solve(s.model.eval(d, p)).head(2);
        if (c.norm() > best.norm())
            best = c;
    }
    if (best.norm() == 0)
        throw FrameDegenerate("D coincides with W");
    return best;
}

//---------------------------------------------------------------------------//
// Integration
//---------------------------------------------------------------------------//

namespace {

struct State
{
    Vec p;
    Mat2 M;
    double log_det = 0;
};

Vec eval_W(EngelStructure const& s, Vec const& p, double t)
{
    if (!s.flow_region().contains(p))
        throw ChartExit("orbit left the chart", t);
    try
    {
        return s.model.eval(s.W, p);
    }
    catch (NonFiniteEvaluation const&)
    {
        throw ChartExit("W is not finite along the orbit", t);
    }
}

//! One RK4 step of p' = W(p) (and M' = A(p) M when with_M).
State rk4_step(EngelStructure const& s, State const& y, double t, double h, bool with_M)
{
    bool lie = s.model.is_lie();
    auto f_p = [&](Vec const& p, double tt) -> Vec {
        if (lie)
            return s.model.eval(s.W, p);
        return eval_W(s, p, tt);
    };
    State out;
    if (lie)
    {
        out.p = y.p + h * s.model.eval(s.W, y.p);
    }
    if (!with_M)
    {
        if (!lie)
        {
            Vec k1 = f_p(y.p, t);
            Vec k2 = f_p(y.p + 0.5 * h * k1, t);
            Vec k3 = f_p(y.p + 0.5 * h * k2, t);
            Vec k4 = f_p(y.p + h * k3, t);
            out.p = y.p + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
        }
        out.M = y.M;
        out.log_det = y.log_det;
        return out;
    }

    if (lie)
    {
        Vec w = s.model.eval(s.W, y.p);
        Mat2 A1 = ew_generator(s, y.p);
        Mat2 A2 = ew_generator(s, Vec(y.p + 0.5 * h * w));
        Mat2 A4 = ew_generator(s, Vec(y.p + h * w));
        Mat2 k1 = A1 * y.M;
        Mat2 k2 = A2 * (y.M + 0.5 * h * k1);
        Mat2 k3 = A2 * (y.M + 0.5 * h * k2);
        Mat2 k4 = A4 * (y.M + h * k3);
        out.M = y.M + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
        out.log_det = y.log_det + (h / 6) * (A1.trace() + 4 * A2.trace() + A4.trace());
        return out;
    }

    Vec k1 = f_p(y.p, t);
    Mat2 A1 = ew_generator(s, y.p);
    Mat2 m1 = A1 * y.M;
    Vec p2 = y.p + 0.5 * h * k1;
    Vec k2 = f_p(p2, t);
    Mat2 A2 = ew_generator(s, p2);
    Mat2 m2 = A2 * (y.M + 0.5 * h * m1);
    Vec p3 = y.p + 0.5 * h * k2;
    Vec k3 = f_p(p3, t);
    Mat2 A3 = ew_generator(s, p3);
    Mat2 m3 = A3 * (y.M + 0.5 * h * m2);
    Vec p4 = y.p + h * k3;
    Vec k4 = f_p(p4, t);
    Mat2 A4 = ew_generator(s, p4);
    Mat2 m4 = A4 * (y.M + h * m3);
    out.p = y.p + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    out.M = y.M + (h / 6) * (m1 + 2 * m2 + 2 * m3 + m4);
    out.log_det = y.log_det
                  + (h / 6) * (A1.trace() + 2 * A2.trace() + 2 * A3.trace() + A4.trace());
    return out;
}

//! Line angle of M^{-1} q. The adjugate has the same direction for det M > 0
//! (which transport preserves) and needs no division by a det lost to rounding.
double raw_angle(EngelStructure const& s, Vec const& p, Mat2 const& M)
{
    Mat2 adj;
    adj << M(1, 1), -M(0, 1), -M(1, 0), M(0, 0);
    Vec2 v = adj * dw_coordinates(s, p);
    return std::atan2(v.y(), v.x());
}

double reduced_increment(double from, double to)
{
    double inc = to - from;
    return inc - pi * std::round(inc / pi);
}

constexpr int max_angle_halvings = 30;

//! Lifted increment of the line angle over one step from y (at time t, raw
//! angle raw0) to raw angle raw1 at t + h. Steps where the line turns by more
//! than pi/3 are halved (intermediate states only serve the lift).
double lift_increment(EngelStructure const& s, State const& y, double raw0, double raw1,
                      double t, double h, int depth)
{
    double inc = reduced_increment(raw0, raw1);
    if (std::abs(inc) <= pi / 3)
        return inc;
    if (depth >= max_angle_halvings)
        throw StepTooLarge("developing angle turns by more than pi/3 within a step of "
                           + std::to_string(h) + " at t = " + std::to_string(t));
    State mid = rk4_step(s, y, t, 0.5 * h, true);
    double raw_mid = raw_angle(s, mid.p, mid.M);
    return lift_increment(s, y, raw0, raw_mid, t, 0.5 * h, depth + 1)
           + lift_increment(s, mid, raw_mid, raw1, t + 0.5 * h, 0.5 * h, depth + 1);
}

struct TraceResult
{
    OrbitTrace trace;
    bool exited = false;
    //! Set when the angle could not be resolved; trace.angle stops there.
    bool angle_truncated = false;
};

//! allow_exit: stop at a chart exit instead of throwing. allow_truncation:
//! stop lifting the angle (keeping the orbit and M) instead of throwing.
TraceResult trace_impl(EngelStructure const& s, Vec const& p0, double T, double dt,
                       bool with_M, bool allow_exit, bool allow_truncation = false)
{
    if (!(dt > 0) || !std::isfinite(T))
        throw ConfigError("integration needs dt > 0 and finite T");
    if (p0.size() != s.dim())
        throw DimensionMismatch("start point has the wrong dimension");
    if (s.model.is_lie() && !s.W.is_constant())
        throw ConfigError("Lie-model W must have constant coefficients");
    if (!s.model.is_lie() && !s.flow_region().contains(p0))
        throw DomainViolation("start point outside the chart");

    auto n = std::max<long>(1, std::lround(std::abs(T) / dt));
    double h = T / static_cast<double>(n);

    TraceResult r;
    auto& tr = r.trace;
    tr.provenance = s.provenance;
    tr.t.reserve(static_cast<std::size_t>(n + 1));
    tr.points.reserve(static_cast<std::size_t>(n + 1));
    State y{p0, Mat2::Identity(), 0.0};
    tr.t.push_back(0);
    tr.points.push_back(p0);
    double raw = 0;
    if (with_M)
    {
        tr.M.push_back(y.M);
        tr.log_det.push_back(0);
        raw = raw_angle(s, p0, y.M);
        tr.angle.push_back(raw);
    }
    for (long i = 1; i <= n; ++i)
    {
        double t = h * static_cast<double>(i - 1);
        State prev = y;
        try
        {
            y = rk4_step(s, y, t, h, with_M);
            if (s.deck_wrap)
                y.p = s.deck_wrap(y.p);
            if (!s.model.is_lie() && !s.flow_region().contains(y.p))
                throw ChartExit("orbit left the chart", t);
        }
        catch (ChartExit const&)
        {
            if (!allow_exit)
                throw;
            r.exited = true;
            break;
        }
        double tn = h * static_cast<double>(i);
        tr.t.push_back(tn);
        tr.points.push_back(y.p);
        if (with_M)
        {
            tr.M.push_back(y.M);
            tr.log_det.push_back(y.log_det);
            double a = raw_angle(s, y.p, y.M);
            if (!r.angle_truncated)
            {
                try
                {
                    tr.angle.push_back(tr.angle.back() + lift_increment(s, prev, raw, a, t, h, 0));
                }
                catch (StepTooLarge const&)
                {
                    if (!allow_truncation)
                        throw;
                    r.angle_truncated = true;
                }
            }
            raw = a;
        }
    }
    return r;
}

}  // namespace

OrbitTrace integrate_characteristic(EngelStructure const& s, Vec const& p0, double T,
                                    double dt)
{
    return trace_impl(s, p0, T, dt, false, false).trace;
}

OrbitTrace transport_EmodW(EngelStructure const& s, OrbitTrace orbit)
{
    if (orbit.size() < 2)
        throw EmptyInput("orbit needs at least two samples");
    double T = orbit.t.back() - orbit.t.front();
    double dt = std::abs(orbit.t[1] - orbit.t[0]);
    auto fresh = trace_impl(s, orbit.points.front(), T, dt, true, false).trace;
    if (fresh.size() != orbit.size())
        throw DimensionMismatch("orbit grid is not uniform");
    double drift = 0;
    for (std::size_t i = 0; i < fresh.size(); ++i)
        drift = std::max(drift, (fresh.points[i] - orbit.points[i]).norm());
    if (drift > 1e-9 * (1 + orbit.points.front().norm()))
        throw DimensionMismatch("orbit does not match the W-flow of this structure");
    orbit.M = std::move(fresh.M);
    orbit.log_det = std::move(fresh.log_det);
    orbit.angle = std::move(fresh.angle);
    return orbit;
}

OrbitTrace trace_orbit(EngelStructure const& s, Vec const& p0, double T, double dt)
{
    return trace_impl(s, p0, T, dt, true, false).trace;
}

//---------------------------------------------------------------------------//
// Closed forms
//---------------------------------------------------------------------------//

std::function<Mat2(double)> holonomy_closed_form(Mat2 const& A)
{
    if (std::abs(A.trace()) > 1e-12)
        throw ConfigError("closed form expects a traceless generator");
    return [A](double t) { return exp_traceless(t * A); };
}

std::function<Mat2(double)> holonomy_closed_form(EngelStructure const& s)
{
    if (!s.model.is_lie())
        throw ConfigError("closed-form holonomy needs a Lie model");
    Vec p = Vec::Zero(s.dim());
    Mat2 A = ew_generator(s, p);
    // The generator is exact up to rounding on Lie models.
    A -= 0.5 * A.trace() * Mat2::Identity();
    return holonomy_closed_form(A);
}

Mat2 magnetic_generator(double kappa)
{
    Mat2 A;
    A << 0, -kappa * (kappa + 1), 1, 0;
    return A;
}

Mat2 rescaled(Mat2 const& M, double K)
{
    Mat2 P = Mat2::Identity();
    P(0, 0) = K;
    return P.inverse() * M * P;
}

//---------------------------------------------------------------------------//
// Classification
//---------------------------------------------------------------------------//

ProjectiveType classify_projective(HolonomyLift const& h, double tol)
{
    Mat2 m = h.matrix;
    double d = m.determinant();
    if (!(d > 0) || !m.allFinite())
        throw DimensionMismatch("holonomy matrix must have positive determinant");
    m /= std::sqrt(d);
    double tau = m.trace();
    double w = h.winding;
    ProjectiveType out;

    bool plus_id = (m - Mat2::Identity()).cwiseAbs().maxCoeff() <= tol;
    bool minus_id = (m + Mat2::Identity()).cwiseAbs().maxCoeff() <= tol;
    if (plus_id || minus_id || std::abs(tau) < 2 - tol)
    {
        out.kind = ProjectiveType::Kind::elliptic;
        out.length = w;
        return out;
    }

    double q = w / pi;
    if (std::abs(std::abs(tau) - 2) <= tol)
    {
        if (std::abs(q - std::round(q)) * pi <= tol)
            throw AmbiguousClass("parabolic holonomy with winding at a multiple of pi");
        int n = static_cast<int>(std::floor(q));
        if (n <= 0)
        {
            out.kind = ProjectiveType::Kind::parabolic;
            return out;
        }
        out.kind = ProjectiveType::Kind::trans_parabolic;
        out.n = n;
        Mat2 N = tau > 0 ? Mat2(m - Mat2::Identity()) : Mat2(m + Mat2::Identity());
        Vec2 v = (N * Vec2(1, 0)).norm() >= (N * Vec2(0, 1)).norm() ? Vec2(1, 0)
                                                                      : Vec2(0, 1);
        Vec2 nv = N * v;
        double det = v.x() * nv.y() - v.y() * nv.x();
        out.sign = det > 0 ? -1 : 1;
        return out;
    }

    int n = static_cast<int>(std::floor(q + 1e-9));
    out.trace = std::abs(tau);
    if (n <= 0)
    {
        out.kind = ProjectiveType::Kind::hyperbolic;
        return out;
    }
    out.kind = ProjectiveType::Kind::trans_hyperbolic;
    out.n = n;
    return out;
}

namespace {
Vec deck_displacement(EngelStructure const& s, Vec const& a, Vec const& b)
{
    Vec d = s.flow_region().displacement(a, b);
    for (int j = 0; j < d.size(); ++j)
    {
        double per = s.deck_period.size() == d.size() ? s.deck_period[j] : 0.0;
        if (per > 0)
            d[j] -= per * std::round(d[j] / per);
    }
    return d;
}

HolonomyLift normalize_orientation(Mat2 M, double log_det, double winding)
{
    M *= std::exp(-0.5 * log_det);
    if (winding < 0)
    {
        Mat2 D = Mat2::Identity();
        D(1, 1) = -1;
        M = D * M * D;
        winding = -winding;
    }
    return {M, winding};
}
}  // namespace

std::optional<ClosedOrbit> find_closed_orbit(EngelStructure const& s, Vec const& p0,
                                             double T_max, double dt, double eps_close)
{
    if (s.model.is_lie())
        throw ConfigError("closed-orbit search runs on chart models");
    auto res = trace_impl(s, p0, T_max, dt, true, true);
    auto const& tr = res.trace;
    std::vector<double> dist(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i)
        dist[i] = deck_displacement(s, tr.points[i], p0).norm();

    for (std::size_t i = 2; i + 1 < tr.size(); ++i)
    {
        if (!(dist[i] <= dist[i - 1] && dist[i] <= dist[i + 1]))
            continue;
        Vec w = s.model.eval(s.W, tr.points[i]);
        if (dist[i] > 4 * w.norm() * dt)
            continue;
        // Land on the return time with one partial step along W.
        Vec disp = deck_displacement(s, tr.points[i], p0);
        double delta = -disp.dot(w) / w.squaredNorm();
        State y{tr.points[i], tr.M[i], tr.log_det[i]};
        State z = std::abs(delta) > 0 ? rk4_step(s, y, tr.t[i], delta, true) : y;
        if (deck_displacement(s, z.p, p0).norm() > eps_close)
            continue;

        ClosedOrbit c;
        c.period = tr.t[i] + delta;
        c.trace = tr;
        c.trace.t.resize(i + 1);
        c.trace.points.resize(i + 1);
        c.trace.M.resize(i + 1);
        c.trace.angle.resize(i + 1);
        c.trace.log_det.resize(i + 1);
        double raw_i = raw_angle(s, y.p, y.M);
        double raw = raw_angle(s, z.p, z.M);
        double lifted = tr.angle[i] + lift_increment(s, y, raw_i, raw, tr.t[i], delta, 0);
        c.trace.t.push_back(c.period);
        c.trace.points.push_back(z.p);
        c.trace.M.push_back(z.M);
        c.trace.log_det.push_back(z.log_det);
        c.trace.angle.push_back(lifted);
        c.lift = normalize_orientation(z.M, z.log_det, lifted - tr.angle.front());
        return c;
    }
    return std::nullopt;
}

//---------------------------------------------------------------------------//
// Global type
//---------------------------------------------------------------------------//

namespace {

struct Fit
{
    double slope = 0;
    double r2 = 0;
};

Fit linear_fit(std::vector<double> const& x, std::vector<double> const& y)
{
    Fit f;
    auto n = static_cast<double>(x.size());
    if (x.size() < 3)
        return f;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0)
        return f;
    f.slope = sxy / sxx;
    if (syy > 1e-24 * n * (1 + my * my))
        f.r2 = (sxy * sxy) / (sxx * syy);
    return f;
}

bool crosses_line(std::vector<double> const& angle, Vec2 const& line, double tol)
{
    double alpha = std::atan2(line.y(), line.x());
    double k0 = std::floor((angle.front() - alpha) / pi);
    double lo = k0 * pi - tol, hi = (k0 + 1) * pi + tol;
    for (double a : angle)
    {
        double rel = a - alpha;
        if (rel < lo || rel > hi)
            return true;
    }
    return false;
}

bool generator_constant(EngelStructure const& s, OrbitTrace const& tr)
{
    Mat2 A0 = ew_generator(s, tr.points.front());
    double scale = 1 + A0.cwiseAbs().maxCoeff();
    for (std::size_t i : {tr.size() / 3, (2 * tr.size()) / 3, tr.size() - 1})
    {
        Mat2 A = ew_generator(s, tr.points[i]);
        if ((A - A0).cwiseAbs().maxCoeff() > 1e-6 * scale)
            return false;
    }
    return true;
}

Vec2 smallest_right_singular(Mat2 const& M)
{
    Eigen::JacobiSVD<Mat2> svd(M, Eigen::ComputeFullV);
    return svd.matrixV().col(1);
}

OrbitEvidence analyze_orbit(EngelStructure const& s, Vec const& p0,
                            GlobalTypeOptions const& opt)
{
    OrbitEvidence ev;
    ev.start = p0;
    auto res = trace_impl(s, p0, opt.T_max, opt.dt, true, true, true);
    auto const& tr = res.trace;
    ev.T = tr.t.back();
    if (res.exited)
        ev.note = "chart exit at t = " + std::to_string(ev.T);
    if (res.angle_truncated)
        ev.note += (ev.note.empty() ? "" : "; ") + std::string("developing angle resolved up to t = ")
                   + std::to_string(tr.t[tr.angle.size() - 1]);
    if (ev.T < 0.5 * opt.T_max)
    {
        ev.note += "; orbit too short";
        return ev;
    }

    std::vector<double> x, ls, lin;
    for (std::size_t i = 0; i < tr.size(); ++i)
    {
        // Unimodular, so sigma2 = 1/sigma1; the small one is lost to rounding.
        Eigen::JacobiSVD<Mat2> svd(tr.normalized(i));
        double s1 = std::max(svd.singularValues()[0], 1.0);
        ev.max_distortion = std::max(ev.max_distortion, s1 * s1);
        if (tr.t[i] >= 0.5 * ev.T)
        {
            x.push_back(tr.t[i]);
            ls.push_back(std::log(s1));
            lin.push_back(s1);
        }
    }
    auto fe = linear_fit(x, ls);
    auto fl = linear_fit(x, lin);
    ev.exp_slope = fe.slope;
    ev.exp_r2 = fe.r2;
    ev.lin_slope = fl.slope;
    ev.lin_r2 = fl.r2;

    bool hyp = fe.slope > opt.c_min && fe.r2 > opt.r2_min;
    bool par = !hyp && fl.slope > opt.c_min && fl.r2 > opt.r2_min;
    bool ell = ev.max_distortion <= opt.distortion_bound;
    int votes = int(hyp) + int(par) + int(ell);
    if (votes != 1)
    {
        ev.kind = GlobalKind::unknown;
        ev.note += votes == 0 ? "no criterion met" : "criteria conflict";
        return ev;
    }
    ev.kind = hyp ? GlobalKind::hyperbolic : par ? GlobalKind::parabolic : GlobalKind::elliptic;
    if (ell)
        return ev;

    if (generator_constant(s, tr))
    {
        Mat2 A = ew_generator(s, p0);
        if (hyp)
        {
            Eigen::EigenSolver<Mat2> es(A);
            auto vals = es.eigenvalues().real();
            int iu = vals[0] > vals[1] ? 0 : 1;
            ev.invariant_lines.push_back(es.eigenvectors().col(iu).real().normalized());
            ev.invariant_lines.push_back(es.eigenvectors().col(1 - iu).real().normalized());
        }
        else
        {
            ev.invariant_lines.push_back(smallest_right_singular(A));
        }
    }
    else
    {
        Mat2 fwd = tr.normalized(tr.size() - 1);
        if (hyp)
        {
            auto back = trace_impl(s, p0, -ev.T, opt.dt, true, true, true).trace;
            ev.invariant_lines.push_back(smallest_right_singular(back.normalized(back.size() - 1)));
        }
        ev.invariant_lines.push_back(smallest_right_singular(fwd));
    }
    for (auto const& l : ev.invariant_lines)
        ev.crosses_invariant = ev.crosses_invariant || crosses_line(tr.angle, l, 1e-6);
    return ev;
}

GlobalTypeEstimate combine(std::vector<OrbitEvidence> evs, GlobalTypeOptions const& opt)
{
    GlobalTypeEstimate g;
    g.options = opt;
    g.orbits = std::move(evs);
    std::optional<GlobalKind> common;
    bool conflict = false;
    for (auto const& e : g.orbits)
    {
        if (e.kind == GlobalKind::unknown)
        {
            conflict = true;
            continue;
        }
        if (common && *common != e.kind)
            conflict = true;
        common = e.kind;
        g.trans = g.trans || e.crosses_invariant;
    }
    g.kind = (!conflict && common) ? *common : GlobalKind::unknown;
    if (g.kind == GlobalKind::elliptic || g.kind == GlobalKind::unknown)
        g.trans = false;
    return g;
}

std::vector<Vec> global_starts(EngelStructure const& s, GlobalTypeOptions const& opt)
{
    if (opt.n_orbits < 1)
        throw EmptyInput("n_orbits must be at least 1");
    return sample_domain(s.model.domain(), opt.n_orbits, opt.seed);
}

}  // namespace

GlobalTypeEstimate estimate_global_type_serial(EngelStructure const& s,
                                               GlobalTypeOptions const& opt)
{
    auto starts = global_starts(s, opt);
    std::vector<OrbitEvidence> evs;
    for (auto const& p : starts)
        evs.push_back(analyze_orbit(s, p, opt));
    return combine(std::move(evs), opt);
}

GlobalTypeEstimate estimate_global_type(EngelStructure const& s,
                                        GlobalTypeOptions const& opt)
{
    auto starts = global_starts(s, opt);
    std::vector<OrbitEvidence> evs(starts.size());
    std::exception_ptr err;
    auto n = static_cast<long>(starts.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_count())
    for (long i = 0; i < n; ++i)
    {
        try
        {
            auto k = static_cast<std::size_t>(i);
            evs[k] = analyze_orbit(s, starts[k], opt);
        }
        catch (...)
        {
#pragma omp critical(engel_global_type_error)
            if (!err)
                err = std::current_exception();
        }
    }
    if (err)
        std::rethrow_exception(err);
    return combine(std::move(evs), opt);
}

//---------------------------------------------------------------------------//
// Developing map
//---------------------------------------------------------------------------//

DevelopingPath developing_map(OrbitTrace const& orbit)
{
    if (!orbit.transported())
        throw EmptyInput("orbit has not been transported");
    DevelopingPath d;
    d.t = orbit.t;
    d.theta = orbit.angle;
    d.length = orbit.angle.back() - orbit.angle.front();
    d.direction = d.length > 0 ? 1 : d.length < 0 ? -1 : 0;
    if (d.direction == 0)
        throw MonotonicityViolation("developing angle does not move");
    // Steps below round-off of the angle itself are not reversals.
    for (std::size_t i = 1; i < d.theta.size(); ++i)
    {
        double inc = (d.theta[i] - d.theta[i - 1]) * d.direction;
        double floor_tol = 1e-12 * (1 + std::abs(d.theta[i]));
        if (inc < -floor_tol)
            throw MonotonicityViolation("developing angle reverses at t = "
                                        + std::to_string(d.t[i]));
    }
    return d;
}

//---------------------------------------------------------------------------//
// Projection to the surface
//---------------------------------------------------------------------------//

ProjectionResiduals geodesic_projection_check(LorentzExtension const& ext,
                                              OrbitTrace const& orbit)
{
    if (ext.kind != LorentzExtension::Kind::magnetic || !ext.surface)
        throw ConfigError("projection check needs a magnetic extension over a chart surface");
    if (orbit.size() < 5)
        throw EmptyInput("projection check needs at least five samples");
    auto const& S = *ext.surface;
    double h = orbit.t[1] - orbit.t[0];
    auto d1 = [&](std::size_t i, int c) {
        auto f = [&](std::size_t k) { return orbit.points[k][c]; };
        return (-f(i + 2) + 8 * f(i + 1) - 8 * f(i - 1) + f(i - 2)) / (12 * h);
    };
    auto d2 = [&](std::size_t i, int c) {
        auto f = [&](std::size_t k) { return orbit.points[k][c]; };
        return (-f(i + 2) + 16 * f(i + 1) - 30 * f(i) + 16 * f(i - 1) - f(i - 2))
               / (12 * h * h);
    };

    ProjectionResiduals r;
    for (std::size_t i = 2; i + 2 < orbit.size(); ++i)
    {
        double x = orbit.points[i][0], y = orbit.points[i][1];
        Vec2 v(d1(i, 0), d1(i, 1));
        Vec2 acc(d2(i, 0), d2(i, 1));
        Vec2 g = S.du(x, y);
        double lam = S.lambda(x, y);
        // Covariant acceleration with the Christoffel symbols of e^{2u} delta.
        Vec2 a;
        a.x() = acc.x() + g.x() * v.x() * v.x() + 2 * g.y() * v.x() * v.y()
                - g.x() * v.y() * v.y();
        a.y() = acc.y() - g.y() * v.x() * v.x() + 2 * g.x() * v.x() * v.y()
                + g.y() * v.y() * v.y();
        double speed_coord = v.norm();
        double kg = (v.x() * a.y() - v.y() * a.x())
                    / (std::sqrt(lam) * speed_coord * speed_coord * speed_coord);
        double kappa = gauss_curvature(S, Vec2(x, y));
        double theta_rate = d1(i, 3);

        r.t.push_back(orbit.t[i]);
        r.speed_error.push_back(std::abs(std::sqrt(lam) * speed_coord - 1));
        r.r1.push_back(kg + kappa);
        r.r2.push_back(kg - (theta_rate + 1));
        r.max_speed_error = std::max(r.max_speed_error, r.speed_error.back());
        r.max_r1 = std::max(r.max_r1, std::abs(r.r1.back()));
        r.max_r2 = std::max(r.max_r2, std::abs(r.r2.back()));
    }
    return r;
}

std::string orbit_csv(OrbitTrace const& orbit)
{
    std::string out = "t";
    int dim = orbit.points.empty() ? 0 : static_cast<int>(orbit.points.front().size());
    for (int k = 0; k < dim; ++k)
        out += ",p" + std::to_string(k);
    if (orbit.transported())
        out += ",m00,m01,m10,m11,angle";
    out += '\n';
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out += buf;
    };
    for (std::size_t i = 0; i < orbit.size(); ++i)
    {
        put(orbit.t[i]);
        for (int k = 0; k < dim; ++k)
        {
            out += ',';
            put(orbit.points[i][k]);
        }
        if (orbit.transported())
        {
            for (double v : {orbit.M[i](0, 0), orbit.M[i](0, 1), orbit.M[i](1, 0),
                             orbit.M[i](1, 1), orbit.angle[i]})
            {
                out += ',';
                put(v);
            }
        }
        out += '\n';
    }
    return out;
}

}  // namespace engel
