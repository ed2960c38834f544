// End-to-end acceptance run: one PASS/FAIL line per criterion, exit 1 on any FAIL.

#include "engel/characteristic_dynamics.hpp"
#include "engel/engel_verify.hpp"
#include "engel/frame_algebra.hpp"
#include "engel/prolongations.hpp"
#include "engel/report.hpp"
#include "engel/rigidity_lab.hpp"
#include "engel/sampling.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace engel;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

const double kappas[] = {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0};

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

struct Outcome
{
    bool pass = true;
    std::string detail;

    void require(bool ok, std::string const& what)
    {
        if (!ok)
        {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

int failures = 0;

void report(int id, std::string const& name, std::function<Outcome()> const& body)
{
    auto t0 = Clock::now();
    Outcome o;
    try
    {
        o = body();
    }
    catch (std::exception const& e)
    {
        o.pass = false;
        o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass)
        ++failures;
    std::printf("%s criterion %2d  %-34s (%.2f s)%s%s\n", o.pass ? "PASS" : "FAIL", id,
                name.c_str(), seconds_since(t0), o.detail.empty() ? "" : "  ",
                o.detail.c_str());
    std::fflush(stdout);
}

EngelStructure magnetic(double k)
{
    return lorentz_prolongation(magnetic_extension(constant_curvature_ut(k)));
}

EngelStructure product(double k)
{
    return lorentz_prolongation(product_extension(constant_curvature_ut(k)));
}

double max_abs(Mat2 const& m)
{
    return m.cwiseAbs().maxCoeff();
}

Outcome engel_ranks()
{
    Outcome o;
    auto t0 = Clock::now();
    std::vector<std::string> names = {"darboux", "long-darboux", "cartan-r3", "prequantum-local",
                                      "propellor-cat", "propellor-identity",
                                      "propellor-parabolic", "propellor-invariant"};
    for (double k : kappas)
    {
        names.push_back("lorentz-product-" + fmt(k));
        names.push_back("lorentz-magnetic-" + fmt(k));
    }
    for (auto const& n : names)
    {
        auto r = verify_engel(make_preset(n), 1000);
        bool ranks = r.points.size() == 1000;
        for (auto const& p : r.points)
            ranks = ranks && p.rank_D == 2 && p.rank_E == 3 && p.rank_EE == 4;
        o.require(r.pass && ranks, n + " ranks");
    }
    double t = seconds_since(t0);
    o.require(t < 30, "runtime " + fmt(t) + " s");
    o.detail = o.detail.empty() ? std::to_string(names.size()) + " presets, " + fmt(t) + " s"
                                : o.detail;
    return o;
}

Outcome cauchy_lines()
{
    Outcome o;
    double worst = 0;
    auto check = [&](EngelStructure const& s, std::function<Vec(Vec const&)> const& want) {
        for (auto const& p : sample_domain(s.model.domain(), 1000, 42))
            worst = std::max(worst, oracle::line_angle(cauchy_characteristic(s, p), want(p)));
    };
    check(darboux_standard(), [](Vec const&) { return Vec(Vec::Unit(4, 3)); });
    for (double k : kappas)
    {
        // Lie-model vectors are frame coefficients: (X, Y, Z, Theta) and (Xt, Yt, Zt, Theta).
        Vec prod(4), mag(4);
        prod << 1, 0, 0, 1;
        mag << 1, 0, 1, -(1 + k);
        check(product(k), [prod](Vec const&) { return prod; });
        check(magnetic(k), [mag](Vec const&) { return mag; });
    }
    o.require(worst < 1e-6, "max angle " + fmt(worst));
    o.detail = o.pass ? "max angle " + fmt(worst) : o.detail;
    return o;
}

Outcome holonomy_matrices()
{
    Outcome o;
    double worst = 0;
    for (double k : kappas)
    {
        auto tr = trace_orbit(magnetic(k), Vec::Zero(4), 1.0, 1e-3);
        worst = std::max(worst, max_abs(tr.M.back() - oracle::expm(oracle::magnetic_A(k))));
    }
    o.require(worst <= 1e-6, "transport error " + fmt(worst));

    auto kind = [](double k) { return estimate_global_type(magnetic(k)).kind; };
    o.require(kind(1) == GlobalKind::elliptic && kind(-2) == GlobalKind::elliptic, "elliptic");
    o.require(kind(0) == GlobalKind::parabolic && kind(-1) == GlobalKind::parabolic, "parabolic");
    for (double k : {0.0, -1.0})
    {
        auto tr = trace_orbit(magnetic(k), Vec::Zero(4), 5.0, 1e-3);
        double shear = 0;
        for (std::size_t i = 0; i < tr.size(); ++i)
        {
            Mat2 ref;
            ref << 1, 0, tr.t[i], 1;
            shear = std::max(shear, max_abs(tr.M[i] - ref));
        }
        o.require(shear <= 1e-6, "shear error " + fmt(shear));
    }
    auto hyp = estimate_global_type(magnetic(-0.5));
    o.require(hyp.kind == GlobalKind::hyperbolic, "hyperbolic");
    double line_err = 0;
    for (auto const& ev : hyp.orbits)
    {
        if (ev.invariant_lines.size() != 2)
        {
            line_err = 1;
            break;
        }
        Vec2 a(0.5, 1), b(0.5, -1);
        auto const& L = ev.invariant_lines;
        line_err = std::max(line_err,
                            std::min(std::max(oracle::line_angle(L[0], a), oracle::line_angle(L[1], b)),
                                     std::max(oracle::line_angle(L[0], b), oracle::line_angle(L[1], a))));
    }
    o.require(line_err <= 1e-3, "invariant lines " + fmt(line_err));
    if (o.pass)
        o.detail = "transport " + fmt(worst) + ", lines " + fmt(line_err);
    return o;
}

Outcome product_table()
{
    Outcome o;
    o.require(estimate_global_type(product(1)).kind == GlobalKind::elliptic, "kappa 1");
    o.require(estimate_global_type(product(0)).kind == GlobalKind::parabolic, "kappa 0");
    o.require(estimate_global_type(product(-1)).kind == GlobalKind::hyperbolic, "kappa -1");
    return o;
}

Outcome projections()
{
    Outcome o;
    struct Chart
    {
        ConformalSurface surf;
        Vec start;
    };
    Vec a(4), b(4), c(4);
    a << 0.1, -0.2, 0.3, 0;
    b << 0.0, 0.1, 1.0, 0;
    c << -2.5, 0.2, 0.0, 0;
    double sp = 0, res = 0;
    for (auto const& ch : {Chart{surface_sphere(), a}, Chart{surface_disk(0.99), b},
                           Chart{surface_flat(), c}})
    {
        auto ext = magnetic_extension(unit_tangent_frames(ch.surf));
        auto tr = trace_orbit(lorentz_prolongation(ext), ch.start, 5, 1e-3);
        auto r = geodesic_projection_check(ext, tr);
        sp = std::max(sp, r.max_speed_error);
        res = std::max({res, r.max_r1, r.max_r2});
    }
    o.require(sp < 1e-6, "speed " + fmt(sp));
    o.require(res < 1e-3, "residual " + fmt(res));
    if (o.pass)
        o.detail = "speed " + fmt(sp) + ", residual " + fmt(res);
    return o;
}

Outcome inaba()
{
    Outcome o;
    double worst = 0;
    for (std::size_t i = 0; i < 100; ++i)
    {
        auto c = sample_d_curve(random_control(20240501, i, true), [](double) { return 1.0; },
                                1.0, 1e-3);
        worst = std::max(worst, inaba_identity_check(c));
    }
    o.require(worst < 1e-5, "residual " + fmt(worst));
    o.detail = o.pass ? "max residual " + fmt(worst) : o.detail;
    return o;
}

Outcome accessible_set()
{
    Outcome o;
    auto r = rigidity_probe(1.0, 1000);
    o.require(r.n_outside == 0 && r.n_aminus == 0, "endpoints outside A+ u AW");
    o.require(r.n_aw == 0, "random control reached AW");
    o.require(r.zero_control_in_aw, "u = 0 misses AW");
    o.require(r.max_cone_value < 0, "cone value " + fmt(r.max_cone_value));
    if (o.pass)
        o.detail = std::to_string(r.n_aplus) + " in A+, max cone " + fmt(r.max_cone_value);
    return o;
}

Outcome infinitesimal_rigidity()
{
    Outcome o;
    double worst = 0;
    for (double len : {0.5 * oracle::pi, oracle::pi, 1.5 * oracle::pi})
        for (std::size_t trial = 0; trial < 4; ++trial)
        {
            VariationSpec spec;
            spec.length = len;
            spec.p = random_control(99, trial);
            spec.q = random_control(199, trial);
            worst = std::max(worst, infinitesimal_rigidity_check(spec).ratio);
        }
    o.require(worst <= 1e-6, "W-curve ratio " + fmt(worst));
    VariationSpec tr;
    tr.kind = VariationKind::transverse;
    tr.length = 1.0;
    tr.f = {[](double x) { return std::cos(x); }, [](double x) { return -std::sin(x); },
            [](double x) { return -std::cos(x); }, [](double x) { return std::sin(x); }};
    double witness = infinitesimal_rigidity_check(tr).ratio;
    o.require(witness >= 0.1, "transverse ratio " + fmt(witness));
    if (o.pass)
        o.detail = "W-curve " + fmt(worst) + ", transverse " + fmt(witness);
    return o;
}

Outcome null_variations()
{
    Outcome o;
    double worst = 0;
    auto run = [&](ConformalSurface s, Vec2 start, double heading, double length) {
        NullVariation nv;
        nv.surface = std::move(s);
        nv.start = start;
        nv.heading = heading;
        nv.length = length;
        nv.eta = [](double t) { return Vec2(0.1 * std::sin(t), 0.05 * t * t); };
        nv.eta_dot = [](double t) { return Vec2(0.1 * std::cos(t), 0.1 * t); };
        worst = std::max(worst, null_variation_check(nv).max_residual);
    };
    run(surface_flat(), Vec2(-1.5, 0), 0, 3);
    run(surface_sphere(), Vec2(-0.3, 0.1), 0.4, 3);
    run(surface_disk(0.95), Vec2(-0.3, 0), 0.2, 2);
    run(surface_bump(), Vec2(-1, 0.5), -0.3, 3);
    o.require(worst < 1e-4, "residual " + fmt(worst));
    o.detail = o.pass ? "max residual " + fmt(worst) : o.detail;
    return o;
}

Outcome closed_orbit_types()
{
    Outcome o;
    auto cartan = find_closed_orbit(cartan_prolongation(contact_r3()), Vec::Zero(4), 10, 1e-3);
    o.require(cartan.has_value(), "Cartan fiber not closed");
    if (cartan)
    {
        auto t = classify_projective(cartan->lift);
        o.require(t.kind == ProjectiveType::Kind::elliptic
                      && std::abs(t.length - oracle::pi) < 1e-6,
                  "Cartan fiber type " + t.name());
    }
    auto torus = lorentz_prolongation(product_extension(unit_tangent_frames(surface_flat_torus())));
    auto co = find_closed_orbit(torus, Vec::Zero(4), 10, 1e-3);
    o.require(co && classify_projective(co->lift).kind == ProjectiveType::Kind::parabolic,
              "flat torus orbit");

    Mat2 shear, hyp;
    shear << 1, 0, 1, 1;
    hyp << 2, 0, 0, 0.5;
    std::vector<std::pair<HolonomyLift, ProjectiveType::Kind>> cases = {
        {{oracle::rotation_matrix(1.3), 1.3}, ProjectiveType::Kind::elliptic},
        {{shear, 0.4}, ProjectiveType::Kind::parabolic},
        {{hyp, 0.2}, ProjectiveType::Kind::hyperbolic},
        {{-shear, oracle::pi + 0.4}, ProjectiveType::Kind::trans_parabolic},
        {{hyp, 2 * oracle::pi + 0.2}, ProjectiveType::Kind::trans_hyperbolic},
    };
    std::mt19937_64 rng(20240501);
    int wrong = 0;
    for (auto const& [h, kind] : cases)
        for (int trial = 0; trial < 1000; ++trial)
        {
            Mat2 P = oracle::random_sl2(rng);
            if (classify_projective({P * h.matrix * P.inverse(), h.winding}).kind != kind)
                ++wrong;
        }
    o.require(wrong == 0, std::to_string(wrong) + " synthetic misclassifications");
    return o;
}

Outcome property_suites()
{
    Outcome o;
    std::mt19937_64 rng(20240501);
    std::normal_distribution<double> N(0, 1);

    // Bracket antisymmetry and Jacobi on random quadratic fields.
    auto field = [&]() {
        Mat lin(3, 3), quad(3, 3);
        Vec c(3);
        for (int i = 0; i < 3; ++i)
        {
            c[i] = N(rng);
            for (int j = 0; j < 3; ++j)
            {
                lin(i, j) = N(rng);
                quad(i, j) = 0.3 * N(rng);
            }
        }
        return Section(3, [c, lin, quad](Vec const& p) -> Vec {
            return c + lin * p + quad * p.array().square().matrix();
        });
    };
    double anti = 0, jac = 0;
    for (int trial = 0; trial < 5; ++trial)
    {
        auto a = field(), b = field(), c = field();
        auto br = [](Section const& u, Section const& v) {
            return Section(3, [u, v](Vec const& q) { return bracket_chart(u, v, q, 1e-4); });
        };
        for (auto const& p : sample_domain(Domain::cube(3, 1.0), 10, trial))
        {
            anti = std::max(anti, (bracket_chart(a, b, p) + bracket_chart(b, a, p)).norm());
            jac = std::max(jac, (bracket_chart(a, br(b, c), p, 1e-3)
                                 + bracket_chart(b, br(c, a), p, 1e-3)
                                 + bracket_chart(c, br(a, b), p, 1e-3))
                                    .norm());
        }
    }
    o.require(anti < 1e-9 && jac < 1e-4, "bracket identities " + fmt(anti) + "/" + fmt(jac));

    // Rank invariance under GL(4).
    int rank_bad = 0;
    for (int trial = 0; trial < 200; ++trial)
    {
        int r = 1 + trial % 3;
        Mat B(4, r), G(4, 4);
        for (int i = 0; i < 4; ++i)
        {
            for (int j = 0; j < r; ++j)
                B(i, j) = N(rng);
            for (int j = 0; j < 4; ++j)
                G(i, j) = N(rng);
        }
        if (std::abs(G.determinant()) < 0.1)
            continue;
        std::vector<Vec> vs, gv;
        for (int k = 0; k < r + 1; ++k)
        {
            Vec coeff(r);
            for (int i = 0; i < r; ++i)
                coeff[i] = N(rng);
            vs.push_back(B * coeff);
            gv.push_back(G * vs.back());
        }
        if (distribution_rank(vs, 1e-8) != r || distribution_rank(gv, 1e-8) != r)
            ++rank_bad;
    }
    o.require(rank_bad == 0, std::to_string(rank_bad) + " rank changes");

    // Flow reversibility on a variable-curvature chart.
    auto s = lorentz_prolongation(magnetic_extension(unit_tangent_frames(surface_bump())));
    Vec p0(4);
    p0 << 0.2, -0.3, 1.0, 0.5;
    auto fwd = integrate_characteristic(s, p0, 2.0, 1e-3);
    auto back = integrate_characteristic(s, fwd.points.back(), -2.0, 1e-3);
    double gap = s.flow_region().displacement(back.points.back(), p0).norm();
    o.require(gap < 1e-6, "reversibility " + fmt(gap));

    // Developing-map monotonicity along Lie-model orbits.
    for (double k : kappas)
    {
        try
        {
            developing_map(trace_orbit(magnetic(k), Vec::Zero(4), 10, 1e-2));
        }
        catch (MonotonicityViolation const&)
        {
            o.require(false, "developing map kappa " + fmt(k));
        }
    }
    return o;
}

}  // namespace

int main()
{
    auto t0 = Clock::now();
    report(1, "Engel ranks (2,3,4)", engel_ranks);
    report(2, "Cauchy characteristic lines", cauchy_lines);
    report(3, "holonomy matrices and types", holonomy_matrices);
    report(4, "product extension table", product_table);
    report(5, "projected null geodesics", projections);
    report(6, "Inaba identity", inaba);
    report(7, "accessible set", accessible_set);
    report(8, "infinitesimal rigidity", infinitesimal_rigidity);
    report(9, "null-variation identity", null_variations);
    report(10, "closed-orbit projective types", closed_orbit_types);
    report(11, "property suites", [&] {
        Outcome o = property_suites();
        double t = seconds_since(t0);
        o.require(t < 300, "acceptance runtime " + fmt(t) + " s");
        return o;
    });
    std::printf("%d of 11 criteria failed, total %.1f s\n", failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
