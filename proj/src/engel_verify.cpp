#include "engel/engel_verify.hpp"

#include "engel/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace engel {

Mat evaluate(EngelStructure const& s, std::vector<Section> const& secs, Vec const& p)
{
    Mat M(s.dim(), static_cast<Eigen::Index>(secs.size()));
    for (std::size_t i = 0; i < secs.size(); ++i)
        M.col(static_cast<Eigen::Index>(i)) = s.model.eval(secs[i], p);
    return M;
}

Vec cauchy_characteristic(EngelStructure const& s, std::vector<Section> const& E,
                          Vec const& p, double tol, double h)
{
    if (E.size() != 3)
        throw DimensionMismatch("Cauchy characteristic needs three E sections");
    Mat frame(s.dim(), 4);
    frame.leftCols(3) = evaluate(s, E, p);
    frame.col(3) = s.model.eval(s.transverse, p);
    auto qr = frame.colPivHouseholderQr();
    if (qr.rank() < 4)
        throw DegenerateKernel("E sections plus transverse do not span TM");

    auto transverse = [&](int i, int j) {
        Vec v = s.model.bracket(E[i], E[j], p, h);
        return qr.solve(v)[3];
    };
    double a = transverse(0, 1);
    double b = transverse(0, 2);
    double c = transverse(1, 2);
    // Kernel of [[0,a,b],[-a,0,c],[-b,-c,0]].
    Vec k(3);
    k << c, -b, a;
    double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
    if (!(scale > tol))
        throw DegenerateKernel("skew pairing on E vanishes (E not even-contact)");
    Vec line = frame.leftCols(3) * k;
    line.normalize();
    if (line.dot(s.model.eval(s.W, p)) < 0)
        line = -line;
    return line;
}

Vec cauchy_characteristic(EngelStructure const& s, Vec const& p, double tol, double h)
{
    return cauchy_characteristic(s, s.E, p, tol, h);
}

PointRecord verify_point(EngelStructure const& s, Vec const& p, VerifyOptions const& opt)
{
    auto const& tol = opt.tol;
    PointRecord r;
    r.point = p;

    std::vector<Vec> dv;
    for (auto const& d : s.D)
        dv.push_back(s.model.eval(d, p));
    auto rd = rank_info(dv, tol.rank_tol, tol.marginal_band);
    r.rank_D = rd.rank;

    std::vector<Vec> de = dv;
    for (std::size_t i = 0; i < s.D.size(); ++i)
        for (std::size_t j = i + 1; j < s.D.size(); ++j)
            de.push_back(s.model.bracket(s.D[i], s.D[j], p, tol.fd_step));
    auto re = rank_info(de, tol.rank_tol, tol.marginal_band);
    r.rank_E = re.rank;

    std::vector<Vec> ev;
    for (auto const& e : s.E)
        ev.push_back(s.model.eval(e, p));
    auto rdecl = rank_info(ev, tol.rank_tol, tol.marginal_band);
    std::vector<Vec> joint = ev;
    joint.insert(joint.end(), de.begin(), de.end());
    auto rjoint = rank_info(joint, tol.rank_tol, tol.marginal_band);
    r.e_consistent = rdecl.rank == re.rank && rjoint.rank == re.rank;

    std::vector<Vec> eev = ev;
    for (std::size_t i = 0; i < s.E.size(); ++i)
        for (std::size_t j = i + 1; j < s.E.size(); ++j)
            eev.push_back(s.model.bracket(s.E[i], s.E[j], p, tol.fd_step));
    auto ree = rank_info(eev, tol.rank_tol, tol.marginal_band);
    r.rank_EE = ree.rank;

    r.marginal = rd.marginal || re.marginal || ree.marginal || rdecl.marginal
                 || rjoint.marginal;
    r.pass = r.rank_D == 2 && r.rank_E == 3 && r.rank_EE == 4 && r.e_consistent;

    if (opt.cauchy && r.pass && s.E.size() == 3)
    {
        Vec line = cauchy_characteristic(s, p, tol.rank_tol, tol.fd_step);
        r.cauchy_angle_error = line_angle(line, s.model.eval(s.W, p));
        r.w_in_D_error = angle_to_span(line, evaluate(s, s.D, p));
    }
    return r;
}

namespace {
VerificationReport summarize(EngelStructure const& s, std::vector<PointRecord> recs,
                             VerifyOptions const& opt)
{
    VerificationReport rep;
    rep.provenance = s.provenance;
    rep.tol = opt.tol;
    rep.points = std::move(recs);
    rep.pass = !rep.points.empty();
    rep.cauchy_pass = opt.cauchy && !rep.points.empty();
    for (auto const& r : rep.points)
    {
        rep.n_pass += r.pass;
        rep.n_marginal += r.marginal;
        rep.pass = rep.pass && r.pass;
        if (r.cauchy_angle_error >= 0)
        {
            rep.max_cauchy_angle_error = std::max(rep.max_cauchy_angle_error,
                                                  r.cauchy_angle_error);
            rep.max_w_in_D_error = std::max(rep.max_w_in_D_error, r.w_in_D_error);
            rep.cauchy_pass = rep.cauchy_pass
                              && r.cauchy_angle_error <= opt.tol.angle_tol
                              && r.w_in_D_error <= opt.tol.angle_tol;
        }
        else
        {
            rep.cauchy_pass = false;
        }
    }
    return rep;
}
}  // namespace

VerificationReport verify_engel_serial(EngelStructure const& s, std::size_t n_samples,
                                       VerifyOptions const& opt)
{
    if (n_samples < 1)
        throw EmptyInput("n_samples must be at least 1");
    auto pts = sample_domain(s.model.domain(), n_samples, opt.seed);
    std::vector<PointRecord> recs;
    recs.reserve(pts.size());
    for (auto const& p : pts)
        recs.push_back(verify_point(s, p, opt));
    return summarize(s, std::move(recs), opt);
}

VerificationReport verify_engel(EngelStructure const& s, std::size_t n_samples,
                                VerifyOptions const& opt)
{
    if (n_samples < 1)
        throw EmptyInput("n_samples must be at least 1");
    auto pts = sample_domain(s.model.domain(), n_samples, opt.seed);
    std::vector<PointRecord> recs(pts.size());
    std::exception_ptr err;
    auto n = static_cast<long>(pts.size());
#pragma omp parallel for schedule(dynamic, 16) num_threads(worker_count())
    for (long i = 0; i < n; ++i)
    {
        try
        {
            recs[static_cast<std::size_t>(i)] = verify_point(s, pts[static_cast<std::size_t>(i)], opt);
        }
        catch (...)
        {
#pragma omp critical(engel_verify_error)
            if (!err)
                err = std::current_exception();
        }
    }
    if (err)
        std::rethrow_exception(err);
    return summarize(s, std::move(recs), opt);
}

//---------------------------------------------------------------------------//
// Darboux models
//---------------------------------------------------------------------------//

EngelStructure darboux_standard()
{
    // Coordinates (x, y, z, w).
    auto X = ChartVectorField(
        4,
        [](Vec const& p) {
            Vec v(4);
            v << 1, p[2], p[3], 0;
            return v;
        },
        [](Vec const&) {
            Mat J = Mat::Zero(4, 4);
            J(1, 2) = 1;
            J(2, 3) = 1;
            return J;
        });
    auto dy = Section::coordinate(4, 1);
    auto dz = Section::coordinate(4, 2);
    auto dw = Section::coordinate(4, 3);

    EngelStructure s;
    s.model = FrameModel::chart(Domain::cube(4, 2.0), "R4 (x,y,z,w)");
    s.D = {dw, X};
    s.E = {dw, X, dz};
    s.W = dw;
    s.transverse = dy;
    s.ew_frame = {X, dz};
    s.provenance = "darboux";
    s.deck_period = Vec::Zero(4);
    return s;
}

EngelStructure darboux_long()
{
    // Coordinates (x, y, z, theta); theta on the circle.
    auto L = ChartVectorField(
        4,
        [](Vec const& p) {
            double c = std::cos(p[3]), s = std::sin(p[3]);
            Vec v(4);
            v << c, p[2] * c, s, 0;
            return v;
        },
        [](Vec const& p) {
            double c = std::cos(p[3]), s = std::sin(p[3]);
            Mat J = Mat::Zero(4, 4);
            J(0, 3) = -s;
            J(1, 2) = c;
            J(1, 3) = -p[2] * s;
            J(2, 3) = c;
            return J;
        });
    auto l1 = ChartVectorField(
        4,
        [](Vec const& p) {
            Vec v(4);
            v << 1, p[2], 0, 0;
            return v;
        },
        [](Vec const&) {
            Mat J = Mat::Zero(4, 4);
            J(1, 2) = 1;
            return J;
        });
    auto l2 = Section::coordinate(4, 2);
    auto dth = Section::coordinate(4, 3);

    Vec lo(4), hi(4);
    lo << -2, -2, -2, 0;
    hi << 2, 2, 2, 2 * pi;
    auto dom = Domain::box(lo, hi);
    dom.set_period(3, 2 * pi);

    EngelStructure s;
    s.model = FrameModel::chart(dom, "R3 x S1 (x,y,z,theta)");
    s.D = {dth, L};
    s.E = {dth, l1, l2};
    s.W = dth;
    s.transverse = Section::coordinate(4, 1);
    s.ew_frame = {l1, l2};
    s.provenance = "long-darboux";
    s.deck_period = Vec::Zero(4);
    // D, E, W and (l1, l2) are invariant under theta -> theta + pi.
    s.deck_period[3] = pi;
    return s;
}

EngelStructure integrable_counterexample()
{
    auto dx = Section::coordinate(4, 0);
    auto dy = Section::coordinate(4, 1);
    EngelStructure s;
    s.model = FrameModel::chart(Domain::cube(4, 2.0), "R4 (x,y,z,w)");
    s.D = {dx, dy};
    s.E = {dx, dy};
    s.W = dx;
    s.transverse = Section::coordinate(4, 2);
    s.ew_frame = {dy, Section::coordinate(4, 2)};
    s.provenance = "integrable-counterexample";
    s.deck_period = Vec::Zero(4);
    return s;
}

}  // namespace engel
