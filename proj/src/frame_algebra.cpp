#include "engel/frame_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace engel {

//---------------------------------------------------------------------------//
// Geometry helpers
//---------------------------------------------------------------------------//

double line_angle(Vec const& u, Vec const& v)
{
    double nu = u.norm();
    double nv = v.norm();
    if (nu == 0 || nv == 0)
        return pi / 2;
    Vec a = u / nu;
    Vec b = v / nv;
    if (a.dot(b) < 0)
        b = -b;
    // Stable for tiny angles, unlike acos.
    return 2 * std::atan2((a - b).norm(), (a + b).norm());
}

double angle_to_span(Vec const& v, Mat const& B)
{
    if (v.norm() == 0)
        return 0;
    Vec coeff = B.colPivHouseholderQr().solve(v);
    Vec proj = B * coeff;
    double r = (v - proj).norm();
    return std::atan2(r, proj.norm());
}

//---------------------------------------------------------------------------//
// Domain
//---------------------------------------------------------------------------//

Domain Domain::box(Vec lo, Vec hi)
{
    if (lo.size() != hi.size())
        throw DimensionMismatch("domain bounds differ in dimension");
    Domain d;
    d.period = Vec::Zero(lo.size());
    d.lo = std::move(lo);
    d.hi = std::move(hi);
    return d;
}

Domain Domain::cube(int dim, double half_width)
{
    return box(Vec::Constant(dim, -half_width), Vec::Constant(dim, half_width));
}

Domain& Domain::set_period(int coord, double p)
{
    period[coord] = p;
    return *this;
}

Vec Domain::wrap(Vec const& p) const
{
    Vec q = p;
    for (int i = 0; i < dim(); ++i)
    {
        if (period[i] > 0)
        {
            double r = std::fmod(q[i] - lo[i], period[i]);
            if (r < 0)
                r += period[i];
            q[i] = lo[i] + r;
        }
    }
    return q;
}

Vec Domain::displacement(Vec const& a, Vec const& b) const
{
    Vec d = a - b;
    for (int i = 0; i < dim(); ++i)
    {
        if (period[i] > 0)
            d[i] -= period[i] * std::round(d[i] / period[i]);
    }
    return d;
}

bool Domain::contains(Vec const& p) const
{
    if (p.size() != lo.size())
        return false;
    Vec q = wrap(p);
    for (int i = 0; i < dim(); ++i)
    {
        if (period[i] > 0)
            continue;
        if (!(q[i] >= lo[i] && q[i] <= hi[i]))
            return false;
    }
    return !predicate || predicate(q);
}

Vec Domain::from_unit(Vec const& u) const
{
    return lo.array() + u.array() * (hi - lo).array();
}

//---------------------------------------------------------------------------//
// ChartVectorField
//---------------------------------------------------------------------------//

ChartVectorField::ChartVectorField(int dim, Fn f, JacFn jac)
    : dim_(dim), f_(std::move(f)), jac_(std::move(jac))
{
}

ChartVectorField ChartVectorField::constant(Vec const& v)
{
    ChartVectorField r(static_cast<int>(v.size()), [v](Vec const&) { return v; });
    r.constant_ = v;
    return r;
}

ChartVectorField ChartVectorField::coordinate(int dim, int i)
{
    return constant(Vec::Unit(dim, i));
}

Vec ChartVectorField::operator()(Vec const& p) const
{
    if (p.size() != dim_)
        throw DimensionMismatch("point dimension does not match field");
    Vec v = constant_ ? *constant_ : f_(p);
    if (v.size() != dim_)
        throw DimensionMismatch("field returned wrong dimension");
    if (!v.allFinite())
        throw NonFiniteEvaluation("vector field evaluated to NaN/inf");
    return v;
}

Mat ChartVectorField::fd_jacobian(Vec const& p, double h) const
{
    Mat J(dim_, dim_);
    Vec q = p;
    for (int j = 0; j < dim_; ++j)
    {
        q[j] = p[j] + h;
        Vec fp = (*this)(q);
        q[j] = p[j] - h;
        Vec fm = (*this)(q);
        q[j] = p[j];
        J.col(j) = (fp - fm) / (2 * h);
    }
    return J;
}

Mat ChartVectorField::jacobian(Vec const& p, double h) const
{
    if (constant_)
        return Mat::Zero(dim_, dim_);
    if (jac_)
    {
        Mat J = jac_(p);
        if (!J.allFinite())
            throw NonFiniteEvaluation("jacobian evaluated to NaN/inf");
        return J;
    }
    return fd_jacobian(p, h);
}

ChartVectorField ChartVectorField::operator+(ChartVectorField const& o) const
{
    if (dim_ != o.dim_)
        throw DimensionMismatch("adding fields of different dimension");
    if (is_constant() && o.is_constant())
        return constant(*constant_ + *o.constant_);
    auto a = *this;
    auto b = o;
    JacFn jac;
    if (has_jacobian() && o.has_jacobian())
        jac = [a, b](Vec const& p) { return Mat(a.jacobian(p) + b.jacobian(p)); };
    return ChartVectorField(dim_, [a, b](Vec const& p) { return Vec(a(p) + b(p)); },
                            jac);
}

ChartVectorField ChartVectorField::operator-(ChartVectorField const& o) const
{
    return *this + o.scaled(-1);
}

ChartVectorField ChartVectorField::scaled(double c) const
{
    if (is_constant())
        return constant(c * *constant_);
    auto a = *this;
    JacFn jac;
    if (has_jacobian())
        jac = [a, c](Vec const& p) { return Mat(c * a.jacobian(p)); };
    return ChartVectorField(dim_, [a, c](Vec const& p) { return Vec(c * a(p)); }, jac);
}

ChartVectorField ChartVectorField::times(std::function<double(Vec const&)> g,
                                         std::function<Vec(Vec const&)> grad) const
{
    auto a = *this;
    JacFn jac;
    if (grad && has_jacobian())
    {
        jac = [a, g, grad](Vec const& p) {
            return Mat(g(p) * a.jacobian(p) + a(p) * grad(p).transpose());
        };
    }
    return ChartVectorField(dim_, [a, g](Vec const& p) { return Vec(g(p) * a(p)); },
                            jac);
}

Vec bracket_chart(ChartVectorField const& a, ChartVectorField const& b,
                  Vec const& p, double h, Domain const* domain)
{
    if (a.dim() != b.dim() || p.size() != a.dim())
        throw DimensionMismatch("bracket of fields with mismatched dimensions");
    if (domain && !domain->contains(p))
        throw DomainViolation("bracket point outside the chart domain");
    if (a.is_constant() && b.is_constant())
        return Vec::Zero(a.dim());
    Vec r = b.jacobian(p, h) * a(p) - a.jacobian(p, h) * b(p);
    if (!r.allFinite())
        throw NonFiniteEvaluation("bracket evaluated to NaN/inf");
    return r;
}

//---------------------------------------------------------------------------//
// LieModel
//---------------------------------------------------------------------------//

LieModel::LieModel(std::vector<std::string> names, std::optional<double> kappa)
    : names_(std::move(names))
    , kappa_(kappa)
    , n_(static_cast<int>(names_.size()))
    , c_(static_cast<std::size_t>(n_ * n_ * n_), 0.0)
{
}

int LieModel::index(std::string const& name) const
{
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end())
        throw DimensionMismatch("unknown frame label '" + name + "'");
    return static_cast<int>(it - names_.begin());
}

LieModel& LieModel::set(int i, int j, Vec const& v)
{
    if (v.size() != n_)
        throw DimensionMismatch("structure constant vector has wrong length");
    if (i == j && !v.isZero())
        throw InvalidStructureConstants("[e_i, e_i] must vanish");
    for (int k = 0; k < n_; ++k)
    {
        c_[(k * n_ + i) * n_ + j] = v[k];
        c_[(k * n_ + j) * n_ + i] = -v[k];
    }
    return *this;
}

LieModel& LieModel::set(std::string const& a, std::string const& b,
                        std::vector<std::pair<std::string, double>> const& terms)
{
    Vec v = Vec::Zero(n_);
    for (auto const& [name, coeff] : terms)
        v[index(name)] += coeff;
    return set(index(a), index(b), v);
}

Vec LieModel::unit(int i) const
{
    return Vec::Unit(n_, i);
}

Vec LieModel::bracket(Vec const& u, Vec const& v) const
{
    if (u.size() != n_ || v.size() != n_)
        throw DimensionMismatch("coefficient vectors must match the frame size");
    Vec r = Vec::Zero(n_);
    for (int i = 0; i < n_; ++i)
    {
        if (u[i] == 0)
            continue;
        for (int j = 0; j < n_; ++j)
        {
            double uv = u[i] * v[j];
            if (uv == 0)
                continue;
            for (int k = 0; k < n_; ++k)
                r[k] += c(k, i, j) * uv;
        }
    }
    return r;
}

Mat LieModel::ad(Vec const& u) const
{
    Mat A(n_, n_);
    for (int j = 0; j < n_; ++j)
        A.col(j) = bracket(u, unit(j));
    return A;
}

double LieModel::antisymmetry_defect() const
{
    double worst = 0;
    for (int k = 0; k < n_; ++k)
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                worst = std::max(worst, std::abs(c(k, i, j) + c(k, j, i)));
    return worst;
}

double LieModel::jacobi_defect() const
{
    double worst = 0;
    for (int a = 0; a < n_; ++a)
        for (int b = 0; b < n_; ++b)
            for (int d = 0; d < n_; ++d)
            {
                Vec ea = unit(a), eb = unit(b), ed = unit(d);
                Vec s = bracket(ea, bracket(eb, ed)) + bracket(eb, bracket(ed, ea))
                        + bracket(ed, bracket(ea, eb));
                worst = std::max(worst, s.cwiseAbs().maxCoeff());
            }
    return worst;
}

LieModel LieModel::change_basis(Mat const& P, std::vector<std::string> names) const
{
    if (P.rows() != n_ || P.cols() != n_ || static_cast<int>(names.size()) != n_)
        throw DimensionMismatch("basis change must be square of the frame size");
    Eigen::FullPivLU<Mat> lu(P);
    if (!lu.isInvertible())
        throw DimensionMismatch("basis change is singular");
    Mat Pinv = lu.inverse();
    LieModel out(std::move(names), kappa_);
    for (int a = 0; a < n_; ++a)
        for (int b = a + 1; b < n_; ++b)
            out.set(a, b, Pinv * bracket(P.col(a), P.col(b)));
    return out;
}

Vec bracket_lie(LieModel const& m, Vec const& u, Vec const& v)
{
    return m.bracket(u, v);
}

//---------------------------------------------------------------------------//
// FrameModel
//---------------------------------------------------------------------------//

FrameModel FrameModel::chart(Domain d, std::string label)
{
    FrameModel m;
    m.kind_ = Kind::chart;
    m.domain_ = std::move(d);
    m.label_ = std::move(label);
    return m;
}

FrameModel FrameModel::lie(LieModel lm, Domain d, std::string label, int param_coord)
{
    if (d.dim() != lm.dim())
        throw DimensionMismatch("Lie model domain must match the frame size");
    if (lm.antisymmetry_defect() > 0)
        throw InvalidStructureConstants("structure constants are not antisymmetric");
    if (lm.jacobi_defect() > 1e-10)
        throw InvalidStructureConstants("structure constants violate the Jacobi identity");
    if (param_coord >= 0)
    {
        for (int i = 0; i < lm.dim(); ++i)
            for (int j = 0; j < lm.dim(); ++j)
                if (lm.c(param_coord, i, j) != 0)
                    throw InvalidStructureConstants(
                        "parameter coordinate must be a homomorphism onto R");
    }
    FrameModel m;
    m.kind_ = Kind::lie;
    m.domain_ = std::move(d);
    m.lie_ = std::move(lm);
    m.param_ = param_coord;
    m.label_ = std::move(label);
    return m;
}

Vec FrameModel::eval(Section const& s, Vec const& p) const
{
    return s(p);
}

Vec FrameModel::bracket(Section const& a, Section const& b, Vec const& p, double h) const
{
    if (kind_ == Kind::chart)
        return bracket_chart(a, b, p, h, &domain_);

    Vec av = a(p);
    Vec bv = b(p);
    Vec r = lie_.bracket(av, bv);
    if (param_ >= 0 && !(a.is_constant() && b.is_constant()))
    {
        // Frame derivative of coefficients only through the parameter coordinate.
        Vec db = b.jacobian(p, h).col(param_);
        Vec da = a.jacobian(p, h).col(param_);
        r += av[param_] * db - bv[param_] * da;
    }
    if (!r.allFinite())
        throw NonFiniteEvaluation("bracket evaluated to NaN/inf");
    return r;
}

//---------------------------------------------------------------------------//
// Ranks
//---------------------------------------------------------------------------//

namespace {
Mat stack(std::vector<Vec> const& vectors)
{
    if (vectors.empty())
        throw EmptyInput("no vectors supplied");
    auto n = vectors.front().size();
    Mat A(n, static_cast<Eigen::Index>(vectors.size()));
    for (std::size_t i = 0; i < vectors.size(); ++i)
    {
        if (vectors[i].size() != n)
            throw DimensionMismatch("vectors differ in dimension");
        A.col(static_cast<Eigen::Index>(i)) = vectors[i];
    }
    return A;
}
}  // namespace

RankInfo rank_info(std::vector<Vec> const& vectors, double tol, double marginal_band)
{
    Mat A = stack(vectors);
    Eigen::JacobiSVD<Mat> svd(A);
    RankInfo info;
    info.singular_values = svd.singularValues();
    for (Eigen::Index i = 0; i < info.singular_values.size(); ++i)
    {
        double s = info.singular_values[i];
        if (s > tol)
            ++info.rank;
        if (s >= tol / marginal_band && s <= tol * marginal_band)
            info.marginal = true;
    }
    return info;
}

int distribution_rank(std::vector<Vec> const& vectors, double tol)
{
    return rank_info(vectors, tol).rank;
}

std::vector<Vec> reduce_span(std::vector<Vec> const& vectors, double tol)
{
    Mat A = stack(vectors);
    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU);
    std::vector<Vec> out;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    {
        if (svd.singularValues()[i] > tol)
            out.push_back(svd.matrixU().col(i));
    }
    return out;
}

std::vector<Vec> derived_distribution(DistributionSpec const& d, Vec const& p,
                                      double tol, double h)
{
    if (!d.model)
        throw EmptyInput("distribution has no model");
    if (d.span.empty())
        throw EmptyInput("distribution has no sections");
    std::vector<Vec> all;
    for (auto const& s : d.span)
        all.push_back(d.model->eval(s, p));
    for (std::size_t i = 0; i < d.span.size(); ++i)
        for (std::size_t j = i + 1; j < d.span.size(); ++j)
            all.push_back(d.model->bracket(d.span[i], d.span[j], p, h));
    return reduce_span(all, tol);
}

}  // namespace engel
