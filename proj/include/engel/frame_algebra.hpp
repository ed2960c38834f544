#pragma once

#include "engel/core.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace engel {

//---------------------------------------------------------------------------//
// Domains
//---------------------------------------------------------------------------//

//! Chart box with optional periodic coordinates and an extra predicate.
struct Domain
{
    Vec lo;
    Vec hi;
    Vec period;  //!< 0 for non-periodic coordinates
    std::function<bool(Vec const&)> predicate;

    static Domain box(Vec lo, Vec hi);
    static Domain cube(int dim, double half_width);

    int dim() const { return static_cast<int>(lo.size()); }
    Domain& set_period(int coord, double p);
    bool contains(Vec const& p) const;
    //! Reduce periodic coordinates into [lo, lo + period).
    Vec wrap(Vec const& p) const;
    //! Difference a - b with periodic coordinates reduced to (-period/2, period/2].
    Vec displacement(Vec const& a, Vec const& b) const;
    //! Affine map of the unit cube onto the box.
    Vec from_unit(Vec const& u) const;
};

//---------------------------------------------------------------------------//
// Vector fields
//---------------------------------------------------------------------------//

//! Vector field on a chart, or frame-coefficient section of a frame model.
class ChartVectorField
{
  public:
    using Fn = std::function<Vec(Vec const&)>;
    using JacFn = std::function<Mat(Vec const&)>;

    ChartVectorField() = default;
    ChartVectorField(int dim, Fn f, JacFn jac = {});

    //! Field with the same value everywhere; its jacobian is zero.
    static ChartVectorField constant(Vec const& v);
    //! Coordinate vector field e_i.
    static ChartVectorField coordinate(int dim, int i);

    int dim() const { return dim_; }
    bool is_constant() const { return constant_.has_value(); }
    bool has_jacobian() const { return static_cast<bool>(jac_) || is_constant(); }
    Vec const& constant_value() const { return *constant_; }

    //! Value at p; throws NonFiniteEvaluation on NaN/inf.
    Vec operator()(Vec const& p) const;
    //! Analytic jacobian if supplied, otherwise central differences.
    Mat jacobian(Vec const& p, double h = 1e-5) const;
    Mat fd_jacobian(Vec const& p, double h = 1e-5) const;

    ChartVectorField operator+(ChartVectorField const& o) const;
    ChartVectorField operator-(ChartVectorField const& o) const;
    ChartVectorField scaled(double c) const;
    //! Pointwise product with a scalar function (gradient optional).
    ChartVectorField times(std::function<double(Vec const&)> g,
                           std::function<Vec(Vec const&)> grad = {}) const;

  private:
    int dim_ = 0;
    Fn f_;
    JacFn jac_;
    std::optional<Vec> constant_;
};

using Section = ChartVectorField;

//! Lie bracket [a,b](p) = Db a - Da b on a chart.
Vec bracket_chart(ChartVectorField const& a, ChartVectorField const& b,
                  Vec const& p, double h = 1e-5,
                  Domain const* domain = nullptr);

//---------------------------------------------------------------------------//
// Lie models
//---------------------------------------------------------------------------//

//! Frame with constant structure constants: [e_i,e_j] = sum_k c[k][i][j] e_k.
class LieModel
{
  public:
    LieModel() = default;
    LieModel(std::vector<std::string> names, std::optional<double> kappa = {});

    int dim() const { return static_cast<int>(names_.size()); }
    std::vector<std::string> const& names() const { return names_; }
    std::optional<double> curvature_parameter() const { return kappa_; }
    int index(std::string const& name) const;

    double c(int k, int i, int j) const { return c_[(k * n_ + i) * n_ + j]; }
    //! Set [e_i, e_j] = v and [e_j, e_i] = -v.
    LieModel& set(int i, int j, Vec const& v);
    LieModel& set(std::string const& a, std::string const& b,
                  std::vector<std::pair<std::string, double>> const& terms);

    Vec bracket(Vec const& u, Vec const& v) const;
    //! ad_u as a matrix: column j is [u, e_j].
    Mat ad(Vec const& u) const;
    double antisymmetry_defect() const;
    double jacobi_defect() const;
    //! Same algebra in the basis f_a = sum_i P(i,a) e_i.
    LieModel change_basis(Mat const& P, std::vector<std::string> names) const;
    Vec unit(int i) const;
    Vec unit(std::string const& name) const { return unit(index(name)); }

  private:
    std::vector<std::string> names_;
    std::optional<double> kappa_;
    int n_ = 0;
    std::vector<double> c_;
};

//! Exact contraction with the structure constants.
Vec bracket_lie(LieModel const& m, Vec const& u, Vec const& v);

//---------------------------------------------------------------------------//
// Frame models
//---------------------------------------------------------------------------//

//! A parallelizable model: coordinate chart, or abstract frame with
//! structure constants whose sections are coefficient functions.
class FrameModel
{
  public:
    enum class Kind
    {
        chart,
        lie
    };

    static FrameModel chart(Domain d, std::string label);
    //! param_coord marks the single coordinate coefficients may depend on;
    //! its generator must annihilate all brackets.
    static FrameModel lie(LieModel m, Domain d, std::string label,
                          int param_coord = -1);

    Kind kind() const { return kind_; }
    bool is_lie() const { return kind_ == Kind::lie; }
    int dim() const { return domain_.dim(); }
    Domain const& domain() const { return domain_; }
    LieModel const& lie_model() const { return lie_; }
    int param_coord() const { return param_; }
    std::string const& label() const { return label_; }

    Vec eval(Section const& s, Vec const& p) const;
    Vec bracket(Section const& a, Section const& b, Vec const& p,
                double h = 1e-5) const;

  private:
    Kind kind_ = Kind::chart;
    Domain domain_;
    LieModel lie_;
    int param_ = -1;
    std::string label_;
};

//---------------------------------------------------------------------------//
// Ranks and distributions
//---------------------------------------------------------------------------//

struct RankInfo
{
    int rank = 0;
    bool marginal = false;
    Vec singular_values;
};

RankInfo rank_info(std::vector<Vec> const& vectors, double tol,
                   double marginal_band = 1e2);
int distribution_rank(std::vector<Vec> const& vectors, double tol);

struct DistributionSpec
{
    FrameModel const* model = nullptr;
    std::vector<Section> span;
};

//! Orthonormal spanning set of D_p + [D,D]_p.
std::vector<Vec> derived_distribution(DistributionSpec const& d, Vec const& p,
                                      double tol, double h = 1e-5);

//! Orthonormal basis of the span of the vectors (singular values > tol).
std::vector<Vec> reduce_span(std::vector<Vec> const& vectors, double tol);

}  // namespace engel
