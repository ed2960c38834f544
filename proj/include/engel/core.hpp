#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace engel {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

//! Numerical knobs shared by every module. Defaults are the documented ones.
struct Tolerances
{
    double fd_step = 1e-5;        //!< central-difference step for jacobians
    double laplacian_step = 1e-3; //!< step for second derivatives (fourth-order stencil)
    double rank_tol = 1e-8;       //!< singular-value threshold
    double marginal_band = 1e2;   //!< sigma in [tol/band, tol*band] is marginal
    double angle_tol = 1e-6;      //!< line comparisons
};

//---------------------------------------------------------------------------//
// Errors
//---------------------------------------------------------------------------//

struct EngelError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

#define ENGEL_DEFINE_ERROR(NAME)          \
    struct NAME : EngelError              \
    {                                     \
        using EngelError::EngelError;     \
    }

ENGEL_DEFINE_ERROR(NonFiniteEvaluation);
ENGEL_DEFINE_ERROR(DomainViolation);
ENGEL_DEFINE_ERROR(DimensionMismatch);
ENGEL_DEFINE_ERROR(EmptyInput);
ENGEL_DEFINE_ERROR(InvalidStructureConstants);
ENGEL_DEFINE_ERROR(DegenerateKernel);
ENGEL_DEFINE_ERROR(NotContact);
ENGEL_DEFINE_ERROR(SignatureError);
ENGEL_DEFINE_ERROR(CurvatureMismatch);
ENGEL_DEFINE_ERROR(EquivarianceError);
ENGEL_DEFINE_ERROR(TwistMonotonicityError);
ENGEL_DEFINE_ERROR(StepTooLarge);
ENGEL_DEFINE_ERROR(FrameDegenerate);
ENGEL_DEFINE_ERROR(AmbiguousClass);
ENGEL_DEFINE_ERROR(MonotonicityViolation);
ENGEL_DEFINE_ERROR(SingularIntegrand);
ENGEL_DEFINE_ERROR(VariationNotDCurve);
ENGEL_DEFINE_ERROR(NotNull);
ENGEL_DEFINE_ERROR(ConfigError);

#undef ENGEL_DEFINE_ERROR

//! Chart exit during integration; carries the last time inside the chart.
struct ChartExit : EngelError
{
    ChartExit(std::string const& what, double t) : EngelError(what), t_exit(t)
    {
    }
    double t_exit;
};

constexpr double pi = 3.14159265358979323846;

//! Angle in [0, pi/2] between the lines spanned by u and v.
double line_angle(Vec const& u, Vec const& v);

//! Angle between a vector and its best approximation in span(cols of B).
double angle_to_span(Vec const& v, Mat const& B);

}  // namespace engel
