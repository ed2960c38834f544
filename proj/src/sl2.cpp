#include "engel/sl2.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace engel {

Mat2 exp_traceless(Mat2 const& A)
{
    // A^2 = -det(A) I for traceless A.
    double d = A.determinant();
    Mat2 I = Mat2::Identity();
    if (std::abs(d) < 1e-300)
        return I + A;
    if (d > 0)
    {
        double k = std::sqrt(d);
        return std::cos(k) * I + (std::sin(k) / k) * A;
    }
    double k = std::sqrt(-d);
    return std::cosh(k) * I + (std::sinh(k) / k) * A;
}

Mat2 rotation(double a)
{
    Mat2 R;
    R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return R;
}

Mat2 real_log(Mat2 const& m)
{
    if (!m.allFinite() || std::abs(m.determinant() - 1) > 1e-9)
        throw ConfigError("monodromy must be unimodular");
    double tr = m.trace();
    if ((m + Mat2::Identity()).norm() < 1e-12)
        return pi * rotation(pi / 2);
    if (tr <= -2)
        throw ConfigError("monodromy has negative eigenvalues and no real logarithm");
    Mat2 L = m.log();
    // Remove the trace left by rounding; det = 1 forces trace(log) = 0.
    L -= 0.5 * L.trace() * Mat2::Identity();
    return L;
}

}  // namespace engel
