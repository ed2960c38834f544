#pragma once

// Hand-derived reference values. Nothing here calls into the library's
// numerical kernels; the matrix exponential comes from Eigen's own routine.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

constexpr double pi = 3.14159265358979323846;

//! Darboux frame X = d/dx + z d/dy + w d/dz at (x,y,z,w).
inline Vec darboux_X(Vec const& p)
{
    Vec v(4);
    v << 1, p[2], p[3], 0;
    return v;
}

//! [X, d/dw] = -d/dz, [d/dw, X] = d/dz (hand computation).
inline Vec darboux_dw_X()
{
    Vec v(4);
    v << 0, 0, 1, 0;
    return v;
}

//! Magnetic generator on E/W in (Theta, Yt): columns [Theta, W], [Yt, W] mod W
//! with [Theta, Xt] = Yt, [Theta, Yt] = -Xt, [Xt, Yt] = kappa Zt and
//! W = Xt + Zt - (1 + kappa) Theta.
inline Mat2 magnetic_A(double kappa)
{
    Mat2 A;
    A << 0, -kappa * (kappa + 1), 1, 0;
    return A;
}

//! Product generator in (Z, Y) for W = X + Theta.
inline Mat2 product_A(double kappa)
{
    Mat2 A;
    A << 0, -kappa, 1, 0;
    return A;
}

inline Mat2 expm(Mat2 const& A)
{
    return A.exp();
}

//! Round sphere u = log(2/(1 + r^2)): curvature 1 by symbolic differentiation.
inline double sphere_lambda(double x, double y)
{
    double d = 1 + x * x + y * y;
    return 4 / (d * d);
}

inline double disk_lambda(double x, double y)
{
    double d = 1 - x * x - y * y;
    return 4 / (d * d);
}

//! Angle in [0, pi/2] between two lines.
//! Chord form 2 asin(|u - v|/2) keeps precision for nearly equal lines.
inline double line_angle(Vec const& a, Vec const& b)
{
    Vec u = a.normalized(), v = b.normalized();
    if (u.dot(v) < 0)
        v = -v;
    return 2 * std::asin(std::min(1.0, 0.5 * (u - v).norm()));
}

inline Mat2 rotation_matrix(double a)
{
    Mat2 r;
    r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return r;
}

inline Mat2 random_sl2(std::mt19937_64& rng)
{
    std::normal_distribution<double> N(0, 1);
    Mat2 P;
    do
    {
        P << N(rng), N(rng), N(rng), N(rng);
    } while (std::abs(P.determinant()) < 0.1);
    if (P.determinant() < 0)
        P.col(0) *= -1;
    return P / std::sqrt(P.determinant());
}

}  // namespace oracle
