#pragma once

#include "engel/core.hpp"

namespace engel {

//! exp(A) for traceless 2x2 A via cos/cosh of sqrt(|det A|).
Mat2 exp_traceless(Mat2 const& A);

//! Real traceless logarithm of a unimodular matrix. Throws ConfigError for
//! matrices with negative real eigenvalues (other than -I) or det != 1.
Mat2 real_log(Mat2 const& m);

//! Counter-clockwise rotation by a.
Mat2 rotation(double a);

}  // namespace engel
