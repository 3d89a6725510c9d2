#pragma once

#include <cstddef>
#include <vector>

namespace hsu {

// Euclidean projection onto the unit simplex {x : x >= 0, sum(x) = 1} by the
// sort-and-threshold rule: sort descending, find the largest rho with
// u_rho - (sum_{i<=rho} u_i - 1)/rho > 0, set tau to that average excess and
// output max(v - tau, 0).
//
// Two floating-point refinements make the operator exactly idempotent:
// inputs already satisfying (x >= 0, left-to-right sum == 1.0) are returned
// unchanged, and outputs are nudged on their largest coordinate (a few ulps at
// most) so their left-to-right sum is exactly 1.0.
void project_simplex_inplace(double* v, std::size_t p);
std::vector<double> project_simplex(std::vector<double> v);

// Adjusts the largest coordinate of a nonnegative vector so the left-to-right
// sum is exactly 1.0. Used by the projection and by simplex-valued
// initializers.
void fix_simplex_sum(double* v, std::size_t p);

}  // namespace hsu
