#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "otp/instance.hpp"

namespace otp {

/// ln 5 / ln 4.
double pareto_shape_default();

/// Support {0,1}^d, Pareto(shape, scale 1) weights normalized to a pmf,
/// indicator-match reward with Y = the support. Costs: one value per test
/// or a single value broadcast to all tests.
ProblemInstance gen_discrete_pareto(std::size_t d, double shape, std::uint64_t seed, std::vector<double> costs);

/// mu = 0, Sigma = L L' + I with L_ij ~ U[0, 1], entropy reward.
ProblemInstance gen_gaussian_lowrank(std::size_t d, std::uint64_t seed, std::vector<double> costs,
                                     double lambda = 1.0);

/// One binary test of cost 3/4 with P(x = 0) = (1 + eps)/2 (which = 1) or
/// (1 - eps)/2 (which = 2); f(x, y) = -1 when y != x, else 0.
ProblemInstance gen_lower_bound_single(double eps, int which);

/// Test 0 is the costly binary test, test 1 is free and uniform on
/// {1, ..., support_size/2}; given x_1 = i, x_0 follows the first instance
/// when pattern[i-1] == '1' and the second when it is '0'.
ProblemInstance gen_lower_bound_stacked(double eps, std::size_t support_size, const std::string& pattern);

/// Random tiny discrete instance for oracle checks: binary support of size
/// <= max_support inside {0,1}^d, dyadic probabilities, costs and table
/// rewards so that every expectation is exact in double precision.
ProblemInstance gen_random_tiny(std::size_t d, std::size_t max_support, std::size_t decisions, std::uint64_t seed);

} // namespace otp
