#pragma once

namespace exposome::special {

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

/// Student-t cumulative distribution with `dof` degrees of freedom.
double student_t_cdf(double t, double dof);

/// Two-sided p-value P(|T| >= |t|).
double student_t_two_sided_p(double t, double dof);

double normal_cdf(double x);

/// Inverse standard normal CDF. Rational approximation refined by one
/// Newton step; p must lie in (0, 1).
double normal_quantile(double p);

}  // namespace exposome::special
