#pragma once

namespace fairaudit::stats {

/// log Gamma(x) for x > 0.
double ln_gamma(double x);

/// Regularized incomplete beta I_x(a, b), a, b > 0, x in [0, 1]. Continued
/// fraction (modified Lentz) on whichever side of the mean converges fast.
double reg_incomplete_beta(double a, double b, double x);

/// Regularized lower incomplete gamma P(a, x) and its complement Q(a, x).
double reg_lower_gamma(double a, double x);
double reg_upper_gamma(double a, double x);

/// P(|T| >= |t|) for Student's t with `dof` >= 1 degrees of freedom.
double student_t_sf_two_sided(double t, double dof);

/// P(X >= x) for chi-square with `dof` degrees of freedom.
double chi_square_sf(double x, double dof);

/// P(F >= f) for the F distribution with (d1, d2) degrees of freedom.
double f_sf(double f, double d1, double d2);

}  // namespace fairaudit::stats
