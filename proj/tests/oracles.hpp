#pragma once

// Independent reference implementations used only by the tests.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace oracle {

/// Two-sided Student-t tail, 1 - 2 * integral_0^|t| of the density.
long double student_t_two_sided(long double t, int dof);
/// 1 - integral_0^x of the chi-square density (via s = u^2).
long double chi_square_sf(long double x, int dof);
/// Hypergeometric series for I_x(a, b), with the symmetry switch for large x.
long double incomplete_beta(long double x, long double a, long double b);

/// Two-group Kruskal-Wallis H straight from the rank-sum formula (no ties).
double kruskal_h_no_ties(const std::vector<double>& a, const std::vector<double>& b);

/// Fresh empty directory below the test build tree.
std::filesystem::path scratch_dir(const std::string& name);

/// Concatenated bytes of every regular file below `dir`, in path order,
/// each prefixed by its relative path.
std::string tree_bytes(const std::filesystem::path& dir);

}  // namespace oracle
