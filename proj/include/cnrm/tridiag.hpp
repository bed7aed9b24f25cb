#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace cnrm {

/// Thrown when Gaussian elimination meets a zero pivot.
struct SingularMatrix : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Tridiagonal matrix stored by bands.
///
/// For dimension n the bands have lengths n-1 (sub), n (diag), n-1 (sup).
/// Instances are immutable in practice: every operation below is a pure
/// function of its inputs.
struct TriDiag {
  std::vector<double> sub;
  std::vector<double> diag;
  std::vector<double> sup;

  TriDiag() = default;
  TriDiag(std::vector<double> sub_, std::vector<double> diag_, std::vector<double> sup_);

  std::size_t size() const { return diag.size(); }

  /// Exact bandwise equality of sub- and superdiagonal.
  bool symmetric() const;

  static TriDiag identity(std::size_t n);

  /// Symmetric constant-coefficient matrix: d on the diagonal, off on both
  /// off-diagonals.
  static TriDiag constant(std::size_t n, double d, double off);
};

/// Real eigenvalues of a symmetric TriDiag, ascending.
struct Spectrum {
  std::vector<double> eigenvalues;
  double min_real = 0.0;
};

/// y = M x. Throws std::invalid_argument on dimension mismatch.
std::vector<double> matvec(const TriDiag& m, std::span<const double> x);

/// Direct solve of M x = rhs by the Thomas algorithm (no pivoting).
///
/// Intended for the strictly diagonally dominant systems produced by the
/// Crank-Nicolson discretization; throws SingularMatrix on a zero pivot.
std::vector<double> thomas_solve(const TriDiag& m, std::span<const double> rhs);

/// Eigenvalues of a symmetric TriDiag.
///
/// Constant-coefficient matrices use the closed form d + 2*off*cos(m*pi/(n+1));
/// other symmetric matrices use bisection on the Sturm sequence (tolerance
/// 1e-12 relative to the Gershgorin radius). Asymmetric input throws
/// std::invalid_argument.
Spectrum spectrum(const TriDiag& m);

}  // namespace cnrm
