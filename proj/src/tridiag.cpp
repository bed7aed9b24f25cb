#include "cnrm/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cnrm {

TriDiag::TriDiag(std::vector<double> sub_, std::vector<double> diag_, std::vector<double> sup_)
    : sub(std::move(sub_)), diag(std::move(diag_)), sup(std::move(sup_)) {
  if (diag.empty()) {
    throw std::invalid_argument("TriDiag: dimension must be at least 1");
  }
  if (sub.size() != diag.size() - 1 || sup.size() != diag.size() - 1) {
    throw std::invalid_argument("TriDiag: band lengths must be n-1, n, n-1");
  }
}

bool TriDiag::symmetric() const { return sub == sup; }

TriDiag TriDiag::identity(std::size_t n) { return constant(n, 1.0, 0.0); }

TriDiag TriDiag::constant(std::size_t n, double d, double off) {
  if (n == 0) {
    throw std::invalid_argument("TriDiag: dimension must be at least 1");
  }
  return TriDiag(std::vector<double>(n - 1, off), std::vector<double>(n, d),
                 std::vector<double>(n - 1, off));
}

std::vector<double> matvec(const TriDiag& m, std::span<const double> x) {
  const std::size_t n = m.size();
  if (x.size() != n) {
    throw std::invalid_argument("matvec: vector length does not match matrix dimension");
  }
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = m.diag[i] * x[i];
    if (i > 0) acc += m.sub[i - 1] * x[i - 1];
    if (i + 1 < n) acc += m.sup[i] * x[i + 1];
    y[i] = acc;
  }
  return y;
}

std::vector<double> thomas_solve(const TriDiag& m, std::span<const double> rhs) {
  const std::size_t n = m.size();
  if (rhs.size() != n) {
    throw std::invalid_argument("thomas_solve: rhs length does not match matrix dimension");
  }
  // Forward elimination into scratch copies of the superdiagonal and rhs.
  std::vector<double> c(n - 1), d(n);
  double piv = m.diag[0];
  if (piv == 0.0) throw SingularMatrix("thomas_solve: zero pivot at row 0");
  if (n > 1) c[0] = m.sup[0] / piv;
  d[0] = rhs[0] / piv;
  for (std::size_t i = 1; i < n; ++i) {
    piv = m.diag[i] - m.sub[i - 1] * c[i - 1];
    if (piv == 0.0) {
      throw SingularMatrix("thomas_solve: zero pivot at row " + std::to_string(i));
    }
    if (i + 1 < n) c[i] = m.sup[i] / piv;
    d[i] = (rhs[i] - m.sub[i - 1] * d[i - 1]) / piv;
  }
  // Back substitution.
  std::vector<double> x(n);
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    x[i] = d[i] - c[i] * x[i + 1];
  }
  return x;
}

namespace {

bool constant_bands(const TriDiag& m) {
  const auto all_equal = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  return all_equal(m.diag) && (m.sub.empty() || all_equal(m.sub));
}

// Number of eigenvalues of the symmetric matrix strictly below x, from the
// signs of the LDL^T pivots.
std::size_t eigenvalues_below(const TriDiag& m, double x) {
  const std::size_t n = m.size();
  std::size_t count = 0;
  double d = m.diag[0] - x;
  if (d == 0.0) d = -1e-300;
  if (d < 0.0) ++count;
  for (std::size_t i = 1; i < n; ++i) {
    d = (m.diag[i] - x) - m.sub[i - 1] * m.sub[i - 1] / d;
    if (d == 0.0) d = -1e-300;
    if (d < 0.0) ++count;
  }
  return count;
}

}  // namespace

Spectrum spectrum(const TriDiag& m) {
  if (!m.symmetric()) {
    throw std::invalid_argument("spectrum: only symmetric tridiagonal matrices are supported");
  }
  const std::size_t n = m.size();
  Spectrum s;
  s.eigenvalues.resize(n);

  if (constant_bands(m)) {
    const double d = m.diag[0];
    const double off = m.sub.empty() ? 0.0 : m.sub[0];
    for (std::size_t j = 1; j <= n; ++j) {
      s.eigenvalues[j - 1] =
          d + 2.0 * off * std::cos(static_cast<double>(j) * std::numbers::pi /
                                   static_cast<double>(n + 1));
    }
    std::sort(s.eigenvalues.begin(), s.eigenvalues.end());
  } else {
    // Gershgorin bracket.
    double lo = m.diag[0], hi = m.diag[0];
    for (std::size_t i = 0; i < n; ++i) {
      double r = 0.0;
      if (i > 0) r += std::abs(m.sub[i - 1]);
      if (i + 1 < n) r += std::abs(m.sub[i]);
      lo = std::min(lo, m.diag[i] - r);
      hi = std::max(hi, m.diag[i] + r);
    }
    const double tol = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
    for (std::size_t j = 0; j < n; ++j) {
      double a = lo, b = hi;
      while (b - a > tol) {
        const double mid = 0.5 * (a + b);
        if (eigenvalues_below(m, mid) > j) {
          b = mid;
        } else {
          a = mid;
        }
      }
      s.eigenvalues[j] = 0.5 * (a + b);
    }
  }
  s.min_real = s.eigenvalues.front();
  return s;
}

}  // namespace cnrm
