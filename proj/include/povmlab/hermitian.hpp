#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace povmlab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Raised when input data breaks a documented invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by PSD-only routines when an eigenvalue is genuinely negative.
class NotPsdError : public ValidationError {
 public:
  NotPsdError(const std::string& what, double min_eigenvalue)
      : ValidationError(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

inline constexpr double kHermiticityTolerance = 1e-12;
inline constexpr double kPsdTolerance = 1e-10;
inline constexpr double kDefaultPinvCutoff = 1e-12;

/// Dense complex matrix that equals its conjugate transpose.
///
/// The checked constructor accepts matrices whose largest entrywise
/// deviation |A_ij - conj(A_ji)| is at most kHermiticityTolerance and stores
/// the Hermitian part (A + A^dagger)/2. Larger asymmetry is rejected.
class HermitianOperator {
 public:
  HermitianOperator() = default;
  explicit HermitianOperator(const Matrix& m);

  /// Stores (m + m^dagger)/2 without checking the asymmetry. For internal
  /// products that are Hermitian in exact arithmetic.
  static HermitianOperator hermitian_part(const Matrix& m);

  static HermitianOperator identity(Eigen::Index dim);
  static HermitianOperator zero(Eigen::Index dim);
  static HermitianOperator diagonal(const RealVector& d);
  /// |v><v|
  static HermitianOperator projector(const Vector& v);

  Eigen::Index dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  double trace() const { return m_.trace().real(); }
  double frobenius_norm() const { return m_.norm(); }

  HermitianOperator& operator+=(const HermitianOperator& o);
  HermitianOperator& operator-=(const HermitianOperator& o);
  HermitianOperator& operator*=(double s);

  friend HermitianOperator operator+(HermitianOperator a, const HermitianOperator& b) { return a += b; }
  friend HermitianOperator operator-(HermitianOperator a, const HermitianOperator& b) { return a -= b; }
  friend HermitianOperator operator*(HermitianOperator a, double s) { return a *= s; }
  friend HermitianOperator operator*(double s, HermitianOperator a) { return a *= s; }

 private:
  struct Unchecked {};
  HermitianOperator(Matrix m, Unchecked) : m_(std::move(m)) {}

  Matrix m_;
};

/// Largest entrywise |A_ij - conj(A_ji)|.
double hermiticity_defect(const Matrix& m);

struct EigenDecomposition {
  RealVector eigenvalues;  // ascending
  Matrix eigenvectors;     // columns, orthonormal

  /// Sum_k f(r_k) |v_k><v_k|
  template <typename F>
  HermitianOperator apply(F&& f) const {
    RealVector mapped = eigenvalues.unaryExpr(f);
    return HermitianOperator::hermitian_part(eigenvectors * mapped.asDiagonal() *
                                             eigenvectors.adjoint());
  }
};

EigenDecomposition eig_hermitian(const HermitianOperator& a);

/// Principal square root. Eigenvalues in [-kPsdTolerance, 0) are clamped to
/// zero; anything more negative throws NotPsdError.
HermitianOperator sqrt_psd(const HermitianOperator& a);

/// Moore-Penrose pseudoinverse of a PSD operator. Eigenvalues at or below
/// cutoff * r_max are treated as zero. The zero operator maps to zero.
HermitianOperator pinv_psd(const HermitianOperator& a, double cutoff = kDefaultPinvCutoff);

double min_eigenvalue(const HermitianOperator& a);
double max_eigenvalue(const HermitianOperator& a);

/// Re Tr[A B]. Throws on dimension mismatch.
double trace_product(const HermitianOperator& a, const HermitianOperator& b);

/// B A B^dagger for arbitrary B, returned as a Hermitian operator.
HermitianOperator congruence(const Matrix& b, const HermitianOperator& a);

}  // namespace povmlab
