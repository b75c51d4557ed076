#include "povmlab/hermitian.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace povmlab {

namespace {

void require_square(const Matrix& m) {
  if (m.rows() < 1 || m.rows() != m.cols()) {
    throw ValidationError(
        fmt::format("operator must be square with dim >= 1, got {}x{}", m.rows(), m.cols()));
  }
}

void require_same_dim(const HermitianOperator& a, const HermitianOperator& b) {
  if (a.dim() != b.dim()) {
    throw ValidationError(fmt::format("dimension mismatch: {} vs {}", a.dim(), b.dim()));
  }
}

}  // namespace

double hermiticity_defect(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

HermitianOperator::HermitianOperator(const Matrix& m) {
  require_square(m);
  const double defect = hermiticity_defect(m);
  if (!(defect <= kHermiticityTolerance)) {
    throw ValidationError(fmt::format("operator is not Hermitian: asymmetry {:.3e}", defect));
  }
  m_ = (m + m.adjoint()) * 0.5;
}

HermitianOperator HermitianOperator::hermitian_part(const Matrix& m) {
  require_square(m);
  return {Matrix((m + m.adjoint()) * 0.5), Unchecked{}};
}

HermitianOperator HermitianOperator::identity(Eigen::Index dim) {
  return {Matrix::Identity(dim, dim), Unchecked{}};
}

HermitianOperator HermitianOperator::zero(Eigen::Index dim) {
  return {Matrix::Zero(dim, dim), Unchecked{}};
}

HermitianOperator HermitianOperator::diagonal(const RealVector& d) {
  return {Matrix(d.cast<Complex>().asDiagonal()), Unchecked{}};
}

HermitianOperator HermitianOperator::projector(const Vector& v) {
  return hermitian_part(v * v.adjoint());
}

HermitianOperator& HermitianOperator::operator+=(const HermitianOperator& o) {
  require_same_dim(*this, o);
  m_ += o.m_;
  return *this;
}

HermitianOperator& HermitianOperator::operator-=(const HermitianOperator& o) {
  require_same_dim(*this, o);
  m_ -= o.m_;
  return *this;
}

HermitianOperator& HermitianOperator::operator*=(double s) {
  m_ *= s;
  return *this;
}

EigenDecomposition eig_hermitian(const HermitianOperator& a) {
  if (a.dim() < 1) throw ValidationError("eig_hermitian: empty operator");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix());
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eig_hermitian: eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

HermitianOperator sqrt_psd(const HermitianOperator& a) {
  const auto ed = eig_hermitian(a);
  const double lowest = ed.eigenvalues(0);
  if (lowest < -kPsdTolerance) {
    throw NotPsdError(fmt::format("sqrt_psd: eigenvalue {:.3e} below tolerance", lowest), lowest);
  }
  return ed.apply([](double r) { return std::sqrt(std::max(r, 0.0)); });
}

HermitianOperator pinv_psd(const HermitianOperator& a, double cutoff) {
  if (!(cutoff > 0.0)) throw ValidationError("pinv_psd: cutoff must be positive");
  const auto ed = eig_hermitian(a);
  const double top = ed.eigenvalues.cwiseAbs().maxCoeff();
  if (top == 0.0) return HermitianOperator::zero(a.dim());
  const double keep = cutoff * top;
  return ed.apply([keep](double r) { return r > keep ? 1.0 / r : 0.0; });
}

double min_eigenvalue(const HermitianOperator& a) {
  return eig_hermitian(a).eigenvalues(0);
}

double max_eigenvalue(const HermitianOperator& a) {
  const auto ed = eig_hermitian(a);
  return ed.eigenvalues(ed.eigenvalues.size() - 1);
}

double trace_product(const HermitianOperator& a, const HermitianOperator& b) {
  require_same_dim(a, b);
  // Tr[AB] = sum_ij A_ij B_ji
  const Complex t = (a.matrix().array() * b.matrix().transpose().array()).sum();
  const double scale = std::max(1.0, a.frobenius_norm() * b.frobenius_norm());
  if (std::abs(t.imag()) > 1e-10 * scale) {
    throw std::logic_error(
        fmt::format("trace_product: imaginary part {:.3e} for Hermitian inputs", t.imag()));
  }
  return t.real();
}

HermitianOperator congruence(const Matrix& b, const HermitianOperator& a) {
  if (b.cols() != a.dim()) {
    throw ValidationError(fmt::format("congruence: {} columns vs dim {}", b.cols(), a.dim()));
  }
  return HermitianOperator::hermitian_part(b * a.matrix() * b.adjoint());
}

}  // namespace povmlab
