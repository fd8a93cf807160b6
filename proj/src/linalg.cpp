#include "armsim/linalg.hpp"

#include <complex>
#define LAPACK_COMPLEX_CUSTOM
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <vector>

namespace armsim {

namespace {

void check_square(const Eigen::Index rows, const Eigen::Index cols, const char* who) {
  if (rows != cols) throw LinalgError(std::string(who) + ": matrix not square");
}

}  // namespace

EighReal eigh(const Mat& a, int keep) {
  check_square(a.rows(), a.cols(), "eigh");
  const int n = static_cast<int>(a.rows());
  if (n == 0) return {};
  const int k = (keep < 0 || keep >= n) ? n : keep;
  Mat work = a;
  EighReal out;
  out.values.resize(k);
  out.vectors.resize(n, k);
  int m = 0;
  std::vector<int> isuppz(2 * std::max(1, k));
  int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', k == n ? 'A' : 'I', 'L', n, work.data(), n,
                            0.0, 0.0, 1, k, 0.0, &m, out.values.data(), out.vectors.data(), n,
                            isuppz.data());
  if (info != 0 || m != k)
    throw LinalgError("eigh: dsyevr failed, info=" + std::to_string(info) +
                      " m=" + std::to_string(m) + " n=" + std::to_string(n));
  return out;
}

EighCplx eigh(const CMat& a, int keep) {
  check_square(a.rows(), a.cols(), "eigh");
  const int n = static_cast<int>(a.rows());
  if (n == 0) return {};
  const int k = (keep < 0 || keep >= n) ? n : keep;
  CMat work = a;
  EighCplx out;
  out.values.resize(k);
  out.vectors.resize(n, k);
  int m = 0;
  std::vector<int> isuppz(2 * std::max(1, k));
  int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', k == n ? 'A' : 'I', 'L', n, work.data(), n,
                            0.0, 0.0, 1, k, 0.0, &m, out.values.data(), out.vectors.data(), n,
                            isuppz.data());
  if (info != 0 || m != k)
    throw LinalgError("eigh(complex): zheevr failed, info=" + std::to_string(info) +
                      " m=" + std::to_string(m) + " n=" + std::to_string(n));
  return out;
}

Vec eigh_values(const Mat& a, int keep) {
  check_square(a.rows(), a.cols(), "eigh_values");
  const int n = static_cast<int>(a.rows());
  const int k = (keep < 0 || keep >= n) ? n : keep;
  Mat work = a;
  Vec w(k);
  int m = 0;
  std::vector<int> isuppz(2 * std::max(1, k));
  int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'N', k == n ? 'A' : 'I', 'L', n, work.data(), n,
                            0.0, 0.0, 1, k, 0.0, &m, w.data(), nullptr, n, isuppz.data());
  if (info != 0) throw LinalgError("eigh_values: dsyevr failed, info=" + std::to_string(info));
  return w;
}

void fix_eigenvector_gauge(Mat& v) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    Eigen::Index imax;
    v.col(j).cwiseAbs().maxCoeff(&imax);
    if (v(imax, j) < 0) v.col(j) = -v.col(j);
  }
}

void fix_eigenvector_gauge(CMat& v) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    Eigen::Index imax;
    v.col(j).cwiseAbs().maxCoeff(&imax);
    Cplx pivot = v(imax, j);
    double mag = std::abs(pivot);
    if (mag > 0) v.col(j) *= std::conj(pivot) / mag;
  }
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

HermOp HermOp::Zero(int dim) {
  HermOp op;
  op.re_ = Mat::Zero(dim, dim);
  return op;
}

HermOp HermOp::RealSym(Mat m) {
  HermOp op;
  op.re_ = std::move(m);
  return op;
}

HermOp HermOp::ImagAntisym(Mat m) {
  HermOp op;
  op.im_ = std::move(m);
  return op;
}

HermOp HermOp::FromComplex(const CMat& m) {
  HermOp op;
  op.re_ = 0.5 * (m.real() + m.real().transpose());
  op.im_ = 0.5 * (m.imag() - m.imag().transpose());
  if (op.im_.cwiseAbs().maxCoeff() < 1e-300) op.im_.resize(0, 0);
  return op;
}

int HermOp::dim() const {
  if (has_re()) return static_cast<int>(re_.rows());
  if (has_im()) return static_cast<int>(im_.rows());
  return 0;
}

CMat HermOp::to_complex() const {
  const int n = dim();
  CMat out = CMat::Zero(n, n);
  if (has_re()) out.real() = re_;
  if (has_im()) out.imag() = im_;
  return out;
}

double HermOp::norm() const {
  double s = 0.0;
  if (has_re()) s += re_.squaredNorm();
  if (has_im()) s += im_.squaredNorm();
  return std::sqrt(s);
}

HermOp& HermOp::add_scaled(const HermOp& other, double g) {
  if (other.has_re()) {
    if (has_re())
      re_ += g * other.re_;
    else
      re_ = g * other.re_;
  }
  if (other.has_im()) {
    if (has_im())
      im_ += g * other.im_;
    else
      im_ = g * other.im_;
  }
  return *this;
}

HermOp HermOp::scaled(double g) const {
  HermOp out;
  if (has_re()) out.re_ = g * re_;
  if (has_im()) out.im_ = g * im_;
  return out;
}

HermOp HermOp::rotated(const Mat& v) const {
  HermOp out;
  if (has_re()) out.re_ = v.transpose() * re_ * v;
  if (has_im()) out.im_ = v.transpose() * im_ * v;
  return out;
}

HermOp HermOp::rotated(const CMat& u) const {
  CMat m = u.adjoint() * to_complex() * u;
  return FromComplex(m);
}

Cplx HermOp::element(const CVec& bra, const CVec& ket) const {
  Cplx val = 0.0;
  if (has_re()) val += bra.dot(re_ * ket);
  if (has_im()) val += Cplx(0, 1) * bra.dot(im_ * ket);
  return val;
}

CVec HermOp::apply(const CVec& x) const {
  CVec y = CVec::Zero(x.size());
  if (has_re()) y += re_ * x;
  if (has_im()) y += Cplx(0, 1) * (im_ * x);
  return y;
}

namespace {

// V is (na*nb) x k with product index p = a*nb + b. Column j reshapes to the
// na x nb row-major matrix Vj, and (A kron I) V reshapes to A * Vj.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> rotate_kron_left_impl(
    const Mat& a, const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& v, int na,
    int nb) {
  using MatT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using RowMajor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const int k = static_cast<int>(v.cols());
  const MatT am = a.template cast<Scalar>();
  MatT t(static_cast<Eigen::Index>(na) * nb, k);
  for (int j = 0; j < k; ++j) {
    Eigen::Map<const RowMajor> vj(v.col(j).data(), na, nb);
    Eigen::Map<RowMajor> tj(t.col(j).data(), na, nb);
    tj = am * vj;
  }
  if constexpr (std::is_same_v<Scalar, double>)
    return v.transpose() * t;
  else
    return v.adjoint() * t;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> rotate_kron_right_impl(
    const Mat& b, const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& v, int na,
    int nb) {
  using MatT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using RowMajor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const int k = static_cast<int>(v.cols());
  const MatT bt = b.transpose().template cast<Scalar>();
  MatT t(static_cast<Eigen::Index>(na) * nb, k);
  for (int j = 0; j < k; ++j) {
    Eigen::Map<const RowMajor> vj(v.col(j).data(), na, nb);
    Eigen::Map<RowMajor> tj(t.col(j).data(), na, nb);
    tj = vj * bt;
  }
  if constexpr (std::is_same_v<Scalar, double>)
    return v.transpose() * t;
  else
    return v.adjoint() * t;
}

}  // namespace

Mat rotate_kron_left(const Mat& a, const Mat& v, int na, int nb) {
  return rotate_kron_left_impl<double>(a, v, na, nb);
}
Mat rotate_kron_right(const Mat& b, const Mat& v, int na, int nb) {
  return rotate_kron_right_impl<double>(b, v, na, nb);
}
CMat rotate_kron_left(const Mat& a, const CMat& v, int na, int nb) {
  return rotate_kron_left_impl<Cplx>(a, v, na, nb);
}
CMat rotate_kron_right(const Mat& b, const CMat& v, int na, int nb) {
  return rotate_kron_right_impl<Cplx>(b, v, na, nb);
}

HermOp lift_left(const HermOp& a, int nb) {
  HermOp out;
  Mat eye = Mat::Identity(nb, nb);
  if (a.has_re()) out.add_scaled(HermOp::RealSym(kron(a.re(), eye)), 1.0);
  if (a.has_im()) out.add_scaled(HermOp::ImagAntisym(kron(a.im(), eye)), 1.0);
  return out;
}

HermOp lift_right(const HermOp& b, int na) {
  HermOp out;
  Mat eye = Mat::Identity(na, na);
  if (b.has_re()) out.add_scaled(HermOp::RealSym(kron(eye, b.re())), 1.0);
  if (b.has_im()) out.add_scaled(HermOp::ImagAntisym(kron(eye, b.im())), 1.0);
  return out;
}

}  // namespace armsim
