#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace armsim {

using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Cplx = std::complex<double>;

struct EighReal {
  Vec values;
  Mat vectors;  // n x k, column j is the eigenvector of values[j]
};

struct EighCplx {
  Vec values;
  CMat vectors;
};

// Lowest `keep` eigenpairs of a real symmetric / complex Hermitian matrix,
// ascending. keep < 0 or keep >= n solves the full problem.
EighReal eigh(const Mat& a, int keep = -1);
EighCplx eigh(const CMat& a, int keep = -1);

// Eigenvalues only (ascending, lowest `keep`).
Vec eigh_values(const Mat& a, int keep = -1);

// Deterministic eigenvector gauge: per column, the largest-magnitude
// component is made positive (real), stabilizing operator signs across
// parameter sweeps.
void fix_eigenvector_gauge(Mat& v);
void fix_eigenvector_gauge(CMat& v);

Mat kron(const Mat& a, const Mat& b);
CMat kron(const CMat& a, const CMat& b);

// Hermitian operator split into a symmetric real part and an antisymmetric
// imaginary carrier: op = re + i*im. Either block may be empty (treated as
// zero); circuit operators at a flux sweet spot stay purely in one block,
// which keeps the composition eigenproblems real.
class HermOp {
 public:
  HermOp() = default;
  static HermOp Zero(int dim);
  static HermOp RealSym(Mat m);
  static HermOp ImagAntisym(Mat m);  // operator is i*m
  static HermOp FromComplex(const CMat& m);

  int dim() const;
  bool has_re() const { return re_.size() > 0; }
  bool has_im() const { return im_.size() > 0; }
  bool is_real() const { return !has_im(); }
  const Mat& re() const { return re_; }
  const Mat& im() const { return im_; }

  CMat to_complex() const;
  double norm() const;

  HermOp& add_scaled(const HermOp& other, double g);
  HermOp scaled(double g) const;

  // Congruence transform V^T op V (V real, n x k) or U^dag op U.
  HermOp rotated(const Mat& v) const;
  HermOp rotated(const CMat& u) const;

  // matrix element <bra| op |ket>
  Cplx element(const CVec& bra, const CVec& ket) const;

  CVec apply(const CVec& x) const;

 private:
  Mat re_;  // symmetric
  Mat im_;  // antisymmetric
};

// Kronecker-structured congruence transforms used by the hierarchical
// composition: computes V^T (A kron I_nb) V and V^T (I_na kron B) V without
// forming the na*nb square Kronecker factor. Product index p = a*nb + b.
Mat rotate_kron_left(const Mat& a, const Mat& v, int na, int nb);
Mat rotate_kron_right(const Mat& b, const Mat& v, int na, int nb);
CMat rotate_kron_left(const Mat& a, const CMat& v, int na, int nb);
CMat rotate_kron_right(const Mat& b, const CMat& v, int na, int nb);

HermOp lift_left(const HermOp& a, int nb);   // a kron I
HermOp lift_right(const HermOp& b, int na);  // I kron b

struct LinalgError : std::runtime_error {
  explicit LinalgError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace armsim
