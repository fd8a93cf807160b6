#include "armsim/basis.hpp"

#include <cmath>

namespace armsim {

namespace {

// Ungauged oscillator phase operator phi_zpf (a + a^dag), real symmetric.
Mat phi_ungauged(int nfock, double phi_zpf) {
  Mat phi = Mat::Zero(nfock, nfock);
  for (int k = 0; k + 1 < nfock; ++k) {
    double v = phi_zpf * std::sqrt(static_cast<double>(k + 1));
    phi(k, k + 1) = v;
    phi(k + 1, k) = v;
  }
  return phi;
}

// Applies the i^k diagonal gauge to a function f(phi) evaluated spectrally.
// Even functions of phi stay real symmetric; odd functions become purely
// imaginary with an antisymmetric carrier. `parity` is +1 for even, -1 for odd.
HermOp gauged_function_of_phi(const Mat& f_ungauged, int parity) {
  const int n = static_cast<int>(f_ungauged.rows());
  Mat m = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      int d = k - j;
      bool odd = (d & 1) != 0;
      if (parity > 0) {
        if (odd) continue;  // exact selection rule
        // i^d = +-1 for even d
        m(j, k) = f_ungauged(j, k) * (((d % 4 + 4) % 4 == 0) ? 1.0 : -1.0);
      } else {
        if (!odd) continue;
        // i^d = +-i for odd d; carrier sign +1 when d = 1 mod 4
        m(j, k) = f_ungauged(j, k) * (((d % 4 + 4) % 4 == 1) ? 1.0 : -1.0);
      }
    }
  }
  return parity > 0 ? HermOp::RealSym(std::move(m)) : HermOp::ImagAntisym(std::move(m));
}

}  // namespace

ModeBasis default_basis(const Coordinate& coord, double ec_diag_ghz, int cutoff) {
  ModeBasis basis;
  basis.kind = coord.kind;
  basis.coordinate = coord.index;
  if (coord.kind == CoordinateKind::Periodic) {
    basis.cutoff = cutoff > 0 ? cutoff : 40;
  } else {
    basis.cutoff = cutoff > 0 ? cutoff : 60;
    double el = 0.0;
    for (const auto& q : coord.quadratics) el += q.el_ghz;
    if (el <= 0.0)
      throw QuantizationError("extended coordinate " + std::to_string(coord.index) +
                              " has no inductive term");
    basis.phi_zpf = std::pow(2.0 * ec_diag_ghz / el, 0.25);
  }
  return basis;
}

BareMode build_bare_mode(const Coordinate& coord, double ec_diag_ghz, const ModeBasis& basis) {
  if (basis.kind != coord.kind)
    throw QuantizationError("basis kind does not match coordinate " +
                            std::to_string(coord.index) + " periodicity");
  if (basis.cutoff < 10)
    throw QuantizationError("cutoff must be at least 10");

  BareMode mode;
  mode.basis = basis;
  mode.offset_charge = coord.offset_charge;

  if (coord.kind == CoordinateKind::Periodic) {
    const int nmax = basis.cutoff;
    const int dim = 2 * nmax + 1;
    Mat n_op = Mat::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) n_op(k, k) = (k - nmax) - coord.offset_charge;
    Mat h = 4.0 * ec_diag_ghz * n_op * n_op;
    HermOp h_op = HermOp::RealSym(std::move(h));
    for (const auto& cosine : coord.cosines) {
      // -E_J cos(phi - f) with e^{i phi}|n> = |n+1>:
      // matrix -E_J/2 (e^{-if} hop + e^{+if} hop^T), hop(n+1,n) = 1.
      double c = std::cos(cosine.flux_rad), s = std::sin(cosine.flux_rad);
      Mat re = Mat::Zero(dim, dim), im = Mat::Zero(dim, dim);
      for (int k = 0; k + 1 < dim; ++k) {
        re(k + 1, k) = -0.5 * cosine.ej_ghz * c;
        re(k, k + 1) = -0.5 * cosine.ej_ghz * c;
        im(k + 1, k) = 0.5 * cosine.ej_ghz * s;
        im(k, k + 1) = -0.5 * cosine.ej_ghz * s;
      }
      h_op.add_scaled(HermOp::RealSym(std::move(re)), 1.0);
      if (s != 0.0) h_op.add_scaled(HermOp::ImagAntisym(std::move(im)), 1.0);
    }
    mode.h_ghz = std::move(h_op);
    mode.n_op = HermOp::RealSym(std::move(n_op));
    return mode;
  }

  // Extended coordinate: oscillator basis of the total quadratic part. The
  // quadratic flux offset is removed by displacing the coordinate, shifting
  // every cosine by the same amount.
  const int nfock = basis.cutoff;
  double el_total = 0.0, el_flux = 0.0;
  for (const auto& q : coord.quadratics) {
    el_total += q.el_ghz;
    el_flux += q.el_ghz * q.flux_rad;
  }
  const double shift = el_flux / el_total;
  mode.coordinate_shift = shift;

  if (basis.phi_zpf <= 0.0) throw QuantizationError("phi_zpf must be > 0");
  const double phi_zpf = basis.phi_zpf;
  const double n_zpf = 0.5 / phi_zpf;

  // Gauged charge operator: real symmetric with sqrt pattern.
  Mat n_op = Mat::Zero(nfock, nfock);
  for (int k = 0; k + 1 < nfock; ++k) {
    double v = n_zpf * std::sqrt(static_cast<double>(k + 1));
    n_op(k, k + 1) = v;
    n_op(k + 1, k) = v;
  }
  Mat phi_u = phi_ungauged(nfock, phi_zpf);

  // All operators live in the gauged basis; even functions of phi pick up the
  // parity mask (the gauged n is already real symmetric by construction).
  Mat h = 4.0 * ec_diag_ghz * (n_op * n_op);
  HermOp h_op = HermOp::RealSym(std::move(h));
  h_op.add_scaled(gauged_function_of_phi(phi_u * phi_u, +1), 0.5 * el_total);

  if (!coord.cosines.empty()) {
    // cos and sin of phi from the spectral decomposition of the ungauged
    // phase operator; exact parity selection rules then give the gauged form.
    EighReal es = eigh(phi_u);
    Mat cos_u = es.vectors * es.values.array().cos().matrix().asDiagonal() *
                es.vectors.transpose();
    Mat sin_u = es.vectors * es.values.array().sin().matrix().asDiagonal() *
                es.vectors.transpose();
    for (const auto& cosine : coord.cosines) {
      double f = cosine.flux_rad + shift;
      // -E_J cos(phi - f) = -E_J (cos f cos phi + sin f sin phi)
      double cf = std::cos(f), sf = std::sin(f);
      h_op.add_scaled(gauged_function_of_phi(cos_u, +1), -cosine.ej_ghz * cf);
      if (std::abs(sf) > 1e-15)
        h_op.add_scaled(gauged_function_of_phi(sin_u, -1), -cosine.ej_ghz * sf);
    }
    // Quasiparticle operator across the junction: the physical junction phase
    // is the coordinate before the flux displacement, so at a half-quantum
    // sweet spot sin(phi_J/2) = -cos(u/2), whose 0-1 element vanishes by
    // parity.
    Mat sinh_u = es.vectors * (es.values * 0.5).array().sin().matrix().asDiagonal() *
                 es.vectors.transpose();
    Mat cosh_u = es.vectors * (es.values * 0.5).array().cos().matrix().asDiagonal() *
                 es.vectors.transpose();
    HermOp sin_half = gauged_function_of_phi(sinh_u, -1).scaled(std::cos(0.5 * shift));
    sin_half.add_scaled(gauged_function_of_phi(cosh_u, +1), -std::sin(0.5 * shift));
    mode.sin_half_phi = std::move(sin_half);
  }

  mode.h_ghz = std::move(h_op);
  mode.n_op = HermOp::RealSym(std::move(n_op));
  mode.phi_op = gauged_function_of_phi(phi_u, -1);
  Mat occ = Mat::Zero(nfock, nfock);
  for (int k = 0; k < nfock; ++k) occ(k, k) = k;
  mode.num_op = HermOp::RealSym(std::move(occ));
  return mode;
}

}  // namespace armsim
