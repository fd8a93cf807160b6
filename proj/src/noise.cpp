#include "armsim/noise.hpp"

#include <fftw3.h>

#include <cmath>
#include <random>

#include "armsim/units.hpp"

namespace armsim {

using units::two_pi;

namespace {

Cplx op_element(const HermOp& op, int row, int col) {
  Cplx v(0, 0);
  if (op.has_re()) v += op.re()(row, col);
  if (op.has_im()) v += Cplx(0, 1) * op.im()(row, col);
  return v;
}

}  // namespace

DielectricBreakdown dielectric_t1(const EigenSystem& es, const TransformedCircuit& circuit,
                                  const Label& ground, const Label& excited,
                                  const NoiseModel& model) {
  const int n_nodes = circuit.spec.node_count();
  const int g = es.state(ground), x = es.state(excited);
  const double omega = two_pi * (es.energies[x] - es.energies[g]) * 1e9;  // rad/s

  // Node voltage operators V_i = 2e (C^-1)_{ij} n_node_j with node charges
  // reassembled from the transformed ones.
  Mat cinv = (circuit.c_fF * 1e-15).inverse();
  std::vector<HermOp> node_charges;
  for (int node = 0; node < n_nodes; ++node)
    node_charges.push_back(node_charge_op(es, circuit, node));
  std::vector<HermOp> voltages(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    HermOp v = HermOp::Zero(es.dim());
    for (int j = 0; j < n_nodes; ++j)
      v.add_scaled(node_charges[j], 2.0 * units::e_C * cinv(i, j));
    voltages[i] = std::move(v);
  }

  const double hbar = units::hbar_Js;
  const double kt = units::kB_JperK * model.t_diel_K;
  auto spectral_sum = [&](double c_farad) {
    double arg = hbar * omega / (2.0 * kt);
    double coth = 1.0 / std::tanh(arg);
    double s_plus = hbar / (c_farad * model.q_diel) * std::abs(coth + 1.0);
    double s_minus = hbar / (c_farad * model.q_diel) * std::abs(-coth + 1.0);
    return s_plus + s_minus;
  };

  DielectricBreakdown out;
  for (const auto& element : capacitor_elements(circuit.spec, circuit.rules)) {
    double c_farad = element.c_fF * 1e-15;
    HermOp coupling = voltages[element.branch.a];
    if (!element.branch.to_ground()) {
      coupling = coupling.scaled(1.0);
      coupling.add_scaled(voltages[element.branch.b], -1.0);
    }
    Cplx m = c_farad * op_element(coupling, x, g);
    double rate = std::norm(m) * spectral_sum(c_farad) / (hbar * hbar);
    out.items.push_back({element.origin, element.branch, element.c_fF, rate});
    out.total_rate_per_s += rate;
  }
  return out;
}

double flux_t1_rate_per_s(const EigenSystem& es, const std::string& phi_op, double el_ghz,
                          const Label& ground, const Label& excited, const NoiseModel& model) {
  const int g = es.state(ground), x = es.state(excited);
  const double omega_q = two_pi * (es.energies[x] - es.energies[g]) * 1e9;  // rad/s
  Cplx m = op_element(es.op(phi_op), g, x);
  // dH/dPhi / hbar = (2 pi / Phi_0) (2 pi E_L[Hz]) phi  [rad/s per Wb]
  double coupling = (two_pi / units::Phi0_Wb) * (two_pi * el_ghz * 1e9) * std::abs(m);
  double a_wb = model.a_phi_phi0 * units::Phi0_Wb;
  double s_phi = a_wb * a_wb * (two_pi * 1.0 / omega_q);  // Wb^2 s
  return coupling * coupling * s_phi;
}

namespace {

// Natural cubic spline through (x, y), evaluated by binary search.
class CubicSpline {
 public:
  CubicSpline(const std::vector<double>& x, const std::vector<double>& y) : x_(x), y_(y) {
    const int n = static_cast<int>(x.size());
    m_.assign(n, 0.0);
    std::vector<double> a(n, 0.0), b(n, 1.0), c(n, 0.0), d(n, 0.0);
    for (int i = 1; i + 1 < n; ++i) {
      double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
      a[i] = h0 / 6.0;
      b[i] = (h0 + h1) / 3.0;
      c[i] = h1 / 6.0;
      d[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
    }
    for (int i = 1; i < n; ++i) {
      double w = a[i] / b[i - 1];
      b[i] -= w * c[i - 1];
      d[i] -= w * d[i - 1];
    }
    m_[n - 1] = d[n - 1] / b[n - 1];
    for (int i = n - 2; i >= 0; --i) m_[i] = (d[i] - c[i] * m_[i + 1]) / b[i];
  }

  double operator()(double xv) const {
    const int n = static_cast<int>(x_.size());
    int lo = 0, hi = n - 1;
    if (xv <= x_.front()) hi = 1;
    else if (xv >= x_.back()) lo = n - 2;
    else {
      while (hi - lo > 1) {
        int mid = (lo + hi) / 2;
        (x_[mid] <= xv ? lo : hi) = mid;
      }
    }
    double h = x_[hi] - x_[lo];
    double t = (xv - x_[lo]) / h;
    double a = 1.0 - t;
    return a * y_[lo] + t * y_[hi] +
           ((a * a * a - a) * m_[lo] + (t * t * t - t) * m_[hi]) * h * h / 6.0;
  }

 private:
  std::vector<double> x_, y_;
  std::vector<double> m_;
};

}  // namespace

FluxEchoResult flux_echo_tphi(const std::vector<double>& phi_ext_rad,
                              const std::vector<double>& omega_ghz, double phi_bias_rad,
                              const NoiseModel& model, const FluxEchoConfig& config) {
  if (phi_ext_rad.size() != omega_ghz.size() || phi_ext_rad.size() < 4)
    throw NoiseError("flux echo needs a sampled frequency curve");
  CubicSpline curve(phi_ext_rad, omega_ghz);

  const std::size_t n = static_cast<std::size_t>(config.record_s * config.sample_rate_hz);
  const double dt = 1.0 / config.sample_rate_hz;

  // 1/f synthesis by frequency-domain colouring: one-sided S(f) = A^2 (1Hz)/f
  // between the record length (infrared) and Nyquist (ultraviolet) cutoffs.
  std::vector<double> series(n);
  {
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> gauss;
    std::size_t nf = n / 2 + 1;
    fftw_complex* spectrum = fftw_alloc_complex(nf);
    double* out = fftw_alloc_real(n);
    spectrum[0][0] = spectrum[0][1] = 0.0;
    const double a2 = model.a_phi_phi0 * model.a_phi_phi0;  // Phi_0^2/Hz at 1 Hz
    for (std::size_t k = 1; k < nf; ++k) {
      double f = k * config.sample_rate_hz / n;
      double amp = std::sqrt(a2 * (1.0 / f) * config.sample_rate_hz * n / 2.0);
      if (k == nf - 1 && n % 2 == 0) {
        spectrum[k][0] = amp * gauss(rng);
        spectrum[k][1] = 0.0;
      } else {
        spectrum[k][0] = amp * gauss(rng) / std::sqrt(2.0);
        spectrum[k][1] = amp * gauss(rng) / std::sqrt(2.0);
      }
    }
    fftw_plan plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), spectrum, out, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    for (std::size_t i = 0; i < n; ++i) series[i] = out[i] / static_cast<double>(n);
    fftw_free(spectrum);
    fftw_free(out);
  }

  // Frequency record in rad/s relative to the bias point.
  std::vector<double> omega(n);
  const double w0 = curve(phi_bias_rad);
  for (std::size_t i = 0; i < n; ++i)
    omega[i] = two_pi * 1e9 * (curve(phi_bias_rad + two_pi * series[i]) - w0);

  FluxEchoResult result;
  result.tau_s = config.tau_s;
  if (result.tau_s.empty())
    for (double tau = 5e-5; tau <= 8.1e-3; tau *= 1.35) result.tau_s.push_back(tau);

  for (double tau : result.tau_s) {
    std::size_t seg = static_cast<std::size_t>(tau / dt);
    if (seg < 8 || seg > n) {
      result.coherence.push_back(1.0);
      continue;
    }
    std::size_t half = seg / 2;
    Cplx acc(0, 0);
    std::size_t count = 0;
    for (std::size_t start = 0; start + seg <= n; start += seg) {
      double theta = 0.0;
      for (std::size_t i = 0; i < seg; ++i)
        theta += (i < half ? 1.0 : -1.0) * omega[start + i] * dt;
      acc += std::polar(1.0, theta);
      ++count;
    }
    result.coherence.push_back(count ? std::abs(acc) / count : 1.0);
  }

  const double target = std::exp(-1.0);
  result.tphi_s = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < result.tau_s.size(); ++i) {
    if (result.coherence[i] >= target && result.coherence[i + 1] < target) {
      double f = (result.coherence[i] - target) / (result.coherence[i] - result.coherence[i + 1]);
      result.tphi_s = result.tau_s[i] + f * (result.tau_s[i + 1] - result.tau_s[i]);
      break;
    }
  }
  return result;
}

ChargeDispersion charge_dephasing(const std::vector<double>& ng,
                                  const std::vector<double>& omega_ghz) {
  if (ng.size() != omega_ghz.size() || ng.size() < 5)
    throw NoiseError("charge dispersion fit needs at least 5 sweep points");
  // Least squares on w = w0 + A cos(2 pi n_g)
  const int n = static_cast<int>(ng.size());
  double s1 = n, sc = 0, scc = 0, sw = 0, swc = 0;
  for (int i = 0; i < n; ++i) {
    double c = std::cos(two_pi * ng[i]);
    sc += c;
    scc += c * c;
    sw += omega_ghz[i];
    swc += omega_ghz[i] * c;
  }
  double det = s1 * scc - sc * sc;
  if (std::abs(det) < 1e-12) throw NoiseError("degenerate charge-dispersion fit");
  ChargeDispersion out;
  out.omega0_ghz = (sw * scc - swc * sc) / det;
  out.amplitude_ghz = (s1 * swc - sc * sw) / det;
  double rss = 0.0;
  for (int i = 0; i < n; ++i) {
    double fit = out.omega0_ghz + out.amplitude_ghz * std::cos(two_pi * ng[i]);
    rss += std::pow(omega_ghz[i] - fit, 2);
  }
  out.residual = std::sqrt(rss / n) / std::max(1e-30, std::abs(out.amplitude_ghz));
  if (out.amplitude_ghz != 0.0 && out.residual > 0.05)
    throw NoiseError("charge dispersion is not sinusoidal: relative residual " +
                     std::to_string(out.residual));
  // Gamma = A/pi with A in angular frequency
  out.rate_per_s = two_pi * std::abs(out.amplitude_ghz) * 1e9 / M_PI;
  return out;
}

QuasiparticleResult quasiparticle_t1(const EigenSystem& es, const std::string& sin_half_op,
                                     const std::string& phi_op, double ej_ghz, double el_ghz,
                                     const Label& ground, const Label& excited,
                                     const NoiseModel& model) {
  const int g = es.state(ground), x = es.state(excited);
  const double wq_ghz = es.energies[x] - es.energies[g];
  const double gap_factor = std::sqrt(2.0 * model.gap_ghz / wq_ghz);

  QuasiparticleResult out;
  out.junction_element = std::abs(op_element(es.op(sin_half_op), g, x));
  out.array_element = 0.5 * std::abs(op_element(es.op(phi_op), g, x));
  double ej_ang = two_pi * ej_ghz * 1e9;
  double el_ang = two_pi * el_ghz * 1e9;
  out.junction_rate_per_s =
      out.junction_element * out.junction_element * (8.0 * ej_ang / M_PI) * model.x_qp * gap_factor;
  out.array_rate_per_s =
      out.array_element * out.array_element * (8.0 * el_ang / M_PI) * model.x_qp * gap_factor;
  return out;
}

double shot_noise_tphi_s(double chi_ghz, double kappa_ghz, double n_th) {
  if (chi_ghz == 0.0 || n_th == 0.0) return std::numeric_limits<double>::infinity();
  double ratio = chi_ghz / kappa_ghz;
  Cplx inner = std::pow(Cplx(1.0, ratio), 2) + Cplx(0.0, 4.0 * ratio * n_th);
  double gamma = (two_pi * kappa_ghz * 1e9 / 2.0) * (std::sqrt(inner) - 1.0).real();
  return gamma > 0 ? 1.0 / gamma : std::numeric_limits<double>::infinity();
}

double purcell_t1_ms(const EigenSystem& es, const CollapseOp& collapse) {
  Label ground{std::vector<int>(es.modes.size(), 0)};
  Label excited = ground;
  excited.n.front() = 1;  // data mode is the first coordinate
  int g = es.state(ground), x = es.state(excited);
  double el = std::abs(collapse.op(g, x));
  if (el == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (el * el) * 1e-6;  // ns -> ms
}

NoiseBudgetRow aggregate(const std::string& mode, std::optional<double> t1_diel_us,
                         std::optional<double> t1_flux_us, std::optional<double> t1_qp_us,
                         std::optional<double> tphi_echo_us, std::optional<double> tphi_charge_us,
                         bool include_qp) {
  NoiseBudgetRow row;
  row.mode = mode;
  row.t1_dielectric_us = t1_diel_us;
  row.t1_flux_us = t1_flux_us;
  row.t1_quasiparticle_us = t1_qp_us;
  row.tphi_flux_echo_us = tphi_echo_us;
  row.tphi_charge_us = tphi_charge_us;
  double r1 = 0.0;
  if (t1_diel_us) r1 += 1.0 / *t1_diel_us;
  if (t1_flux_us) r1 += 1.0 / *t1_flux_us;
  if (include_qp && t1_qp_us) r1 += 1.0 / *t1_qp_us;
  double rphi = 0.0;
  if (tphi_echo_us) rphi += 1.0 / *tphi_echo_us;
  if (tphi_charge_us) rphi += 1.0 / *tphi_charge_us;
  row.t1_total_us = r1 > 0 ? 1.0 / r1 : 0.0;
  row.tphi_total_us = rphi > 0 ? 1.0 / rphi : 0.0;
  double r2 = (row.t1_total_us > 0 ? 1.0 / (2.0 * row.t1_total_us) : 0.0) +
              (row.tphi_total_us > 0 ? 1.0 / row.tphi_total_us : 0.0);
  row.t2e_us = r2 > 0 ? 1.0 / r2 : 0.0;
  return row;
}

}  // namespace armsim
