#include <doctest.h>

#include <cmath>

#include "armsim/noise.hpp"
#include "armsim/presets.hpp"
#include "armsim/units.hpp"

using namespace armsim;
using units::two_pi;

namespace {

// Single grounded LC mode pushed through the full pipeline so the dielectric
// machinery sees a real circuit.
struct SingleLc {
  TransformedCircuit tc;
  EigenSystem es;
};

SingleLc make_lc(double c_fF, double el_ghz) {
  CircuitSpec spec;
  spec.nodes = {"a"};
  spec.ground_caps_fF = {{0, c_fF}};
  spec.inductors = {{{0, -1}, el_ghz, 0.0, false}};
  SingleLc out;
  out.tc = transform_variables(spec, TransformSpec::identity(1), ParasiticRules::none());
  double ec = out.tc.ec_prime_ghz(0, 0);
  ModeBasis basis = default_basis(out.tc.coordinates[0], ec, 30);
  out.es = diagonalize_truncate(build_bare_mode(out.tc.coordinates[0], ec, basis), 0, 8);
  out.es.modes = {0};
  return out;
}

}  // namespace

TEST_CASE("dielectric rate of a single LC matches (w/Q) coth(hw/2kT)") {
  SingleLc lc = make_lc(100.0, 40.0);
  NoiseModel model;
  model.q_diel = 2e6;
  model.t_diel_K = 0.020;
  Label g{{0}}, x{{1}};
  DielectricBreakdown breakdown = dielectric_t1(lc.es, lc.tc, g, x, model);
  double omega = two_pi * lc.es.energies[1] * 1e9;
  double arg = units::hbar_Js * omega / (2.0 * units::kB_JperK * model.t_diel_K);
  double expected = omega / model.q_diel / std::tanh(arg);
  CHECK(breakdown.total_rate_per_s == doctest::Approx(expected).epsilon(1e-3));

  NoiseModel ideal = model;
  ideal.q_diel = 1e308;
  CHECK(dielectric_t1(lc.es, lc.tc, g, x, ideal).total_rate_per_s < 1e-290);

  // Rates scale as 1/Q.
  NoiseModel half = model;
  half.q_diel = 2.0 * model.q_diel;
  CHECK(dielectric_t1(lc.es, lc.tc, g, x, half).total_rate_per_s ==
        doctest::Approx(0.5 * breakdown.total_rate_per_s).epsilon(1e-9));
}

TEST_CASE("dielectric detailed balance suppresses the heating rate") {
  // The up/down ratio is e^{-hw/kT}; at 20 mK and ~6 GHz it is far below 1e-3.
  SingleLc lc = make_lc(100.0, 40.0);
  double omega = two_pi * lc.es.energies[1] * 1e9;
  double x = units::hbar_Js * omega / (units::kB_JperK * 0.020);
  double coth = 1.0 / std::tanh(x / 2.0);
  double ratio = std::abs(1.0 - coth) / (coth + 1.0);
  CHECK(ratio == doctest::Approx(std::exp(-x)).epsilon(1e-6));
  CHECK(ratio < 1e-3);
}

TEST_CASE("flux-noise relaxation scales as the noise power") {
  Netlist nl = presets::readout3();
  TransformedCircuit tc = presets::transformed(nl, presets::readout3_transform());
  EigenSystem es = run_hierarchy(tc, presets::readout3_plan());
  NoiseModel model;
  Label g{{0, 0, 0}}, x{{1, 0, 0}};
  double base = flux_t1_rate_per_s(es, "phi0", 26.2, g, x, model);
  CHECK(base > 0.0);
  NoiseModel loud = model;
  loud.a_phi_phi0 *= 2.0;
  CHECK(flux_t1_rate_per_s(es, "phi0", 26.2, g, x, loud) ==
        doctest::Approx(4.0 * base).epsilon(1e-12));
  NoiseModel quiet = model;
  quiet.a_phi_phi0 = 0.0;
  CHECK(flux_t1_rate_per_s(es, "phi0", 26.2, g, x, quiet) == 0.0);
}

TEST_CASE("flat frequency curve never dephases; curvature does, reproducibly") {
  const double pi = 3.14159265358979323846;
  std::vector<double> phi, flat, curved;
  for (int i = 0; i < 21; ++i) {
    double p = pi + (i - 10) * 0.004 * two_pi;  // +-0.04 Phi_0
    phi.push_back(p);
    flat.push_back(1.6);
    double d = (p - pi);
    curved.push_back(1.6 + 0.5 * 3000.0 * d * d);  // GHz, quadratic sweet spot
  }
  NoiseModel model;
  FluxEchoConfig cfg;
  cfg.record_s = 2.0;
  cfg.seed = 5;
  for (double tau = 1e-5; tau <= 2e-2; tau *= 1.5) cfg.tau_s.push_back(tau);
  FluxEchoResult none = flux_echo_tphi(phi, flat, pi, model, cfg);
  CHECK(std::isinf(none.tphi_s));
  for (double c : none.coherence) CHECK(c == doctest::Approx(1.0).epsilon(1e-12));

  FluxEchoResult a = flux_echo_tphi(phi, curved, pi, model, cfg);
  FluxEchoConfig cfg2 = cfg;
  cfg2.seed = 17;
  FluxEchoResult b = flux_echo_tphi(phi, curved, pi, model, cfg2);
  REQUIRE(std::isfinite(a.tphi_s));
  REQUIRE(std::isfinite(b.tphi_s));
  CHECK(a.tphi_s == doctest::Approx(b.tphi_s).epsilon(0.20));

  // Louder noise dephases faster.
  NoiseModel loud = model;
  loud.a_phi_phi0 *= 2.0;
  FluxEchoResult fast = flux_echo_tphi(phi, curved, pi, loud, cfg);
  CHECK(fast.tphi_s < a.tphi_s);
}

TEST_CASE("charge dispersion fit and the A/pi dephasing rate") {
  std::vector<double> ng, w;
  for (int i = 0; i <= 8; ++i) {
    double x = 0.5 * i / 8.0;
    ng.push_back(x);
    w.push_back(5.0 + 1e-6 * std::cos(two_pi * x));  // A/2pi = 1 kHz
  }
  ChargeDispersion fit = charge_dephasing(ng, w);
  CHECK(fit.amplitude_ghz == doctest::Approx(1e-6).epsilon(1e-9));
  CHECK(fit.tphi_s() == doctest::Approx(0.5e-3).epsilon(1e-9));

  std::vector<double> flat(ng.size(), 5.0);
  ChargeDispersion zero = charge_dephasing(ng, flat);
  CHECK(std::abs(zero.amplitude_ghz) < 1e-15);
  CHECK(zero.rate_per_s < 1e-3);

  // A clearly non-sinusoidal sweep is rejected.
  std::vector<double> bad = w;
  bad[3] += 5e-6;
  CHECK_THROWS_AS(charge_dephasing(ng, bad), NoiseError);
}

TEST_CASE("quasiparticle rates scale with x_qp and vanish at the sweet spot") {
  Netlist nl = presets::readout3();
  TransformedCircuit tc = presets::transformed(nl, presets::readout3_transform());
  EigenSystem es = run_hierarchy(tc, presets::readout3_plan());
  NoiseModel model;
  Label g{{0, 0, 0}}, x{{1, 0, 0}};
  QuasiparticleResult qp =
      quasiparticle_t1(es, "sinhalf0", "phi0", 38.5, 26.2, g, x, model);
  CHECK(qp.array_rate_per_s > 0.0);
  // At half-quantum bias the main-junction matrix element vanishes by parity.
  CHECK(qp.junction_element < 1e-6 * qp.array_element);

  NoiseModel doubled = model;
  doubled.x_qp *= 2.0;
  QuasiparticleResult qp2 =
      quasiparticle_t1(es, "sinhalf0", "phi0", 38.5, 26.2, g, x, doubled);
  CHECK(qp2.array_rate_per_s == doctest::Approx(2.0 * qp.array_rate_per_s).epsilon(1e-12));

  NoiseModel clean = model;
  clean.x_qp = 0.0;
  CHECK(quasiparticle_t1(es, "sinhalf0", "phi0", 38.5, 26.2, g, x, clean).array_rate_per_s ==
        0.0);
}

TEST_CASE("shot-noise dephasing vanishes without photons or coupling") {
  CHECK(std::isinf(shot_noise_tphi_s(0.01, 0.1, 0.0)));
  CHECK(std::isinf(shot_noise_tphi_s(0.0, 0.1, 1e-5)));
  double n_th = units::thermal_occupation(10.81, 0.045);
  CHECK(n_th == doctest::Approx(9.85e-6).epsilon(2e-3));
  double tphi = shot_noise_tphi_s(0.01, 0.1, n_th);
  CHECK(tphi > 1e-3);
  CHECK(tphi < 1.0);
  // More thermal photons dephase faster.
  CHECK(shot_noise_tphi_s(0.01, 0.1, 2.0 * n_th) < tphi);
}

TEST_CASE("aggregate forms harmonic totals and excludes quasiparticles") {
  NoiseBudgetRow row = aggregate("data 1", 421.0, 1210.0, 540.0, 1640.0, 4760.0);
  CHECK(row.t1_total_us == doctest::Approx(312.3).epsilon(2e-3));
  CHECK(row.tphi_total_us == doctest::Approx(1219.7).epsilon(2e-3));
  CHECK(row.t2e_us == doctest::Approx(413.0).epsilon(5e-3));
  CHECK(row.t1_total_us <= 421.0);
  CHECK(row.t1_total_us <= 1210.0);

  NoiseBudgetRow single = aggregate("x", 100.0, std::nullopt, std::nullopt, std::nullopt,
                                    std::nullopt);
  CHECK(single.t1_total_us == doctest::Approx(100.0));
}
