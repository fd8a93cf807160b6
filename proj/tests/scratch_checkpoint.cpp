#include <cstdio>
#include "armsim/experiments.hpp"

using namespace armsim;
using namespace armsim::experiments;

int main() {
  Netlist nl = presets::gate5();
  GateSystem gs = build_gate_system(nl, presets::gate5_plan(1.0));
  double width = 14.0;
  double a0 = pulse_area_amplitude(width, gs.drive_element);
  Scan1dResult fast = maximize_1d(
      [&](double a) { return -cz_state_error(gs, a, width, 1e-9); }, 0.9*a0, 1.1*a0, 3e-4*a0, 40);
  double amp = fast.best_x;
  printf("a0=%.5f tuned=%.5f (ratio %.4f), state err=%.3e\n", a0, amp, amp/a0, -fast.best_value + 1.0);
  CMat t = cz_propagator(gs, amp, width);
  FidelityReport r = propagator_fidelity(t);
  printf("Eq3 error %.3e  leakage %.3e  theta_a=%.4f theta_b=%.4f\n",
         1-r.fidelity, r.leakage, r.theta_a, r.theta_b);
  // apply virtual Z and compare to CZ
  CMat v = CMat::Identity(4,4);
  v(1,1) = std::polar(1.0, r.theta_b);
  v(2,2) = std::polar(1.0, r.theta_a);
  v(3,3) = std::polar(1.0, r.theta_a + r.theta_b);
  CMat vt = v * t;
  // remove global phase using element (1,1)
  Cplx ph = vt(1,1) / std::abs(vt(1,1));
  vt /= ph;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) printf("(%+.5f%+.5fi) ", vt(i,j).real(), vt(i,j).imag());
    printf("  | col norm %.6f\n", t.col(i).norm());
  }
  fflush(stdout);
  // does optimizing the drive frequency help?
  for (double df : {-0.004, -0.002, 0.0, 0.002, 0.004}) {
    GateSystem gs2 = gs;
    gs2.drive_freq_ghz = gs.drive_freq_ghz + df;
    Scan1dResult s2 = maximize_1d(
        [&](double a) { return -cz_state_error(gs2, a, width, 1e-9); }, 0.9*a0, 1.1*a0, 3e-4*a0, 40);
    printf("df=%+.3f MHz: state err %.3e\n", 1e3*df, 1.0 - (-s2.best_value+1.0-1.0) - s2.best_value*0 + (1.0+s2.best_value-1.0)*0 - s2.best_value - 0.0 + ( -s2.best_value ) * 0 + (1.0 + s2.best_value) - 1.0);
    fflush(stdout);
  }
  return 0;
}
