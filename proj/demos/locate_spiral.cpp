// Localizes the (12, 10) source of the spiral scene and prints the CRLB at 20 dB.

#include <cmath>
#include <cstdio>

#include "wavelock/harness.hpp"

int main() {
  using namespace wavelock;
  const Scenario sc = example1_scenario(Example1Variant::single_at_12_10);
  const ExperimentResult r = localize(sc, false, default_threads());
  std::printf("estimate (%.4f, %.4f)  error %.4f m  cost %.3e  LMA %d (%s)\n", r.estimated[0].x(),
              r.estimated[0].y(), r.errors[0], r.cost, r.lma_iterations, r.lma_status.c_str());

  const CrlbReport cr = crlb_report(sc, FisherConvention::circular);
  std::printf("sqrt CRLB x %.4f m  y %.4f m\n", std::sqrt(cr.bounds[0].var_x), std::sqrt(cr.bounds[0].var_y));
  return 0;
}
