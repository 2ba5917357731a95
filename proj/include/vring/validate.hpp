#pragma once

#include <string>
#include <vector>

// Kernel oracle suite backing the `validate-kernel` subcommand: backend
// agreement for F, the F-estimate sweep with measured constants, the
// stream-function/3D Biot-Savart cross-check and the decomposition identity.

namespace vring {

struct KernelValidationOptions {
  double quad_rel_tol = 1e-12;
  // Test fixture: flips the sign of the local-induction velocity component
  // inside the cross-checks, which must make the suite fail.
  bool perturb_ul_sign = false;
};

struct KernelValidationCheck {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool passed = false;
};

struct KernelValidationReport {
  std::vector<KernelValidationCheck> checks;
  double small_s_constant = 0.0;
  double small_s_constant_tol = 0.0;
  double c0_value = 0.0;       // sup |F + (1/2) ln s| over s in [1e-8, 16]
  double c0_derivative = 0.0;  // sup |F' + 1/(2s)| / (1 + |ln s|)
  double c0_curvature = 0.0;   // sup |s^2 F''|
  bool all_passed() const;
  std::string table_text() const;
};

KernelValidationReport validate_kernel(const KernelValidationOptions& opt = {});

}  // namespace vring
