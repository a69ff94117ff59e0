#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "miccan/complex_image.hpp"
#include "miccan/mask.hpp"

namespace miccan {

enum class Regularizer { WAVELET_L1, TV };

/// Settings for the iterative compressed-sensing reconstructions.
struct SolverConfig {
  Regularizer regularizer = Regularizer::WAVELET_L1;
  double reg_weight = 0.0;
  std::size_t max_iters = 300;
  double tol = 1e-5;  ///< stop when ‖x_k − x_{k−1}‖ / ‖x_{k−1}‖ < tol
  double step_size = 1.0;

  static SolverConfig wavelet_default();
  static SolverConfig tv_default();
  void validate() const;
  bool operator==(const SolverConfig&) const = default;
};

struct SolverTrace {
  ComplexImage image;
  std::vector<double> objective;        ///< objective of the returned iterate; entry 0 is the initial one
  std::vector<double> raw_objective;    ///< TV only: objective of every primal-dual iterate
  std::vector<double> relative_change;  ///< one entry per iteration
  std::size_t iterations = 0;
  std::size_t restarts = 0;
  bool converged = false;
};

/// Complex soft-thresholding: shrinks the modulus by t, keeps the phase.
std::complex<double> soft_threshold(std::complex<double> v, double t);
ComplexImage soft_threshold(const ComplexImage& v, double t);

/// ½‖F_u x − y‖² + λ‖Ψx‖₁ with Ψ the 3-level db4 transform.
double wavelet_l1_objective(const ComplexImage& x, const KSpaceData& y, const SamplingMask& mask, double lambda);
/// ½‖F_u x − y‖² + λ·TV(x), isotropic TV over both planes, forward differences.
double tv_objective(const ComplexImage& x, const KSpaceData& y, const SamplingMask& mask, double lambda);

/// FISTA with function-value restart; starts from `init` or the zero-filled image.
SolverTrace solve_wavelet_l1_traced(const KSpaceData& y, const SamplingMask& mask, const SolverConfig& cfg,
                                    const ComplexImage* init = nullptr);
/// Chambolle–Pock primal-dual iterations; starts from `init` or the zero-filled image.
SolverTrace solve_tv_traced(const KSpaceData& y, const SamplingMask& mask, const SolverConfig& cfg,
                            const ComplexImage* init = nullptr);

ComplexImage solve_wavelet_l1(const KSpaceData& y, const SamplingMask& mask, const SolverConfig& cfg);
ComplexImage solve_tv(const KSpaceData& y, const SamplingMask& mask, const SolverConfig& cfg);

/// Dispatches on cfg.regularizer.
ComplexImage solve_classical(const KSpaceData& y, const SamplingMask& mask, const SolverConfig& cfg);

}  // namespace miccan
