#include "miccan/solvers.hpp"

#include <cmath>
#include <limits>

#include "miccan/fourier.hpp"
#include "miccan/sampling.hpp"
#include "miccan/wavelet.hpp"

namespace miccan {

SolverConfig SolverConfig::wavelet_default() {
  SolverConfig c;
  c.regularizer = Regularizer::WAVELET_L1;
  c.reg_weight = 0.001;
  c.max_iters = 1000;
  return c;
}

SolverConfig SolverConfig::tv_default() {
  SolverConfig c;
  c.regularizer = Regularizer::TV;
  c.reg_weight = 0.03;
  c.max_iters = 1000;
  return c;
}

void SolverConfig::validate() const {
  if (!(reg_weight >= 0.0) || !std::isfinite(reg_weight)) throw InvalidConfig("reg_weight must be non-negative");
  if (max_iters < 1) throw InvalidConfig("max_iters must be at least 1");
  if (!(tol > 0.0)) throw InvalidConfig("tol must be positive");
  if (!(step_size > 0.0 && step_size <= 1.0)) throw InvalidConfig("step_size must lie in (0, 1]");
}

std::complex<double> soft_threshold(std::complex<double> v, double t) {
  const double m = std::abs(v);
  if (m <= t) return {0.0, 0.0};
  return v * ((m - t) / m);
}

ComplexImage soft_threshold(const ComplexImage& v, double t) {
  ComplexImage out(v.height(), v.width());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const auto s = soft_threshold(std::complex<double>(v.real()[k], v.imag()[k]), t);
    out.real()[k] = s.real();
    out.imag()[k] = s.imag();
  }
  return out;
}

namespace {

void check_problem(const KSpaceData& y, const SamplingMask& mask) {
  if (y.height() != mask.height() || y.width() != mask.width())
    throw InvalidInput("measurement and mask shapes differ");
  if (!y.all_finite()) throw InvalidInput("measurement contains non-finite values");
}

// F_u x − y restricted to the sampled set.
KSpaceData residual(const ComplexImage& x, const KSpaceData& y, const SamplingMask& mask) {
  KSpaceData r = fft2c(x);
  r -= y;
  apply_mask(r, mask);
  return r;
}

double data_term(const ComplexImage& x, const KSpaceData& y, const SamplingMask& mask) {
  const double n = l2_norm(residual(x, y, mask));
  return 0.5 * n * n;
}

double l1_modulus(const ComplexImage& c) {
  double acc = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) acc += std::hypot(c.real()[k], c.imag()[k]);
  return acc;
}

const Db4Wavelet2D& wavelet() {
  static const Db4Wavelet2D w(3);
  return w;
}

double relative_change(const ComplexImage& next, const ComplexImage& prev) {
  const double denom = l2_norm(prev);
  const double diff = l2_norm(next - prev);
  if (denom == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / denom;
}

void check_finite(double objective, std::size_t iter) {
  if (!std::isfinite(objective))
    throw NumericalFailure("solver objective became non-finite at iteration " + std::to_string(iter));
}

// Forward differences with a zero difference past the last row/column.
struct Gradient {
  ComplexImage dx;
  ComplexImage dy;
};

Gradient grad(const ComplexImage& x) {
  const std::size_t h = x.height(), w = x.width();
  Gradient g{ComplexImage(h, w), ComplexImage(h, w)};
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      const std::size_t k = i * w + j;
      if (j + 1 < w) {
        g.dx.real()[k] = x.real()[k + 1] - x.real()[k];
        g.dx.imag()[k] = x.imag()[k + 1] - x.imag()[k];
      }
      if (i + 1 < h) {
        g.dy.real()[k] = x.real()[k + w] - x.real()[k];
        g.dy.imag()[k] = x.imag()[k + w] - x.imag()[k];
      }
    }
  return g;
}

// Negative adjoint of grad.
ComplexImage divergence(const Gradient& p) {
  const std::size_t h = p.dx.height(), w = p.dx.width();
  ComplexImage d(h, w);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      const std::size_t k = i * w + j;
      for (int plane = 0; plane < 2; ++plane) {
        const auto& px = plane == 0 ? p.dx.real() : p.dx.imag();
        const auto& py = plane == 0 ? p.dy.real() : p.dy.imag();
        double v = 0.0;
        if (j + 1 < w) v += px[k];
        if (j > 0) v -= px[k - 1];
        if (i + 1 < h) v += py[k];
        if (i > 0) v -= py[k - w];
        (plane == 0 ? d.real() : d.imag())[k] = v;
      }
    }
  return d;
}

double total_variation(const ComplexImage& x) {
  const Gradient g = grad(x);
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double a = g.dx.real()[k], b = g.dx.imag()[k], c = g.dy.real()[k], d = g.dy.imag()[k];
    acc += std::sqrt(a * a + b * b + c * c + d * d);
  }
  return acc;
}

}  // namespace

double wavelet_l1_objective(const ComplexImage& x, const KSpaceData& y, const SamplingMask& mask, double lambda) {
  return data_term(x, y, mask) + lambda * l1_modulus(wavelet().forward(x));
}

double tv_objective(const ComplexImage& x, const KSpaceData& y, const SamplingMask& mask, double lambda) {
  return data_term(x, y, mask) + lambda * total_variation(x);
}

SolverTrace solve_wavelet_l1_traced(const KSpaceData& y, const SamplingMask& mask, const SolverConfig& cfg,
                                    const ComplexImage* init) {
  cfg.validate();
  check_problem(y, mask);
  const auto& psi = wavelet();
  psi.check_size(y.height(), y.width());
  const double lambda = cfg.reg_weight;
  const double step = cfg.step_size;

  auto prox_grad = [&](const ComplexImage& z) {
    ComplexImage v = z - step * ifft2c(residual(z, y, mask));
    return psi.inverse(soft_threshold(psi.forward(v), step * lambda));
  };

  SolverTrace tr;
  ComplexImage x = init ? *init : zero_fill(y);
  if (!x.same_shape(y)) throw InvalidInput("initial image shape differs from measurement");
  double obj = wavelet_l1_objective(x, y, mask, lambda);
  check_finite(obj, 0);
  tr.objective.push_back(obj);

  ComplexImage z = x;
  double t = 1.0;
  for (std::size_t k = 1; k <= cfg.max_iters; ++k) {
    ComplexImage cand = prox_grad(z);
    double cand_obj = wavelet_l1_objective(cand, y, mask, lambda);
    if (cand_obj > obj) {
      // Momentum overshot: restart from a plain proximal-gradient step.
      t = 1.0;
      cand = prox_grad(x);
      cand_obj = wavelet_l1_objective(cand, y, mask, lambda);
      ++tr.restarts;
    }
    check_finite(cand_obj, k);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = cand;
    z += ((t - 1.0) / t_next) * (cand - x);
    t = t_next;

    const double rel = relative_change(cand, x);
    x = std::move(cand);
    obj = cand_obj;
    tr.objective.push_back(obj);
    tr.relative_change.push_back(rel);
    tr.iterations = k;
    if (rel < cfg.tol) {
      tr.converged = true;
      break;
    }
  }
  tr.image = std::move(x);
  return tr;
}

SolverTrace solve_tv_traced(const KSpaceData& y, const SamplingMask& mask, const SolverConfig& cfg,
                            const ComplexImage* init) {
  cfg.validate();
  check_problem(y, mask);
  const double lambda = cfg.reg_weight;
  // ‖grad‖² ≤ 8 on a 2-D grid; σ·τ·8 < 1.
  const double tau = 0.99 * cfg.step_size / std::sqrt(8.0);
  const double sigma = tau;
  const std::size_t h = y.height(), w = y.width();

  SolverTrace tr;
  ComplexImage x = init ? *init : zero_fill(y);
  if (!x.same_shape(y)) throw InvalidInput("initial image shape differs from measurement");
  double obj = tv_objective(x, y, mask, lambda);
  check_finite(obj, 0);
  tr.objective.push_back(obj);
  tr.raw_objective.push_back(obj);
  ComplexImage best = x;
  double best_obj = obj;

  Gradient p{ComplexImage(h, w), ComplexImage(h, w)};
  ComplexImage x_bar = x;
  const auto& grid = mask.grid();
  for (std::size_t k = 1; k <= cfg.max_iters; ++k) {
    const Gradient gx = grad(x_bar);
    for (std::size_t i = 0; i < x.size(); ++i) {
      double a = p.dx.real()[i] + sigma * gx.dx.real()[i];
      double b = p.dx.imag()[i] + sigma * gx.dx.imag()[i];
      double c = p.dy.real()[i] + sigma * gx.dy.real()[i];
      double d = p.dy.imag()[i] + sigma * gx.dy.imag()[i];
      const double n = std::sqrt(a * a + b * b + c * c + d * d);
      const double scale = n > lambda ? (lambda > 0.0 ? lambda / n : 0.0) : 1.0;
      p.dx.real()[i] = a * scale;
      p.dx.imag()[i] = b * scale;
      p.dy.real()[i] = c * scale;
      p.dy.imag()[i] = d * scale;
    }

    ComplexImage v = x + tau * divergence(p);
    KSpaceData spec = fft2c(v);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!grid[i]) continue;
      spec.real()[i] = (spec.real()[i] + tau * y.real()[i]) / (1.0 + tau);
      spec.imag()[i] = (spec.imag()[i] + tau * y.imag()[i]) / (1.0 + tau);
    }
    ComplexImage x_next = ifft2c(spec);

    x_bar = 2.0 * x_next - x;
    const double rel = relative_change(x_next, x);
    x = std::move(x_next);
    obj = tv_objective(x, y, mask, lambda);
    check_finite(obj, k);
    tr.raw_objective.push_back(obj);
    // Primal-dual steps are not a descent method; keep the best iterate seen.
    if (obj <= best_obj) {
      best = x;
      best_obj = obj;
    }
    tr.objective.push_back(best_obj);
    tr.relative_change.push_back(rel);
    tr.iterations = k;
    if (rel < cfg.tol) {
      tr.converged = true;
      break;
    }
  }
  tr.image = std::move(best);
  return tr;
}

ComplexImage solve_wavelet_l1(const KSpaceData& y, const SamplingMask& mask, const SolverConfig& cfg) {
  return solve_wavelet_l1_traced(y, mask, cfg).image;
}

ComplexImage solve_tv(const KSpaceData& y, const SamplingMask& mask, const SolverConfig& cfg) {
  return solve_tv_traced(y, mask, cfg).image;
}

ComplexImage solve_classical(const KSpaceData& y, const SamplingMask& mask, const SolverConfig& cfg) {
  return cfg.regularizer == Regularizer::TV ? solve_tv(y, mask, cfg) : solve_wavelet_l1(y, mask, cfg);
}

}  // namespace miccan
