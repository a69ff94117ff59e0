#include "miccan/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace miccan {
namespace {

using cd = std::complex<double>;

// One in-place FFTW plan per (shape, direction), built on first use. Planning
// is not thread-safe in FFTW, execution on distinct plans is.
class Plan {
 public:
  Plan(std::size_t h, std::size_t w, int sign) : size_(h * w) {
    buf_ = fftw_alloc_complex(size_);
    if (!buf_) throw NumericalFailure("FFT buffer allocation failed");
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_2d(static_cast<int>(h), static_cast<int>(w), buf_, buf_, sign, FFTW_ESTIMATE);
    if (!plan_) {
      fftw_free(buf_);
      throw NumericalFailure("FFTW could not build a plan");
    }
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(buf_);
  }

  cd* data() noexcept { return reinterpret_cast<cd*>(buf_); }
  void execute() noexcept { fftw_execute(plan_); }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }
  std::size_t size_;
  fftw_complex* buf_ = nullptr;
  fftw_plan plan_ = nullptr;
};

Plan& plan_for(std::size_t h, std::size_t w, int sign) {
  thread_local std::map<std::tuple<std::size_t, std::size_t, int>, std::unique_ptr<Plan>> cache;
  auto& slot = cache[{h, w, sign}];
  if (!slot) slot = std::make_unique<Plan>(h, w, sign);
  return *slot;
}

template <class Out, class In>
Out centered_transform(const In& in, int sign) {
  if (!in.all_finite()) throw InvalidInput("Fourier transform input contains non-finite values");
  const std::size_t h = in.height();
  const std::size_t w = in.width();
  const std::size_t sh = h / 2;
  const std::size_t sw = w / 2;

  Plan& plan = plan_for(h, w, sign);
  cd* buf = plan.data();
  for (std::size_t i = 0; i < h; ++i) {
    const std::size_t si = (i + sh) % h;
    for (std::size_t j = 0; j < w; ++j) {
      const std::size_t k = si * w + (j + sw) % w;
      buf[i * w + j] = {in.real()[k], in.imag()[k]};
    }
  }

  plan.execute();

  const double scale = 1.0 / std::sqrt(static_cast<double>(h * w));
  Out out(h, w);
  for (std::size_t i = 0; i < h; ++i) {
    const std::size_t oi = (i + sh) % h;
    for (std::size_t j = 0; j < w; ++j) {
      const std::size_t k = oi * w + (j + sw) % w;
      const cd v = buf[i * w + j] * scale;
      out.real()[k] = v.real();
      out.imag()[k] = v.imag();
    }
  }
  return out;
}

}  // namespace

KSpaceData fft2c(const ComplexImage& image) { return centered_transform<KSpaceData>(image, FFTW_FORWARD); }

ComplexImage ifft2c(const KSpaceData& kspace) { return centered_transform<ComplexImage>(kspace, FFTW_BACKWARD); }

void apply_mask(KSpaceData& kspace, const SamplingMask& mask) {
  if (kspace.height() != mask.height() || kspace.width() != mask.width())
    throw InvalidInput("mask shape does not match k-space shape");
  const auto& grid = mask.grid();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!grid[k]) {
      kspace.real()[k] = 0.0;
      kspace.imag()[k] = 0.0;
    }
  }
}

KSpaceData forward_undersampled(const ComplexImage& image, const SamplingMask& mask) {
  if (image.height() != mask.height() || image.width() != mask.width())
    throw InvalidInput("mask shape does not match image shape");
  KSpaceData k = fft2c(image);
  apply_mask(k, mask);
  return k;
}

}  // namespace miccan
