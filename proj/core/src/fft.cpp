#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

#include "stereocarto/error.hpp"

namespace stereocarto::detail {
namespace {

struct PlanPair {
  fftw_plan forward;
  fftw_plan inverse;
};

// FFTW planning is not thread-safe; plans live for the process lifetime.
PlanPair plans_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(n); it != cache.end()) return it->second;

  double* real = fftw_alloc_real(n);
  fftw_complex* spec = fftw_alloc_complex(n / 2 + 1);
  const int size = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair pair{fftw_plan_dft_r2c_1d(size, real, spec, flags),
                fftw_plan_dft_c2r_1d(size, spec, real, flags | FFTW_DESTROY_INPUT)};
  fftw_free(real);
  fftw_free(spec);
  if (pair.forward == nullptr || pair.inverse == nullptr) throw Error("FFTW planning failed");
  cache.emplace(n, pair);
  return pair;
}

}  // namespace

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

RealFft::RealFft(std::size_t size) : size_(size) {
  if (size < 2 || (size & (size - 1)) != 0) throw Error("FFT size must be a power of two >= 2");
  const PlanPair pair = plans_for(size);
  forward_plan_ = pair.forward;
  inverse_plan_ = pair.inverse;
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  if (in.size() != size_ || out.size() != spectrum_size()) throw Error("RealFft::forward: size mismatch");
  // r2c does not modify its input with the default flags.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::inverse(std::span<std::complex<double>> in, std::span<double> out) const {
  if (in.size() != spectrum_size() || out.size() != size_) throw Error("RealFft::inverse: size mismatch");
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(in.data()), out.data());
  const double scale = 1.0 / static_cast<double>(size_);
  for (double& v : out) v *= scale;
}

}  // namespace stereocarto::detail
