#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace stereocarto::detail {

/// Real-input FFT of a fixed power-of-two size backed by a shared FFTW plan.
/// Execution is thread-safe; instances are cheap to copy.
class RealFft {
 public:
  explicit RealFft(std::size_t size);

  std::size_t size() const { return size_; }
  std::size_t spectrum_size() const { return size_ / 2 + 1; }

  /// in.size() == size(), out.size() == spectrum_size().
  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;

  /// Inverse transform scaled by 1/size(). Clobbers `in`.
  void inverse(std::span<std::complex<double>> in, std::span<double> out) const;

 private:
  std::size_t size_;
  void* forward_plan_;
  void* inverse_plan_;
};

std::size_t next_power_of_two(std::size_t n);

}  // namespace stereocarto::detail
