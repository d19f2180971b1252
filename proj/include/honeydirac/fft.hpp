#pragma once

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <tuple>
#include <vector>

#include "honeydirac/error.hpp"

namespace honeydirac {

using cplx = std::complex<double>;

// Allocator backed by fftw_malloc so every buffer shares FFTW's alignment and
// cached plans can be executed on any Field2D.
template <class T>
struct FftwAllocator {
  using value_type = T;
  FftwAllocator() = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U>&) noexcept {}
  T* allocate(std::size_t n) {
    if (n == 0) return nullptr;
    void* p = fftw_malloc(n * sizeof(T));
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { fftw_free(p); }
  template <class U>
  bool operator==(const FftwAllocator<U>&) const noexcept { return true; }
};

template <class T>
using aligned_vector = std::vector<T, FftwAllocator<T>>;

// Row-major 2D array; index i runs along x1 (slow), j along x2 (fast).
template <class T>
class Field2D {
 public:
  Field2D() = default;
  Field2D(std::size_t nx, std::size_t ny, T value = T{}) : nx_(nx), ny_(ny), data_(nx * ny, value) {}

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * ny_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * ny_ + j]; }
  T& operator[](std::size_t k) { return data_[k]; }
  const T& operator[](std::size_t k) const { return data_[k]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  void fill(const T& v) { std::fill(data_.begin(), data_.end(), v); }
  bool same_shape(const Field2D& o) const { return nx_ == o.nx_ && ny_ == o.ny_; }

  Field2D& operator+=(const Field2D& o) {
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Field2D& operator-=(const Field2D& o) {
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  template <class S>
  Field2D& operator*=(const S& s) {
    for (auto& v : data_) v *= s;
    return *this;
  }

 private:
  std::size_t nx_ = 0, ny_ = 0;
  aligned_vector<T> data_;
};

using ComplexField = Field2D<cplx>;
using RealField = Field2D<double>;

namespace detail {

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int nx, int ny, int sign, bool in_place) {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_tuple(nx, ny, sign, in_place);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    // FFTW_ESTIMATE never touches the arrays, so scratch buffers suffice.
    auto* a = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * nx * ny));
    auto* b = in_place ? a : static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * nx * ny));
    fftw_plan p = fftw_plan_dft_2d(nx, ny, a, b, sign, FFTW_ESTIMATE);
    if (b != a) fftw_free(b);
    fftw_free(a);
    if (!p) fail(ErrorCode::solver_failure, "FFTW could not create a plan");
    plans_.emplace(key, p);
    return p;
  }

  ~PlanCache() {
    for (auto& kv : plans_) fftw_destroy_plan(kv.second);
  }

 private:
  std::mutex mu_;
  std::map<std::tuple<int, int, int, bool>, fftw_plan> plans_;
};

inline void execute(const ComplexField& in, ComplexField& out, int sign) {
  const bool in_place = in.data() == out.data();
  fftw_plan p = PlanCache::instance().get(int(in.nx()), int(in.ny()), sign, in_place);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace detail

// Forward transform normalised to Fourier-series coefficients:
// f(x) = sum_n fhat(n) exp(i 2 pi n.x / L).
inline void fft_forward(const ComplexField& in, ComplexField& out) {
  if (!out.same_shape(in)) out = ComplexField(in.nx(), in.ny());
  detail::execute(in, out, FFTW_FORWARD);
  out *= 1.0 / double(in.size());
}

inline void fft_backward(const ComplexField& in, ComplexField& out) {
  if (!out.same_shape(in)) out = ComplexField(in.nx(), in.ny());
  detail::execute(in, out, FFTW_BACKWARD);
}

inline ComplexField fft_forward(const ComplexField& in) {
  ComplexField out(in.nx(), in.ny());
  fft_forward(in, out);
  return out;
}

inline ComplexField fft_backward(const ComplexField& in) {
  ComplexField out(in.nx(), in.ny());
  fft_backward(in, out);
  return out;
}

// Signed integer frequency of FFT slot i on an n-point axis; the Nyquist slot
// of an even axis maps to -n/2.
inline long signed_index(std::size_t i, std::size_t n) {
  return (i < (n + 1) / 2) ? long(i) : long(i) - long(n);
}

inline bool is_nyquist(std::size_t i, std::size_t n) { return n % 2 == 0 && i == n / 2; }

// FFT slot of a signed frequency, wrapping modulo n.
inline std::size_t slot_of(long k, std::size_t n) {
  long r = k % long(n);
  if (r < 0) r += long(n);
  return std::size_t(r);
}

// Smallest integer >= n whose only prime factors are 2, 3, 5, 7.
inline std::size_t fft_friendly(std::size_t n) {
  for (std::size_t m = std::max<std::size_t>(n, 1);; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

}  // namespace honeydirac
