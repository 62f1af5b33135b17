#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Precision-parameterized scalar/vector kernels shared by the whole solver
// stack. Every run is generic over exactly one scalar kind (float or double);
// accumulation order is fixed left-to-right so iteration histories and
// failure classification are reproducible run-to-run.

namespace jfnk {

class ContractViolation : public std::invalid_argument {
 public:
  explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

#define JFNK_REQUIRE(cond, msg) \
  do {                          \
    if (!(cond)) throw ::jfnk::ContractViolation(msg); \
  } while (0)

enum class Precision { FP32, FP64 };

template <class T>
inline constexpr T eps_mach = std::numeric_limits<T>::epsilon();

static_assert(eps_mach<float> == 0x1p-23f);
static_assert(eps_mach<double> == 0x1p-52);

template <class T>
constexpr Precision precision_of() {
  static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>,
                "runs are float or double only");
  return std::is_same_v<T, float> ? Precision::FP32 : Precision::FP64;
}

inline double eps_mach_of(Precision p) {
  return p == Precision::FP32 ? static_cast<double>(eps_mach<float>) : eps_mach<double>;
}

inline const char* to_string(Precision p) {
  return p == Precision::FP32 ? "fp32" : "fp64";
}

// The unknown of every nonlinear solve: a flat stack of field planes.
template <class T>
using StateVector = std::vector<T>;

namespace detail {

// Fixed-shape pairwise reduction: left-to-right inside 64-element leaves,
// halving recursion above. The tree depends only on the length, so results
// are bit-reproducible run to run, and the FP32 round-off growth stays
// logarithmic in n instead of linear (a linear noise floor at n ~ 10^4 sits
// above tol_Krylov = 1e-6 and masks the FD-vs-AD signal this project
// measures).
template <class T>
T dot_pairwise(const T* a, const T* b, std::size_t n) {
  if (n <= 64) {
    T acc = T(0);
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
  }
  const std::size_t half = n / 2;
  return dot_pairwise(a, b, half) + dot_pairwise(a + half, b + half, n - half);
}

}  // namespace detail

template <class T>
T dot(std::span<const T> a, std::span<const T> b) {
  JFNK_REQUIRE(a.size() == b.size(), "dot: length mismatch");
  return detail::dot_pairwise(a.data(), b.data(), a.size());
}

template <class T>
T norm2(std::span<const T> a) {
  return std::sqrt(dot(a, a));
}

template <class T>
T norm_inf(std::span<const T> a) {
  T m = T(0);
  for (const T& x : a) m = std::max(m, std::abs(x));
  return m;
}

// y += alpha * x
template <class T>
void axpy(T alpha, std::span<const T> x, std::span<T> y) {
  JFNK_REQUIRE(x.size() == y.size(), "axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

template <class T>
void scale(T alpha, std::span<T> x) {
  for (T& v : x) v *= alpha;
}

template <class T>
bool all_finite(std::span<const T> a) {
  for (const T& x : a)
    if (!std::isfinite(x)) return false;
  return true;
}

template <class T>
std::span<const T> cspan(const std::vector<T>& v) {
  return std::span<const T>(v.data(), v.size());
}

template <class T>
std::span<T> mspan(std::vector<T>& v) {
  return std::span<T>(v.data(), v.size());
}

}  // namespace jfnk
