#pragma once

// Seeded random streams and random matrix generators. Every trial in a sweep
// draws from its own stream derived from (seed, index), so results do not
// depend on scheduling.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "specflow/matcore.hpp"
#include "specflow/matrix.hpp"

namespace specflow {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Independent stream number `index` of a seed.
  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    return Rng(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
  }
  /// Child stream, for nested sweeps.
  Rng split(std::uint64_t index) { return stream(engine_(), index); }

  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  Complex complex_normal() { return {normal() * M_SQRT1_2, normal() * M_SQRT1_2}; }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  bool coin() { return integer(0, 1) == 1; }

 private:
  std::mt19937_64 engine_;
};

inline ComplexMatrix random_complex(Rng& rng, std::size_t rows, std::size_t cols) {
  ComplexMatrix m(rows, cols);
  for (auto& z : m.data()) z = rng.complex_normal();
  return m;
}

/// GUE-like Hermitian matrix scaled so that ||H|| is of order `scale`.
inline HermitianMatrix random_hermitian(Rng& rng, std::size_t n, double scale = 1.0) {
  const ComplexMatrix g = random_complex(rng, n, n);
  return HermitianMatrix::hermitian_part((g + g.adjoint()) * Complex(scale / (2.0 * std::sqrt(static_cast<double>(n)))));
}

/// Haar-distributed unitary from modified Gram-Schmidt on a Gaussian matrix.
inline ComplexMatrix random_unitary(Rng& rng, std::size_t n) {
  ComplexMatrix q = random_complex(rng, n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        Complex dot{};
        for (std::size_t i = 0; i < n; ++i) dot += std::conj(q(i, k)) * q(i, j);
        for (std::size_t i = 0; i < n; ++i) q(i, j) -= dot * q(i, k);
      }
    }
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) nrm += std::norm(q(i, j));
    nrm = std::sqrt(nrm);
    for (std::size_t i = 0; i < n; ++i) q(i, j) /= nrm;
  }
  return q;
}

/// U diag(spectrum) U* with Haar U.
inline HermitianMatrix random_with_spectrum(Rng& rng, std::span<const double> spectrum) {
  const ComplexMatrix u = random_unitary(rng, spectrum.size());
  return HermitianMatrix::diagonal(spectrum).conjugated_by(u);
}

/// Random spectrum with every |lambda| in [gap, hi], random signs.
inline std::vector<double> random_gapped_spectrum(Rng& rng, std::size_t n, double gap, double hi) {
  std::vector<double> s(n);
  for (auto& v : s) v = (rng.coin() ? 1.0 : -1.0) * rng.uniform(gap, hi);
  return s;
}

inline HermitianMatrix random_spd(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> s(n);
  for (auto& v : s) v = rng.uniform(lo, hi);
  return random_with_spectrum(rng, s);
}

inline Projection random_projection(Rng& rng, std::size_t n, std::size_t rank) {
  const ComplexMatrix u = random_unitary(rng, n);
  std::vector<double> d(n, 0.0);
  for (std::size_t i = 0; i < rank; ++i) d[i] = 1.0;
  return Projection(HermitianMatrix::diagonal(d).conjugated_by(u).matrix());
}

}  // namespace specflow
