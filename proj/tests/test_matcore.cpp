#include <gtest/gtest.h>

#include <cmath>

#include "specflow/matcore.hpp"
#include "specflow/random.hpp"

using namespace specflow;

namespace {

// Independent oracle: power iteration on A*A.
double power_iteration_norm(const ComplexMatrix& a, Rng& rng) {
  ComplexMatrix x = random_complex(rng, a.cols(), 1);
  const ComplexMatrix g = a.adjoint() * a;
  double lambda = 0.0;
  for (int it = 0; it < 5000; ++it) {
    ComplexMatrix y = g * x;
    const double nrm = y.frobenius();
    if (nrm == 0.0) return 0.0;
    const double next = nrm / x.frobenius();
    x = y * Complex(1.0 / nrm);
    if (std::abs(next - lambda) < 1e-15 * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(lambda);
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) { return (a - b).max_abs(); }

}  // namespace

TEST(Eigh, DiagonalIsSorted) {
  const auto e = eigh(HermitianMatrix::diagonal({3.0, 1.0, 2.0}));
  ASSERT_EQ(e.values.size(), 3u);
  EXPECT_DOUBLE_EQ(e.values[0], 1.0);
  EXPECT_DOUBLE_EQ(e.values[1], 2.0);
  EXPECT_DOUBLE_EQ(e.values[2], 3.0);
}

TEST(Eigh, IdentityHasUnitEigenvalues) {
  const auto e = eigh(HermitianMatrix::identity(2));
  EXPECT_DOUBLE_EQ(e.values[0], 1.0);
  EXPECT_DOUBLE_EQ(e.values[1], 1.0);
  EXPECT_LE(max_abs_diff(e.vectors.adjoint() * e.vectors, ComplexMatrix::identity(2)), 1e-15);
}

TEST(Eigh, ReconstructsRandomInputs) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng rng = Rng::stream(7, s);
    const std::size_t n = 1 + s % 16;
    const HermitianMatrix h = random_hermitian(rng, n, 1.0 + static_cast<double>(s));
    const auto e = eigh(h);
    for (std::size_t k = 1; k < n; ++k) EXPECT_LE(e.values[k - 1], e.values[k]);
    const ComplexMatrix recon = reassemble(e, e.values).matrix();
    EXPECT_LE(op_norm(recon - h.matrix()), 1e-10 * (1.0 + op_norm(h)));
    EXPECT_LE(op_norm(e.vectors.adjoint() * e.vectors - ComplexMatrix::identity(n)), 1e-10);
  }
}

TEST(Eigh, DeterministicForFixedInput) {
  Rng rng(11);
  const HermitianMatrix h = random_hermitian(rng, 9);
  const auto a = eigh(h);
  const auto b = eigh(h);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(max_abs_diff(a.vectors, b.vectors), 0.0);
}

TEST(Eigh, RejectsNonHermitianInput) {
  ComplexMatrix m{{1.0, 2.0}, {3.0, 1.0}};
  try {
    HermitianMatrix h(m);
    FAIL() << "expected rejection";
  } catch (const NonHermitianError& e) {
    EXPECT_NEAR(e.defect(), 1.0, 1e-15);
  }
}

TEST(ApplyFunction, IdentityAndSquare) {
  Rng rng(3);
  const HermitianMatrix h = random_hermitian(rng, 6);
  EXPECT_LE(max_abs_diff(apply_function(h, [](double x) { return x; }).matrix(), h.matrix()), 1e-12);
  const auto sq = apply_function(HermitianMatrix::diagonal({1.0, 2.0}), [](double x) { return x * x; });
  EXPECT_NEAR(sq(0, 0).real(), 1.0, 1e-15);
  EXPECT_NEAR(sq(1, 1).real(), 4.0, 1e-15);
  EXPECT_EQ(std::abs(sq(0, 1)), 0.0);
}

TEST(ApplyFunction, Indicator) {
  const auto p = apply_function(HermitianMatrix::diagonal({-1.0, 2.0}), [](double x) { return x >= 0 ? 1.0 : 0.0; });
  EXPECT_EQ(p(0, 0).real(), 0.0);
  EXPECT_EQ(p(1, 1).real(), 1.0);
}

TEST(ApplyFunction, HomomorphismForPolynomials) {
  auto f = [](double x) { return 1.0 - 2.0 * x + x * x * x; };
  auto g = [](double x) { return 0.5 + x * x; };
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng = Rng::stream(21, s);
    const HermitianMatrix h = random_hermitian(rng, 2 + s % 8, 2.0);
    const auto e = eigh(h);
    const double scale = std::pow(1.0 + e.max_abs(), 5);
    const auto fg = apply_function(e, [&](double x) { return f(x) * g(x); });
    const auto prod = apply_function(e, f).matrix() * apply_function(e, g).matrix();
    EXPECT_LE(op_norm(fg.matrix() - prod), 1e-9 * scale);
    // f(H) commutes with H
    const auto fh = apply_function(e, f).matrix();
    EXPECT_LE(op_norm(fh * h.matrix() - h.matrix() * fh), 1e-10 * scale);
  }
}

TEST(ApplyFunction, DomainErrorNamesEigenvalue) {
  try {
    apply_function(HermitianMatrix::diagonal({-4.0, 1.0}), [](double x) { return std::sqrt(x); });
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_DOUBLE_EQ(e.eigenvalue(), -4.0);
  }
}

TEST(SpectralProjection, HalfOpenWindow) {
  const auto p = spectral_projection(HermitianMatrix::diagonal({-1.0, 0.5, 2.0}), Interval::closed_open(0.0, 1.0));
  EXPECT_EQ(p.rank(), 1u);
  EXPECT_NEAR(p.matrix()(1, 1).real(), 1.0, 1e-15);
  EXPECT_NEAR(p.matrix()(0, 0).real(), 0.0, 1e-15);
  EXPECT_NEAR(p.matrix()(2, 2).real(), 0.0, 1e-15);
}

TEST(SpectralProjection, RealLineIsIdentity) {
  Rng rng(5);
  const auto p = spectral_projection(random_hermitian(rng, 7), Interval::real_line());
  EXPECT_LE(max_abs_diff(p.matrix(), ComplexMatrix::identity(7)), 1e-12);
}

TEST(SpectralProjection, RankMatchesBruteForceCount) {
  for (std::uint64_t s = 0; s < 40; ++s) {
    Rng rng = Rng::stream(9, s);
    const std::size_t n = 2 + s % 10;
    const HermitianMatrix h = random_hermitian(rng, n, 3.0);
    const double a = rng.uniform(-2.0, 0.0);
    const double b = rng.uniform(0.0, 2.0);
    const auto e = eigh(h);
    std::size_t brute = 0;
    for (double v : e.values) brute += (v >= a && v <= b) ? 1 : 0;
    const auto p = spectral_projection(h, Interval::closed(a, b));
    EXPECT_EQ(p.rank(), brute);
    EXPECT_EQ(rank_eps(p.matrix(), 0.5).rank, brute);
    // complement sums to the identity at the rank level
    const auto below = spectral_projection(h, Interval{-INFINITY, a, true, false});
    const auto above = spectral_projection(h, Interval{b, INFINITY, false, true});
    EXPECT_EQ(below.rank() + p.rank() + above.rank(), n);
  }
}

TEST(SpectralProjection, BoundaryCollisionCarriesEigenvalue) {
  try {
    spectral_projection(HermitianMatrix::diagonal({0.0, 1.0}), Interval::closed_open(0.0, 0.5));
    FAIL();
  } catch (const BoundaryCollision& e) {
    EXPECT_EQ(e.eigenvalue(), 0.0);
  }
}

TEST(ContourProjection, DiagonalCases) {
  const auto p = contour_projection(HermitianMatrix::diagonal({1.0, 5.0}), 1.0, 2.0);
  EXPECT_NEAR(p.matrix()(0, 0).real(), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(p.matrix()(1, 1)), 0.0, 1e-12);
  const auto q = contour_projection(HermitianMatrix::identity(2), 1.0, 0.5);
  EXPECT_LE(max_abs_diff(q.matrix(), ComplexMatrix::identity(2)), 1e-12);
}

TEST(ContourProjection, MatchesEigenbasisRoute) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    Rng rng = Rng::stream(13, s);
    const HermitianMatrix h = random_hermitian(rng, 2 + s % 8, 3.0);
    const auto e = eigh(h);
    double c = 0.0;
    double r = 1.0;
    do {  // well-separated: every eigenvalue at relative distance >= 0.1 from the circle
      c = rng.uniform(-1.0, 1.0);
      r = rng.uniform(0.5, 2.0);
    } while (std::any_of(e.values.begin(), e.values.end(),
                         [&](double v) { return std::abs(std::abs(v - c) - r) < 0.1 * r; }));
    const auto p = contour_projection(h, c, r);
    const auto q = spectral_projection(e, Interval::open(c - r, c + r));
    EXPECT_LE(max_abs_diff(p.matrix(), q.matrix()), 1e-8);
  }
}

TEST(ContourProjection, CollisionIsRejected) {
  EXPECT_THROW(contour_projection(HermitianMatrix::diagonal({1.0, 3.0}), 0.0, 1.0), ContourCollision);
}

TEST(OpNorm, Basics) {
  EXPECT_EQ(op_norm(ComplexMatrix(3, 4)), 0.0);
  EXPECT_NEAR(op_norm(ComplexMatrix{{-3.0, 0.0}, {0.0, 2.0}}), 3.0, 3e-12);
  EXPECT_NEAR(op_norm(HermitianMatrix::diagonal({-3.0, 2.0})), 3.0, 1e-15);
}

TEST(OpNorm, AgreesWithPowerIteration) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng = Rng::stream(17, s);
    const ComplexMatrix a = random_complex(rng, 1 + s % 7, 1 + (s * 3) % 9);
    const double ref = power_iteration_norm(a, rng);
    EXPECT_NEAR(op_norm(a), ref, 1e-8 * ref);
  }
}

TEST(RankEps, KnownRanks) {
  EXPECT_EQ(rank_eps(ComplexMatrix(4, 4), 1e-8).rank, 0u);
  Rng rng(19);
  const auto p = random_projection(rng, 6, 2);
  EXPECT_EQ(rank_eps(p.matrix(), 0.5).rank, 2u);
  EXPECT_FALSE(rank_eps(p.matrix(), 1e-8).ill_conditioned);
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng r = Rng::stream(23, s);
    const ComplexMatrix a = random_complex(r, 8, 3) * random_complex(r, 3, 7);
    EXPECT_EQ(rank_eps(a, 1e-8).rank, 3u);
  }
}

TEST(RankEps, FlagsIllConditionedRank) {
  const auto r = rank_eps(ComplexMatrix::diagonal(std::vector<double>{1.0, 2e-8}), 1e-8);
  EXPECT_EQ(r.rank, 2u);
  EXPECT_TRUE(r.ill_conditioned);
}

TEST(InvSqrtIntegral, ScalarAndIdentity) {
  const auto a = inv_sqrt_integral(HermitianMatrix::diagonal({4.0}));
  EXPECT_NEAR(a(0, 0).real(), 0.5, 1e-10);
  const auto i = inv_sqrt_integral(HermitianMatrix::identity(3));
  EXPECT_LE(max_abs_diff(i.matrix(), ComplexMatrix::identity(3)), 1e-10);
}

TEST(InvSqrtIntegral, MatchesEigenRouteAndSquaresToInverse) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng = Rng::stream(29, s);
    const HermitianMatrix a = random_spd(rng, 6, 0.2, 10.0);
    const auto q = inv_sqrt_integral(a);
    const auto ref = apply_function(a, [](double x) { return 1.0 / std::sqrt(x); });
    EXPECT_LE(op_norm(q.matrix() - ref.matrix()), 1e-6);
    EXPECT_LE(op_norm(q.matrix() * q.matrix() * a.matrix() - ComplexMatrix::identity(6)), 1e-5);
  }
}

TEST(InvSqrtIntegral, RejectsIndefinite) {
  try {
    inv_sqrt_integral(HermitianMatrix::diagonal({-1.0, 2.0}));
    FAIL();
  } catch (const DefinitenessError& e) {
    EXPECT_DOUBLE_EQ(e.lambda_min(), -1.0);
  }
}

TEST(CheckA1, IdentityT) {
  Rng rng(31);
  const auto b = random_hermitian(rng, 5);
  const auto r = check_a1(HermitianMatrix::identity(5), b);
  EXPECT_TRUE(r.all_hold());
  EXPECT_NEAR(r.norm_b, r.norm_tinvbt, 1e-12);
  EXPECT_NEAR(r.norm_sandwich, r.norm_tinv_b, 1e-12);
}

TEST(CheckA1, TwoByTwoDirectEvaluation) {
  // T = diag(1,2), B = e1 (x) e2 + e2 (x) e1: ||TBT^-1|| = ||T^-1BT|| = 2,
  // ||B|| = 1, ||T^-1/2 B T^-1/2|| = 1/sqrt(2), ||T^-1 B|| = 1.
  const HermitianMatrix b(ComplexMatrix{{0.0, 1.0}, {1.0, 0.0}});
  const auto r = check_a1(HermitianMatrix::diagonal({1.0, 2.0}), b);
  EXPECT_TRUE(r.all_hold());
  EXPECT_NEAR(r.norm_tbtinv, 2.0, 1e-12);
  EXPECT_NEAR(r.norm_tinvbt, 2.0, 1e-12);
  EXPECT_NEAR(r.norm_b, 1.0, 1e-12);
  EXPECT_NEAR(r.norm_sandwich, M_SQRT1_2, 1e-12);
  EXPECT_NEAR(r.norm_tinv_b, 1.0, 1e-12);
}

TEST(CheckA1, RandomSweepHasNoViolations) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    Rng rng = Rng::stream(37, s);
    const std::size_t n = 1 + s % 8;
    const auto r = check_a1(random_spd(rng, n, 0.1, 5.0), random_hermitian(rng, n));
    EXPECT_TRUE(r.all_hold()) << "trial " << s;
  }
}

TEST(CheckA1, SingularTIsRejected) {
  EXPECT_THROW(check_a1(HermitianMatrix::diagonal({0.0, 1.0}), HermitianMatrix::identity(2)), InvertibilityError);
}
