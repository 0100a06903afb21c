#include <gtest/gtest.h>

#include <cmath>

#include "specflow/projpair.hpp"
#include "specflow/random.hpp"
#include "specflow/transforms.hpp"

using namespace specflow;

namespace {
Projection coordinate_projection(std::size_t n, std::initializer_list<std::size_t> idx) {
  std::vector<double> d(n, 0.0);
  for (auto i : idx) d[i] = 1.0;
  return Projection(ComplexMatrix::diagonal(std::span<const double>(d)));
}

Projection line(double theta) {
  return Projection::onto(ComplexMatrix{{std::cos(theta)}, {std::sin(theta)}});
}
}  // namespace

TEST(PairIndex, EqualProjections) {
  for (std::size_t r = 0; r <= 4; ++r) {
    Rng rng = Rng::stream(3, r);
    const auto p = random_projection(rng, 4, r);
    const auto res = pair_index(p, p);
    EXPECT_EQ(res.value, 0);
    EXPECT_NEAR(fredholm_pair_gap(p, p), 1.0, 1e-12);
  }
}

TEST(PairIndex, RankTwoAgainstZero) {
  const auto p = coordinate_projection(5, {1, 3});
  const auto res = pair_index(p, Projection::zero(5));
  EXPECT_EQ(res.value, 2);
  EXPECT_EQ(res.route_rank_diff, 2);
  EXPECT_EQ(res.route_restricted_map, 2);
  EXPECT_EQ(res.route_eigencount, 2);
  EXPECT_EQ(pair_index(Projection::zero(5), p).value, -2);
}

TEST(PairIndex, OrthogonalLinesInThreeDims) {
  const auto p = coordinate_projection(3, {0});
  const auto q = coordinate_projection(3, {1});
  const auto mu = difference_spectrum(p, q);
  EXPECT_NEAR(mu[0], -1.0, 1e-15);
  EXPECT_NEAR(mu[1], 0.0, 1e-15);
  EXPECT_NEAR(mu[2], 1.0, 1e-15);
  EXPECT_NEAR(fredholm_pair_gap(p, q), 1.0, 1e-15);
  const auto res = pair_index(p, q);
  EXPECT_EQ(res.value, 0);
  EXPECT_EQ(res.route_eigencount, 0);
}

TEST(PairIndex, RoutesAgreeOnRandomPairs) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    Rng rng = Rng::stream(5, s);
    const std::size_t n = 1 + s % 10;
    const auto p = random_projection(rng, n, static_cast<std::size_t>(rng.integer(0, static_cast<int>(n))));
    const auto q = random_projection(rng, n, static_cast<std::size_t>(rng.integer(0, static_cast<int>(n))));
    const auto res = pair_index(p, q);
    EXPECT_EQ(res.value, static_cast<int>(p.rank()) - static_cast<int>(q.rank()));
    EXPECT_GT(res.min_gap_to_pm1, 0.0);
    EXPECT_LE(res.min_gap_to_pm1, 1.0);
  }
}

TEST(PairIndex, KernelsInsideRandomPairs) {
  // P = span{e0, e1}, Q = span{e1, e2} in C^4: both kernels 1-dimensional
  const auto p = coordinate_projection(4, {0, 1});
  const auto q = coordinate_projection(4, {1, 2});
  Rng rng(7);
  const auto u = random_unitary(rng, 4);
  const auto res = pair_index(p.conjugated_by(u), q.conjugated_by(u));
  EXPECT_EQ(res.value, 0);
  const auto r2 = pair_index(coordinate_projection(4, {0, 1, 3}), q);
  EXPECT_EQ(r2.value, 1);
  EXPECT_EQ(r2.route_eigencount, 1);
}

TEST(PairIndex, AdditivityAntisymmetryUnitaryInvariance) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng = Rng::stream(11, s);
    const std::size_t n = 2 + s % 8;
    auto rank = [&] { return static_cast<std::size_t>(rng.integer(0, static_cast<int>(n))); };
    const auto p = random_projection(rng, n, rank());
    const auto q = random_projection(rng, n, rank());
    const auto r = random_projection(rng, n, rank());
    EXPECT_EQ(pair_index(p, r).value, pair_index(p, q).value + pair_index(q, r).value);
    EXPECT_EQ(pair_index(p, q).value, -pair_index(q, p).value);
    const auto u = random_unitary(rng, n);
    EXPECT_EQ(pair_index(p.conjugated_by(u), q.conjugated_by(u)).value, pair_index(p, q).value);
  }
}

TEST(PairIndex, CloseProjectionsHaveIndexZero) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng rng = Rng::stream(13, s);
    const std::size_t n = 2 + s % 7;
    const auto p = random_projection(rng, n, 1 + s % (n - 1));
    const auto k = eigh(random_hermitian(rng, n, 1.0));
    const auto u = unitary_exp(k, rng.uniform(0.01, 0.3));
    const auto q = p.conjugated_by(u.matrix());
    ASSERT_LT(op_norm(p.hermitian() - q.hermitian()), 1.0);
    EXPECT_EQ(pair_index(p, q).value, 0);
  }
}

TEST(PairPath, ConstantAndRotatingLine) {
  const auto p = coordinate_projection(3, {0, 2});
  const auto q = coordinate_projection(3, {1});
  const auto c = pair_path_invariance([&](double) { return std::pair{p, q}; }, 5);
  EXPECT_TRUE(c.constant);
  EXPECT_EQ(c.index, 1);
  EXPECT_EQ(c.max_jump_p, 0.0);

  const auto rot = pair_path_invariance([](double t) { return std::pair{line(M_PI * t), line(0.0)}; }, 33);
  EXPECT_TRUE(rot.constant);
  EXPECT_EQ(rot.index, 0);
  EXPECT_LT(rot.max_jump_p, 1.0);
}

TEST(PairPath, SpectralProjectionsAlongInvertiblePath) {
  Rng rng(17);
  const std::size_t n = 6;
  const auto a = random_with_spectrum(rng, std::vector<double>{-2, -1, -0.5, 0.5, 1, 2});
  const auto b = random_with_spectrum(rng, std::vector<double>{-3, -1, -0.7, 0.4, 1, 3});
  const auto k = eigh(random_hermitian(rng, n, 1.0));
  // T(t) = U(t) A U(t)* and S(t) = U(t) B U(t)* stay invertible
  const auto rep = pair_path_invariance(
      [&](double t) {
        const auto u = unitary_exp(k, t).matrix();
        return std::pair{spectral_projection(a.conjugated_by(u), Interval::nonnegative()),
                         spectral_projection(b.conjugated_by(u), Interval::nonnegative())};
      },
      41);
  EXPECT_TRUE(rep.constant);
  EXPECT_EQ(rep.index, 0);
}

TEST(PairPath, CoarseSamplingRejected) {
  EXPECT_THROW(pair_path_invariance([](double t) { return std::pair{line(M_PI_2 * t), line(0.0)}; }, 2),
               SamplingTooCoarse);
}
