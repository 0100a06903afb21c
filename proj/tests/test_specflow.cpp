#include <gtest/gtest.h>

#include <cmath>

#include "specflow/specflow.hpp"

using namespace specflow;

namespace {
int phillips(const OperatorPath& p) { return sf_phillips(p).total; }
int pairsum(const OperatorPath& p) { return sf_pairsum(p).total; }
int endpoints(const OperatorPath& p) { return sf_endpoints(p); }
int oracle(const OperatorPath& p) { return sf_crossing_oracle(p, 512); }

void expect_all(const OperatorPath& p, int value) {
  EXPECT_EQ(phillips(p), value);
  EXPECT_EQ(pairsum(p), value);
  EXPECT_EQ(endpoints(p), value);
  EXPECT_EQ(oracle(p), value);
}

OperatorPath diag_path(std::vector<std::function<double(double)>> fs) {
  return function_path(fs.size(), "diag", [fs](double t) {
    std::vector<double> d;
    for (const auto& f : fs) d.push_back(f(t));
    return HermitianMatrix::diagonal(d);
  });
}
}  // namespace

TEST(SpectralFlow, ConstantPath) {
  const auto p = constant_path(HermitianMatrix::diagonal({-1.0, 2.0, 3.0}));
  expect_all(p, 0);
  EXPECT_EQ(sf_phillips(p).segments.size(), 1u);
}

TEST(SpectralFlow, ScalarNormalization) {
  const auto p = diag_path({[](double t) { return t - 0.5; }});
  expect_all(p, 1);
  const auto cert = sf_phillips(p);
  EXPECT_EQ(cert.segment_sum(), 1);
  for (const auto& s : cert.segments) EXPECT_GT(s.weyl_margin, 0.0);
}

TEST(SpectralFlow, DoubleCrossing) {
  const auto p = function_path(2, "2t-1", [](double t) { return HermitianMatrix::identity(2) * (2.0 * t - 1.0); });
  expect_all(p, 2);
  const auto tally = sf_crossing_tally(p, 512);
  EXPECT_EQ(tally.up, 2);
  EXPECT_EQ(tally.down, 0);
}

TEST(SpectralFlow, Endpoints) {
  EXPECT_EQ(sf_endpoints(linear_path(-HermitianMatrix::identity(3), HermitianMatrix::identity(3))), 3);
  Rng rng(19);
  const auto a = random_with_spectrum(rng, std::vector<double>{-1.0, 0.5, 2.0});
  const auto loop = function_path(3, "loop", [a](double t) {
    return a + HermitianMatrix::diagonal({3.0, -2.0, 1.0}) * std::sin(M_PI * t);
  });
  expect_all(loop, 0);
}

TEST(CrossingOracle, Examples) {
  const auto two = diag_path({[](double t) { return t - 0.25; }, [](double t) { return t - 0.75; }});
  const auto tally = sf_crossing_tally(two, 512);
  EXPECT_EQ(tally.net, 2);
  EXPECT_EQ(tally.up, 2);
  ASSERT_EQ(tally.crossings.size(), 2u);
  EXPECT_LE(tally.crossings[0].t_lo, 0.25);
  EXPECT_GE(tally.crossings[0].t_hi, 0.25);

  const auto rot = function_path(2, "rotation", [](double t) {
    const double c = std::cos(2 * M_PI * t), s = std::sin(2 * M_PI * t);
    return HermitianMatrix(ComplexMatrix{{c, s}, {s, -c}});
  });
  EXPECT_EQ(sf_crossing_oracle(rot, 512), 0);
  EXPECT_EQ(sf_crossing_tally(rot, 512).up, 0);
  expect_all(rot, 0);
}

TEST(CrossingOracle, CoarseGridRejected) {
  const auto p = function_path(1, "steep", [](double t) { return HermitianMatrix::diagonal({0.1 + 10.0 * t}); });
  EXPECT_THROW(sf_crossing_oracle(p, 8), ResolutionError);
}

TEST(SpectralFlow, FourWayAgreementOnRandomPaths) {
  for (std::uint64_t s = 0; s < 40; ++s) {
    Rng rng = Rng::stream(23, s);
    const auto p = trig_random_path(rng, 2 + s % 11, 3, 0.2);
    const auto c = sf_compare(p);
    EXPECT_TRUE(c.agree()) << "path " << s;
    EXPECT_TRUE(recheck_certificate(p, c.phillips).valid);
    EXPECT_TRUE(recheck_certificate(p, c.pairsum).valid);
    EXPECT_EQ(c.oracle.net, c.oracle.up - c.oracle.down);
    for (const auto& seg : c.pairsum.segments) EXPECT_LT(*seg.projection_jump, 1.0);
  }
}

TEST(SpectralFlow, TamperedCertificateRejected) {
  Rng rng(29);
  const auto p = trig_random_path(rng, 4, 2, 0.2);
  auto cert = sf_phillips(p);
  auto bad = cert;
  bad.total += 1;
  EXPECT_FALSE(recheck_certificate(p, bad).valid);
  bad = cert;
  bad.segments.front().eps = 0.0;
  EXPECT_FALSE(recheck_certificate(p, bad).valid);
  bad = cert;
  bad.segments.pop_back();
  EXPECT_FALSE(recheck_certificate(p, bad).valid);
}

TEST(SpectralFlow, ConcatenationAndReversal) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng = Rng::stream(31, s);
    const std::size_t n = 2 + s % 6;
    const auto f = trig_random_path(rng, n, 2, 0.2);
    const auto g = trig_random_path(rng, n, 2, 0.2, f(1.0));
    const auto fg = path_concat(f, g);
    EXPECT_EQ(phillips(fg), phillips(f) + phillips(g));
    EXPECT_EQ(oracle(fg), endpoints(f) + endpoints(g));
    EXPECT_EQ(phillips(path_reverse(f)), -phillips(f));
    EXPECT_EQ(pairsum(path_reverse(f)), -pairsum(f));
    EXPECT_EQ(phillips(path_concat(f, constant_path(f(1.0)))), phillips(f));
    EXPECT_EQ(phillips(path_concat(f, path_reverse(f))), 0);
  }
}

TEST(SpectralFlow, ConcatenationNeedsMatchingEnds) {
  const auto f = constant_path(HermitianMatrix::identity(2));
  const auto g = constant_path(-HermitianMatrix::identity(2));
  EXPECT_THROW(path_concat(f, g), InputError);
}

TEST(SpectralFlow, ScalingAndConjugationInvariance) {
  for (std::uint64_t s = 0; s < 15; ++s) {
    Rng rng = Rng::stream(37, s);
    const std::size_t n = 2 + s % 8;
    const auto f = trig_random_path(rng, n, 3, 0.2);
    const int v = phillips(f);
    EXPECT_EQ(phillips(path_scaled(f, rng.uniform(0.1, 10.0))), v);
    EXPECT_EQ(pairsum(path_conjugated(f, random_unitary(rng, n))), v);
  }
}

TEST(SpectralFlow, InvertiblePathsVanish) {
  Rng rng(41);
  const std::size_t n = 5;
  const auto k = eigh(random_hermitian(rng, n, 2.0));
  const auto d = HermitianMatrix::diagonal({-2.0, -1.0, 0.5, 1.0, 3.0});
  const auto p = function_path(n, "orbit", [k, d](double t) { return d.conjugated_by(unitary_exp(k, t).matrix()); });
  expect_all(p, 0);
  const auto spd = function_path(n, "spd", [](double t) {
    return HermitianMatrix::diagonal({1.0 + t, 2.0 - t, 0.5, 1.0 + std::sin(7 * t), 3.0});
  });
  expect_all(spd, 0);
}

TEST(SpectralFlow, SampledPathInterpolates) {
  std::vector<HermitianMatrix> samples;
  for (double x : {-1.0, 0.5, -0.5, 0.25, 2.0}) samples.push_back(HermitianMatrix::diagonal({x, 1.0}));
  const auto p = sampled_path(samples);
  EXPECT_EQ(p.kind, "sampled");
  EXPECT_NEAR(p(0.125)(0, 0).real(), -0.25, 1e-15);
  expect_all(p, 1);
  const auto tally = sf_crossing_tally(p, 512);
  EXPECT_EQ(tally.up, 2);
  EXPECT_EQ(tally.down, 1);
  for (const auto& seg : sf_phillips(p).segments) {
    // no segment straddles a grid point
    EXPECT_EQ(std::floor(seg.t_lo * 4.0 + 1e-12), std::floor(seg.t_hi * 4.0 - 1e-12));
  }
}

TEST(SpectralFlow, SingularEndpointRejected) {
  const auto p = diag_path({[](double t) { return t; }});
  EXPECT_THROW(sf_phillips(p), EndpointError);
  EXPECT_THROW(sf_pairsum(p), EndpointError);
  EXPECT_THROW(sf_endpoints(p), EndpointError);
  EXPECT_THROW(sf_crossing_oracle(p, 64), EndpointError);
}

TEST(SpectralFlow, NearJumpNotCertified) {
  // crossing steeper than the finest subdivision
  const auto p = diag_path({[](double t) { return std::tanh((t - 1.0 / 3.0) * 1e12); }});
  try {
    sf_phillips(p);
    FAIL() << "expected certification failure";
  } catch (const CertificationFailure& e) {
    EXPECT_EQ(e.code(), ExitCode::certification_failure);
    EXPECT_LE(e.t_lo(), 1.0 / 3.0);
    EXPECT_GE(e.t_hi(), 1.0 / 3.0);
    EXPECT_LT(e.t_hi() - e.t_lo(), 1e-6);
  }
  EXPECT_EQ(sf_endpoints(p), 1);
}

TEST(SpectralFlow, DimensionChangeDetected) {
  const auto p = function_path(2, "bad", [](double t) {
    return t < 0.5 ? HermitianMatrix::identity(2) : HermitianMatrix::identity(3);
  });
  EXPECT_THROW(sf_phillips(p), DimensionMismatch);
}
