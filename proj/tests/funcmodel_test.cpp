#include "minreg/funcmodel.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

namespace minreg {
namespace {

using testing::example_function;
using testing::random_spd;
using testing::random_vector;

KnownFunction random_quadratic_sum(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> weight(0.1, 3.0);
  std::vector<QuadraticTerm> terms;
  for (int t = 0; t < 3; ++t) {
    terms.emplace_back(random_spd(rng, n, 0.0, 4.0), random_vector(rng, n, 2.0), weight(rng));
  }
  return KnownFunction(std::move(terms));
}

TEST(QuadraticTerm, RejectsInvalidInputs) {
  const Vector m = make_vector({0, 0});
  Matrix asym(2, 2);
  asym << 1, 0.5, 0, 1;
  EXPECT_THROW(QuadraticTerm(asym, m), Error);
  Matrix indef(2, 2);
  indef << 1, 0, 0, -1e-6;
  EXPECT_THROW(QuadraticTerm(indef, m), Error);
  EXPECT_THROW(QuadraticTerm(Matrix::Identity(3, 3), m), Error);
  EXPECT_THROW(QuadraticTerm(Matrix::Identity(2, 2), m, 0.0), Error);
  Matrix nearly(2, 2);
  nearly << 1, 0, 0, -1e-12;  // roundoff-sized negative eigenvalue is admitted
  EXPECT_NO_THROW(QuadraticTerm(nearly, m));
}

TEST(KnownFunction, RejectsEmptyAndMismatched) {
  EXPECT_THROW(KnownFunction({}), Error);
  EXPECT_THROW(KnownFunction({QuadraticTerm::isotropic(make_vector({0, 0})),
                              QuadraticTerm::isotropic(make_vector({0, 0, 0}))}),
               Error);
  EXPECT_THROW(KnownFunction({QuadraticTerm::isotropic(make_vector({0, 0}))},
                             {KinkSet{make_vector({0, 0}), {}}}),
               Error);
}

TEST(Gradient, Examples) {
  const auto f = example_function();
  EXPECT_TRUE(f.gradient(make_vector({1, 0})).isApprox(make_vector({-2, 0})));
  EXPECT_EQ(f.gradient(make_vector({2, 0})), make_vector({0, 0}));
  const KnownFunction g({QuadraticTerm::isotropic(make_vector({1, 1}), 3.0)});
  EXPECT_TRUE(g.gradient(make_vector({0, 0})).isApprox(make_vector({-6, -6})));
}

TEST(Gradient, Errors) {
  const auto f = example_function();
  try {
    f.gradient(make_vector({1, 0, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
  const KnownFunction k({QuadraticTerm::isotropic(make_vector({2, 0}))},
                        {KinkSet{make_vector({0, 0}), {make_vector({0, 1})}}});
  try {
    k.gradient(make_vector({0, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::KinkPoint);
  }
}

TEST(Subdifferential, SmoothPointIsGradientSingleton) {
  const auto f = example_function();
  const auto s = f.subdifferential(make_vector({0.3, -1.2}));
  ASSERT_TRUE(s.singleton());
  EXPECT_EQ(s.generators.front(), f.gradient(make_vector({0.3, -1.2})));
}

TEST(Subdifferential, RegisteredGeneratorsWithZeroSmoothPart) {
  const KnownFunction f({QuadraticTerm(Matrix::Zero(2, 2), make_vector({0, 0}))},
                        {KinkSet{make_vector({0.5, 0.5}), {make_vector({1, 0}), make_vector({-1, 0})}}});
  const auto s = f.subdifferential(make_vector({0.5, 0.5}));
  ASSERT_EQ(s.generators.size(), 2u);
  EXPECT_EQ(s.generators[0], make_vector({1, 0}));
  EXPECT_EQ(s.generators[1], make_vector({-1, 0}));
}

TEST(Subdifferential, GeneratorAddsToAnalyticGradient) {
  const KnownFunction f({QuadraticTerm::isotropic(make_vector({2, 0}))},
                        {KinkSet{make_vector({0, 0}), {make_vector({0, 1})}}});
  const auto s = f.subdifferential(make_vector({0, 0}));
  ASSERT_EQ(s.generators.size(), 1u);
  EXPECT_TRUE(s.generators.front().isApprox(make_vector({-4, 1})));
}

TEST(Subdifferential, TiesAwayFromRegisteredPointAreNonsmooth) {
  // max(x1, -x1) = |x1| is nonsmooth along the whole line x1 = 0.
  const KnownFunction f({QuadraticTerm(Matrix::Zero(2, 2), make_vector({0, 0}))},
                        {KinkSet{make_vector({0, 0}), {make_vector({1, 0}), make_vector({-1, 0})}}});
  EXPECT_TRUE(f.is_nonsmooth(make_vector({0, 3})));
  EXPECT_EQ(f.subdifferential(make_vector({0, 3})).generators.size(), 2u);
  EXPECT_EQ(f.gradient(make_vector({0.2, 3})), make_vector({1, 0}));
  EXPECT_EQ(f.gradient(make_vector({-0.2, 3})), make_vector({-1, 0}));
  EXPECT_DOUBLE_EQ(f.value(make_vector({-0.2, 3})), 0.2);
}

TEST(FiniteDifference, Examples) {
  const auto f = example_function();
  EXPECT_LT(finite_difference_check(f, make_vector({1, 1}), 1e-5), 1e-8);
  const KnownFunction sq({QuadraticTerm::isotropic(make_vector({0, 0}))});
  EXPECT_LT(finite_difference_check(sq, make_vector({0, 0}), 1e-5), 1e-10);
  const KnownFunction g({QuadraticTerm::isotropic(make_vector({1, 1}), 3.0)});
  EXPECT_LT(finite_difference_check(g, make_vector({5, -2}), 1e-6), 1e-7);
}

TEST(FiniteDifference, RandomQuadraticSums) {
  std::mt19937_64 rng(13);
  for (Eigen::Index n = 2; n <= 6; ++n) {
    for (int trial = 0; trial < 50; ++trial) {
      const auto f = random_quadratic_sum(rng, n);
      EXPECT_LT(finite_difference_check(f, random_vector(rng, n, 3.0), 1e-5), 1e-6);
    }
  }
}

TEST(Convexity, GradientMonotonicityWitness) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10000; ++trial) {
    const Eigen::Index n = 2 + trial % 5;
    const auto f = random_quadratic_sum(rng, n);
    const Vector x = random_vector(rng, n, 4.0);
    const Vector y = random_vector(rng, n, 4.0);
    EXPECT_GE((f.gradient(x) - f.gradient(y)).dot(x - y), -1e-9);
  }
}

TEST(Homogeneity, ScalingWeightsScalesGradient) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    const auto f = random_quadratic_sum(rng, 3);
    const double lambda = std::ldexp(1.0, static_cast<int>(trial % 7) - 3);  // exact powers of two
    const Vector x = random_vector(rng, 3);
    EXPECT_EQ(f.scaled(lambda).gradient(x), lambda * f.gradient(x));
  }
  const auto f = random_quadratic_sum(rng, 3);
  const Vector x = random_vector(rng, 3);
  EXPECT_TRUE(f.scaled(0.37).gradient(x).isApprox(0.37 * f.gradient(x), 1e-14));
}

}  // namespace
}  // namespace minreg
