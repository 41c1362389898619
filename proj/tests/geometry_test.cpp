#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "confproj/geometry.hpp"
#include "test_support.hpp"

namespace confproj {
namespace {

using testing::metric_jets;
using testing::random_point;
using testing::scalar_jet;

ConnectionValue random_connection(SplitMix64& rng, int n, int order) {
  ConnectionValue c(n, order);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = j; k < n; ++k) c.set(i, j, k, Jet::constant(rng.uniform(-2, 2), n, order));
    }
  }
  return c;
}

OneFormValue random_form(SplitMix64& rng, int n, int order) {
  OneFormValue f;
  for (int i = 0; i < n; ++i) f.push_back(Jet::constant(rng.uniform(-2, 2), n, order));
  return f;
}

TEST(InvertMetric, DiagonalIsInvolutive) {
  const std::vector<double> rows{-1, 0, 0, 0, 1, 0, 0, 0, 1};
  const MetricValue inv = invert_metric(MetricValue::from_values(rows, 3, 2));
  EXPECT_EQ(inv.values(), rows);
}

// Closed form of [[1, x], [x, 1]]^-1 = [[a, b], [b, a]] with a = 1/(1-x^2), b = -x/(1-x^2).
TEST(InvertMetric, TwoByTwoClosedForm) {
  const std::vector<std::string> names{"x", "y"};
  const std::vector<double> p{0.5, 0.0};
  const MetricValue inv = invert_metric(metric_jets({"1", "x", "x", "1"}, names, p, 2));
  const double x = 0.5, q = 1 - x * x;
  const double a = 1 / q, da = 2 * x / (q * q), dda = (2 + 6 * x * x) / (q * q * q);
  const double b = -x / q, db = -(1 + x * x) / (q * q), ddb = -(6 * x + 2 * x * x * x) / (q * q * q);
  EXPECT_NEAR(a, 1 / 0.75, 1e-15);
  for (int d : {0, 1}) {
    EXPECT_NEAR(inv(d, d).value(), a, 1e-14);
    EXPECT_NEAR(inv(d, d).gradient(0), da, 1e-13);
    EXPECT_NEAR(inv(d, d).hessian(0, 0), dda, 1e-12);
    EXPECT_EQ(inv(d, d).gradient(1), 0.0);
  }
  EXPECT_NEAR(inv(0, 1).value(), b, 1e-14);
  EXPECT_NEAR(inv(0, 1).gradient(0), db, 1e-13);
  EXPECT_NEAR(inv(1, 0).hessian(0, 0), ddb, 1e-12);
}

TEST(InvertMetric, DegenerateIsRejected) {
  const std::vector<double> rows{1, 1, 1, 1};
  EXPECT_THROW(invert_metric(MetricValue::from_values(rows, 2, 1)), DegenerateMetric);
  try {
    invert_metric(MetricValue::from_values(rows, 2, 1));
  } catch (const DegenerateMetric& e) {
    EXPECT_EQ(e.determinant(), 0.0);
  }
}

TEST(InvertMetric, ProductIsIdentityInJetArithmetic) {
  SplitMix64 rng(12);
  for (int t = 0; t < 30; ++t) {
    const int n = 2 + t % 3;
    const auto names = testing::coordinate_names(n);
    const MetricValue g = metric_jets(testing::random_metric(rng, n, 0.2), names, random_point(rng, n), 2);
    const MetricValue inv = invert_metric(g);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        Jet s = Jet::constant(0.0, n, 2);
        for (int p = 0; p < n; ++p) s += g(i, p) * inv(p, k);
        EXPECT_NEAR(s.value(), delta(i, k), 1e-13);
        for (int a = 0; a < n; ++a) {
          EXPECT_NEAR(s.gradient(a), 0.0, 1e-12);
          for (int b = 0; b < n; ++b) EXPECT_NEAR(s.hessian(a, b), 0.0, 1e-11);
        }
      }
    }
  }
}

TEST(Christoffel, FlatIsZero) {
  const std::vector<double> rows{1, 0, 0, 1};
  const ConnectionValue c = christoffel(MetricValue::from_values(rows, 2, 2));
  EXPECT_EQ(c.order(), 1);
  EXPECT_EQ(c.max_abs(), 0.0);
}

TEST(Christoffel, RoundSphere) {
  const std::vector<std::string> names{"t", "f"};
  const std::vector<double> p{1.0, 0.3};
  const ConnectionValue c = christoffel(metric_jets({"1", "0", "0", "sin(t)^2"}, names, p, 2));
  EXPECT_NEAR(c(0, 1, 1).value(), -std::sin(1.0) * std::cos(1.0), 1e-14);
  EXPECT_NEAR(c(1, 0, 1).value(), std::cos(1.0) / std::sin(1.0), 1e-14);
  EXPECT_NEAR(c(0, 1, 1).value(), -0.45465, 5e-6);
  EXPECT_NEAR(c(1, 1, 0).value(), 0.64209, 5e-6);
  EXPECT_EQ(c(0, 0, 0).value(), 0.0);
  EXPECT_EQ(c(1, 1, 1).value(), 0.0);
}

TEST(Christoffel, NeedsFirstDerivatives) {
  const std::vector<double> rows{1, 0, 0, 1};
  EXPECT_THROW(christoffel(MetricValue::from_values(rows, 2, 0)), std::invalid_argument);
}

// d_k g_ij - G^p_ki g_pj - G^p_kj g_ip = 0
TEST(ChristoffelProperty, MetricIsParallel) {
  SplitMix64 rng(31);
  for (int t = 0; t < 60; ++t) {
    const int n = 2 + t % 3;
    const auto names = testing::coordinate_names(n);
    const MetricValue g = metric_jets(testing::random_metric(rng, n, 0.2), names, random_point(rng, n), 2);
    const ConnectionValue c = christoffel(g);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          double r = g(i, j).gradient(k);
          for (int p = 0; p < n; ++p) r -= c(p, k, i).value() * g(p, j).value() + c(p, k, j).value() * g(i, p).value();
          EXPECT_NEAR(r, 0.0, 1e-10);
          EXPECT_EQ(c(i, j, k), c(i, k, j));
        }
      }
    }
  }
}

TEST(ConformalRescale, Examples) {
  const std::vector<std::string> names{"x", "y"};
  const std::vector<double> p{0.0, 0.0};
  const MetricValue g = metric_jets({"1", "0", "0", "1"}, names, p, 2);

  const MetricValue same = conformal_rescale_metric(g, Jet::constant(0.0, 2, 2));
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) EXPECT_EQ(same(i, j), g(i, j));
  }

  const MetricValue r = conformal_rescale_metric(g, scalar_jet("x", names, p, 2));
  EXPECT_EQ(r(0, 0).value(), 1.0);
  EXPECT_EQ(r(1, 1).value(), 1.0);
  EXPECT_EQ(r(0, 0).gradient(0), 2.0);
  EXPECT_EQ(r(0, 1).value(), 0.0);
}

TEST(ConformalRescale, RoundTrip) {
  SplitMix64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + t % 3;
    const auto names = testing::coordinate_names(n);
    const auto p = random_point(rng, n);
    const MetricValue g = metric_jets(testing::random_metric(rng, n), names, p, 2);
    const Jet phi = scalar_jet(testing::random_polynomial(rng, n, 2, 0.5), names, p, 2);
    const MetricValue back = conformal_rescale_metric(conformal_rescale_metric(g, phi), Jet::constant(0.0, n, 2) - phi);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        EXPECT_NEAR(back(i, j).value(), g(i, j).value(), 1e-14);
        for (int k = 0; k < n; ++k) EXPECT_NEAR(back(i, j).gradient(k), g(i, j).gradient(k), 1e-14);
      }
    }
  }
}

TEST(RescaledConnection, ConstantFactorLeavesConnection) {
  SplitMix64 rng(9);
  const auto names = testing::coordinate_names(3);
  const auto p = random_point(rng, 3);
  const MetricValue g = metric_jets(testing::random_metric(rng, 3), names, p, 2);
  const ConnectionValue a = rescaled_connection(g, Jet::constant(0.7, 3, 2));
  const ConnectionValue b = christoffel(g);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) EXPECT_NEAR(a(i, j, k).value(), b(i, j, k).value(), 1e-15);
    }
  }
}

TEST(RescaledConnection, FlatWithLinearFactor) {
  const std::vector<std::string> names{"x", "y"};
  const std::vector<double> p{0.2, -0.4};
  const ConnectionValue c =
      rescaled_connection(metric_jets({"1", "0", "0", "1"}, names, p, 2), scalar_jet("x", names, p, 2));
  EXPECT_EQ(c(0, 0, 0).value(), 1.0);
  EXPECT_EQ(c(0, 1, 1).value(), -1.0);
  EXPECT_EQ(c(1, 0, 1).value(), 1.0);
  EXPECT_EQ(c(1, 1, 0).value(), 1.0);
  EXPECT_EQ(c(0, 0, 1).value(), 0.0);
  EXPECT_EQ(c(1, 0, 0).value(), 0.0);
  EXPECT_EQ(c(1, 1, 1).value(), 0.0);
}

TEST(RescaledConnection, AgreesWithChristoffelOfRescaledMetric) {
  SplitMix64 rng(77);
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + t % 3;
    const auto names = testing::coordinate_names(n);
    const auto p = random_point(rng, n);
    const MetricValue g = metric_jets(testing::random_metric(rng, n, 0.2), names, p, 2);
    const Jet phi = scalar_jet(testing::random_polynomial(rng, n, 2, 0.5), names, p, 2);
    const ConnectionValue a = rescaled_connection(g, phi);
    const ConnectionValue b = christoffel(conformal_rescale_metric(g, phi));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          EXPECT_NEAR(a(i, j, k).value(), b(i, j, k).value(), 1e-9);
          for (int l = 0; l < n; ++l) EXPECT_NEAR(a(i, j, k).gradient(l), b(i, j, k).gradient(l), 1e-9);
        }
      }
    }
  }
}

TEST(ProjectiveTransform, Examples) {
  const ConnectionValue zero(2, 1);
  const ConnectionValue same = projective_transform(zero, {Jet::constant(0, 2, 1), Jet::constant(0, 2, 1)});
  EXPECT_EQ(same.max_abs(), 0.0);

  const ConnectionValue t = projective_transform(zero, {Jet::constant(1, 2, 1), Jet::constant(0, 2, 1)});
  EXPECT_EQ(t(0, 0, 0).value(), 2.0);
  EXPECT_EQ(t(1, 0, 1).value(), 1.0);
  EXPECT_EQ(t(1, 1, 0).value(), 1.0);
  EXPECT_EQ(t(0, 0, 1).value(), 0.0);
  EXPECT_EQ(t(0, 1, 1).value(), 0.0);
  EXPECT_EQ(t(1, 0, 0).value(), 0.0);
  EXPECT_EQ(t(1, 1, 1).value(), 0.0);

  const ThomasValue pi = thomas_symbol(t);
  for (double v : pi.pi) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(ThomasSymbol, ZeroConnection) {
  const ThomasValue pi = thomas_symbol(ConnectionValue(3, 0));
  for (double v : pi.pi) EXPECT_EQ(v, 0.0);
}

TEST(ThomasSymbolProperty, TraceFreeAndProjectivelyInvariant) {
  SplitMix64 rng(5150);
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + t % 4;
    const ConnectionValue gamma = random_connection(rng, n, 1);
    const ThomasValue pi = thomas_symbol(gamma);
    for (int k = 0; k < n; ++k) {
      double tr1 = 0.0, tr2 = 0.0;
      for (int p = 0; p < n; ++p) {
        tr1 += pi(p, p, k);
        tr2 += pi(p, k, p);
      }
      EXPECT_LE(std::fabs(tr1), 1e-12);
      EXPECT_LE(std::fabs(tr2), 1e-12);
    }
    const ThomasValue moved = thomas_symbol(projective_transform(gamma, random_form(rng, n, 1)));
    EXPECT_LE(max_abs_difference(pi, moved), 1e-12);
  }
}

TEST(ProjectivelyEquivalent, Examples) {
  SplitMix64 rng(2);
  const std::vector<std::vector<double>> points{{0.0, 0.0}, {0.5, -0.5}, {1.0, 0.25}};
  const ConnectionValue gamma = random_connection(rng, 2, 1);
  const OneFormValue psi = random_form(rng, 2, 1);

  const auto moved = projectively_equivalent([&](const auto&) { return gamma; },
                                             [&](const auto&) { return projective_transform(gamma, psi); }, points, 1e-8);
  EXPECT_TRUE(moved.equivalent);
  EXPECT_LT(moved.max_deviation, 1e-12);

  ConnectionValue bent(2, 1);
  bent.set(0, 1, 1, Jet::constant(1.0, 2, 1));
  const auto diff = projectively_equivalent([](const auto&) { return ConnectionValue(2, 1); },
                                            [&](const auto&) { return bent; }, points, 1e-8);
  EXPECT_FALSE(diff.equivalent);
  EXPECT_EQ(diff.max_deviation, 1.0);

  const auto self = projectively_equivalent([&](const auto&) { return gamma; }, [&](const auto&) { return gamma; },
                                            points, 1e-8);
  EXPECT_TRUE(self.equivalent);
  EXPECT_EQ(self.max_deviation, 0.0);
}

}  // namespace
}  // namespace confproj
