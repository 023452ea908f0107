#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fracppp/stability.hpp"
#include "param_sets.hpp"

using namespace fracppp;
using namespace fracppp::testing;

namespace {

ModelParams random_params(std::mt19937_64& rng) {
  auto u = [&rng](double lo, double hi) { return std::uniform_real_distribution<>(lo, hi)(rng); };
  return {u(0.5, 30.0), u(10.0, 400.0), u(0.001, 0.1), u(0.1, 20.0),
          u(0.001, 3.0), u(1.0, 30.0), u(0.05, 15.0), u(0.05, 10.0)};
}

// Random parameters for which E* exists.
ModelParams random_interior_params(std::mt19937_64& rng) {
  for (;;) {
    const ModelParams p = random_params(rng);
    if (fixed_point(p, FixedPointKind::Interior).exists) return p;
  }
}

}  // namespace

TEST(Jacobian, StructuralZeros) {
  const auto j = jacobian(kExample3, Discretization(0.85, 0.02), {10.0, 20.0, 30.0});
  EXPECT_EQ(j(0, 2), 0.0);
  EXPECT_EQ(j(2, 0), 0.0);
}

TEST(Jacobian, SingularDenominatorRejected) {
  EXPECT_THROW(jacobian(kExample3, Discretization(0.85, 0.02), {1.0, -15.0, 1.0}), DomainError);
}

TEST(Property, JacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const ModelParams p = random_params(rng);
    const Discretization dsc(std::uniform_real_distribution<>(0.2, 1.0)(rng),
                             std::uniform_real_distribution<>(0.01, 1.0)(rng));
    const State st{std::uniform_real_distribution<>(0.1, p.K)(rng),
                   std::uniform_real_distribution<>(0.1, 100.0)(rng),
                   std::uniform_real_distribution<>(0.1, 100.0)(rng)};
    const auto jac = jacobian(p, dsc, st);
    double scale = 0.0;
    for (const auto& row : jac.entries) {
      for (double v : row) scale = std::max(scale, std::abs(v));
    }
    for (int col = 0; col < 3; ++col) {
      auto shifted = [&](double delta) {
        State s2 = st;
        (col == 0 ? s2.x : col == 1 ? s2.y : s2.z) += delta;
        return step(p, dsc, s2);
      };
      const double comp = col == 0 ? st.x : col == 1 ? st.y : st.z;
      const double h = 1e-5 * (1.0 + comp);
      const State fwd = shifted(h);
      const State bwd = shifted(-h);
      const double fd[3] = {(fwd.x - bwd.x) / (2 * h), (fwd.y - bwd.y) / (2 * h),
                            (fwd.z - bwd.z) / (2 * h)};
      for (int row = 0; row < 3; ++row) {
        EXPECT_LT(std::abs(fd[row] - jac(row, col)), 1e-6 * scale)
            << "trial " << trial << " entry " << row << "," << col;
      }
    }
  }
}

TEST(InteriorCoefficients, MatchNumericCharacteristicPolynomial) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const ModelParams p = random_interior_params(rng);
    const Discretization dsc(std::uniform_real_distribution<>(0.2, 1.0)(rng),
                             std::uniform_real_distribution<>(0.001, 1.0)(rng));
    const auto e = fixed_point(p, FixedPointKind::Interior).coords;
    const auto numeric = characteristic_polynomial(jacobian(p, dsc, e).entries);
    const auto closed = interior_char_coeffs(p, dsc);
    const double tol = 1e-9 * (1.0 + std::abs(numeric.c2) + std::abs(numeric.c1) +
                               std::abs(numeric.c0));
    EXPECT_NEAR(closed.a1, numeric.c2, tol);
    EXPECT_NEAR(closed.a2, numeric.c1, tol);
    EXPECT_NEAR(closed.a3, numeric.c0, tol);
    const double p1 = 1.0 + closed.a1 + closed.a2 + closed.a3;
    EXPECT_NEAR(closed.p_at_one, p1, 1e-8 * (1.0 + std::abs(p1)));
    EXPECT_GT(closed.p_at_one, 0.0);
  }
}

TEST(InteriorCoefficients, RequireExistingPoint) {
  EXPECT_THROW(interior_char_coeffs(kAxialSet, Discretization(0.8, 0.1)), NotExistingError);
  EXPECT_THROW(find_s9(kPlanarSet, 0.8, 1.0), NotExistingError);
}

TEST(Property, JuryAgreesWithEigenvalues) {
  std::mt19937_64 rng(5);
  int checked = 0;
  int sinks = 0;
  for (int trial = 0; checked < 2000 && trial < 100000; ++trial) {
    const ModelParams p = random_interior_params(rng);
    const double alpha = std::uniform_real_distribution<>(0.2, 1.0)(rng);
    const auto t = thresholds(p, alpha);
    // sample s on both sides of the stability bound
    const double bound = t.interior_bound().value_or(1.0);
    const double s = bound * std::uniform_real_distribution<>(0.2, 2.0)(rng);
    const Discretization dsc(alpha, s);
    const auto rep = classify(p, dsc, fixed_point(p, FixedPointKind::Interior));
    const double radius = *std::max_element(rep.moduli.begin(), rep.moduli.end());
    // margins scale like powers of rho; below ~1e-10 their sign is rounding noise
    const bool resolvable = std::all_of(rep.jury.begin(), rep.jury.end(),
                                        [](const JuryCondition& c) { return std::abs(c.margin) > 1e-10; });
    if (std::abs(radius - 1.0) < 1e-8 || !resolvable) continue;
    ++checked;
    sinks += rep.classification == Classification::Sink ? 1 : 0;
    EXPECT_TRUE(rep.jury_agrees) << "trial " << trial << " radius " << radius;
    EXPECT_EQ(all_hold(rep.jury), radius < 1.0);
  }
  EXPECT_GE(checked, 1000);
  EXPECT_GT(sinks, 200);
  EXPECT_LT(sinks, checked - 200);
}

TEST(Property, JuryAgreesOnBoundaryEquilibria) {
  std::mt19937_64 rng(8);
  int checked = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    const ModelParams p = random_params(rng);
    const Discretization dsc(std::uniform_real_distribution<>(0.2, 1.0)(rng),
                             std::uniform_real_distribution<>(0.001, 2.0)(rng));
    for (const auto& fp : fixed_points(p)) {
      if (!fp.exists || fp.kind == FixedPointKind::Interior) continue;
      const auto rep = classify(p, dsc, fp);
      const double radius = *std::max_element(rep.moduli.begin(), rep.moduli.end());
      const bool resolvable = std::all_of(rep.jury.begin(), rep.jury.end(), [](const JuryCondition& c) {
        return std::abs(c.margin) > 1e-10;
      });
      if (std::abs(radius - 1.0) < 1e-8 || !resolvable) continue;
      ++checked;
      EXPECT_TRUE(rep.jury_agrees) << "trial " << trial << " " << label(fp.kind);
    }
  }
  EXPECT_GT(checked, 1000);
}

TEST(Classify, Moduli) {
  EXPECT_EQ(classify_moduli({0.5, 0.2, 0.1}), Classification::Sink);
  EXPECT_EQ(classify_moduli({1.5, 1.2, 1.1}), Classification::Source);
  EXPECT_EQ(classify_moduli({1.5, 0.2, 0.1}), Classification::Saddle);
  EXPECT_EQ(classify_moduli({1.0 + 1e-12, 0.2, 0.1}), Classification::NonHyperbolic);
  EXPECT_EQ(label(Classification::Sink), "sink");
}

TEST(Classify, TrivialIsNeverStable) {
  const auto rep =
      classify(kExample2, Discretization(0.8, 0.05), fixed_point(kExample2, FixedPointKind::Trivial));
  EXPECT_NE(rep.classification, Classification::Sink);
  EXPECT_FALSE(rep.theorem_disagrees);
}

TEST(Classify, AxialSetVerdicts) {
  const auto e1 = fixed_point(kAxialSet, FixedPointKind::Axial);
  const auto stable = classify(kAxialSet, Discretization(0.8, 0.65), e1);
  EXPECT_EQ(stable.classification, Classification::Sink);
  EXPECT_FALSE(stable.theorem_disagrees);
  const auto unstable = classify(kAxialSet, Discretization(0.8, 0.95), e1);
  EXPECT_NE(unstable.classification, Classification::Sink);
  EXPECT_FALSE(unstable.theorem_disagrees);
}

TEST(Classify, InteriorVerdicts) {
  const auto e = fixed_point(kExample2, FixedPointKind::Interior);
  const auto sink = classify(kExample2, Discretization(0.8, 0.05), e);
  EXPECT_EQ(sink.classification, Classification::Sink);
  EXPECT_NEAR(sink.moduli[0], 0.99930, 5e-5);
  EXPECT_FALSE(sink.theorem_disagrees);
  const auto lost = classify(kExample2, Discretization(0.8, 0.08), e);
  EXPECT_NE(lost.classification, Classification::Sink);
  // the loss of stability happens through a complex pair
  EXPECT_NE(lost.eigenvalues[0].imag(), 0.0);

  const auto e3 = fixed_point(kExample3, FixedPointKind::Interior);
  EXPECT_NEAR(classify(kExample3, Discretization(0.85, 0.01), e3).moduli[0], 0.99758, 1e-5);
  EXPECT_NEAR(classify(kExample3, Discretization(0.85, 0.04), e3).moduli[0], 1.0344, 1e-4);
}

TEST(Classify, PlanarQuadraticFactorIsReported) {
  const auto e2 = fixed_point(kPlanarSinkSet, FixedPointKind::Planar);
  const auto rep = classify(kPlanarSinkSet, Discretization(0.8, 0.85), e2);
  EXPECT_EQ(rep.classification, Classification::Sink);
  EXPECT_NEAR(rep.moduli[0], 0.98038, 1e-5);
  ASSERT_EQ(rep.quadratic_factor_jury.size(), 2u);
  // the window from the quadratic factor does not cover this sink
  EXPECT_TRUE(rep.theorem_disagrees);

  const auto unstable = classify(kPlanarSet, Discretization(0.8, 0.85),
                                 fixed_point(kPlanarSet, FixedPointKind::Planar));
  EXPECT_NEAR(unstable.moduli[0], 1.12929, 1e-5);
}

TEST(Classify, NonExistingPointThrows) {
  EXPECT_THROW(classify(kAxialSet, Discretization(0.8, 0.1),
                        fixed_point(kAxialSet, FixedPointKind::Planar)),
               NotExistingError);
}

TEST(Thresholds, AxialSetTable) {
  struct Row {
    double alpha, s2, s3, s4;
  };
  const Row rows[] = {{0.3, 21512.58228891321, 0.6972699096409362, 31856.712251752808},
                      {0.4, 1726.2378867306647, 0.7415354682563958, 2317.2983383012365},
                      {0.6, 145.59590919675824, 0.8289023338182594, 177.1753816216752},
                      {0.8, 44.14638948654805, 0.9149783811511399, 51.14884645491652},
                      {0.95, 25.60823525848954, 0.9788330230985574, 28.988411084304108}};
  for (const auto& row : rows) {
    const auto t = thresholds(kAxialSet, row.alpha);
    EXPECT_NEAR(*t.s2, row.s2, 1e-9 * row.s2);
    EXPECT_NEAR(*t.s3, row.s3, 1e-12);
    EXPECT_NEAR(*t.s4, row.s4, 1e-9 * row.s4);
    EXPECT_FALSE(t.s5 || t.s6 || t.s7 || t.s8 || t.s9);
  }
}

TEST(Thresholds, PlanarSetTable) {
  struct Row {
    double alpha, s5, s6, s7;
  };
  const Row rows[] = {{0.3, 0.024822065105434145, 1835634.7081620488, 2.157784802367334},
                      {0.4, 0.06077285909121393, 48464.18694176499, 1.7301642463424498},
                      {0.6, 0.15639463674962453, 1344.9186960662514, 1.458165992926197},
                      {0.8, 0.26193872109496336, 233.91352525585896, 1.3976181602214757},
                      {0.95, 0.34140325795377935, 104.27944694948015, 1.3984186401100118}};
  for (const auto& row : rows) {
    const auto t = thresholds(kPlanarSet, row.alpha);
    EXPECT_NEAR(*t.s5, row.s5, 1e-12);
    EXPECT_NEAR(*t.s6, row.s6, 1e-9 * row.s6);
    EXPECT_NEAR(*t.s7, row.s7, 1e-12);
    EXPECT_FALSE(t.s4.has_value());
  }
}

TEST(Thresholds, InteriorBoundsExample2) {
  struct Row {
    double alpha, s8, s9;
  };
  // s9 located independently from the characteristic polynomial of the numeric Jacobian
  const Row rows[] = {{0.3, 0.007378272201583025, 0.0009808765066621251},
                      {0.4, 0.02446511382306163, 0.005386317941120062},
                      {0.6, 0.08526685352485375, 0.031089237232490564},
                      {0.8, 0.16619520474215851, 0.07798137007111088},
                      {0.95, 0.23274667267878843, 0.12306779690122943}};
  for (const auto& row : rows) {
    const auto t = thresholds(kExample2, row.alpha);
    EXPECT_NEAR(*t.s8, row.s8, 1e-12);
    ASSERT_TRUE(t.s9.has_value());
    EXPECT_NEAR(*t.s9, row.s9, 2 * kS9Tolerance);
  }
}

TEST(Thresholds, InteriorBoundsExample3) {
  struct Row {
    double alpha, s8, s9;
  };
  const Row rows[] = {{0.95, 0.1454537809995621, 0.024243322703197106},
                      {0.85, 0.1111816593324814, 0.015009120177050117},
                      {0.6, 0.04050693028732305, 0.0023740268017356033},
                      {0.55, 0.02997945124780858, 0.0013576130067938083},
                      {0.45, 0.013641174185664918, 0.00031054661611751094}};
  for (const auto& row : rows) {
    const auto t = thresholds(kExample3, row.alpha);
    EXPECT_NEAR(*t.s8, row.s8, 1e-12);
    ASSERT_TRUE(t.s9.has_value());
    EXPECT_NEAR(*t.s9, row.s9, 2 * kS9Tolerance);
  }
}

TEST(Thresholds, S9IsWhereTheSpectralRadiusCrossesOne) {
  for (const auto& [p, alpha] : {std::pair{kExample2, 0.8}, std::pair{kExample3, 0.85},
                                 std::pair{kExample2, 0.4}, std::pair{kExample3, 0.6}}) {
    const auto s9 = *thresholds(p, alpha).s9;
    const auto e = fixed_point(p, FixedPointKind::Interior);
    const auto below = classify(p, Discretization(alpha, s9 * (1.0 - 1e-3)), e);
    const auto above = classify(p, Discretization(alpha, s9 * (1.0 + 1e-3)), e);
    EXPECT_LT(below.moduli[0], 1.0);
    EXPECT_GT(above.moduli[0], 1.0);
  }
}

TEST(Thresholds, UnitOrderClosedForm) {
  ModelParams p = kAxialSet;
  p.r = 2.0;
  EXPECT_EQ(*thresholds(p, 1.0).s3, 1.0);
}

TEST(Thresholds, S9RootBelowFirstGridPoint) {
  // search interval far wider than the root: the first grid cell is rescanned
  const auto wide = find_s9(kExample3, 0.45, 5.0);
  ASSERT_TRUE(wide.has_value());
  EXPECT_NEAR(*wide, 0.00031054661611751094, 2 * kS9Tolerance);
}

TEST(Thresholds, S9AbsentWhenMarginStaysPositive) {
  EXPECT_FALSE(find_s9(kExample2, 0.8, 0.05).has_value());
  const auto t = thresholds(kExample2, 0.8, 0.05);
  EXPECT_FALSE(t.s9.has_value());
  EXPECT_EQ(*t.interior_bound(), *t.s8);
}

TEST(Thresholds, RejectsBadOrder) {
  EXPECT_THROW(thresholds(kExample2, 0.0), DomainError);
  EXPECT_THROW(thresholds(kExample2, 1.5), DomainError);
}

TEST(Property, InteriorBoundIncreasesWithOrder) {
  for (const auto& p : {kExample2, kExample3}) {
    double prev = 0.0;
    for (int i = 0; i <= 70; ++i) {
      const double alpha = 0.3 + 0.01 * i;
      const double bound = *thresholds(p, alpha).interior_bound();
      EXPECT_GT(bound, prev) << "alpha " << alpha;
      prev = bound;
    }
  }
}
