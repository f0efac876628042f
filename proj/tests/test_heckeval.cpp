#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "valq/errors.hpp"
#include "valq/heckeval.hpp"

using namespace valq;

namespace {

constexpr Precision kTarget = 96;

QuadIrr cf(std::initializer_list<long> period) {
  const std::vector<long> v(period);
  return cf_value(v);
}

double distance(const BigComplex& x, const BigComplex& y) { return abs(x - y).to_double(); }

double distance(const BigComplex& x, const std::string& re, const std::string& im = "0") {
  return distance(x, BigComplex(BigReal::parse(re, 192), BigReal::parse(im, 192)));
}

}  // namespace

TEST(Geodesic, PointsLieOnTheSemicircle) {
  const QuadIrr w = cf({3, 1});
  const GeodesicContext ctx = make_geodesic_context(w, kTarget);
  for (double u : {-2.0, -0.5, 0.0, 0.7, 3.0}) {
    const BigComplex tau = geodesic_point(ctx, BigReal(u, ctx.working));
    EXPECT_GT(tau.im.sign(), 0);
    const BigComplex centre(ctx.center, BigReal(0L, ctx.working));
    EXPECT_NEAR(abs(tau - centre).to_double(), std::fabs(ctx.half_width.to_double()), 1e-20);
  }
  const BigComplex near_w = geodesic_point(ctx, BigReal(-40.0, ctx.working));
  const BigComplex near_w_conj = geodesic_point(ctx, BigReal(40.0, ctx.working));
  EXPECT_NEAR(near_w.re.to_double(), ctx.w_value.to_double(), 1e-12);
  EXPECT_NEAR(near_w_conj.re.to_double(), ctx.w_conj_value.to_double(), 1e-12);
}

TEST(Val, MatchesPublishedValues) {
  struct Row {
    std::initializer_list<long> period;
    const char* value;
  };
  const std::array<Row, 6> rows{{
      {{1}, "706.3248135408125820559603"},
      {{2}, "709.8928909199123368059253"},
      {{3}, "713.2227192129106375260272"},
      {{2, 1}, "709.7923590080320102702826"},
      {{4, 2}, "713.8258642873420364918902"},
      {{2, 1, 1, 1}, "708.1560508416661547689422"},
  }};
  for (const Row& r : rows) {
    const ValResult res = val(cf(r.period), kTarget);
    EXPECT_LT(distance(res.value, r.value), 1e-21) << r.value;
    EXPECT_LT(res.est_error.to_double(), std::ldexp(1.0, -static_cast<int>(kTarget)));
  }
}

TEST(Val, LogEpsMatchesPublishedValue) {
  const GeodesicContext ctx = make_geodesic_context(cf({2, 1, 1, 1, 1, 1, 1}), kTarget);
  EXPECT_NEAR(ctx.eps1_log.to_double(), 7.4764720605230, 1e-12);
}

TEST(Val, ModularInvariance) {
  const QuadIrr w = cf({3, 1});
  const BigComplex base = val(w, kTarget).value;
  const std::array<GL2Matrix, 4> gammas{{{2, 1, 1, 1}, {1, 0, 3, 1}, {1, 5, 0, 1}, {0, -1, 1, 2}}};
  for (const GL2Matrix& g : gammas) {
    const QuadIrr moved = act(g, w);
    EXPECT_LT(distance(val(moved, kTarget).value, base), 1e-25) << moved.to_string();
  }
}

TEST(Val, ConjugateAndNegation) {
  // A class of discriminant 136 whose value is not real.
  const QuadIrr w = parse_surd("(-1+sqrt(34))/11");
  const BigComplex v = val(w, kTarget).value;
  EXPECT_LT(distance(v, "710.600451944002489", "-0.5197938281961062"), 1e-14);
  EXPECT_LT(distance(val(w.conjugate(), kTarget).value, v), 1e-25);
  EXPECT_LT(distance(val(w.conjugate().negated(), kTarget).value, conj(v)), 1e-25);
}

TEST(Val, RealWhenUnitHasNormMinusOne) {
  for (const char* D : {"5", "13", "29", "145", "421"}) {
    for (const ClassValue& cv : val_classes(Integer(D), kTarget)) {
      EXPECT_LT(abs(cv.result.value.im).to_double(), 1e-25) << "D=" << D;
    }
  }
}

TEST(Val, RealForClassesOfOrderAtMostTwo) {
  for (const char* D : {"136", "520", "96", "1768"}) {
    for (const ClassValue& cv : val_classes(Integer(D), kTarget)) {
      if (class_order(cv.cls) <= 2) EXPECT_LT(abs(cv.result.value.im).to_double(), 1e-25) << "D=" << D;
    }
  }
}

TEST(Val, ClassValuesForDiscriminant145) {
  const std::vector<ClassValue> values = val_classes(Integer(145), kTarget, 2);
  ASSERT_EQ(values.size(), 4u);
  std::vector<double> got;
  for (const ClassValue& cv : values) got.push_back(cv.result.value.re.to_double());
  std::sort(got.begin(), got.end());
  EXPECT_NEAR(got[0], 708.568357453922648, 1e-11);
  EXPECT_NEAR(got[1], 715.729503630174741, 1e-11);
  EXPECT_NEAR(got[2], 715.729503630174741, 1e-11);
  EXPECT_NEAR(got[3], 720.484777347009813, 1e-11);
}

TEST(Val, ParallelClassesMatchSerial) {
  const auto serial = val_classes(Integer(520), kTarget, 1);
  const auto parallel = val_classes(Integer(520), kTarget, 3);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].cls, parallel[i].cls);
    EXPECT_EQ(serial[i].result.value.re, parallel[i].result.value.re);
    EXPECT_EQ(serial[i].result.value.im, parallel[i].result.value.im);
  }
}

TEST(FourierCoeff, ZeroIsVal) {
  const QuadIrr w = cf({4, 1});
  EXPECT_EQ(fourier_coeff(w, 0, kTarget).value.re, val(w, kTarget).value.re);
}

TEST(FourierCoeff, TransformationLaw) {
  const QuadIrr w = cf({3, 1});
  const Precision p = kTarget;
  const GeodesicContext ctx = make_geodesic_context(w, p);
  const BigReal pi = const_pi(ctx.working);
  const std::array<GL2Matrix, 3> gammas{{{2, 1, 1, 1}, {1, 0, 3, 1}, {1, 4, 0, 1}}};
  for (long n : {1L, 2L, -1L}) {
    const BigComplex an = fourier_coeff(w, n, p).value;
    for (const GL2Matrix& g : gammas) {
      const QuadIrr moved = act(g, w);
      const BigComplex got = fourier_coeff(moved, n, p).value;
      // |(c w' + d) / (c w + d)|^{-pi i n / log eps}
      const BigReal c(g.r, ctx.working), d(g.s, ctx.working);
      const BigReal ratio = abs((c * ctx.w_conj_value + d) / (c * ctx.w_value + d));
      const BigReal angle = -pi * BigReal(n, ctx.working) * log(ratio, ctx.working) / ctx.eps1_log;
      const BigComplex factor(cos(angle, ctx.working), sin(angle, ctx.working));
      const BigComplex expected = factor * an;
      EXPECT_LT((abs(got - expected) / abs(an)).to_double(), 1e-20) << "n=" << n << " " << moved.to_string();
    }
  }
}

TEST(FourierCoeff, NonzeroCoefficientsDependOnThePoint) {
  const QuadIrr w = cf({3, 1});
  const BigComplex a1 = fourier_coeff(w, 1, kTarget).value;
  const BigComplex a1_moved = fourier_coeff(act(GL2Matrix{1, 0, 3, 1}, w), 1, kTarget).value;
  EXPECT_GT(abs(a1 - a1_moved).to_double(), 1e-6);
}

TEST(Quadrature, ConvergenceErrorWhenBudgetIsTooSmall) {
  QuadratureOptions opts;
  opts.initial_nodes = 8;
  opts.max_nodes = 16;
  EXPECT_THROW(val(cf({50, 1}), 128, opts), ConvergenceError);
}

TEST(Quadrature, WorkingPrecisionExceedsTarget) {
  const ValResult r = val(cf({10}), kTarget);
  EXPECT_GT(r.working_precision, kTarget);
  EXPECT_FALSE(r.error_history.empty());
  EXPECT_EQ(r.representative, cf({10}));
}
