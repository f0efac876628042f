#include <gtest/gtest.h>

#include <thread>
#include <vector>

#include "valq/errors.hpp"
#include "valq/numerics.hpp"

using namespace valq;

namespace {

BigReal ulp_bound(Precision prec, long slack = 4) { return ldexp(BigReal(1L, 64), -static_cast<long>(prec) + slack); }

}  // namespace

TEST(BigReal, PiMatchesKnownDigits) {
  const BigReal pi = const_pi(256);
  EXPECT_EQ(pi.to_string(40), "3.141592653589793238462643383279502884197");
}

TEST(BigReal, ArithmeticUsesLargerPrecision) {
  BigReal a(1L, 64), b(3L, 300);
  EXPECT_EQ((a / b).precision(), 300);
  EXPECT_EQ((b - a).precision(), 300);
}

TEST(BigReal, ElementaryIdentities) {
  const Precision p = 200;
  const BigReal x = BigReal::parse("1.2345678901234567890123456789", p);
  EXPECT_LT(abs(exp(log(x, p), p) - x), ulp_bound(p));
  const BigReal s = sin(x, p), c = cos(x, p);
  EXPECT_LT(abs(s * s + c * c - BigReal(1L, p)), ulp_bound(p));
  const BigReal r = sqrt(BigReal(2L, p), p);
  EXPECT_LT(abs(r * r - BigReal(2L, p)), ulp_bound(p));
  EXPECT_LT(abs(ldexp(atan(BigReal(1L, p), p), 2) - const_pi(p)), ulp_bound(p));
}

TEST(BigReal, ParseAndPrintRoundTrip) {
  const BigReal x = BigReal::parse("706.3248135408125820559603", 192);
  EXPECT_EQ(x.to_string(25), "706.3248135408125820559603");
  EXPECT_EQ(BigReal::parse("-0.000123", 64).to_string(3), "-0.000123");
  EXPECT_EQ(BigReal(1e-30, 64).to_string(2), "1.0e-30");
  EXPECT_EQ(BigReal(0L, 64).to_string(5), "0");
  EXPECT_THROW(BigReal::parse("12x", 64), ParseError);
  EXPECT_THROW(BigReal::parse("", 64), ParseError);
}

TEST(BigReal, ExpOutOfRangeThrows) {
  EXPECT_THROW(exp(BigReal(1e30, 64), 64), RangeError);
  EXPECT_THROW(exp(BigReal(-1e30, 64), 64), RangeError);
}

TEST(BigReal, CopyAndMoveKeepValueAndPrecision) {
  BigReal a = BigReal::parse("2.5", 150);
  BigReal b(a);
  BigReal c(std::move(a));
  EXPECT_EQ(b, c);
  EXPECT_EQ(c.precision(), 150);
  BigReal d(10);
  d = b;
  EXPECT_EQ(d.precision(), 150);
  EXPECT_EQ(BigReal(b, 20).precision(), 20);
}

TEST(BigComplex, FieldOperations) {
  const Precision p = 160;
  const BigComplex z(BigReal(3L, p), BigReal(-4L, p));
  const BigComplex w(BigReal::parse("0.25", p), BigReal::parse("1.5", p));
  EXPECT_EQ(abs(z).to_double(), 5.0);
  EXPECT_EQ(norm(z).to_double(), 25.0);
  const BigComplex q = z / w;
  const BigComplex back = q * w;
  EXPECT_LT(abs(back - z), ulp_bound(p, 8));
  EXPECT_EQ(conj(z).im.to_double(), 4.0);
}

TEST(BigComplex, EulerIdentity) {
  const Precision p = 128;
  const BigComplex ipi(BigReal(0L, p), const_pi(p));
  const BigComplex e = exp_complex(ipi, p);
  EXPECT_LT(abs(e.re + BigReal(1L, p)), ulp_bound(p));
  EXPECT_LT(abs(e.im), ulp_bound(p));
}

TEST(Precision, DigitsAndBits) {
  EXPECT_EQ(digits_for_bits(192), 57);
  EXPECT_GE(digits_for_bits(bits_for_digits(25)), 25);
}

TEST(BigReal, IndependentOfOtherThreads) {
  // Precision is per value; concurrent work at other precisions cannot leak in.
  std::vector<std::string> results(4);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([t, &results] {
      const Precision p = 64 + 64 * t;
      BigReal acc(0L, p);
      for (int k = 1; k <= 200; ++k) acc += BigReal(1L, p) / BigReal(static_cast<long>(k) * k, p);
      results[static_cast<std::size_t>(t)] = acc.to_string(15);
    });
  }
  for (auto& th : threads) th.join();
  for (const std::string& r : results) EXPECT_EQ(r, results[0]);
}
