// Arbitrary-precision real and complex numbers on top of MPFR.
//
// Every analytic function takes its precision (in bits) as an explicit
// argument. Arithmetic operators produce a result at the larger of the two
// operand precisions. Nothing here reads or writes MPFR's global default
// precision, so values can be shared freely between threads.
#pragma once

#include <mpfr.h>

#include <gmpxx.h>

#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>

namespace valq {

using Precision = mpfr_prec_t;

inline constexpr Precision kMinPrecision = MPFR_PREC_MIN;

class BigReal {
 public:
  explicit BigReal(Precision prec);
  BigReal(long value, Precision prec);
  BigReal(double value, Precision prec);
  BigReal(const mpz_class& value, Precision prec);
  BigReal(const BigReal& other, Precision prec);

  BigReal(const BigReal& other);
  BigReal(BigReal&& other) noexcept;
  BigReal& operator=(const BigReal& other);
  BigReal& operator=(BigReal&& other) noexcept;
  ~BigReal();

  Precision precision() const { return mpfr_get_prec(v_); }

  // Raw access for hot loops that work in place on preallocated scratch.
  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  int sign() const { return mpfr_sgn(v_); }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  // log2 |x| rounded down; a very negative number for zero.
  long exponent2() const;

  // `digits` significant decimal digits; fixed notation unless the magnitude
  // makes scientific notation shorter.
  std::string to_string(int digits) const;
  static BigReal parse(std::string_view text, Precision prec);

  BigReal& operator+=(const BigReal& rhs);
  BigReal& operator-=(const BigReal& rhs);
  BigReal& operator*=(const BigReal& rhs);
  BigReal& operator/=(const BigReal& rhs);
  BigReal operator-() const;

  friend BigReal operator+(const BigReal& a, const BigReal& b);
  friend BigReal operator-(const BigReal& a, const BigReal& b);
  friend BigReal operator*(const BigReal& a, const BigReal& b);
  friend BigReal operator/(const BigReal& a, const BigReal& b);

  friend bool operator==(const BigReal& a, const BigReal& b) { return mpfr_equal_p(a.v_, b.v_); }
  friend bool operator<(const BigReal& a, const BigReal& b) { return mpfr_less_p(a.v_, b.v_); }
  friend bool operator>(const BigReal& a, const BigReal& b) { return mpfr_greater_p(a.v_, b.v_); }
  friend bool operator<=(const BigReal& a, const BigReal& b) { return mpfr_lessequal_p(a.v_, b.v_); }
  friend bool operator>=(const BigReal& a, const BigReal& b) { return mpfr_greaterequal_p(a.v_, b.v_); }

 private:
  mpfr_t v_;
};

std::ostream& operator<<(std::ostream& os, const BigReal& x);

BigReal abs(const BigReal& x);
BigReal sqrt(const BigReal& x, Precision prec);
BigReal exp(const BigReal& x, Precision prec);
BigReal log(const BigReal& x, Precision prec);
BigReal sin(const BigReal& x, Precision prec);
BigReal cos(const BigReal& x, Precision prec);
BigReal atan(const BigReal& x, Precision prec);
BigReal const_pi(Precision prec);
BigReal ldexp(const BigReal& x, long e);  // x * 2^e, exact
BigReal round_to(const BigReal& x, Precision prec);

struct BigComplex {
  BigReal re;
  BigReal im;

  explicit BigComplex(Precision prec) : re(prec), im(prec) {}
  BigComplex(BigReal r, BigReal i) : re(std::move(r)), im(std::move(i)) {}

  Precision precision() const { return re.precision() > im.precision() ? re.precision() : im.precision(); }

  BigComplex& operator+=(const BigComplex& rhs);
  BigComplex& operator-=(const BigComplex& rhs);
  BigComplex& operator*=(const BigComplex& rhs);
  BigComplex operator-() const { return {-re, -im}; }

  friend BigComplex operator+(BigComplex a, const BigComplex& b) { return a += b; }
  friend BigComplex operator-(BigComplex a, const BigComplex& b) { return a -= b; }
  friend BigComplex operator*(BigComplex a, const BigComplex& b) { return a *= b; }
  friend BigComplex operator/(const BigComplex& a, const BigComplex& b);
};

BigComplex conj(const BigComplex& z);
BigReal abs(const BigComplex& z);
BigReal norm(const BigComplex& z);  // |z|^2

// e^z. Throws RangeError when the result leaves MPFR's exponent range.
BigComplex exp_complex(const BigComplex& z, Precision prec);

// Decimal bits for a given number of significant digits and vice versa.
Precision bits_for_digits(int digits);
int digits_for_bits(Precision bits);

}  // namespace valq
