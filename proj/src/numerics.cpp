#include "valq/numerics.hpp"

#include <cmath>
#include <ostream>
#include <string>
#include <utility>

#include "valq/errors.hpp"

namespace valq {

BigReal::BigReal(Precision prec) {
  mpfr_init2(v_, prec);
  mpfr_set_zero(v_, 1);
}

BigReal::BigReal(long value, Precision prec) {
  mpfr_init2(v_, prec);
  mpfr_set_si(v_, value, MPFR_RNDN);
}

BigReal::BigReal(double value, Precision prec) {
  mpfr_init2(v_, prec);
  mpfr_set_d(v_, value, MPFR_RNDN);
}

BigReal::BigReal(const mpz_class& value, Precision prec) {
  mpfr_init2(v_, prec);
  mpfr_set_z(v_, value.get_mpz_t(), MPFR_RNDN);
}

BigReal::BigReal(const BigReal& other, Precision prec) {
  mpfr_init2(v_, prec);
  mpfr_set(v_, other.v_, MPFR_RNDN);
}

BigReal::BigReal(const BigReal& other) {
  mpfr_init2(v_, other.precision());
  mpfr_set(v_, other.v_, MPFR_RNDN);
}

BigReal::BigReal(BigReal&& other) noexcept {
  mpfr_init2(v_, MPFR_PREC_MIN);
  mpfr_swap(v_, other.v_);
}

BigReal& BigReal::operator=(const BigReal& other) {
  if (this != &other) {
    mpfr_set_prec(v_, other.precision());
    mpfr_set(v_, other.v_, MPFR_RNDN);
  }
  return *this;
}

BigReal& BigReal::operator=(BigReal&& other) noexcept {
  mpfr_swap(v_, other.v_);
  return *this;
}

BigReal::~BigReal() { mpfr_clear(v_); }

long BigReal::exponent2() const {
  if (!mpfr_regular_p(v_)) return mpfr_zero_p(v_) ? -(1L << 40) : (1L << 40);
  return mpfr_get_exp(v_) - 1;
}

namespace {

Precision max_prec(const BigReal& a, const BigReal& b) {
  return a.precision() > b.precision() ? a.precision() : b.precision();
}

}  // namespace

BigReal& BigReal::operator+=(const BigReal& rhs) {
  if (rhs.precision() > precision()) mpfr_prec_round(v_, rhs.precision(), MPFR_RNDN);
  mpfr_add(v_, v_, rhs.v_, MPFR_RNDN);
  return *this;
}

BigReal& BigReal::operator-=(const BigReal& rhs) {
  if (rhs.precision() > precision()) mpfr_prec_round(v_, rhs.precision(), MPFR_RNDN);
  mpfr_sub(v_, v_, rhs.v_, MPFR_RNDN);
  return *this;
}

BigReal& BigReal::operator*=(const BigReal& rhs) {
  if (rhs.precision() > precision()) mpfr_prec_round(v_, rhs.precision(), MPFR_RNDN);
  mpfr_mul(v_, v_, rhs.v_, MPFR_RNDN);
  return *this;
}

BigReal& BigReal::operator/=(const BigReal& rhs) {
  if (rhs.precision() > precision()) mpfr_prec_round(v_, rhs.precision(), MPFR_RNDN);
  mpfr_div(v_, v_, rhs.v_, MPFR_RNDN);
  return *this;
}

BigReal BigReal::operator-() const {
  BigReal r(precision());
  mpfr_neg(r.v_, v_, MPFR_RNDN);
  return r;
}

BigReal operator+(const BigReal& a, const BigReal& b) {
  BigReal r(max_prec(a, b));
  mpfr_add(r.get(), a.get(), b.get(), MPFR_RNDN);
  return r;
}

BigReal operator-(const BigReal& a, const BigReal& b) {
  BigReal r(max_prec(a, b));
  mpfr_sub(r.get(), a.get(), b.get(), MPFR_RNDN);
  return r;
}

BigReal operator*(const BigReal& a, const BigReal& b) {
  BigReal r(max_prec(a, b));
  mpfr_mul(r.get(), a.get(), b.get(), MPFR_RNDN);
  return r;
}

BigReal operator/(const BigReal& a, const BigReal& b) {
  BigReal r(max_prec(a, b));
  mpfr_div(r.get(), a.get(), b.get(), MPFR_RNDN);
  return r;
}

std::string BigReal::to_string(int digits) const {
  if (digits < 1) digits = 1;
  if (mpfr_nan_p(v_)) return "nan";
  if (mpfr_inf_p(v_)) return mpfr_sgn(v_) > 0 ? "inf" : "-inf";
  if (mpfr_zero_p(v_)) return "0";

  mpfr_exp_t exp10 = 0;
  char* raw = mpfr_get_str(nullptr, &exp10, 10, static_cast<size_t>(digits), v_, MPFR_RNDN);
  std::string mant(raw);
  mpfr_free_str(raw);

  std::string sign;
  if (!mant.empty() && mant[0] == '-') {
    sign = "-";
    mant.erase(0, 1);
  }
  // value = 0.mant * 10^exp10
  std::string out;
  if (exp10 > 0 && exp10 <= digits) {
    out = mant.substr(0, static_cast<size_t>(exp10));
    if (static_cast<size_t>(exp10) < mant.size()) out += "." + mant.substr(static_cast<size_t>(exp10));
  } else if (exp10 <= 0 && exp10 > -6) {
    out = "0." + std::string(static_cast<size_t>(-exp10), '0') + mant;
  } else {
    out = mant.substr(0, 1);
    if (mant.size() > 1) out += "." + mant.substr(1);
    out += "e" + std::to_string(exp10 - 1);
  }
  return sign + out;
}

BigReal BigReal::parse(std::string_view text, Precision prec) {
  std::string s(text);
  BigReal r(prec);
  if (s.empty() || mpfr_set_str(r.v_, s.c_str(), 10, MPFR_RNDN) != 0) {
    throw ParseError("not a decimal number: '" + s + "'");
  }
  return r;
}

std::ostream& operator<<(std::ostream& os, const BigReal& x) {
  return os << x.to_string(digits_for_bits(x.precision()));
}

BigReal abs(const BigReal& x) {
  BigReal r(x.precision());
  mpfr_abs(r.get(), x.get(), MPFR_RNDN);
  return r;
}

BigReal sqrt(const BigReal& x, Precision prec) {
  if (x.sign() < 0) throw DomainError("sqrt of a negative number");
  BigReal r(prec);
  mpfr_sqrt(r.get(), x.get(), MPFR_RNDN);
  return r;
}

BigReal exp(const BigReal& x, Precision prec) {
  BigReal r(prec);
  mpfr_exp(r.get(), x.get(), MPFR_RNDN);
  if (x.is_finite() && (mpfr_inf_p(r.get()) || r.is_zero())) {
    throw RangeError("exp: result outside the exponent range");
  }
  return r;
}

BigReal log(const BigReal& x, Precision prec) {
  if (x.sign() <= 0) throw DomainError("log of a non-positive number");
  BigReal r(prec);
  mpfr_log(r.get(), x.get(), MPFR_RNDN);
  return r;
}

BigReal sin(const BigReal& x, Precision prec) {
  BigReal r(prec);
  mpfr_sin(r.get(), x.get(), MPFR_RNDN);
  return r;
}

BigReal cos(const BigReal& x, Precision prec) {
  BigReal r(prec);
  mpfr_cos(r.get(), x.get(), MPFR_RNDN);
  return r;
}

BigReal atan(const BigReal& x, Precision prec) {
  BigReal r(prec);
  mpfr_atan(r.get(), x.get(), MPFR_RNDN);
  return r;
}

BigReal const_pi(Precision prec) {
  BigReal r(prec);
  mpfr_const_pi(r.get(), MPFR_RNDN);
  return r;
}

BigReal ldexp(const BigReal& x, long e) {
  BigReal r(x.precision());
  mpfr_mul_2si(r.get(), x.get(), e, MPFR_RNDN);
  return r;
}

BigReal round_to(const BigReal& x, Precision prec) { return BigReal(x, prec); }

BigComplex& BigComplex::operator+=(const BigComplex& rhs) {
  re += rhs.re;
  im += rhs.im;
  return *this;
}

BigComplex& BigComplex::operator-=(const BigComplex& rhs) {
  re -= rhs.re;
  im -= rhs.im;
  return *this;
}

BigComplex& BigComplex::operator*=(const BigComplex& rhs) {
  BigReal r = re * rhs.re - im * rhs.im;
  BigReal i = re * rhs.im + im * rhs.re;
  re = std::move(r);
  im = std::move(i);
  return *this;
}

BigComplex operator/(const BigComplex& a, const BigComplex& b) {
  BigReal d = norm(b);
  if (d.is_zero()) throw DomainError("complex division by zero");
  BigReal r = (a.re * b.re + a.im * b.im) / d;
  BigReal i = (a.im * b.re - a.re * b.im) / d;
  return {std::move(r), std::move(i)};
}

BigComplex conj(const BigComplex& z) { return {z.re, -z.im}; }

BigReal abs(const BigComplex& z) {
  BigReal r(z.precision());
  mpfr_hypot(r.get(), z.re.get(), z.im.get(), MPFR_RNDN);
  return r;
}

BigReal norm(const BigComplex& z) { return z.re * z.re + z.im * z.im; }

BigComplex exp_complex(const BigComplex& z, Precision prec) {
  // Extra bits so the product of modulus and phase stays within a few ulps.
  const Precision work = prec + 8;
  BigReal modulus = exp(BigReal(z.re, work), work);
  BigReal s(work), c(work);
  mpfr_sin_cos(s.get(), c.get(), z.im.get(), MPFR_RNDN);
  BigComplex out(prec);
  mpfr_mul(out.re.get(), modulus.get(), c.get(), MPFR_RNDN);
  mpfr_mul(out.im.get(), modulus.get(), s.get(), MPFR_RNDN);
  return out;
}

Precision bits_for_digits(int digits) {
  return static_cast<Precision>(std::ceil(digits * 3.321928094887362));
}

int digits_for_bits(Precision bits) {
  return static_cast<int>(std::floor(static_cast<double>(bits) * 0.30102999566398120));
}

}  // namespace valq
