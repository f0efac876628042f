#include "valq/modular.hpp"

#include <cmath>
#include <mutex>

#include "valq/errors.hpp"

namespace valq {

namespace {

using Series = std::vector<Integer>;

Series truncated_product(const Series& x, const Series& y, std::size_t len) {
  Series out(len, 0);
  for (std::size_t i = 0; i < len && i < x.size(); ++i) {
    if (x[i] == 0) continue;
    for (std::size_t j = 0; i + j < len && j < y.size(); ++j) out[i + j] += x[i] * y[j];
  }
  return out;
}

Integer sigma3(std::size_t n) {
  Integer s = 0;
  for (std::size_t d = 1; d * d <= n; ++d) {
    if (n % d) continue;
    Integer dd(static_cast<unsigned long>(d));
    s += dd * dd * dd;
    const std::size_t e = n / d;
    if (e != d) {
      Integer ee(static_cast<unsigned long>(e));
      s += ee * ee * ee;
    }
  }
  return s;
}

// prod_{n >= 1} (1 - q^n) by the pentagonal number theorem.
Series euler_product(std::size_t len) {
  Series e(len, 0);
  e[0] = 1;
  for (long k = 1;; ++k) {
    const long sign = (k % 2) ? -1 : 1;
    const std::size_t p1 = static_cast<std::size_t>(k * (3 * k - 1) / 2);
    const std::size_t p2 = static_cast<std::size_t>(k * (3 * k + 1) / 2);
    if (p1 >= len) break;
    e[p1] += sign;
    if (p2 < len) e[p2] += sign;
  }
  return e;
}

}  // namespace

JSeries j_coefficients(std::size_t n_max) {
  const std::size_t len = n_max + 2;  // q * j has degrees 0..n_max+1
  Series e4(len, 0);
  e4[0] = 1;
  for (std::size_t n = 1; n < len; ++n) e4[n] = 240 * sigma3(n);
  const Series e4_cubed = truncated_product(truncated_product(e4, e4, len), e4, len);

  const Series eta = euler_product(len);
  const Series e2 = truncated_product(eta, eta, len);
  const Series e4p = truncated_product(e2, e2, len);
  const Series e8 = truncated_product(e4p, e4p, len);
  const Series e16 = truncated_product(e8, e8, len);
  const Series e24 = truncated_product(e16, e8, len);

  // q j = E4^3 / prod (1 - q^n)^24, leading coefficient of the divisor is 1.
  JSeries out;
  out.coeffs.assign(len, 0);
  for (std::size_t k = 0; k < len; ++k) {
    Integer acc = e4_cubed[k];
    for (std::size_t i = 1; i <= k; ++i) acc -= e24[i] * out.coeffs[k - i];
    out.coeffs[k] = acc;
  }
  return out;
}

std::shared_ptr<const JSeries> shared_j_coefficients(std::size_t n_max) {
  static std::mutex mutex;
  static std::shared_ptr<const JSeries> table;
  std::lock_guard<std::mutex> lock(mutex);
  if (!table || table->max_index() < n_max) {
    const std::size_t grown = table ? std::max(n_max, 2 * table->max_index()) : std::max<std::size_t>(n_max, 64);
    table = std::make_shared<const JSeries>(j_coefficients(grown));
  }
  return table;
}

std::size_t j_terms_needed(double log_abs_q, double tol_bits) {
  const double target = -tol_bits * std::log(2.0) - 2.0;
  constexpr double four_pi = 4.0 * 3.14159265358979323846;
  // Past n, consecutive bound terms shrink by at least half once
  // 4 pi (sqrt(n+1) - sqrt(n)) + log|q| <= -log 2; then the tail is at most
  // twice its first term.
  for (std::size_t n = 1;; ++n) {
    const double dn = static_cast<double>(n);
    const double log_term = four_pi * std::sqrt(dn) + dn * log_abs_q;
    const double log_ratio = four_pi * (std::sqrt(dn + 1.0) - std::sqrt(dn)) + log_abs_q;
    if (log_term < target && log_ratio < -std::log(2.0)) return n - 1;
    if (n > 100000) throw ResourceError("j series: too many terms requested");
  }
}

Reduction reduce_to_fd(const BigComplex& tau, Precision prec) {
  if (tau.im.sign() <= 0) throw DomainError("reduce_to_fd: Im(tau) must be positive");
  const Precision work = prec + 16;
  BigReal x(tau.re, work), y(tau.im, work);
  const BigReal tol = ldexp(BigReal(1L, work), -static_cast<long>(prec / 2));
  const BigReal one(1L, work), half(0.5, work);
  GL2Matrix gamma;
  BigReal n(work), r2(work);
  for (int iter = 0;; ++iter) {
    if (iter > 100000) throw ResourceError("reduce_to_fd: too many reduction steps");
    mpfr_rint(n.get(), x.get(), MPFR_RNDN);
    x -= n;
    mpz_class shift;
    mpfr_get_z(shift.get_mpz_t(), n.get(), MPFR_RNDN);
    gamma = GL2Matrix::translation(-shift) * gamma;
    r2 = x * x + y * y;
    if (!(r2 < one - tol)) break;
    x = -x / r2;
    y = y / r2;
    gamma = GL2Matrix::inversion() * gamma;
  }
  // Boundary convention: keep Re = -1/2 and the left half of the unit arc.
  if (x >= half - tol) {
    x -= one;
    gamma = GL2Matrix::translation(-1) * gamma;
  }
  r2 = x * x + y * y;
  if (r2 < one + tol && x > tol) {
    x = -x / r2;
    y = y / r2;
    gamma = GL2Matrix::inversion() * gamma;
  }
  return {BigComplex(BigReal(x, prec), BigReal(y, prec)), gamma};
}

BigComplex j_eval(const BigComplex& tau, Precision prec) {
  if (tau.im.sign() <= 0) throw DomainError("j_eval: Im(tau) must be positive");
  // Reduction amplifies input error by up to 1/Im(tau)^2; large |Re| costs its magnitude.
  const long lost = std::max(0L, -2 * tau.im.exponent2()) + std::max(0L, tau.re.exponent2());
  const Precision work = prec + 24 + lost;
  JEvaluator ev(work);
  BigReal x(tau.re, work), y(tau.im, work);
  BigComplex out(work);
  // Relative tolerance: |j| >= |q|^-1 / 2 once Im >= 1 after reduction.
  Reduction red = reduce_to_fd(BigComplex(x, y), work);
  const double im_reduced = red.tau.im.to_double();
  const double scale_bits = im_reduced >= 1.0 ? 2.0 * M_PI * im_reduced / std::log(2.0) - 1.0 : 0.0;
  ev.evaluate(out, red.tau.re, red.tau.im, static_cast<double>(prec) + 8.0 + scale_bits);
  return {BigReal(out.re, prec), BigReal(out.im, prec)};
}

JEvaluator::JEvaluator(Precision prec)
    : prec_(prec),
      x_(prec),
      y_(prec),
      t0_(prec),
      t1_(prec),
      t2_(prec),
      two_pi_(ldexp(const_pi(prec), 1)),
      one_minus_tol_(prec),
      q_(prec),
      acc_(prec) {
  const BigReal one(1L, prec);
  one_minus_tol_ = one - ldexp(one, -static_cast<long>(prec / 2));
}

void JEvaluator::ensure_terms(std::size_t n) {
  if (coeffs_.size() >= n) return;
  auto table = shared_j_coefficients(n);
  for (std::size_t k = coeffs_.size() + 1; k <= n; ++k) coeffs_.emplace_back((*table)(static_cast<long>(k)), prec_);
}

void JEvaluator::reduce(BigReal& x, BigReal& y) {
  for (int iter = 0;; ++iter) {
    if (iter > 100000) throw ResourceError("j evaluation: too many reduction steps");
    mpfr_rint(t0_.get(), x.get(), MPFR_RNDN);
    mpfr_sub(x.get(), x.get(), t0_.get(), MPFR_RNDN);
    mpfr_sqr(t1_.get(), x.get(), MPFR_RNDN);
    mpfr_fma(t1_.get(), y.get(), y.get(), t1_.get(), MPFR_RNDN);  // |tau|^2
    if (!mpfr_less_p(t1_.get(), one_minus_tol_.get())) return;
    mpfr_div(x.get(), x.get(), t1_.get(), MPFR_RNDN);
    mpfr_neg(x.get(), x.get(), MPFR_RNDN);
    mpfr_div(y.get(), y.get(), t1_.get(), MPFR_RNDN);
  }
}

void JEvaluator::evaluate(BigComplex& out, const BigReal& x, const BigReal& y, double abs_tol_bits) {
  if (y.sign() <= 0) throw DomainError("j evaluation: Im(tau) must be positive");
  mpfr_set(x_.get(), x.get(), MPFR_RNDN);
  mpfr_set(y_.get(), y.get(), MPFR_RNDN);
  reduce(x_, y_);

  // q = exp(-2 pi y) (cos 2 pi x + i sin 2 pi x)
  mpfr_mul(t0_.get(), two_pi_.get(), y_.get(), MPFR_RNDN);
  mpfr_neg(t0_.get(), t0_.get(), MPFR_RNDN);
  const double log_abs_q = mpfr_get_d(t0_.get(), MPFR_RNDN);
  mpfr_exp(t1_.get(), t0_.get(), MPFR_RNDN);  // |q|
  mpfr_mul(t0_.get(), two_pi_.get(), x_.get(), MPFR_RNDN);
  mpfr_sin_cos(q_.im.get(), q_.re.get(), t0_.get(), MPFR_RNDN);
  // 1/q = (cos - i sin) / |q|, kept in out for now.
  mpfr_div(out.re.get(), q_.re.get(), t1_.get(), MPFR_RNDN);
  mpfr_div(out.im.get(), q_.im.get(), t1_.get(), MPFR_RNDN);
  mpfr_neg(out.im.get(), out.im.get(), MPFR_RNDN);
  mpfr_add_ui(out.re.get(), out.re.get(), 744, MPFR_RNDN);
  mpfr_mul(q_.re.get(), q_.re.get(), t1_.get(), MPFR_RNDN);
  mpfr_mul(q_.im.get(), q_.im.get(), t1_.get(), MPFR_RNDN);

  const std::size_t n_terms = j_terms_needed(log_abs_q, abs_tol_bits);
  if (n_terms == 0) return;
  ensure_terms(n_terms);

  // Horner: acc = sum_{n=1}^{N} c(n) q^{n-1}, then multiply by q.
  mpfr_set(acc_.re.get(), coeffs_[n_terms - 1].get(), MPFR_RNDN);
  mpfr_set_zero(acc_.im.get(), 1);
  for (std::size_t n = n_terms - 1; n >= 1; --n) {
    mpfr_fmms(t2_.get(), acc_.re.get(), q_.re.get(), acc_.im.get(), q_.im.get(), MPFR_RNDN);
    mpfr_fmma(acc_.im.get(), acc_.re.get(), q_.im.get(), acc_.im.get(), q_.re.get(), MPFR_RNDN);
    mpfr_add(acc_.re.get(), t2_.get(), coeffs_[n - 1].get(), MPFR_RNDN);
  }
  mpfr_fmms(t2_.get(), acc_.re.get(), q_.re.get(), acc_.im.get(), q_.im.get(), MPFR_RNDN);
  mpfr_fmma(acc_.im.get(), acc_.re.get(), q_.im.get(), acc_.im.get(), q_.re.get(), MPFR_RNDN);
  mpfr_add(out.re.get(), out.re.get(), t2_.get(), MPFR_RNDN);
  mpfr_add(out.im.get(), out.im.get(), acc_.im.get(), MPFR_RNDN);
}

}  // namespace valq
