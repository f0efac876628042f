// The elliptic modular function j(tau) = 1/q + 744 + 196884 q + ...
//
// Evaluation reduces tau to the standard fundamental domain, where
// |q| <= exp(-pi sqrt(3)), and sums the q-expansion with a tail bound based
// on c(n) <= exp(4 pi sqrt(n)).
#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "valq/numerics.hpp"
#include "valq/quadratic.hpp"

namespace valq {

struct JSeries {
  // coeffs[k] = c(k - 1), k = 0..N+1
  std::vector<Integer> coeffs;

  std::size_t max_index() const { return coeffs.size() - 2; }
  const Integer& operator()(long n) const { return coeffs.at(static_cast<std::size_t>(n + 1)); }
};

// Exact coefficients c(-1..N) of E4^3 / Delta.
JSeries j_coefficients(std::size_t n_max);

// Process-wide read-only table holding at least c(-1..n_max).
std::shared_ptr<const JSeries> shared_j_coefficients(std::size_t n_max);

struct Reduction {
  BigComplex tau;
  GL2Matrix gamma;  // tau = gamma * input
};

// Throws DomainError when Im(tau) <= 0.
Reduction reduce_to_fd(const BigComplex& tau, Precision prec);

// |result - j(tau)| <= 2^-prec * max(1, |j(tau)|). Throws DomainError when Im(tau) <= 0.
BigComplex j_eval(const BigComplex& tau, Precision prec);

// Smallest N with sum_{n > N} exp(4 pi sqrt(n)) |q|^n below 2^-tol_bits,
// where log_abs_q = log|q| < 0.
std::size_t j_terms_needed(double log_abs_q, double tol_bits);

// Reusable evaluator with preallocated scratch at a fixed working precision.
// Not thread-safe; create one per worker.
class JEvaluator {
 public:
  explicit JEvaluator(Precision prec);

  Precision precision() const { return prec_; }

  // j(x + iy), y > 0, with absolute truncation error below 2^-abs_tol_bits.
  // Rounding error is relative to the working precision.
  void evaluate(BigComplex& out, const BigReal& x, const BigReal& y, double abs_tol_bits);

 private:
  void ensure_terms(std::size_t n);
  void reduce(BigReal& x, BigReal& y);

  Precision prec_;
  std::vector<BigReal> coeffs_;  // c(1..), converted at prec_
  BigReal x_, y_, t0_, t1_, t2_, two_pi_, one_minus_tol_;
  BigComplex q_, acc_;
};

}  // namespace valq
