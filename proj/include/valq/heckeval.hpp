// Values of j at real quadratic irrationalities.
//
// For w with conjugate w', delta = sign(w - w') and eps the norm-one
// generator of the unit group of the order of discriminant disc(w),
//
//   tau(u) = (w - delta w' i e^u) / (1 - delta i e^u)
//
// runs along the geodesic semicircle from w' to w, and u -> j(tau(u)) is
// periodic with period 2 log eps and analytic in the strip |Im u| < pi/2.
// val(w) is its mean over one period; a_n(w) are the Fourier coefficients of
// the expansion in exp(2 pi i n u / (2 log eps)) on the unshifted line,
// normalized so a_0 = val(w).
//
// The mean is computed with the periodic trapezoid rule on the half-open
// period [-log eps, log eps), doubling the node count until two successive
// results agree to the target.
#pragma once

#include <cstddef>
#include <vector>

#include "valq/numerics.hpp"
#include "valq/quadratic.hpp"

namespace valq {

struct GeodesicContext {
  QuadIrr w;
  BigReal w_value;       // w
  BigReal w_conj_value;  // w'
  BigReal center;        // (w + w') / 2
  BigReal half_width;    // (w - w') / 2, signed
  int delta = 1;
  FundamentalUnit unit;
  BigReal eps1_log;      // log eps at working precision
  Precision target = 0;
  Precision working = 0;
  int guard_bits = 0;    // ceil(log2 eps) + 32 + bit length of |a|
  int cancel_bits = 0;   // log2 of the largest |j| on the closed geodesic, rounded up
};

GeodesicContext make_geodesic_context(const QuadIrr& w, Precision target);

// Node count of the first trapezoid sum: max(64, 4 ceil(log eps (target + cancel_bits) log 2 / pi^2)).
std::size_t default_initial_nodes(const GeodesicContext& ctx);

// tau(u) for real u; Im(tau) > 0.
BigComplex geodesic_point(const GeodesicContext& ctx, const BigReal& u);

struct QuadratureOptions {
  std::size_t initial_nodes = 0;      // 0: choose from log eps and the target
  std::size_t max_nodes = std::size_t{1} << 22;
  int min_doublings = 1;
};

struct ValResult {
  BigComplex value;
  long n = 0;
  std::size_t nodes_used = 0;
  BigReal est_error;                 // |value_M - value_{M/2}| at the last doubling
  QuadIrr representative;            // the point actually integrated
  Precision working_precision = 0;
  std::vector<double> error_history;  // log2 |value_M - value_{M/2}| per doubling
};

// a_0 = val(w) to absolute error below 2^-target.
// Throws ConvergenceError when the node budget runs out.
ValResult val(const QuadIrr& w, Precision target, const QuadratureOptions& opts = {});

// a_n(w); fourier_coeff(w, 0, p) is val(w, p).
ValResult fourier_coeff(const QuadIrr& w, long n, Precision target, const QuadratureOptions& opts = {});

struct ClassValue {
  FormClass cls;
  ValResult result;
};

// val at one representative per narrow class of discriminant D, in
// narrow_class_reps order. `jobs` workers evaluate classes concurrently.
std::vector<ClassValue> val_classes(const Integer& D, Precision target, unsigned jobs = 1,
                                    const QuadratureOptions& opts = {});

}  // namespace valq
