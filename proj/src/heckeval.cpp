#include "valq/heckeval.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "valq/errors.hpp"
#include "valq/modular.hpp"
#include "valq/parallel.hpp"

namespace valq {

namespace {

constexpr double kLn2 = 0.69314718055994530942;
constexpr double kPi = 3.14159265358979323846;

int bit_length(const Integer& n) { return n == 0 ? 0 : static_cast<int>(mpz_sizeinbase(n.get_mpz_t(), 2)); }

double log2_of(const BigReal& x) {
  if (x.is_zero()) return -1e9;
  BigReal r(53);
  mpfr_abs(r.get(), x.get(), MPFR_RNDN);
  mpfr_log2(r.get(), r.get(), MPFR_RNDN);
  return r.to_double();
}

// Trapezoid sums of the (optionally phase-weighted) integrand over node sets.
class GeodesicIntegrator {
 public:
  GeodesicIntegrator(const GeodesicContext& ctx, long n)
      : ctx_(ctx),
        n_(n),
        prec_(ctx.working),
        eval_(ctx.working),
        u_(prec_),
        e_(prec_),
        e2_(prec_),
        inv_(prec_),
        tmp_(prec_),
        x_(prec_),
        y_(prec_),
        phase_(prec_),
        cos_(prec_),
        sin_(prec_),
        pi_over_l_(const_pi(prec_) / ctx.eps1_log),
        abs_half_width_(abs(ctx.half_width)),
        j_(prec_) {
    tol_bits_ = static_cast<double>(ctx.target) + 16.0;
    if (n_ > 0) tol_bits_ += static_cast<double>(n_) * kPi * kPi / (2.0 * ctx.eps1_log.to_double()) / kLn2;
  }

  // Adds j(tau(u_k)) e^{-pi i n u_k / L} for u_k = -L + (k + offset) * 2L / count.
  void accumulate(BigComplex& acc, std::size_t count, double offset) {
    BigReal h = ldexp(ctx_.eps1_log, 1) / BigReal(static_cast<long>(count), prec_);
    BigReal off(offset, prec_);
    for (std::size_t k = 0; k < count; ++k) {
      mpfr_set_ui(tmp_.get(), static_cast<unsigned long>(k), MPFR_RNDN);
      mpfr_add(tmp_.get(), tmp_.get(), off.get(), MPFR_RNDN);
      mpfr_mul(u_.get(), tmp_.get(), h.get(), MPFR_RNDN);
      mpfr_sub(u_.get(), u_.get(), ctx_.eps1_log.get(), MPFR_RNDN);
      point(u_);
      eval_.evaluate(j_, x_, y_, tol_bits_);
      if (n_ != 0) {
        mpfr_mul(phase_.get(), pi_over_l_.get(), u_.get(), MPFR_RNDN);
        mpfr_mul_si(phase_.get(), phase_.get(), -n_, MPFR_RNDN);
        mpfr_sin_cos(sin_.get(), cos_.get(), phase_.get(), MPFR_RNDN);
        mpfr_fmms(tmp_.get(), j_.re.get(), cos_.get(), j_.im.get(), sin_.get(), MPFR_RNDN);
        mpfr_fmma(j_.im.get(), j_.re.get(), sin_.get(), j_.im.get(), cos_.get(), MPFR_RNDN);
        mpfr_swap(j_.re.get(), tmp_.get());
      }
      mpfr_add(acc.re.get(), acc.re.get(), j_.re.get(), MPFR_RNDN);
      mpfr_add(acc.im.get(), acc.im.get(), j_.im.get(), MPFR_RNDN);
    }
  }

  // x_ + i y_ = tau(u): center - half_width tanh(u) + i |half_width| / cosh(u).
  void point(const BigReal& u) {
    mpfr_exp(e_.get(), u.get(), MPFR_RNDN);
    mpfr_sqr(e2_.get(), e_.get(), MPFR_RNDN);
    mpfr_add_ui(inv_.get(), e2_.get(), 1, MPFR_RNDN);
    mpfr_ui_div(inv_.get(), 1, inv_.get(), MPFR_RNDN);
    mpfr_sub_ui(tmp_.get(), e2_.get(), 1, MPFR_RNDN);
    mpfr_mul(tmp_.get(), tmp_.get(), inv_.get(), MPFR_RNDN);  // tanh
    mpfr_mul(tmp_.get(), tmp_.get(), ctx_.half_width.get(), MPFR_RNDN);
    mpfr_sub(x_.get(), ctx_.center.get(), tmp_.get(), MPFR_RNDN);
    mpfr_mul(tmp_.get(), e_.get(), inv_.get(), MPFR_RNDN);  // sech / 2
    mpfr_mul(y_.get(), tmp_.get(), abs_half_width_.get(), MPFR_RNDN);
    mpfr_mul_2ui(y_.get(), y_.get(), 1, MPFR_RNDN);
  }

  const BigReal& x() const { return x_; }
  const BigReal& y() const { return y_; }

 private:
  const GeodesicContext& ctx_;
  long n_;
  Precision prec_;
  JEvaluator eval_;
  BigReal u_, e_, e2_, inv_, tmp_, x_, y_, phase_, cos_, sin_, pi_over_l_, abs_half_width_;
  BigComplex j_;
  double tol_bits_ = 0;
};

}  // namespace

GeodesicContext make_geodesic_context(const QuadIrr& w, Precision target) {
  const Integer g = w.form().content();
  const Form primitive{w.a() / g, w.b() / g, w.c() / g};
  const Integer D = primitive.discriminant();
  FundamentalUnit unit = pell_fundamental(D, 64);
  const double log_eps = unit.eps1_log.to_double();

  // Highest point of the closed geodesic in the fundamental domain is
  // sqrt(D) / (2 min |a|) over the reduced cycle; |j| there is about e^{2 pi H}.
  const FormClass cls = class_of(primitive);
  Integer a_min = abs(cls.cycle.front().a);
  for (const Form& f : cls.cycle) a_min = std::min<Integer>(a_min, abs(f.a));
  const double height = std::sqrt(D.get_d()) / (2.0 * a_min.get_d());
  const int cancel = std::max(12, static_cast<int>(std::ceil(2.0 * kPi * height / kLn2)) + 8);

  // Near u = +-log eps the point sits at height ~ |w - w'| / eps, and the
  // reduction loses about log2(eps |a|) bits; |w| itself costs its magnitude.
  const Integer whole = abs(w.b()) / abs(w.a()) + 1;
  const int guard = static_cast<int>(std::ceil(log_eps / kLn2)) + 32 + bit_length(abs(primitive.a)) + bit_length(whole);

  const Precision working = target + guard + cancel;
  BigReal wv = w.value(working);
  BigReal wc = w.conjugate_value(working);
  BigReal center = ldexp(wv + wc, -1);
  BigReal half = ldexp(wv - wc, -1);
  BigReal eps_log = pell_fundamental(D, working).eps1_log;
  return GeodesicContext{w,
                         std::move(wv),
                         std::move(wc),
                         std::move(center),
                         std::move(half),
                         w.delta(),
                         std::move(unit),
                         std::move(eps_log),
                         target,
                         working,
                         guard,
                         cancel};
}

std::size_t default_initial_nodes(const GeodesicContext& ctx) {
  // The trapezoid error decays like e^{-pi^2 M / (2 log eps)}; the integrand
  // reaches 2^cancel_bits, so that many extra bits must be resolved.
  const double bits = static_cast<double>(ctx.target + ctx.cancel_bits);
  const double log_eps = ctx.eps1_log.to_double();
  return std::max<std::size_t>(64, 4 * static_cast<std::size_t>(std::ceil(log_eps * bits * kLn2 / (kPi * kPi))));
}

BigComplex geodesic_point(const GeodesicContext& ctx, const BigReal& u) {
  GeodesicIntegrator integrator(ctx, 0);
  integrator.point(BigReal(u, ctx.working));
  return {integrator.x(), integrator.y()};
}

ValResult fourier_coeff(const QuadIrr& w, long n, Precision target, const QuadratureOptions& opts) {
  const GeodesicContext ctx = make_geodesic_context(w, target);
  const Precision prec = ctx.working;

  std::size_t nodes = opts.initial_nodes ? opts.initial_nodes : default_initial_nodes(ctx);

  GeodesicIntegrator integrator(ctx, n);
  BigComplex sum(prec);
  integrator.accumulate(sum, nodes, 0.0);

  // a_n carries e^{pi^2 n / (2 log eps)} from moving the contour to Im u = pi/2.
  BigReal scale(1L, prec);
  if (n != 0) {
    BigReal pi = const_pi(prec);
    scale = exp(pi * pi * BigReal(n, prec) / ldexp(ctx.eps1_log, 1), prec);
  }
  auto mean = [&](const BigComplex& s, std::size_t count) {
    BigReal factor = scale / BigReal(static_cast<long>(count), prec);
    return BigComplex(s.re * factor, s.im * factor);
  };

  BigComplex previous = mean(sum, nodes);
  const BigReal tolerance = ldexp(BigReal(1L, prec), -static_cast<long>(target) - 2);
  std::vector<double> history;
  for (int doublings = 1;; ++doublings) {
    if (2 * nodes > opts.max_nodes) {
      throw ConvergenceError("quadrature for " + w.to_string() + " did not converge within " +
                                 std::to_string(opts.max_nodes) + " nodes",
                             nodes);
    }
    integrator.accumulate(sum, nodes, 0.5);
    nodes *= 2;
    BigComplex current = mean(sum, nodes);
    BigReal err = abs(current - previous);
    history.push_back(log2_of(err));
    if (err < tolerance && doublings >= opts.min_doublings) {
      return ValResult{std::move(current), n, nodes, std::move(err), w, prec, std::move(history)};
    }
    previous = std::move(current);
  }
}

ValResult val(const QuadIrr& w, Precision target, const QuadratureOptions& opts) {
  return fourier_coeff(w, 0, target, opts);
}

std::vector<ClassValue> val_classes(const Integer& D, Precision target, unsigned jobs, const QuadratureOptions& opts) {
  std::vector<FormClass> classes = narrow_class_reps(D);
  std::vector<std::optional<ValResult>> results(classes.size());
  parallel_for(classes.size(), jobs, [&](std::size_t i) { results[i] = val(classes[i].representative(), target, opts); });
  std::vector<ClassValue> out;
  out.reserve(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i) out.push_back(ClassValue{std::move(classes[i]), std::move(*results[i])});
  return out;
}

}  // namespace valq
