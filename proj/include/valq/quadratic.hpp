// Exact arithmetic for real quadratic irrationalities and indefinite binary
// quadratic forms: continued fractions, Pell units, reduction cycles, proper
// and wide equivalence, narrow class enumeration and composition.
//
// A number w is carried as the form (a, b, c) of which it is the root
// (-b + sqrt(D)) / (2a), D = b^2 - 4ac. With this normalization the action of
// PSL2(Z) on numbers is proper equivalence of forms, the conjugate w' is
// (-a, -b, -c) and -w is (-a, b, -c).
#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "valq/numerics.hpp"

namespace valq {

using Integer = mpz_class;

Integer isqrt(const Integer& n);
bool is_square(const Integer& n);

struct Form {
  Integer a, b, c;

  Integer discriminant() const { return b * b - 4 * a * c; }
  Integer content() const;
  std::string to_string() const;

  friend bool operator==(const Form& x, const Form& y) { return x.a == y.a && x.b == y.b && x.c == y.c; }
  friend bool operator<(const Form& x, const Form& y);
};

struct GL2Matrix {
  Integer p = 1, q = 0, r = 0, s = 1;  // [[p, q], [r, s]]

  Integer det() const { return p * s - q * r; }
  bool proper() const { return det() == 1; }
  static GL2Matrix translation(const Integer& n) { return {1, n, 0, 1}; }
  static GL2Matrix inversion() { return {0, -1, 1, 0}; }
  std::string to_string() const;

  friend GL2Matrix operator*(const GL2Matrix& x, const GL2Matrix& y);
  friend bool operator==(const GL2Matrix& x, const GL2Matrix& y) {
    return x.p == y.p && x.q == y.q && x.r == y.r && x.s == y.s;
  }
};

// tau -> (p tau + q) / (r tau + s)
BigComplex apply(const GL2Matrix& g, const BigComplex& tau);
BigReal apply(const GL2Matrix& g, const BigReal& x);

class QuadIrr {
 public:
  enum class Content { divide, keep };

  // Throws DomainError when a = 0 or the discriminant is not a positive non-square.
  static QuadIrr make(Integer a, Integer b, Integer c, Content content = Content::divide);
  static QuadIrr from_form(const Form& f) { return make(f.a, f.b, f.c); }
  // (p + s sqrt(R)) / q with s > 0, q != 0.
  static QuadIrr from_surd(const Integer& p, const Integer& s, const Integer& radicand, const Integer& q);

  const Form& form() const { return form_; }
  const Integer& a() const { return form_.a; }
  const Integer& b() const { return form_.b; }
  const Integer& c() const { return form_.c; }
  const Integer& discriminant() const { return disc_; }

  QuadIrr conjugate() const;          // the -sqrt(D) root
  QuadIrr negated() const;            // -w
  QuadIrr translated(const Integer& n) const;  // w + n
  int delta() const { return sgn(form_.a); }   // sign(w - w')

  BigReal value(Precision prec) const;
  BigReal conjugate_value(Precision prec) const;

  // "(p+sqrt(R))/q" with the square part of the radicand kept inside.
  std::string to_string() const;

  friend bool operator==(const QuadIrr& x, const QuadIrr& y) { return x.form_ == y.form_; }

 private:
  QuadIrr(Form f, Integer disc) : form_(std::move(f)), disc_(std::move(disc)) {}
  Form form_;
  Integer disc_;
};

// The number g(w) for g in GL2(Z).
QuadIrr act(const GL2Matrix& g, const QuadIrr& w);

// Purely periodic continued fraction [b1, ..., bn] (all bi >= 1).
QuadIrr cf_value(std::span<const long> period);

struct ContinuedFraction {
  std::vector<Integer> preperiod;
  std::vector<Integer> period;
};
ContinuedFraction cf_expand(const QuadIrr& w);

struct FundamentalUnit {
  Integer D;
  Integer t, u;            // eps = (t + u sqrt(D)) / 2, minimal with t^2 - D u^2 = 4
  int norm_eps = 1;        // norm of the fundamental unit of O_D
  Integer t_fund, u_fund;  // fundamental unit itself (norm norm_eps)
  BigReal eps1_log;        // log eps, eps the norm-one generator
};

// Throws DomainError for D <= 0, square D or D = 2, 3 mod 4.
void check_discriminant(const Integer& D);
FundamentalUnit pell_fundamental(const Integer& D, Precision prec = 128);

// Proper matrix gamma fixing w with a - c w = eps (it maps to eps^2).
GL2Matrix automorph(const QuadIrr& w);

// One application of the reduction operator rho (proper equivalence).
Form rho(const Form& f);
// Transformation matrix of rho: f∘M = rho(f).
GL2Matrix rho_matrix(const Form& f);
bool is_reduced(const Form& f);
// Iterates rho until reduced; optionally accumulates the transformation.
Form reduce(const Form& f, GL2Matrix* transform = nullptr);

struct FormClass {
  Integer D;
  std::vector<Form> cycle;  // rotated to start at its smallest form

  QuadIrr representative() const;
  const Form& key() const { return cycle.front(); }
  friend bool operator==(const FormClass& x, const FormClass& y) { return x.D == y.D && x.key() == y.key(); }
};

FormClass class_of(const Form& f);
inline FormClass class_of(const QuadIrr& w) { return class_of(w.form()); }

enum class Equivalence { proper, wide };
bool is_equivalent(const QuadIrr& w1, const QuadIrr& w2, Equivalence kind = Equivalence::proper);

// All narrow classes of primitive forms of discriminant D; the principal
// class first, then ordered by representative.
std::vector<FormClass> narrow_class_reps(const Integer& D);
// Wide class count: orbits of w -> -w on the narrow classes.
std::size_t wide_class_count(const Integer& D);

FormClass principal_class(const Integer& D);
FormClass inverse(const FormClass& c);
// Gauss composition. Throws DomainError for mismatched discriminants or
// non-primitive input.
FormClass compose(const FormClass& c1, const FormClass& c2);
Form compose_forms(const Form& f1, const Form& f2);
std::size_t class_order(const FormClass& c);

// Text syntax. All throw ParseError on malformed input.
QuadIrr parse_surd(std::string_view text);       // "(p+sqrt(D))/q", "(p+s*sqrt(D))/q", "sqrt(D)", ...
std::vector<long> parse_cf(std::string_view text);  // "[b1,b2,...]"
QuadIrr parse_form(std::string_view text);       // "a,b,c"
std::string cf_to_string(std::span<const long> period);

}  // namespace valq
