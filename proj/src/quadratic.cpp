#include "valq/quadratic.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <utility>

#include "valq/errors.hpp"

namespace valq {

Integer isqrt(const Integer& n) {
  if (n < 0) throw DomainError("isqrt of a negative integer");
  Integer r;
  mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
  return r;
}

bool is_square(const Integer& n) { return n >= 0 && mpz_perfect_square_p(n.get_mpz_t()) != 0; }

namespace {

Integer gcd3(const Integer& a, const Integer& b, const Integer& c) {
  Integer g = gcd(a, b);
  return gcd(g, c);
}

// Floor division and non-negative remainder for possibly negative operands.
Integer floor_div(const Integer& n, const Integer& d) {
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
  return q;
}

Integer mod_nonneg(const Integer& n, const Integer& m) {
  Integer r;
  mpz_mod(r.get_mpz_t(), n.get_mpz_t(), m.get_mpz_t());
  return r;
}

std::string strip_spaces(std::string_view text) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  return s;
}

Integer parse_integer(const std::string& text) {
  Integer n;
  std::string t = text;
  if (!t.empty() && t[0] == '+') t.erase(0, 1);
  if (t.empty() || n.set_str(t, 10) != 0) throw ParseError("not an integer: '" + text + "'");
  return n;
}

}  // namespace

Integer Form::content() const { return gcd3(a, b, c); }

std::string Form::to_string() const {
  return "(" + a.get_str() + "," + b.get_str() + "," + c.get_str() + ")";
}

bool operator<(const Form& x, const Form& y) {
  if (x.a != y.a) return x.a < y.a;
  if (x.b != y.b) return x.b < y.b;
  return x.c < y.c;
}

GL2Matrix operator*(const GL2Matrix& x, const GL2Matrix& y) {
  return {x.p * y.p + x.q * y.r, x.p * y.q + x.q * y.s, x.r * y.p + x.s * y.r, x.r * y.q + x.s * y.s};
}

std::string GL2Matrix::to_string() const {
  return "[[" + p.get_str() + "," + q.get_str() + "],[" + r.get_str() + "," + s.get_str() + "]]";
}

BigComplex apply(const GL2Matrix& g, const BigComplex& tau) {
  const Precision prec = tau.precision();
  BigComplex num{tau.re * BigReal(g.p, prec) + BigReal(g.q, prec), tau.im * BigReal(g.p, prec)};
  BigComplex den{tau.re * BigReal(g.r, prec) + BigReal(g.s, prec), tau.im * BigReal(g.r, prec)};
  return num / den;
}

BigReal apply(const GL2Matrix& g, const BigReal& x) {
  const Precision prec = x.precision();
  return (x * BigReal(g.p, prec) + BigReal(g.q, prec)) / (x * BigReal(g.r, prec) + BigReal(g.s, prec));
}

// ---------------------------------------------------------------------------
// QuadIrr

QuadIrr QuadIrr::make(Integer a, Integer b, Integer c, Content content) {
  if (a == 0) throw DomainError("leading coefficient must be nonzero");
  Integer disc = b * b - 4 * a * c;
  if (disc <= 0) throw DomainError("discriminant " + disc.get_str() + " is not positive");
  if (is_square(disc)) throw DomainError("discriminant " + disc.get_str() + " is a perfect square");
  if (content == Content::divide) {
    Integer g = gcd3(a, b, c);
    if (g != 1) {
      a /= g;
      b /= g;
      c /= g;
      disc = b * b - 4 * a * c;
    }
  }
  return QuadIrr(Form{std::move(a), std::move(b), std::move(c)}, std::move(disc));
}

QuadIrr QuadIrr::from_surd(const Integer& p, const Integer& s, const Integer& radicand, const Integer& q) {
  if (q == 0) throw DomainError("zero denominator");
  if (s <= 0) throw DomainError("surd coefficient must be positive");
  if (radicand <= 0 || is_square(radicand)) throw DomainError("radicand must be a positive non-square");
  // (q w - p)^2 = s^2 R
  Integer a = q * q, b = -2 * p * q, c = p * p - s * s * radicand;
  if (q < 0) {  // w is the smaller root
    a = -a;
    b = -b;
    c = -c;
  }
  return make(a, b, c);
}

QuadIrr QuadIrr::conjugate() const { return QuadIrr(Form{-form_.a, -form_.b, -form_.c}, disc_); }

QuadIrr QuadIrr::negated() const { return QuadIrr(Form{-form_.a, form_.b, -form_.c}, disc_); }

QuadIrr QuadIrr::translated(const Integer& n) const { return act(GL2Matrix::translation(n), *this); }

BigReal QuadIrr::value(Precision prec) const {
  const Precision work = prec + 16 + static_cast<Precision>(mpz_sizeinbase(form_.b.get_mpz_t(), 2));
  BigReal root = sqrt(BigReal(disc_, work), work);
  BigReal num = root - BigReal(form_.b, work);
  return BigReal(num / BigReal(Integer(2 * form_.a), work), prec);
}

BigReal QuadIrr::conjugate_value(Precision prec) const { return conjugate().value(prec); }

std::string QuadIrr::to_string() const {
  // w = (p + f sqrt(R)) / q
  Integer p = -form_.b, q = 2 * form_.a, radicand = disc_, f = 1;
  for (unsigned long k = 2; k < 100000; ++k) {
    const Integer k2 = Integer(k) * k;
    if (k2 > radicand) break;
    while (mpz_divisible_p(radicand.get_mpz_t(), k2.get_mpz_t())) {
      radicand /= k2;
      f *= k;
    }
  }
  Integer g = gcd3(p, f, q);
  p /= g;
  f /= g;
  q /= g;
  std::string sign = "+";
  if (q < 0) {
    p = -p;
    q = -q;
    sign = "-";
  }
  std::string body;
  if (p != 0) body = p.get_str() + sign;
  else if (sign == "-") body = "-";
  if (f != 1) body += f.get_str() + "*";
  body += "sqrt(" + radicand.get_str() + ")";
  if (q == 1) return body;
  return "(" + body + ")/" + q.get_str();
}

QuadIrr act(const GL2Matrix& g, const QuadIrr& w) {
  const Integer det = g.det();
  if (det != 1 && det != -1) throw DomainError("matrix is not in GL2(Z)");
  const Integer &a = w.a(), &b = w.b(), &c = w.c();
  // det * f(s x - q y, -r x + p y)
  Integer na = a * g.s * g.s - b * g.s * g.r + c * g.r * g.r;
  Integer nb = -2 * a * g.s * g.q + b * (g.s * g.p + g.q * g.r) - 2 * c * g.r * g.p;
  Integer nc = a * g.q * g.q - b * g.q * g.p + c * g.p * g.p;
  return QuadIrr::make(det * na, det * nb, det * nc, QuadIrr::Content::keep);
}

// ---------------------------------------------------------------------------
// Continued fractions

QuadIrr cf_value(std::span<const long> period) {
  if (period.empty()) throw DomainError("empty continued fraction period");
  GL2Matrix m;
  for (long b : period) {
    if (b < 1) throw DomainError("partial quotients of a purely periodic expansion must be >= 1");
    m = m * GL2Matrix{b, 1, 1, 0};
  }
  // x = (p x + q) / (r x + s)
  return QuadIrr::make(m.r, m.s - m.p, -m.q);
}

namespace {

// Floor of (P + sqrt(D)) / Q for non-square D.
Integer floor_quotient(const Integer& P, const Integer& Q, const Integer& sqrt_floor) {
  if (Q > 0) return floor_div(P + sqrt_floor, Q);
  return floor_div(-P - sqrt_floor - 1, -Q);
}

}  // namespace

ContinuedFraction cf_expand(const QuadIrr& w) {
  const Integer& D = w.discriminant();
  const Integer s = isqrt(D);
  Integer P = -w.b(), Q = 2 * w.a();
  std::map<std::pair<Integer, Integer>, std::size_t> seen;
  std::vector<Integer> terms;
  for (;;) {
    auto [it, inserted] = seen.emplace(std::make_pair(P, Q), terms.size());
    if (!inserted) {
      ContinuedFraction cf;
      cf.preperiod.assign(terms.begin(), terms.begin() + static_cast<std::ptrdiff_t>(it->second));
      cf.period.assign(terms.begin() + static_cast<std::ptrdiff_t>(it->second), terms.end());
      return cf;
    }
    Integer q = floor_quotient(P, Q, s);
    terms.push_back(q);
    P = q * Q - P;
    Q = (D - P * P) / Q;
  }
}

// ---------------------------------------------------------------------------
// Pell units

void check_discriminant(const Integer& D) {
  if (D <= 0) throw DomainError("discriminant must be positive");
  if (is_square(D)) throw DomainError("discriminant " + D.get_str() + " is a perfect square");
  const Integer r = mod_nonneg(D, 4);
  if (r != 0 && r != 1) throw DomainError("discriminant " + D.get_str() + " is not 0 or 1 mod 4");
}

FundamentalUnit pell_fundamental(const Integer& D, Precision prec) {
  check_discriminant(D);
  const Integer s = isqrt(D);
  // alpha = (b0 + sqrt(D)) / 2 is reduced, hence purely periodic.
  const Integer b0 = mod_nonneg(s - D, 2) == 0 ? s : s - 1;
  Integer P = b0, Q = 2;
  GL2Matrix m;
  std::size_t length = 0;
  do {
    Integer q = floor_quotient(P, Q, s);
    m = m * GL2Matrix{q, 1, 1, 0};
    ++length;
    P = q * Q - P;
    Q = (D - P * P) / Q;
  } while (P != b0 || Q != 2);

  FundamentalUnit unit{D, 0, 0, length % 2 == 0 ? 1 : -1, 0, 0, BigReal(prec)};
  // eps_D = r alpha + s
  unit.t_fund = m.r * b0 + 2 * m.s;
  unit.u_fund = m.r;
  if (unit.norm_eps == 1) {
    unit.t = unit.t_fund;
    unit.u = unit.u_fund;
  } else {
    unit.t = (unit.t_fund * unit.t_fund + D * unit.u_fund * unit.u_fund) / 2;
    unit.u = unit.t_fund * unit.u_fund;
  }
  const Precision work = prec + 32;
  BigReal eps = (BigReal(unit.t, work) + BigReal(unit.u, work) * sqrt(BigReal(D, work), work));
  unit.eps1_log = BigReal(log(ldexp(eps, -1), work), prec);
  return unit;
}

GL2Matrix automorph(const QuadIrr& w) {
  const Integer g = w.form().content();
  const Integer a = w.a() / g, b = w.b() / g, c = w.c() / g;
  const FundamentalUnit unit = pell_fundamental(b * b - 4 * a * c, 64);
  const Integer &t = unit.t, &u = unit.u;
  return {(t + b * u) / 2, c * u, -a * u, (t - b * u) / 2};
}

// ---------------------------------------------------------------------------
// Reduction

namespace {

Integer rho_r(const Form& f, const Integer& sqrt_floor) {
  const Integer ac = abs(f.c);
  const Integer m = 2 * ac;
  if (ac > sqrt_floor) {
    // -|c| < r <= |c|
    Integer r = mod_nonneg(-f.b, m);
    if (r > ac) r -= m;
    return r;
  }
  // largest r <= floor(sqrt D) with r = -b mod 2|c|
  return sqrt_floor - mod_nonneg(sqrt_floor + f.b, m);
}

Form rho_with(const Form& f, const Integer& D, const Integer& sqrt_floor) {
  Integer r = rho_r(f, sqrt_floor);
  Integer c = (r * r - D) / (4 * f.c);
  return Form{f.c, std::move(r), std::move(c)};
}

bool is_reduced_with(const Form& f, const Integer& sqrt_floor) {
  if (f.b <= 0 || f.b > sqrt_floor) return false;
  const Integer two_a = 2 * abs(f.a);
  return two_a + f.b > sqrt_floor && two_a - f.b <= sqrt_floor;
}

std::vector<Form> cycle_of_reduced(const Form& start, const Integer& D, const Integer& sqrt_floor) {
  std::vector<Form> cycle{start};
  for (Form f = rho_with(start, D, sqrt_floor); !(f == start); f = rho_with(f, D, sqrt_floor)) cycle.push_back(f);
  auto smallest = std::min_element(cycle.begin(), cycle.end());
  std::rotate(cycle.begin(), smallest, cycle.end());
  return cycle;
}

}  // namespace

Form rho(const Form& f) {
  const Integer D = f.discriminant();
  return rho_with(f, D, isqrt(D));
}

GL2Matrix rho_matrix(const Form& f) {
  const Integer D = f.discriminant();
  const Integer r = rho_r(f, isqrt(D));
  return {0, -1, 1, (r + f.b) / (2 * f.c)};
}

bool is_reduced(const Form& f) { return is_reduced_with(f, isqrt(f.discriminant())); }

Form reduce(const Form& f, GL2Matrix* transform) {
  const Integer D = f.discriminant();
  if (D <= 0 || is_square(D)) throw DomainError("reduce: discriminant must be a positive non-square");
  const Integer s = isqrt(D);
  Form g = f;
  while (!is_reduced_with(g, s)) {
    if (transform) *transform = *transform * GL2Matrix{0, -1, 1, (rho_r(g, s) + g.b) / (2 * g.c)};
    g = rho_with(g, D, s);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Classes

QuadIrr FormClass::representative() const {
  const Form* best = nullptr;
  for (const Form& f : cycle) {
    if (f.a <= 0) continue;
    if (!best || f.a < best->a || (f.a == best->a && f.b < best->b)) best = &f;
  }
  return QuadIrr::from_form(best ? *best : cycle.front());
}

FormClass class_of(const Form& f) {
  if (f.content() != 1) throw DomainError("form " + f.to_string() + " is not primitive");
  const Integer D = f.discriminant();
  check_discriminant(D);
  const Integer s = isqrt(D);
  return FormClass{D, cycle_of_reduced(reduce(f), D, s)};
}

bool is_equivalent(const QuadIrr& w1, const QuadIrr& w2, Equivalence kind) {
  if (w1.discriminant() != w2.discriminant()) return false;
  const Integer g1 = w1.form().content(), g2 = w2.form().content();
  if (g1 != g2) return false;
  auto primitive = [](const Form& f, const Integer& g) { return Form{f.a / g, f.b / g, f.c / g}; };
  const FormClass c2 = class_of(primitive(w2.form(), g2));
  if (class_of(primitive(w1.form(), g1)) == c2) return true;
  if (kind == Equivalence::wide) return class_of(primitive(w1.negated().form(), g1)) == c2;
  return false;
}

FormClass principal_class(const Integer& D) {
  check_discriminant(D);
  const Integer b = mod_nonneg(D, 2);
  return class_of(Form{1, b, (b * b - D) / 4});
}

std::vector<FormClass> narrow_class_reps(const Integer& D) {
  check_discriminant(D);
  const Integer s = isqrt(D);
  std::set<Form> reduced;
  for (Integer b = 2 - mod_nonneg(D, 2); b <= s; b += 2) {
    const Integer n = (D - b * b) / 4;  // = -ac > 0
    for (Integer d = 1; d * d <= n; ++d) {
      if (!mpz_divisible_p(n.get_mpz_t(), d.get_mpz_t())) continue;
      for (const Integer& a : {d, Integer(n / d)}) {
        Integer two_a = 2 * a;
        if (!(two_a + b > s && two_a - b <= s)) continue;
        for (int sign : {1, -1}) {
          Form f{sign * a, b, -sign * (n / a)};
          if (f.content() == 1) reduced.insert(f);
        }
      }
    }
  }
  std::set<Form> visited;
  std::vector<FormClass> classes;
  for (const Form& f : reduced) {
    if (visited.count(f)) continue;
    FormClass cls{D, cycle_of_reduced(f, D, s)};
    visited.insert(cls.cycle.begin(), cls.cycle.end());
    classes.push_back(std::move(cls));
  }
  const FormClass principal = principal_class(D);
  std::sort(classes.begin(), classes.end(), [&](const FormClass& x, const FormClass& y) {
    const bool px = x == principal, py = y == principal;
    if (px != py) return px;
    const QuadIrr rx = x.representative(), ry = y.representative();
    return rx.form() < ry.form();
  });
  return classes;
}

std::size_t wide_class_count(const Integer& D) {
  const std::vector<FormClass> classes = narrow_class_reps(D);
  std::size_t fixed = 0;
  for (const FormClass& c : classes) {
    const Form& f = c.key();
    if (class_of(Form{-f.a, f.b, -f.c}) == c) ++fixed;
  }
  return fixed + (classes.size() - fixed) / 2;
}

FormClass inverse(const FormClass& c) {
  const Form& f = c.key();
  return class_of(Form{f.a, -f.b, f.c});
}

Form compose_forms(const Form& f1, const Form& f2) {
  const Integer D = f1.discriminant();
  if (f2.discriminant() != D) throw DomainError("compose: discriminants differ");
  if (f1.content() != 1 || f2.content() != 1) throw DomainError("compose: forms must be primitive");
  if (f1.a <= 0 || f2.a <= 0) throw DomainError("compose: leading coefficients must be positive");
  const Form& x = f1.a > f2.a ? f2 : f1;
  const Form& y = f1.a > f2.a ? f1 : f2;
  const Integer &a1 = x.a, &b1 = x.b;
  const Integer &a2 = y.a, &b2 = y.b, &c2 = y.c;
  const Integer s = (b1 + b2) / 2;
  const Integer n = b2 - s;

  Integer y1, d;
  if (mpz_divisible_p(a2.get_mpz_t(), a1.get_mpz_t())) {
    y1 = 0;
    d = a1;
  } else {
    Integer u, v;
    mpz_gcdext(d.get_mpz_t(), u.get_mpz_t(), v.get_mpz_t(), a2.get_mpz_t(), a1.get_mpz_t());
    y1 = u;
  }
  Integer x2, y2, d1;
  if (mpz_divisible_p(s.get_mpz_t(), d.get_mpz_t())) {
    y2 = -1;
    x2 = 0;
    d1 = d;
  } else {
    mpz_gcdext(d1.get_mpz_t(), x2.get_mpz_t(), y2.get_mpz_t(), s.get_mpz_t(), d.get_mpz_t());
    y2 = -y2;
  }
  const Integer v1 = a1 / d1, v2 = a2 / d1;
  const Integer r = mod_nonneg(y1 * y2 * n - x2 * c2, v1);
  const Integer b3 = b2 + 2 * v2 * r;
  const Integer a3 = v1 * v2;
  const Integer num = b3 * b3 - D;
  if (!mpz_divisible_p(num.get_mpz_t(), Integer(4 * a3).get_mpz_t())) throw DomainError("compose: internal inconsistency");
  return Form{a3, b3, num / (4 * a3)};
}

namespace {

const Form& positive_form(const FormClass& c) {
  for (const Form& f : c.cycle)
    if (f.a > 0) return f;
  throw DomainError("class without a positive form");  // cannot happen: signs alternate in a cycle
}

}  // namespace

FormClass compose(const FormClass& c1, const FormClass& c2) {
  if (c1.D != c2.D) throw DomainError("compose: discriminants differ");
  return class_of(compose_forms(positive_form(c1), positive_form(c2)));
}

std::size_t class_order(const FormClass& c) {
  const FormClass one = principal_class(c.D);
  FormClass power = c;
  std::size_t order = 1;
  while (!(power == one)) {
    power = compose(power, c);
    ++order;
  }
  return order;
}

// ---------------------------------------------------------------------------
// Parsers

QuadIrr parse_surd(std::string_view text) {
  std::string s = strip_spaces(text);
  Integer q = 1;
  static const std::regex denom_re(R"(^(.*)/([+-]?\d+)$)");
  static const std::regex body_re(R"(^([+-]?\d+)?([+-])?(\d+)?\*?sqrt\((\d+)\)$)");
  std::smatch m;
  if (std::regex_match(s, m, denom_re)) {
    q = parse_integer(m[2]);
    s = m[1];
  }
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') s = s.substr(1, s.size() - 2);
  if (!std::regex_match(s, m, body_re)) throw ParseError("cannot parse quadratic surd: '" + std::string(text) + "'");
  Integer p = 0, coef = 1;
  const std::string g1 = m[1], g2 = m[2], g3 = m[3];
  if (!g1.empty() && g2.empty()) {
    coef = parse_integer(g1);  // "5*sqrt(26)" or "-sqrt"-less coefficient form
    if (!g3.empty()) throw ParseError("cannot parse quadratic surd: '" + std::string(text) + "'");
  } else {
    if (!g1.empty()) p = parse_integer(g1);
    if (!g3.empty()) coef = parse_integer(g3);
    if (g2 == "-") coef = -coef;
  }
  const Integer radicand = parse_integer(m[4]);
  if (q == 0) throw ParseError("zero denominator in '" + std::string(text) + "'");
  if (coef == 0) throw ParseError("zero surd coefficient in '" + std::string(text) + "'");
  if (coef < 0) {
    p = -p;
    coef = -coef;
    q = -q;
  }
  return QuadIrr::from_surd(p, coef, radicand, q);
}

std::vector<long> parse_cf(std::string_view text) {
  const std::string s = strip_spaces(text);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') {
    throw ParseError("continued fraction must look like [b1,b2,...]: '" + std::string(text) + "'");
  }
  std::vector<long> out;
  const std::string body = s.substr(1, s.size() - 2);
  if (body.empty()) throw ParseError("empty continued fraction");
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const Integer v = parse_integer(item);
    if (!v.fits_slong_p() || v < 1) throw ParseError("partial quotients must be positive integers: " + item);
    out.push_back(v.get_si());
  }
  if (!body.empty() && body.back() == ',') throw ParseError("trailing comma in '" + std::string(text) + "'");
  return out;
}

QuadIrr parse_form(std::string_view text) {
  std::string s = strip_spaces(text);
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') s = s.substr(1, s.size() - 2);
  std::stringstream ss(s);
  std::string item;
  std::vector<Integer> coeffs;
  while (std::getline(ss, item, ',')) coeffs.push_back(parse_integer(item));
  if (coeffs.size() != 3) throw ParseError("form must be a,b,c: '" + std::string(text) + "'");
  return QuadIrr::make(coeffs[0], coeffs[1], coeffs[2]);
}

std::string cf_to_string(std::span<const long> period) {
  std::string out = "[";
  for (std::size_t i = 0; i < period.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(period[i]);
  }
  return out + "]";
}

}  // namespace valq
