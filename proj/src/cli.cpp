#include "valq/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <new>
#include <sstream>
#include <thread>
#include <tuple>

#include "valq/errors.hpp"
#include "valq/parallel.hpp"

namespace valq::cli {

namespace {

using nlohmann::ordered_json;

constexpr Precision kMinBits = 32;
constexpr Precision kMaxBits = 65536;

// Decimal rendering; anything below the target accuracy prints as 0.
std::string fmt(const BigReal& x, const RunConfig& cfg) {
  if (abs(x) < ldexp(BigReal(1L, 64), -static_cast<long>(cfg.precision_bits) + 4)) return "0";
  return x.to_string(cfg.digits_out);
}

std::string fmt_short(const BigReal& x, int digits) {
  return x.is_zero() ? "0" : x.to_string(digits);
}

std::string fmt_complex(const BigComplex& z, const RunConfig& cfg) {
  const std::string im = fmt(z.im, cfg);
  if (im == "0") return fmt(z.re, cfg);
  if (im.front() == '-') return fmt(z.re, cfg) + " - " + im.substr(1) + "i";
  return fmt(z.re, cfg) + " + " + im + "i";
}

std::string form_string(const Form& f) { return "(" + f.a.get_str() + "," + f.b.get_str() + "," + f.c.get_str() + ")"; }

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

// Text table with left-aligned columns separated by two spaces.
void print_columns(std::ostream& os, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) line += (i + 1 < r.size() ? pad(r[i], width[i] + 2) : r[i]);
    os << line << '\n';
  }
}

const std::vector<std::string> kCsvColumns = {"D",       "rep_a",    "rep_b",  "rep_c",       "re_val",    "im_val",
                                              "log_eps", "norm_eps", "h_plus", "class_index", "est_error", "nodes"};

std::vector<std::string> csv_fields(const ValueRow& r, const RunConfig& cfg) {
  return {r.D.get_str(),          r.rep.a.get_str(),           r.rep.b.get_str(),           r.rep.c.get_str(),
          fmt(r.value.re, cfg),   fmt(r.value.im, cfg),        r.log_eps.to_string(cfg.digits_out),
          std::to_string(r.norm_eps), std::to_string(r.h_plus), std::to_string(r.class_index),
          fmt_short(r.est_error, 3), std::to_string(r.nodes)};
}

void write_csv_line(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const std::string& f = fields[i];
    const bool quote = f.find_first_of(",\"") != std::string::npos;
    if (i) os << ',';
    if (quote) {
      os << '"';
      for (char ch : f) os << (ch == '"' ? "\"\"" : std::string(1, ch));
      os << '"';
    } else {
      os << f;
    }
  }
  os << '\n';
}

void write_csv_rows(std::ostream& os, const std::vector<ValueRow>& rows, const RunConfig& cfg) {
  write_csv_line(os, kCsvColumns);
  for (const ValueRow& r : rows) write_csv_line(os, csv_fields(r, cfg));
}

ordered_json row_json(const ValueRow& r, const RunConfig& cfg) {
  ordered_json j;
  const auto fields = csv_fields(r, cfg);
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) j[kCsvColumns[i]] = fields[i];
  if (!r.label.empty()) j["w"] = r.label;
  return j;
}

std::string text_value_line(const ValueRow& r, const RunConfig& cfg) { return fmt_complex(r.value, cfg); }

// Position of the class of w among narrow_class_reps(D), with h+.
std::pair<std::size_t, std::size_t> locate_class(const QuadIrr& w) {
  const Integer g = w.form().content();
  const Form primitive{w.a() / g, w.b() / g, w.c() / g};
  const Integer D = primitive.discriminant();
  if (D > kClassMetadataLimit) return {0, 0};
  const std::vector<FormClass> classes = narrow_class_reps(D);
  const FormClass mine = class_of(primitive);
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] == mine) return {i, classes.size()};
  }
  throw DomainError("class of " + w.to_string() + " missing from the class list");
}

ValueRow make_row(const QuadIrr& w, std::string label, const ValResult& res, const RunConfig& cfg) {
  ValueRow row;
  row.label = label.empty() ? w.to_string() : std::move(label);
  const Integer g = w.form().content();
  row.D = w.discriminant() / (g * g);
  row.rep = w.form();
  row.value = res.value;
  const FundamentalUnit unit = pell_fundamental(row.D, cfg.precision_bits + 16);
  row.log_eps = unit.eps1_log;
  row.norm_eps = unit.norm_eps;
  row.est_error = res.est_error;
  row.nodes = res.nodes_used;
  return row;
}

struct LabelledPoint {
  QuadIrr w;
  std::string label;
};

// Evaluates all points on the worker pool, keeping input order.
std::vector<ValueRow> evaluate_rows(const std::vector<LabelledPoint>& points, const RunConfig& cfg, bool with_class) {
  std::vector<std::optional<ValueRow>> rows(points.size());
  parallel_for(points.size(), cfg.parallelism, [&](std::size_t i) {
    const ValResult res = val(points[i].w, cfg.precision_bits);
    ValueRow row = make_row(points[i].w, points[i].label, res, cfg);
    if (with_class) std::tie(row.class_index, row.h_plus) = locate_class(points[i].w);
    rows[i] = std::move(row);
  });
  std::vector<ValueRow> out;
  out.reserve(rows.size());
  for (auto& r : rows) out.push_back(std::move(*r));
  return out;
}

std::vector<LabelledPoint> cf_points(const std::vector<std::vector<long>>& periods) {
  std::vector<LabelledPoint> out;
  for (const auto& p : periods) out.push_back({cf_value(p), cf_to_string(p)});
  return out;
}

// Index labels i for nodes whose m is below every number not yet generated.
std::map<std::size_t, std::size_t> markoff_indices(const std::vector<MarkoffNode>& nodes) {
  Integer bound = 0;
  for (const MarkoffNode& n : nodes) {
    if (n.kind != MarkoffNode::Kind::vertex || n.left_child >= 0) continue;
    const Integer left = 3 * n.a * n.m - n.b, right = 3 * n.m * n.b - n.a;
    const Integer smallest = std::min(left, right);
    if (bound == 0 || smallest < bound) bound = smallest;
  }
  std::map<std::size_t, std::size_t> index;
  std::size_t i = 0;
  for (std::size_t node : sorted_by_m(nodes)) {
    if (bound != 0 && nodes[node].m >= bound) break;
    index[node] = ++i;
  }
  return index;
}

std::string triple_string(const MarkoffNode& n) {
  return "(" + n.a.get_str() + "," + n.b.get_str() + "," + n.m.get_str() + ")";
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

void render_markoff_tree(std::ostream& os, const ObservationReport& rep) {
  const int digits = 8;
  auto label = [&](std::size_t i) {
    const MarkoffValue& v = rep.values[i];
    std::string s = rep.nodes[i].m.get_str() + "  " + v.val1.re.to_string(digits);
    if (rep.nodes[i].kind == MarkoffNode::Kind::vertex) s += " +- " + abs(v.val1.im).to_string(4) + "i";
    return s;
  };
  os << label(0) << "    |    " << label(1) << '\n';
  auto walk = [&](auto&& self, std::size_t i, int indent) -> void {
    const MarkoffNode& n = rep.nodes[i];
    os << std::string(static_cast<std::size_t>(indent) * 2, ' ') << (n.path.empty() ? "" : n.path.substr(n.path.size() - 1) + " ")
       << label(i) << '\n';
    if (n.left_child >= 0) self(self, static_cast<std::size_t>(n.left_child), indent + 1);
    if (n.right_child >= 0) self(self, static_cast<std::size_t>(n.right_child), indent + 1);
  };
  walk(walk, 2, 0);
}

Precision parse_precision(const std::string& text) {
  std::size_t used = 0;
  long bits = 0;
  try {
    bits = std::stol(text, &used);
  } catch (const std::exception&) {
    throw ParseError("precision must be an integer number of bits, got '" + text + "'");
  }
  if (used != text.size()) throw ParseError("precision must be an integer number of bits, got '" + text + "'");
  if (bits < kMinBits) throw ParseError("precision must be at least " + std::to_string(kMinBits) + " bits");
  if (bits > kMaxBits) throw ResourceError("precision above " + std::to_string(kMaxBits) + " bits is not supported");
  return bits;
}

}  // namespace

void RunConfig::validate() const {
  if (precision_bits < kMinBits) throw ParseError("precision must be at least " + std::to_string(kMinBits) + " bits");
  if (precision_bits > kMaxBits) throw ResourceError("precision above " + std::to_string(kMaxBits) + " bits is not supported");
  const int limit = max_digits(precision_bits);
  if (digits_out < 1 || digits_out > limit) {
    throw ParseError("--digits must lie in [1, " + std::to_string(limit) + "] at " + std::to_string(precision_bits) + " bits");
  }
  if (parallelism < 1) throw ParseError("--jobs must be at least 1");
}

int max_digits(Precision bits) {
  return static_cast<int>(std::floor(static_cast<double>(bits) * std::log10(2.0))) - 8;
}

RunConfig default_config() {
  RunConfig cfg;
  if (const char* env = std::getenv("VALQ_PREC"); env && *env) cfg.precision_bits = parse_precision(env);
  return cfg;
}

BigReal real_tolerance(Precision target) { return ldexp(BigReal(1L, 64), -static_cast<long>(target / 2)); }

ValueRow cmd_val(const QuadIrr& w, const RunConfig& cfg, std::string label) {
  cfg.validate();
  return evaluate_rows({{w, std::move(label)}}, cfg, true).front();
}

Table cmd_table(int k, const RunConfig& cfg) {
  cfg.validate();
  Table t;
  t.k = k;
  std::vector<std::vector<long>> periods;
  switch (k) {
    case 1:
      t.caption = "Values of val(w) at w=[n]";
      for (long n : {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 20, 30, 50, 100}) periods.push_back({n});
      break;
    case 2:
      t.caption = "Values of val(w) at w=[n,1]";
      for (long n : {2, 3, 4, 5, 6, 7, 8, 9, 10, 20, 30, 50, 100}) periods.push_back({n, 1});
      break;
    case 3:
      t.caption = "Values of val(w) at w=[n,2]";
      for (long n = 3; n <= 10; ++n) periods.push_back({n, 2});
      break;
    case 4:
    case 5:
      t.caption = k == 4 ? "Values of val(w) at w=[2,1,...,1]" : "Values of val(w) at w=[3,1,...,1]";
      for (std::size_t ones = 0; ones <= 6; ++ones) {
        std::vector<long> p{k == 4 ? 2L : 3L};
        p.insert(p.end(), ones, 1L);
        periods.push_back(p);
      }
      break;
    case 6: {
      t.caption = "First several non-real values";
      std::vector<LabelledPoint> points;
      for (const char* s : {"(12+sqrt(34))/11", "(10+sqrt(34))/11", "(33+sqrt(205))/34", "(25+sqrt(205))/30",
                            "(21+sqrt(221))/22", "(23+sqrt(221))/22", "(47+sqrt(305))/56", "(35+sqrt(305))/46",
                            "(23+sqrt(79))/25", "(13+sqrt(79))/15", "(17+sqrt(79))/15", "(17+sqrt(79))/21"}) {
        points.push_back({parse_surd(s), s});
      }
      t.rows = evaluate_rows(points, cfg, true);
      return t;
    }
    case 7: {
      t.caption = "First several values at Markoff irrationalities";
      const std::vector<MarkoffNode> nodes = tree(4);
      std::vector<LabelledPoint> points;
      for (std::size_t i : sorted_by_m(nodes)) {
        if (points.size() == 10) break;
        points.push_back({theta(nodes[i]).theta1, {}});
        t.markoff_m.push_back(nodes[i].m);
      }
      t.rows = evaluate_rows(points, cfg, false);
      return t;
    }
    default:
      throw DomainError("table number must be between 1 and 7, got " + std::to_string(k));
  }
  t.rows = evaluate_rows(cf_points(periods), cfg, true);
  return t;
}

std::string group_structure(const std::vector<std::size_t>& orders) {
  const std::size_t n = orders.size();
  if (n <= 1) return "1";
  // For each prime p, #{x : x^(p^k) = 1} = p^(sum_i min(k, e_i)) recovers
  // the exponents e_i of the p-part.
  std::vector<std::vector<std::size_t>> factors;  // per prime: prime powers, largest first
  std::size_t rest = n;
  for (std::size_t p = 2; p <= rest; ++p) {
    if (rest % p) continue;
    while (rest % p == 0) rest /= p;
    std::vector<std::size_t> log_counts{0};
    for (std::size_t pk = p;; pk *= p) {
      std::size_t count = 0;
      for (std::size_t o : orders) count += (pk % o == 0);
      std::size_t lg = 0;
      for (std::size_t c = count; c > 1; c /= p) ++lg;
      log_counts.push_back(lg);
      if (count == n || pk > n) break;
    }
    // Number of cyclic factors with exponent >= k is s_k - s_{k-1}.
    std::vector<std::size_t> powers;
    for (std::size_t k = log_counts.size() - 1; k >= 1; --k) {
      const std::size_t at_least_k = log_counts[k] - log_counts[k - 1];
      const std::size_t at_least_k1 = k + 1 < log_counts.size() ? log_counts[k + 1] - log_counts[k] : 0;
      std::size_t pk = 1;
      for (std::size_t e = 0; e < k; ++e) pk *= p;
      for (std::size_t c = at_least_k1; c < at_least_k; ++c) powers.push_back(pk);
    }
    factors.push_back(powers);
  }
  // Invariant factors d_1 | d_2 | ...: combine the j-th largest prime powers.
  std::size_t count = 0;
  for (const auto& f : factors) count = std::max(count, f.size());
  std::vector<std::size_t> d(count, 1);
  for (const auto& f : factors) {
    for (std::size_t j = 0; j < f.size(); ++j) d[count - 1 - j] *= f[j];
  }
  std::string out;
  for (std::size_t x : d) out += (out.empty() ? "" : " x ") + ("Z/" + std::to_string(x));
  return out;
}

ClassesReport cmd_classes(const Integer& D, const RunConfig& cfg) {
  cfg.validate();
  check_discriminant(D);
  if (D > kClassMetadataLimit) throw ResourceError("classes: D above " + std::to_string(kClassMetadataLimit));
  ClassesReport rep;
  rep.D = D;
  const std::vector<FormClass> classes = narrow_class_reps(D);
  rep.h_plus = classes.size();
  rep.h = wide_class_count(D);
  const FundamentalUnit unit = pell_fundamental(D, cfg.precision_bits + 16);
  rep.norm_eps = unit.norm_eps;
  rep.log_eps = unit.eps1_log;

  std::vector<LabelledPoint> points;
  for (const FormClass& c : classes) points.push_back({c.representative(), {}});
  std::vector<ValueRow> rows = evaluate_rows(points, cfg, false);

  std::vector<std::size_t> orders;
  const BigReal tol = real_tolerance(cfg.precision_bits);
  for (std::size_t i = 0; i < classes.size(); ++i) {
    ClassEntry e;
    e.cls = classes[i];
    e.order = class_order(classes[i]);
    const FormClass inv = inverse(classes[i]);
    e.inverse_index = static_cast<std::size_t>(std::find(classes.begin(), classes.end(), inv) - classes.begin());
    rows[i].class_index = i;
    rows[i].h_plus = classes.size();
    e.real = abs(rows[i].value.im) < tol;
    e.row = std::move(rows[i]);
    orders.push_back(e.order);
    rep.classes.push_back(std::move(e));
  }
  rep.structure = group_structure(orders);
  return rep;
}

SweepReport cmd_sweep(long d_max, const RunConfig& cfg) {
  cfg.validate();
  if (d_max < 5) throw DomainError("sweep: d_max must be at least 5");
  if (d_max > kClassMetadataLimit) throw ResourceError("sweep: d_max above " + std::to_string(kClassMetadataLimit));
  SweepReport rep;
  rep.d_max = d_max;

  struct Task {
    Integer D;
    std::size_t index, h_plus;
    QuadIrr w;
  };
  std::vector<Task> tasks;
  for (long d = 5; d <= d_max; ++d) {
    const Integer D(d);
    if ((d % 4 != 0 && d % 4 != 1) || is_square(D)) continue;
    const std::vector<FormClass> classes = narrow_class_reps(D);
    for (std::size_t i = 0; i < classes.size(); ++i) tasks.push_back({D, i, classes.size(), classes[i].representative()});
  }

  std::vector<LabelledPoint> points;
  for (const Task& t : tasks) points.push_back({t.w, {}});
  rep.rows = evaluate_rows(points, cfg, false);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    rep.rows[i].class_index = tasks[i].index;
    rep.rows[i].h_plus = tasks[i].h_plus;
  }

  SweepSummary& s = rep.summary;
  const BigReal tol = real_tolerance(cfg.precision_bits);
  const int half_bins = static_cast<int>(std::lround(1.0 / s.bin_width));
  s.histogram.assign(static_cast<std::size_t>(2 * half_bins + 1), 0);
  s.max_abs_im = BigReal(0L, 64);
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const BigComplex& z = rep.rows[i].value;
    const bool real = abs(z.im) < tol;
    if (real) {
      ++s.real_count;
      if (!s.min_real || z.re < rep.rows[*s.min_real].value.re) s.min_real = i;
      if (!s.max_real || z.re > rep.rows[*s.max_real].value.re) s.max_real = i;
    }
    if (z.re < rep.rows[s.min_re_all].value.re) s.min_re_all = i;
    if (abs(z.im) > s.max_abs_im) s.max_abs_im = abs(z.im);
    // Bins centred on multiples of bin_width, so Im and -Im land symmetrically.
    const double im = real ? 0.0 : z.im.to_double();
    if (std::fabs(im) >= 1.0) ++s.outside;
    const long bin = std::lround(im / s.bin_width) + half_bins;
    if (bin >= 0 && bin < static_cast<long>(s.histogram.size())) ++s.histogram[static_cast<std::size_t>(bin)];
  }
  return rep;
}

ObservationReport cmd_markoff(int depth, std::size_t K, const RunConfig& cfg) {
  cfg.validate();
  if (depth > 8) throw ResourceError("markoff: depth is limited to 8");
  if (K < 1) throw DomainError("markoff: K must be at least 1");
  if (K > 12) throw ResourceError("markoff: K is limited to 12");
  ObservationOptions opts;
  opts.depth = depth;
  opts.K = K;
  opts.target = cfg.precision_bits;
  opts.jobs = cfg.parallelism;
  return observation_report(opts);
}

void render(std::ostream& os, const ValueRow& r, const RunConfig& cfg) {
  switch (cfg.output_format) {
    case Format::csv:
      write_csv_rows(os, {r}, cfg);
      return;
    case Format::json:
      os << row_json(r, cfg).dump(2) << '\n';
      return;
    case Format::text:
      break;
  }
  print_columns(os, {{"w", r.label},
                     {"form", form_string(r.rep)},
                     {"D", r.D.get_str()},
                     {"val(w)", text_value_line(r, cfg)},
                     {"log eps", r.log_eps.to_string(cfg.digits_out)},
                     {"N(eps_D)", std::to_string(r.norm_eps)},
                     {"class", r.h_plus ? std::to_string(r.class_index) + " of h+ = " + std::to_string(r.h_plus) : "-"},
                     {"est_error", fmt_short(r.est_error, 3)},
                     {"nodes", std::to_string(r.nodes)}});
}

void render(std::ostream& os, const Table& t, const RunConfig& cfg) {
  switch (cfg.output_format) {
    case Format::csv:
      write_csv_rows(os, t.rows, cfg);
      return;
    case Format::json: {
      ordered_json j;
      j["table"] = t.k;
      j["caption"] = t.caption;
      j["rows"] = ordered_json::array();
      for (std::size_t i = 0; i < t.rows.size(); ++i) {
        ordered_json r = row_json(t.rows[i], cfg);
        if (!t.markoff_m.empty()) {
          r["i"] = std::to_string(i + 1);
          r["m"] = t.markoff_m[i].get_str();
        }
        j["rows"].push_back(std::move(r));
      }
      os << j.dump(2) << '\n';
      return;
    }
    case Format::text:
      break;
  }
  os << "Table " << t.k << ". " << t.caption << "\n\n";
  std::vector<std::vector<std::string>> lines;
  if (!t.markoff_m.empty()) {
    lines.push_back({"i", "m_i", "theta_{i,1}", "val(theta_{i,1})"});
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      lines.push_back({std::to_string(i + 1), t.markoff_m[i].get_str(), t.rows[i].label, text_value_line(t.rows[i], cfg)});
    }
  } else if (t.k == 6) {
    lines.push_back({"w", "D", "val(w)"});
    for (const ValueRow& r : t.rows) lines.push_back({r.label, r.D.get_str(), text_value_line(r, cfg)});
  } else {
    lines.push_back({"w", "D", "val(w)", "log eps"});
    for (const ValueRow& r : t.rows) {
      lines.push_back({r.label, r.D.get_str(), text_value_line(r, cfg), r.log_eps.to_string(cfg.digits_out)});
    }
  }
  print_columns(os, lines);
}

void render(std::ostream& os, const ClassesReport& rep, const RunConfig& cfg) {
  switch (cfg.output_format) {
    case Format::csv: {
      std::vector<ValueRow> rows;
      for (const ClassEntry& e : rep.classes) rows.push_back(e.row);
      write_csv_rows(os, rows, cfg);
      return;
    }
    case Format::json: {
      ordered_json j;
      j["D"] = rep.D.get_str();
      j["h"] = std::to_string(rep.h);
      j["h_plus"] = std::to_string(rep.h_plus);
      j["structure"] = rep.structure;
      j["norm_eps"] = std::to_string(rep.norm_eps);
      j["log_eps"] = rep.log_eps.to_string(cfg.digits_out);
      j["classes"] = ordered_json::array();
      for (const ClassEntry& e : rep.classes) {
        ordered_json c = row_json(e.row, cfg);
        c["order"] = std::to_string(e.order);
        c["inverse_index"] = std::to_string(e.inverse_index);
        c["real"] = e.real ? "true" : "false";
        j["classes"].push_back(std::move(c));
      }
      os << j.dump(2) << '\n';
      return;
    }
    case Format::text:
      break;
  }
  os << "D = " << rep.D.get_str() << "  h = " << rep.h << "  h+ = " << rep.h_plus << "  Cl+(D) = " << rep.structure
     << "  N(eps_D) = " << rep.norm_eps << "  log eps = " << rep.log_eps.to_string(cfg.digits_out) << "\n\n";
  std::vector<std::vector<std::string>> lines{{"#", "form", "w", "order", "inverse", "val(w)", "real"}};
  for (std::size_t i = 0; i < rep.classes.size(); ++i) {
    const ClassEntry& e = rep.classes[i];
    lines.push_back({std::to_string(i), form_string(e.cls.key()), e.row.label, std::to_string(e.order),
                     std::to_string(e.inverse_index), text_value_line(e.row, cfg), yes_no(e.real)});
  }
  print_columns(os, lines);
}

void render(std::ostream& os, const SweepReport& rep, const RunConfig& cfg) {
  const SweepSummary& s = rep.summary;
  auto describe = [&](std::size_t i) {
    const ValueRow& r = rep.rows[i];
    return "D=" + r.D.get_str() + " " + form_string(r.rep) + " " + text_value_line(r, cfg);
  };
  std::vector<std::string> summary{
      "classes " + std::to_string(rep.rows.size()) + ", real " + std::to_string(s.real_count),
      "min real val " + (s.min_real ? describe(*s.min_real) : std::string("-")),
      "max real val " + (s.max_real ? describe(*s.max_real) : std::string("-")),
      "min Re val " + describe(s.min_re_all),
      "max |Im val| " + fmt_short(s.max_abs_im, 10) + ", |Im| >= 1: " + std::to_string(s.outside)};
  const int half = static_cast<int>(s.histogram.size() / 2);
  std::vector<std::string> bins;
  for (std::size_t b = 0; b < s.histogram.size(); ++b) {
    std::ostringstream c;
    c << std::fixed << std::setprecision(1) << (static_cast<int>(b) - half) * s.bin_width;
    bins.push_back(c.str());
  }

  switch (cfg.output_format) {
    case Format::csv:
      write_csv_rows(os, rep.rows, cfg);
      for (const std::string& line : summary) os << "# " << line << '\n';
      os << "# Im histogram (bin centre: count)";
      for (std::size_t b = 0; b < bins.size(); ++b) os << ' ' << bins[b] << ':' << s.histogram[b];
      os << '\n';
      return;
    case Format::json: {
      ordered_json j;
      j["d_max"] = std::to_string(rep.d_max);
      j["rows"] = ordered_json::array();
      for (const ValueRow& r : rep.rows) j["rows"].push_back(row_json(r, cfg));
      ordered_json sj;
      sj["classes"] = std::to_string(rep.rows.size());
      sj["real"] = std::to_string(s.real_count);
      if (s.min_real) sj["min_real"] = row_json(rep.rows[*s.min_real], cfg);
      if (s.max_real) sj["max_real"] = row_json(rep.rows[*s.max_real], cfg);
      sj["min_re"] = row_json(rep.rows[s.min_re_all], cfg);
      sj["max_abs_im"] = fmt_short(s.max_abs_im, 10);
      sj["outside_unit_interval"] = std::to_string(s.outside);
      ordered_json hist = ordered_json::array();
      for (std::size_t b = 0; b < bins.size(); ++b) hist.push_back({{"centre", bins[b]}, {"count", std::to_string(s.histogram[b])}});
      sj["im_histogram"] = std::move(hist);
      j["summary"] = std::move(sj);
      os << j.dump(2) << '\n';
      return;
    }
    case Format::text:
      break;
  }
  std::vector<std::vector<std::string>> lines{{"D", "#", "form", "val(w)"}};
  for (const ValueRow& r : rep.rows) {
    lines.push_back({r.D.get_str(), std::to_string(r.class_index), form_string(r.rep), text_value_line(r, cfg)});
  }
  print_columns(os, lines);
  os << '\n';
  for (const std::string& line : summary) os << line << '\n';
  os << "Im histogram:\n";
  std::size_t peak = *std::max_element(s.histogram.begin(), s.histogram.end());
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const std::size_t bar = peak ? (s.histogram[b] * 50 + peak - 1) / peak : 0;
    os << std::setw(5) << bins[b] << ' ' << std::setw(6) << s.histogram[b] << ' ' << std::string(bar, '#') << '\n';
  }
}

void render(std::ostream& os, const ObservationReport& rep, const RunConfig& cfg) {
  const std::map<std::size_t, std::size_t> index = markoff_indices(rep.nodes);
  auto idx = [&](std::size_t node) {
    auto it = index.find(node);
    return it == index.end() ? std::string("-") : std::to_string(it->second);
  };

  switch (cfg.output_format) {
    case Format::csv: {
      write_csv_line(os, {"i", "m", "a", "b", "path", "k1", "k2", "theta1", "re_val1", "im_val1", "theta2", "re_val2",
                          "im_val2", "L"});
      for (std::size_t node : sorted_by_m(rep.nodes)) {
        const MarkoffNode& n = rep.nodes[node];
        const MarkoffValue& v = rep.values[node];
        write_csv_line(os, {idx(node), n.m.get_str(), n.a.get_str(), n.b.get_str(), n.path, v.theta.k1.get_str(),
                            v.theta.k2.get_str(), v.theta.theta1.to_string(), fmt(v.val1.re, cfg), fmt(v.val1.im, cfg),
                            v.theta.theta2.to_string(), fmt(v.val2.re, cfg), fmt(v.val2.im, cfg),
                            v.theta.L.to_string(cfg.digits_out)});
      }
      return;
    }
    case Format::json: {
      ordered_json j;
      j["nodes"] = ordered_json::array();
      for (std::size_t node : sorted_by_m(rep.nodes)) {
        const MarkoffNode& n = rep.nodes[node];
        const MarkoffValue& v = rep.values[node];
        j["nodes"].push_back({{"i", idx(node)},
                              {"m", n.m.get_str()},
                              {"a", n.a.get_str()},
                              {"b", n.b.get_str()},
                              {"path", n.path},
                              {"k1", v.theta.k1.get_str()},
                              {"k2", v.theta.k2.get_str()},
                              {"theta1", v.theta.theta1.to_string()},
                              {"val1", {{"re", fmt(v.val1.re, cfg)}, {"im", fmt(v.val1.im, cfg)}}},
                              {"theta2", v.theta.theta2.to_string()},
                              {"val2", {{"re", fmt(v.val2.re, cfg)}, {"im", fmt(v.val2.im, cfg)}}},
                              {"L", v.theta.L.to_string(cfg.digits_out)}});
      }
      ordered_json obs;
      obs["iv_only_m1_m2_real"] = yes_no(rep.iv_holds());
      obs["v_im_signs"] = yes_no(rep.v_holds());
      obs["vi_betweenness"] = yes_no(rep.vi_holds());
      obs["vii_neighbor_convergence"] = yes_no(rep.vii_holds());
      obs["conjugate_pairs"] = yes_no(rep.conjugate_mismatch.empty());
      obs["re_min"] = fmt(rep.re_min, cfg);
      obs["re_max"] = fmt(rep.re_max, cfg);
      obs["im_max"] = fmt(rep.im_max, cfg);
      j["observations"] = std::move(obs);
      j["trends"] = ordered_json::array();
      for (const NeighborTrend& t : rep.trends) {
        ordered_json tj{{"m", rep.nodes[t.node].m.get_str()}, {"side", std::string(1, t.side)}};
        tj["terms"] = ordered_json::array();
        for (std::size_t k = 0; k < t.n.size(); ++k) {
          tj["terms"].push_back({{"n", t.n[k].get_str()}, {"delta", fmt_short(t.deltas[k], 6)}});
        }
        j["trends"].push_back(std::move(tj));
      }
      os << j.dump(2) << '\n';
      return;
    }
    case Format::text:
      break;
  }

  std::vector<std::vector<std::string>> lines{{"i", "m", "(a,b,m)", "theta_1", "val(theta_1)", "theta_2", "val(theta_2)"}};
  for (std::size_t node : sorted_by_m(rep.nodes)) {
    const MarkoffNode& n = rep.nodes[node];
    const MarkoffValue& v = rep.values[node];
    lines.push_back({idx(node), n.m.get_str(), triple_string(n), v.theta.theta1.to_string(), fmt_complex(v.val1, cfg),
                     v.theta.theta2.to_string(), fmt_complex(v.val2, cfg)});
  }
  print_columns(os, lines);

  std::size_t vertices = 0;
  for (const Betweenness& b : rep.betweenness) vertices += (b.j == 1);
  std::size_t vi_failures = 0;
  for (const Betweenness& b : rep.betweenness) vi_failures += !b.holds();
  os << "\nObservations\n";
  os << "  (iv)  real values only at m = 1, 2: " << yes_no(rep.iv_holds()) << " (" << rep.real_nodes.size()
     << " real)\n";
  os << "  (v)   Im val(theta_1) > 0 > Im val(theta_2) for m >= 5: " << yes_no(rep.v_holds()) << " ("
     << rep.sign_violations.size() << " violations)\n";
  os << "  (vi)  val(theta_j'') between val(theta_j) and val(theta_j') at " << vertices
     << " vertices, real parts only at (1,2,5): " << yes_no(rep.vi_holds()) << " (" << vi_failures << " failures)\n";
  os << "  (vii) |val(theta^R_{k,1}) - val(theta_1)| and |val(theta^L_{k,2}) - val(theta_2)| decreasing: "
     << yes_no(rep.vii_holds()) << '\n';
  for (const NeighborTrend& t : rep.trends) {
    os << "        m = " << rep.nodes[t.node].m.get_str() << ' ' << t.side << ':';
    for (std::size_t k = 0; k < t.n.size(); ++k) os << ' ' << t.n[k].get_str() << " (" << fmt_short(t.deltas[k], 3) << ')';
    os << '\n';
  }
  os << "  conj(val(theta_1)) = val(theta_2) at every node: " << yes_no(rep.conjugate_mismatch.empty()) << '\n';
  os << "  Re val range [" << fmt(rep.re_min, cfg) << ", " << fmt(rep.re_max, cfg) << "]\n";
  os << "  max |Im val| " << fmt(rep.im_max, cfg) << " (Im val(theta_{3,1}) = " << fmt(rep.values[2].val1.im, cfg)
     << ")\n";
  os << "\nTree\n";
  render_markoff_tree(os, rep);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"High-precision values of j at real quadratic irrationalities", "valq"};
  app.require_subcommand(1);

  std::string prec_text, format_text = "text", out_path;
  int digits = 0;  // 0: 25, or fewer when the precision cannot support them
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--prec", prec_text, "Target precision in bits (default 192, or VALQ_PREC)");
    sub->add_option("--digits", digits, "Significant digits printed (default 25, fewer when --prec is low)");
    sub->add_option("--jobs", jobs, "Worker threads")->capture_default_str();
    sub->add_option("--format", format_text, "Output format")->check(CLI::IsMember({"text", "csv", "json"}))->capture_default_str();
    sub->add_option("--out", out_path, "Write output to this file");
  };

  std::string cf_text, surd_text, form_text;
  CLI::App* val_cmd = app.add_subcommand("val", "val(w) for one quadratic irrationality");
  auto* input = val_cmd->add_option_group("input");
  input->add_option("--cf", cf_text, "Purely periodic continued fraction, e.g. \"[2,1]\"");
  input->add_option("--surd", surd_text, "Surd, e.g. \"(1+sqrt(145))/6\"");
  input->add_option("--form", form_text, "Form a,b,c with w = (-b+sqrt(D))/(2a)");
  input->require_option(1);
  add_common(val_cmd);

  int table_k = 0;
  CLI::App* table_cmd = app.add_subcommand("table", "Reproduce one of the value tables 1-7");
  table_cmd->add_option("k", table_k, "Table number")->required();
  add_common(table_cmd);

  std::string classes_d;
  CLI::App* classes_cmd = app.add_subcommand("classes", "Narrow class group of D with val per class");
  classes_cmd->add_option("D", classes_d, "Discriminant")->required();
  add_common(classes_cmd);

  long d_max = 0;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "val for every narrow class with D <= d_max");
  sweep_cmd->add_option("d_max", d_max, "Largest discriminant")->required();
  add_common(sweep_cmd);

  int depth = 3;
  std::size_t terms = 4;
  CLI::App* markoff_cmd = app.add_subcommand("markoff", "Markoff irrationalities and observations on the tree");
  markoff_cmd->add_option("--depth", depth, "Tree depth below the (1,2,5) vertex")->capture_default_str();
  markoff_cmd->add_option("-K,--terms", terms, "Neighbor sequence terms per side")->capture_default_str();
  add_common(markoff_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitParse;
  }

  try {
    RunConfig cfg = default_config();
    if (!prec_text.empty()) cfg.precision_bits = parse_precision(prec_text);
    cfg.digits_out = digits != 0 ? digits : std::max(1, std::min(25, max_digits(cfg.precision_bits)));
    cfg.parallelism = jobs;
    cfg.output_format = format_text == "csv" ? Format::csv : format_text == "json" ? Format::json : Format::text;
    cfg.output_path = out_path;
    cfg.validate();

    std::ofstream file;
    std::ostream* sink = &out;
    if (!cfg.output_path.empty()) {
      file.open(cfg.output_path);
      if (!file) throw ResourceError("cannot open " + cfg.output_path + " for writing");
      sink = &file;
    }

    if (val_cmd->parsed()) {
      if (!cf_text.empty()) {
        const std::vector<long> period = parse_cf(cf_text);
        render(*sink, cmd_val(cf_value(period), cfg, cf_to_string(period)), cfg);
      } else if (!surd_text.empty()) {
        render(*sink, cmd_val(parse_surd(surd_text), cfg, surd_text), cfg);
      } else {
        render(*sink, cmd_val(parse_form(form_text), cfg, form_text), cfg);
      }
    } else if (table_cmd->parsed()) {
      render(*sink, cmd_table(table_k, cfg), cfg);
    } else if (classes_cmd->parsed()) {
      Integer D;
      if (D.set_str(classes_d, 10) != 0) throw ParseError("discriminant must be an integer, got '" + classes_d + "'");
      render(*sink, cmd_classes(D, cfg), cfg);
    } else if (sweep_cmd->parsed()) {
      render(*sink, cmd_sweep(d_max, cfg), cfg);
    } else if (markoff_cmd->parsed()) {
      if (depth < 0) throw DomainError("markoff: depth must be non-negative");
      render(*sink, cmd_markoff(depth, terms, cfg), cfg);
    }
    sink->flush();
    if (!*sink) throw ResourceError("write failed");
    return kExitOk;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const ResourceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitResource;
  } catch (const RangeError& e) {
    err << "error: " << e.what() << '\n';
    return kExitResource;
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return kExitResource;
  }
}

}  // namespace valq::cli
