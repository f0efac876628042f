// Command-line front end: value tables, class reports, discriminant sweeps
// and Markoff-tree reports, rendered as text, CSV or JSON.
#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "valq/heckeval.hpp"
#include "valq/markoff.hpp"
#include "valq/numerics.hpp"
#include "valq/quadratic.hpp"

namespace valq::cli {

enum class Format { text, csv, json };

struct RunConfig {
  Precision precision_bits = 192;  // absolute error target for every value
  int digits_out = 25;
  unsigned parallelism = 1;
  Format output_format = Format::text;
  std::string output_path;  // empty: standard output

  // Throws ParseError unless digits_out <= floor(precision_bits log10 2) - 8.
  void validate() const;
};

// floor(bits log10 2) - 8: the most digits a value computed to `bits` may show.
int max_digits(Precision bits);

// Defaults with VALQ_PREC applied when set. Throws ParseError on a bad value.
RunConfig default_config();

// Largest discriminant for which class metadata is computed alongside a value.
inline constexpr long kClassMetadataLimit = 100000000;

struct ValueRow {
  std::string label;  // w as the user or the table names it
  Integer D;
  Form rep;           // the form actually integrated
  BigComplex value{kMinPrecision};
  BigReal log_eps{kMinPrecision};
  int norm_eps = 1;
  std::size_t h_plus = 0;       // 0 when not computed
  std::size_t class_index = 0;  // position in narrow_class_reps(D)
  BigReal est_error{kMinPrecision};
  std::size_t nodes = 0;
};

ValueRow cmd_val(const QuadIrr& w, const RunConfig& cfg, std::string label = {});

struct Table {
  int k = 0;
  std::string caption;
  std::vector<ValueRow> rows;
  std::vector<Integer> markoff_m;  // table 7 only
};

// Throws DomainError unless 1 <= k <= 7.
Table cmd_table(int k, const RunConfig& cfg);

struct ClassEntry {
  FormClass cls;
  std::size_t order = 1;
  std::size_t inverse_index = 0;
  bool real = false;
  ValueRow row;
};

struct ClassesReport {
  Integer D;
  std::size_t h = 0, h_plus = 0;
  std::string structure;  // e.g. "Z/2 x Z/2"
  int norm_eps = 1;
  BigReal log_eps{kMinPrecision};
  std::vector<ClassEntry> classes;
};

ClassesReport cmd_classes(const Integer& D, const RunConfig& cfg);

struct SweepSummary {
  std::size_t real_count = 0;
  std::optional<std::size_t> min_real, max_real;  // row indices
  std::size_t min_re_all = 0;                     // row index
  BigReal max_abs_im{kMinPrecision};
  double bin_width = 0.1;
  std::vector<std::size_t> histogram;             // Im over [-1, 1) in bins of bin_width
  std::size_t outside = 0;                        // |Im| >= 1
};

struct SweepReport {
  long d_max = 0;
  std::vector<ValueRow> rows;  // ordered by (D, class_index)
  SweepSummary summary;
};

// Throws DomainError for d_max < 5.
SweepReport cmd_sweep(long d_max, const RunConfig& cfg);

// |Im| below this counts as real.
BigReal real_tolerance(Precision target);

ObservationReport cmd_markoff(int depth, std::size_t K, const RunConfig& cfg);

// Abelian group structure from the orders of all classes, "Z/4", "Z/2 x Z/2", "1".
std::string group_structure(const std::vector<std::size_t>& orders);

void render(std::ostream& os, const ValueRow& row, const RunConfig& cfg);
void render(std::ostream& os, const Table& table, const RunConfig& cfg);
void render(std::ostream& os, const ClassesReport& report, const RunConfig& cfg);
void render(std::ostream& os, const SweepReport& report, const RunConfig& cfg);
void render(std::ostream& os, const ObservationReport& report, const RunConfig& cfg);

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 2;
inline constexpr int kExitConvergence = 3;
inline constexpr int kExitResource = 4;

// Full command line; returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace valq::cli
