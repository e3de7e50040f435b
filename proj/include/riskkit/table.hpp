#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace riskkit {

using json = nlohmann::json;

enum class ColumnKind { numeric, factor, date, identifier };

std::string to_string(ColumnKind k);
ColumnKind column_kind_from_string(const std::string& s);

// ISO-8601 calendar dates are stored as a day serial (days since 1970-01-01,
// proleptic Gregorian) so range rules compare them like numbers.
std::optional<std::int32_t> parse_iso_date(const std::string& s);
std::string format_iso_date(std::int32_t serial);

// Shortest decimal representation that round-trips the exact double.
std::string format_double(double v);

struct DictEntry {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  std::string unit;
  std::vector<std::string> factor_levels;
  std::string label;
};

struct DataDictionary {
  std::vector<DictEntry> entries;
  std::optional<std::string> primary_key;

  const DictEntry* find(const std::string& name) const;
  const DictEntry& at(const std::string& name) const;  // throws SchemaError

  static DataDictionary from_json(const json& j);
  static DataDictionary load(const std::string& path);
  json to_json() const;
};

// One typed column; only the vector matching `kind` is populated, plus the
// per-row missing flags. Factor cells hold indices into `levels`.
struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  std::vector<double> num;
  std::vector<std::int32_t> code;  // factor level index or date serial
  std::vector<std::string> text;   // identifier payload
  std::vector<std::uint8_t> missing;
  std::vector<std::string> levels;

  std::size_t size() const { return missing.size(); }
  bool is_missing(std::size_t row) const { return missing[row] != 0; }
};

// Canonical cell rendering: shortest numeric form, level label, ISO date, or
// raw identifier; missing renders as the empty string.
std::string cell_to_text(const Column& c, std::size_t row);

struct Table {
  std::string name;
  std::vector<Column> columns;
  std::size_t row_count = 0;
  std::optional<std::string> primary_key;

  const Column* find(const std::string& name) const;
  const Column& col(const std::string& name) const;  // throws SchemaError
  Column& col(const std::string& name);

  // Record identity used by reports: primary-key value, else "row<N>" (1-based).
  std::string record_id(std::size_t row) const;
};

struct IngestIssue {
  std::string column;
  std::size_t row = 0;  // 1-based data row (header not counted)
  std::string raw;
};

struct IngestLog {
  std::vector<IngestIssue> issues;
  json to_json() const;
};

struct LoadResult {
  Table table;
  IngestLog log;
};

LoadResult load_table(const std::string& path, const DataDictionary& dict,
                      const std::string& table_name = "");
void save_table(const Table& t, const std::string& path);

Table select_columns(const Table& t, const std::vector<std::string>& names);
Table filter_rows(const Table& t, const std::vector<std::uint8_t>& keep);

struct JoinDisagreement {
  std::string column;
  std::size_t left_row = 0;  // 0-based
  std::string left_value;
  std::string right_value;
};

struct JoinReport {
  std::size_t matched = 0;
  std::size_t unmatched = 0;
  std::vector<JoinDisagreement> disagreements;
  std::vector<std::string> disagreeing_columns() const;
  json to_json() const;
};

struct JoinResult {
  Table table;
  JoinReport report;
};

// Many-to-one left join: every left row kept in order; right columns whose
// names are new are appended (missing where unmatched); columns present on
// both sides are compared on matched rows and disagreements reported.
JoinResult join(const Table& left, const Table& right, const std::string& left_key,
                const std::string& right_key);

enum class RuleSeverity { warn, exclude };

// A rule's predicate describes the offending condition directly: a row "hits"
// the rule when the predicate holds. Threshold values are kept as raw JSON so
// date columns can take ISO strings.
enum class PredicateKind { gt, ge, lt, le, outside, in_set, not_in_set, is_missing, cmp_col };

struct Rule {
  std::string name;
  std::string column;
  RuleSeverity severity = RuleSeverity::warn;
  PredicateKind kind = PredicateKind::is_missing;
  json threshold_a;  // gt/ge/lt/le value, outside lower bound
  json threshold_b;  // outside upper bound
  std::vector<std::string> level_set;
  std::string cmp_op;      // cmp_col: < <= > >= == !=
  std::string other_column;
};

struct RuleSet {
  std::vector<Rule> rules;
  static RuleSet from_json(const json& j);
  static RuleSet load(const std::string& path);
};

struct RuleOutcome {
  std::string rule;
  std::string column;
  std::string severity;
  std::size_t hits = 0;
  std::vector<std::string> excluded_ids;  // exclude rules only
};

struct RuleReport {
  std::vector<RuleOutcome> per_rule;
  std::size_t rows_in = 0;
  std::size_t rows_removed = 0;
  std::size_t rows_out = 0;
  std::vector<std::string> removed_ids;
  json to_json() const;
};

struct RuleApplication {
  Table table;
  RuleReport report;
};

// Removes the union of exclude-rule hits; every rule's report entry counts all
// of its own hits even when a row is removed by several rules at once.
RuleApplication apply_rules(const Table& t, const RuleSet& rules);

}  // namespace riskkit
