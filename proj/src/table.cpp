#include "riskkit/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "riskkit/errors.hpp"

namespace riskkit {

std::string to_string(ColumnKind k) {
  switch (k) {
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::factor: return "factor";
    case ColumnKind::date: return "date";
    case ColumnKind::identifier: return "identifier";
  }
  return "numeric";
}

ColumnKind column_kind_from_string(const std::string& s) {
  if (s == "numeric") return ColumnKind::numeric;
  if (s == "factor") return ColumnKind::factor;
  if (s == "date") return ColumnKind::date;
  if (s == "identifier") return ColumnKind::identifier;
  throw SchemaError("unknown column kind '" + s + "'");
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

// Howard Hinnant's civil-day algorithms; valid over the full Gregorian range.
std::int32_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 +
                       static_cast<unsigned>(d) - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int32_t>(doe) - 719468;
}

void civil_from_days(std::int32_t z, int& y, int& m, int& d) {
  z += 719468;
  const int era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<int>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y += m <= 2;
}

int days_in_month(int y, int m) {
  static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2) {
    bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    return leap ? 29 : 28;
  }
  return lengths[m - 1];
}

bool is_missing_marker(const std::string& s) { return s.empty() || s == "NA"; }

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::optional<std::int32_t> parse_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  auto num = [](const char* b, const char* e, int& out) {
    auto r = std::from_chars(b, e, out);
    return r.ec == std::errc() && r.ptr == e;
  };
  const char* p = s.data();
  if (!num(p, p + 4, y) || !num(p + 5, p + 7, m) || !num(p + 8, p + 10, d)) return std::nullopt;
  if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m)) return std::nullopt;
  return days_from_civil(y, m, d);
}

std::string format_iso_date(std::int32_t serial) {
  int y, m, d;
  civil_from_days(serial, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
  return buf;
}

const DictEntry* DataDictionary::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

const DictEntry& DataDictionary::at(const std::string& name) const {
  const DictEntry* e = find(name);
  if (!e) throw SchemaError("column '" + name + "' not in dictionary");
  return *e;
}

DataDictionary DataDictionary::from_json(const json& j) {
  if (!j.is_object() || !j.contains("columns") || !j["columns"].is_array())
    throw SchemaError("dictionary must be an object with a 'columns' array");
  DataDictionary d;
  std::unordered_set<std::string> seen;
  for (const auto& c : j["columns"]) {
    DictEntry e;
    e.name = c.at("name").get<std::string>();
    if (e.name.empty()) throw SchemaError("dictionary column with empty name");
    // '*' and '=' are reserved by the feature-name grammar (a*b, col=level)
    if (e.name.find('*') != std::string::npos || e.name.find('=') != std::string::npos)
      throw SchemaError("column name '" + e.name + "' uses a reserved character (* or =)");
    if (!seen.insert(e.name).second)
      throw SchemaError("duplicate dictionary column '" + e.name + "'");
    e.kind = column_kind_from_string(c.at("kind").get<std::string>());
    if (c.contains("unit")) e.unit = c["unit"].get<std::string>();
    if (c.contains("label")) e.label = c["label"].get<std::string>();
    if (e.kind == ColumnKind::factor) {
      if (!c.contains("levels") || !c["levels"].is_array())
        throw SchemaError("factor column '" + e.name + "' needs a 'levels' array");
      for (const auto& lv : c["levels"]) e.factor_levels.push_back(lv.get<std::string>());
      std::unordered_set<std::string> distinct(e.factor_levels.begin(), e.factor_levels.end());
      if (distinct.size() < 2)
        throw SchemaError("factor column '" + e.name + "' needs >= 2 distinct levels");
      if (distinct.size() != e.factor_levels.size())
        throw SchemaError("factor column '" + e.name + "' lists a level twice");
    }
    d.entries.push_back(std::move(e));
  }
  if (j.contains("primary_key")) {
    std::string pk = j["primary_key"].get<std::string>();
    if (!d.find(pk)) throw SchemaError("primary_key '" + pk + "' not among dictionary columns");
    d.primary_key = pk;
  }
  return d;
}

DataDictionary DataDictionary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dictionary file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError("dictionary '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(j);
}

json DataDictionary::to_json() const {
  json cols = json::array();
  for (const auto& e : entries) {
    json c{{"name", e.name}, {"kind", to_string(e.kind)}};
    if (!e.unit.empty()) c["unit"] = e.unit;
    if (!e.label.empty()) c["label"] = e.label;
    if (e.kind == ColumnKind::factor) c["levels"] = e.factor_levels;
    cols.push_back(std::move(c));
  }
  json j{{"columns", std::move(cols)}};
  if (primary_key) j["primary_key"] = *primary_key;
  return j;
}

std::string cell_to_text(const Column& c, std::size_t row) {
  if (c.is_missing(row)) return "";
  switch (c.kind) {
    case ColumnKind::numeric: return format_double(c.num[row]);
    case ColumnKind::factor: return c.levels[static_cast<std::size_t>(c.code[row])];
    case ColumnKind::date: return format_iso_date(c.code[row]);
    case ColumnKind::identifier: return c.text[row];
  }
  return "";
}

const Column* Table::find(const std::string& name) const {
  for (const auto& c : columns)
    if (c.name == name) return &c;
  return nullptr;
}

const Column& Table::col(const std::string& name) const {
  const Column* c = find(name);
  if (!c) throw SchemaError("table '" + this->name + "' has no column '" + name + "'");
  return *c;
}

Column& Table::col(const std::string& name) {
  for (auto& c : columns)
    if (c.name == name) return c;
  throw SchemaError("table '" + this->name + "' has no column '" + name + "'");
}

std::string Table::record_id(std::size_t row) const {
  if (primary_key) return cell_to_text(col(*primary_key), row);
  return "row" + std::to_string(row + 1);
}

json IngestLog::to_json() const {
  json arr = json::array();
  for (const auto& i : issues)
    arr.push_back(json{{"column", i.column}, {"row", i.row}, {"raw", i.raw}});
  return json{{"unparseable_cells", issues.size()}, {"issues", std::move(arr)}};
}

namespace {

// RFC-4180-ish reader: quoted fields with "" escapes, CRLF or LF endings.
// Returns one row per record; the final unterminated record is kept.
std::vector<std::vector<std::string>> parse_csv(const std::string& content,
                                                const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, field_started = false;
  std::size_t line = 1;
  auto end_field = [&] {
    row.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };
  for (std::size_t i = 0; i < content.size(); ++i) {
    char ch = content[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
        if (ch == '\n') ++line;
      }
    } else if (ch == '"' && !field_started && field.empty()) {
      quoted = true;
      field_started = true;
    } else if (ch == ',') {
      end_field();
    } else if (ch == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      end_row();
      ++line;
    } else {
      field += ch;
      field_started = true;
    }
  }
  if (quoted)
    throw IntegrityError("unterminated quote in '" + path + "' near line " + std::to_string(line));
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else out += ch;
  }
  out += '"';
  return out;
}

}  // namespace

LoadResult load_table(const std::string& path, const DataDictionary& dict,
                      const std::string& table_name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open data file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  auto rows = parse_csv(buf.str(), path);
  if (rows.empty()) throw SchemaError("'" + path + "' has no header row");

  const auto& header = rows[0];
  std::vector<std::string> unknown;
  for (const auto& h : header)
    if (!dict.find(h)) unknown.push_back(h);
  if (!unknown.empty()) {
    std::string msg = "'" + path + "' has columns not in the dictionary:";
    for (const auto& u : unknown) msg += " '" + u + "'";
    throw SchemaError(msg);
  }
  std::unordered_set<std::string> header_set(header.begin(), header.end());
  if (header_set.size() != header.size())
    throw SchemaError("'" + path + "' repeats a header column");

  LoadResult out;
  Table& t = out.table;
  t.name = table_name.empty() ? path : table_name;
  t.row_count = rows.size() - 1;
  for (const auto& h : header) {
    const DictEntry& e = dict.at(h);
    Column c;
    c.name = e.name;
    c.kind = e.kind;
    c.levels = e.factor_levels;
    c.missing.assign(t.row_count, 0);
    switch (e.kind) {
      case ColumnKind::numeric: c.num.assign(t.row_count, 0.0); break;
      case ColumnKind::factor:
      case ColumnKind::date: c.code.assign(t.row_count, 0); break;
      case ColumnKind::identifier: c.text.assign(t.row_count, ""); break;
    }
    t.columns.push_back(std::move(c));
  }

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& rec = rows[r];
    if (rec.size() != header.size())
      throw IntegrityError("'" + path + "' row " + std::to_string(r) + " has " +
                           std::to_string(rec.size()) + " fields, expected " +
                           std::to_string(header.size()));
    for (std::size_t ci = 0; ci < header.size(); ++ci) {
      Column& c = t.columns[ci];
      std::size_t row = r - 1;
      std::string cell = trim(rec[ci]);
      if (is_missing_marker(cell)) {
        c.missing[row] = 1;
        continue;
      }
      switch (c.kind) {
        case ColumnKind::numeric: {
          double v = 0;
          auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
          if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() ||
              !std::isfinite(v)) {
            c.missing[row] = 1;
            out.log.issues.push_back({c.name, r, rec[ci]});
          } else {
            c.num[row] = v;
          }
          break;
        }
        case ColumnKind::factor: {
          auto it = std::find(c.levels.begin(), c.levels.end(), cell);
          if (it == c.levels.end()) {
            c.missing[row] = 1;
            out.log.issues.push_back({c.name, r, rec[ci]});
          } else {
            c.code[row] = static_cast<std::int32_t>(it - c.levels.begin());
          }
          break;
        }
        case ColumnKind::date: {
          auto d = parse_iso_date(cell);
          if (!d) {
            c.missing[row] = 1;
            out.log.issues.push_back({c.name, r, rec[ci]});
          } else {
            c.code[row] = *d;
          }
          break;
        }
        case ColumnKind::identifier: c.text[row] = cell; break;
      }
    }
  }

  if (dict.primary_key && t.find(*dict.primary_key)) {
    t.primary_key = dict.primary_key;
    const Column& pk = t.col(*t.primary_key);
    std::unordered_map<std::string, std::size_t> counts;
    for (std::size_t r = 0; r < t.row_count; ++r) {
      if (pk.is_missing(r))
        throw IntegrityError("primary key '" + *t.primary_key + "' missing in row " +
                             std::to_string(r + 1) + " of '" + path + "'");
      counts[cell_to_text(pk, r)]++;
    }
    std::vector<std::string> dups;
    for (const auto& [v, n] : counts)
      if (n > 1) dups.push_back(v);
    if (!dups.empty()) {
      std::sort(dups.begin(), dups.end());
      std::string msg = "duplicate primary key values in '" + path + "':";
      for (const auto& d : dups) msg += " '" + d + "'";
      throw IntegrityError(msg);
    }
  }
  return out;
}

void save_table(const Table& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  for (std::size_t ci = 0; ci < t.columns.size(); ++ci)
    out << (ci ? "," : "") << csv_escape(t.columns[ci].name);
  out << "\n";
  for (std::size_t r = 0; r < t.row_count; ++r) {
    for (std::size_t ci = 0; ci < t.columns.size(); ++ci)
      out << (ci ? "," : "") << csv_escape(cell_to_text(t.columns[ci], r));
    out << "\n";
  }
  if (!out) throw ConfigError("short write to '" + path + "'");
}

Table select_columns(const Table& t, const std::vector<std::string>& names) {
  Table out;
  out.name = t.name;
  out.row_count = t.row_count;
  for (const auto& n : names) out.columns.push_back(t.col(n));
  if (t.primary_key &&
      std::find(names.begin(), names.end(), *t.primary_key) != names.end())
    out.primary_key = t.primary_key;
  return out;
}

Table filter_rows(const Table& t, const std::vector<std::uint8_t>& keep) {
  if (keep.size() != t.row_count) throw ShapeError("keep mask length mismatch");
  Table out;
  out.name = t.name;
  out.primary_key = t.primary_key;
  for (const auto& c : t.columns) {
    Column nc;
    nc.name = c.name;
    nc.kind = c.kind;
    nc.levels = c.levels;
    for (std::size_t r = 0; r < t.row_count; ++r) {
      if (!keep[r]) continue;
      nc.missing.push_back(c.missing[r]);
      switch (c.kind) {
        case ColumnKind::numeric: nc.num.push_back(c.num[r]); break;
        case ColumnKind::factor:
        case ColumnKind::date: nc.code.push_back(c.code[r]); break;
        case ColumnKind::identifier: nc.text.push_back(c.text[r]); break;
      }
    }
    out.columns.push_back(std::move(nc));
  }
  out.row_count = out.columns.empty()
                      ? static_cast<std::size_t>(std::count(keep.begin(), keep.end(), 1))
                      : out.columns[0].size();
  return out;
}

std::vector<std::string> JoinReport::disagreeing_columns() const {
  std::vector<std::string> cols;
  for (const auto& d : disagreements)
    if (std::find(cols.begin(), cols.end(), d.column) == cols.end())
      cols.push_back(d.column);
  return cols;
}

json JoinReport::to_json() const {
  json arr = json::array();
  for (const auto& d : disagreements)
    arr.push_back(json{{"column", d.column},
                       {"left_row", d.left_row},
                       {"left_value", d.left_value},
                       {"right_value", d.right_value}});
  return json{{"matched", matched},
              {"unmatched", unmatched},
              {"disagreeing_columns", disagreeing_columns()},
              {"disagreements", std::move(arr)}};
}

namespace {

void append_missing_cell(Column& c) {
  c.missing.push_back(1);
  switch (c.kind) {
    case ColumnKind::numeric: c.num.push_back(0.0); break;
    case ColumnKind::factor:
    case ColumnKind::date: c.code.push_back(0); break;
    case ColumnKind::identifier: c.text.push_back(""); break;
  }
}

void append_cell_from(Column& dst, const Column& src, std::size_t row) {
  dst.missing.push_back(src.missing[row]);
  switch (src.kind) {
    case ColumnKind::numeric: dst.num.push_back(src.num[row]); break;
    case ColumnKind::factor:
    case ColumnKind::date: dst.code.push_back(src.code[row]); break;
    case ColumnKind::identifier: dst.text.push_back(src.text[row]); break;
  }
}

}  // namespace

JoinResult join(const Table& left, const Table& right, const std::string& left_key,
                const std::string& right_key) {
  const Column& lk = left.col(left_key);
  const Column& rk = right.col(right_key);
  if (lk.kind != rk.kind)
    throw SchemaError("join keys '" + left_key + "' and '" + right_key +
                      "' have different kinds (" + to_string(lk.kind) + " vs " +
                      to_string(rk.kind) + ")");

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < right.row_count; ++r) {
    if (rk.is_missing(r))
      throw IntegrityError("join key '" + right_key + "' missing in right row " +
                           std::to_string(r + 1));
    auto [it, fresh] = index.emplace(cell_to_text(rk, r), r);
    if (!fresh)
      throw IntegrityError("right join key '" + right_key + "' is not unique: value '" +
                           it->first + "' repeats");
  }

  JoinResult out;
  out.table = left;  // left rows kept verbatim, in order

  std::vector<const Column*> appended;
  std::vector<const Column*> shared;
  for (const auto& rc : right.columns) {
    if (&rc == &rk) continue;
    if (left.find(rc.name)) shared.push_back(&rc);
    else appended.push_back(&rc);
  }

  std::vector<std::ptrdiff_t> match(left.row_count, -1);
  for (std::size_t r = 0; r < left.row_count; ++r) {
    if (lk.is_missing(r)) continue;
    auto it = index.find(cell_to_text(lk, r));
    if (it != index.end()) match[r] = static_cast<std::ptrdiff_t>(it->second);
  }
  for (auto m : match) (m >= 0 ? out.report.matched : out.report.unmatched)++;

  for (const Column* rc : appended) {
    Column nc;
    nc.name = rc->name;
    nc.kind = rc->kind;
    nc.levels = rc->levels;
    for (std::size_t r = 0; r < left.row_count; ++r) {
      if (match[r] < 0) append_missing_cell(nc);
      else append_cell_from(nc, *rc, static_cast<std::size_t>(match[r]));
    }
    out.table.columns.push_back(std::move(nc));
  }

  for (const Column* rc : shared) {
    const Column& lc = left.col(rc->name);
    for (std::size_t r = 0; r < left.row_count; ++r) {
      if (match[r] < 0) continue;
      std::string lv = cell_to_text(lc, r);
      std::string rv = cell_to_text(*rc, static_cast<std::size_t>(match[r]));
      if (lv != rv) out.report.disagreements.push_back({rc->name, r, lv, rv});
    }
  }
  return out;
}

RuleSet RuleSet::from_json(const json& j) {
  if (!j.is_object() || !j.contains("rules") || !j["rules"].is_array())
    throw SchemaError("rule set must be an object with a 'rules' array");
  RuleSet rs;
  std::size_t i = 0;
  for (const auto& r : j["rules"]) {
    ++i;
    Rule rule;
    rule.column = r.at("column").get<std::string>();
    rule.name = r.contains("name") ? r["name"].get<std::string>()
                                   : rule.column + "#" + std::to_string(i);
    std::string sev = r.value("severity", "warn");
    if (sev == "warn") rule.severity = RuleSeverity::warn;
    else if (sev == "exclude") rule.severity = RuleSeverity::exclude;
    else throw SchemaError("rule '" + rule.name + "': unknown severity '" + sev + "'");

    if (!r.contains("when") || !r["when"].is_object() || r["when"].size() != 1)
      throw SchemaError("rule '" + rule.name + "' needs a single-predicate 'when' object");
    const auto& w = r["when"];
    const std::string key = w.begin().key();
    const json& val = w.begin().value();
    if (key == "gt" || key == "ge" || key == "lt" || key == "le") {
      rule.kind = key == "gt"   ? PredicateKind::gt
                  : key == "ge" ? PredicateKind::ge
                  : key == "lt" ? PredicateKind::lt
                                : PredicateKind::le;
      rule.threshold_a = val;
    } else if (key == "outside") {
      if (!val.is_array() || val.size() != 2)
        throw SchemaError("rule '" + rule.name + "': 'outside' needs [lo, hi]");
      rule.kind = PredicateKind::outside;
      rule.threshold_a = val[0];
      rule.threshold_b = val[1];
    } else if (key == "in" || key == "not_in") {
      rule.kind = key == "in" ? PredicateKind::in_set : PredicateKind::not_in_set;
      if (!val.is_array()) throw SchemaError("rule '" + rule.name + "': level list expected");
      for (const auto& lv : val) rule.level_set.push_back(lv.get<std::string>());
    } else if (key == "is_missing") {
      rule.kind = PredicateKind::is_missing;
      if (!val.is_boolean() || !val.get<bool>())
        throw SchemaError("rule '" + rule.name + "': 'is_missing' must be true");
    } else if (key == "cmp") {
      rule.kind = PredicateKind::cmp_col;
      rule.cmp_op = val.at("op").get<std::string>();
      rule.other_column = val.at("other").get<std::string>();
      static const char* ops[] = {"<", "<=", ">", ">=", "==", "!="};
      if (std::find_if(std::begin(ops), std::end(ops),
                       [&](const char* o) { return rule.cmp_op == o; }) == std::end(ops))
        throw SchemaError("rule '" + rule.name + "': unknown comparison '" + rule.cmp_op + "'");
    } else {
      throw SchemaError("rule '" + rule.name + "': unknown predicate '" + key + "'");
    }
    rs.rules.push_back(std::move(rule));
  }
  return rs;
}

RuleSet RuleSet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open rule file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError("rule file '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(j);
}

namespace {

// Numeric view of a cell for threshold rules: numeric value or date serial.
double rule_value(const Column& c, std::size_t row, const std::string& rule_name) {
  if (c.kind == ColumnKind::numeric) return c.num[row];
  if (c.kind == ColumnKind::date) return static_cast<double>(c.code[row]);
  throw SchemaError("rule '" + rule_name + "': column '" + c.name +
                    "' is not numeric or date");
}

double rule_threshold(const json& v, const Column& c, const std::string& rule_name) {
  if (v.is_number()) {
    if (c.kind == ColumnKind::date)
      throw SchemaError("rule '" + rule_name + "': date column needs an ISO date threshold");
    return v.get<double>();
  }
  if (v.is_string() && c.kind == ColumnKind::date) {
    auto d = parse_iso_date(v.get<std::string>());
    if (!d)
      throw SchemaError("rule '" + rule_name + "': bad date '" + v.get<std::string>() + "'");
    return static_cast<double>(*d);
  }
  throw SchemaError("rule '" + rule_name + "': threshold type does not match column");
}

bool rule_hits(const Rule& rule, const Table& t, std::size_t row) {
  const Column& c = t.col(rule.column);
  if (rule.kind == PredicateKind::is_missing) return c.is_missing(row);
  if (c.is_missing(row)) return false;  // other predicates cannot evaluate
  switch (rule.kind) {
    case PredicateKind::gt:
      return rule_value(c, row, rule.name) > rule_threshold(rule.threshold_a, c, rule.name);
    case PredicateKind::ge:
      return rule_value(c, row, rule.name) >= rule_threshold(rule.threshold_a, c, rule.name);
    case PredicateKind::lt:
      return rule_value(c, row, rule.name) < rule_threshold(rule.threshold_a, c, rule.name);
    case PredicateKind::le:
      return rule_value(c, row, rule.name) <= rule_threshold(rule.threshold_a, c, rule.name);
    case PredicateKind::outside: {
      double v = rule_value(c, row, rule.name);
      return v < rule_threshold(rule.threshold_a, c, rule.name) ||
             v > rule_threshold(rule.threshold_b, c, rule.name);
    }
    case PredicateKind::in_set:
    case PredicateKind::not_in_set: {
      if (c.kind != ColumnKind::factor && c.kind != ColumnKind::identifier)
        throw SchemaError("rule '" + rule.name + "': membership needs a factor or identifier");
      std::string v = cell_to_text(c, row);
      bool in = std::find(rule.level_set.begin(), rule.level_set.end(), v) !=
                rule.level_set.end();
      return rule.kind == PredicateKind::in_set ? in : !in;
    }
    case PredicateKind::cmp_col: {
      const Column& o = t.col(rule.other_column);
      if (o.is_missing(row)) return false;
      double a = rule_value(c, row, rule.name);
      double b = rule_value(o, row, rule.name);
      if (rule.cmp_op == "<") return a < b;
      if (rule.cmp_op == "<=") return a <= b;
      if (rule.cmp_op == ">") return a > b;
      if (rule.cmp_op == ">=") return a >= b;
      if (rule.cmp_op == "==") return a == b;
      return a != b;
    }
    case PredicateKind::is_missing: break;
  }
  return false;
}

}  // namespace

RuleApplication apply_rules(const Table& t, const RuleSet& rules) {
  for (const auto& rule : rules.rules) {
    t.col(rule.column);  // absent column -> SchemaError before any work
    if (rule.kind == PredicateKind::cmp_col) t.col(rule.other_column);
  }

  RuleApplication out;
  out.report.rows_in = t.row_count;
  std::vector<std::uint8_t> keep(t.row_count, 1);
  for (const auto& rule : rules.rules) {
    RuleOutcome oc;
    oc.rule = rule.name;
    oc.column = rule.column;
    oc.severity = rule.severity == RuleSeverity::warn ? "warn" : "exclude";
    for (std::size_t r = 0; r < t.row_count; ++r) {
      if (!rule_hits(rule, t, r)) continue;
      oc.hits++;
      if (rule.severity == RuleSeverity::exclude) {
        oc.excluded_ids.push_back(t.record_id(r));
        keep[r] = 0;
      }
    }
    out.report.per_rule.push_back(std::move(oc));
  }
  for (std::size_t r = 0; r < t.row_count; ++r)
    if (!keep[r]) out.report.removed_ids.push_back(t.record_id(r));
  out.report.rows_removed = out.report.removed_ids.size();
  out.report.rows_out = t.row_count - out.report.rows_removed;
  out.table = filter_rows(t, keep);
  return out;
}

json RuleReport::to_json() const {
  json arr = json::array();
  for (const auto& oc : per_rule) {
    json e{{"rule", oc.rule},
           {"column", oc.column},
           {"severity", oc.severity},
           {"hits", oc.hits}};
    if (oc.severity == "exclude") e["excluded_ids"] = oc.excluded_ids;
    arr.push_back(std::move(e));
  }
  return json{{"rows_in", rows_in},
              {"rows_removed", rows_removed},
              {"rows_out", rows_out},
              {"removed_ids", removed_ids},
              {"rules", std::move(arr)}};
}

}  // namespace riskkit
