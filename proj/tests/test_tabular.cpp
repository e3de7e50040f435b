#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "riskkit/encode.hpp"
#include "riskkit/errors.hpp"
#include "riskkit/table.hpp"

using namespace riskkit;

namespace {

namespace fs = std::filesystem;

std::string write_file(const std::string& name, const std::string& content) {
  fs::path dir = fs::temp_directory_path() / "riskkit_tabular_tests";
  fs::create_directories(dir);
  fs::path p = dir / name;
  std::ofstream out(p, std::ios::binary);
  out << content;
  return p.string();
}

// id + one column of each kind, with a primary key
DataDictionary demo_dict() {
  return DataDictionary::from_json(json::parse(R"({
    "primary_key": "id",
    "columns": [
      {"name": "id", "kind": "identifier"},
      {"name": "dose", "kind": "numeric", "unit": "Gy"},
      {"name": "group", "kind": "factor", "levels": ["A", "B", "C"]},
      {"name": "dob", "kind": "date"}
    ]
  })"));
}

}  // namespace

TEST_CASE("iso dates: parse, format, ordering") {
  CHECK(parse_iso_date("1970-01-01") == 0);
  CHECK(parse_iso_date("1970-01-02") == 1);
  CHECK(parse_iso_date("1969-12-31") == -1);
  CHECK(parse_iso_date("2000-02-29").has_value());   // leap (divisible by 400)
  CHECK(!parse_iso_date("1900-02-29").has_value());  // not leap (century)
  CHECK(!parse_iso_date("2024-13-01").has_value());
  CHECK(!parse_iso_date("2024-04-31").has_value());
  CHECK(!parse_iso_date("2024-1-01").has_value());  // must be zero-padded
  CHECK(!parse_iso_date("20240101").has_value());
  CHECK(!parse_iso_date("2024-01-01T00:00").has_value());

  for (const char* s : {"1984-02-29", "2001-09-11", "2026-08-22", "1899-12-31"})
    CHECK(format_iso_date(*parse_iso_date(s)) == s);

  // serial ordering matches calendar ordering
  CHECK(*parse_iso_date("1990-06-15") < *parse_iso_date("1990-06-16"));
  CHECK(*parse_iso_date("1989-12-31") < *parse_iso_date("1990-01-01"));
}

TEST_CASE("dictionary: validation rejects malformed declarations") {
  auto parse = [](const char* body) {
    return DataDictionary::from_json(json::parse(body));
  };
  CHECK_THROWS_AS(parse(R"({"columns": "no"})"), SchemaError);
  CHECK_THROWS_AS(parse(R"({"columns": [{"name": "a", "kind": "complex"}]})"), SchemaError);
  CHECK_THROWS_AS(parse(R"({"columns": [{"name": "a", "kind": "numeric"},
                                        {"name": "a", "kind": "numeric"}]})"),
                  SchemaError);
  // factors need >= 2 distinct levels
  CHECK_THROWS_AS(parse(R"({"columns": [{"name": "g", "kind": "factor"}]})"), SchemaError);
  CHECK_THROWS_AS(parse(R"({"columns": [{"name": "g", "kind": "factor", "levels": ["x"]}]})"),
                  SchemaError);
  CHECK_THROWS_AS(
      parse(R"({"columns": [{"name": "g", "kind": "factor", "levels": ["x", "x"]}]})"),
      SchemaError);
  // reserved characters collide with the feature-name grammar
  CHECK_THROWS_AS(parse(R"({"columns": [{"name": "a*b", "kind": "numeric"}]})"), SchemaError);
  CHECK_THROWS_AS(parse(R"({"columns": [{"name": "a=b", "kind": "numeric"}]})"), SchemaError);
  // primary key must name a declared column
  CHECK_THROWS_AS(parse(R"({"primary_key": "id",
                            "columns": [{"name": "a", "kind": "numeric"}]})"),
                  SchemaError);

  DataDictionary d = demo_dict();
  CHECK(DataDictionary::from_json(d.to_json()).to_json() == d.to_json());
}

TEST_CASE("load_table: typed parsing with missing markers and an ingest log") {
  auto path = write_file("basic.csv",
                         "id,dose,group,dob\n"
                         "P1,12.5,A,1990-03-01\n"
                         "P2,,B,\n"
                         "P3,NA,C,1985-11-30\n"
                         "P4,x9,D,1985-13-01\n");
  auto [t, log] = load_table(path, demo_dict());
  CHECK(t.row_count == 4);
  CHECK(t.record_id(0) == "P1");
  CHECK(t.col("dose").num[0] == 12.5);
  CHECK(t.col("group").code[1] == 1);  // level "B"
  CHECK(t.col("dob").code[0] == *parse_iso_date("1990-03-01"));

  // "" and NA both read as missing, no log entry
  CHECK(t.col("dose").is_missing(1));
  CHECK(t.col("dose").is_missing(2));
  CHECK(t.col("dob").is_missing(1));

  // unparseable cells become missing AND are logged with the raw text
  CHECK(t.col("dose").is_missing(3));
  CHECK(t.col("group").is_missing(3));
  CHECK(t.col("dob").is_missing(3));
  REQUIRE(log.issues.size() == 3);
  CHECK(log.issues[0].column == "dose");
  CHECK(log.issues[0].row == 4);
  CHECK(log.issues[0].raw == "x9");
  CHECK(log.to_json()["unparseable_cells"] == 3);
}

TEST_CASE("load_table: quoted fields, embedded commas/quotes, crlf") {
  DataDictionary d = DataDictionary::from_json(json::parse(R"({
    "columns": [{"name": "id", "kind": "identifier"},
                {"name": "note", "kind": "identifier"},
                {"name": "v", "kind": "numeric"}]
  })"));
  auto path = write_file("quoted.csv",
                         "id,note,v\r\n"
                         "a,\"hello, world\",1\r\n"
                         "b,\"say \"\"hi\"\"\",2\r\n"
                         "c,\"two\nlines\",3");  // no final newline
  auto [t, log] = load_table(path, d);
  CHECK(t.row_count == 3);
  CHECK(t.col("note").text[0] == "hello, world");
  CHECK(t.col("note").text[1] == "say \"hi\"");
  CHECK(t.col("note").text[2] == "two\nlines");
  CHECK(t.col("v").num[2] == 3.0);
  CHECK(log.issues.empty());
}

TEST_CASE("load_table: structural failures") {
  DataDictionary d = demo_dict();
  CHECK_THROWS_AS(load_table(write_file("none.csv", ""), d), SchemaError);
  CHECK_THROWS_AS(load_table("/no/such/file.csv", d), ConfigError);
  // column not declared in the dictionary
  CHECK_THROWS_AS(load_table(write_file("extra.csv", "id,mystery\nP1,1\n"), d), SchemaError);
  // repeated header
  CHECK_THROWS_AS(load_table(write_file("dup.csv", "id,dose,dose\nP1,1,2\n"), d), SchemaError);
  // ragged record
  CHECK_THROWS_AS(load_table(write_file("ragged.csv", "id,dose\nP1,1,9\n"), d),
                  IntegrityError);
  // unterminated quote
  CHECK_THROWS_AS(load_table(write_file("quote.csv", "id\n\"P1\n"), d), IntegrityError);
  // duplicate primary key values
  CHECK_THROWS_AS(load_table(write_file("pk.csv", "id,dose\nP1,1\nP1,2\n"), d),
                  IntegrityError);
  // missing primary key value
  CHECK_THROWS_AS(load_table(write_file("pkmiss.csv", "id,dose\n,1\n"), d), IntegrityError);
}

TEST_CASE("save_table round-trips content including quoting") {
  DataDictionary d = DataDictionary::from_json(json::parse(R"({
    "primary_key": "id",
    "columns": [{"name": "id", "kind": "identifier"},
                {"name": "note", "kind": "identifier"},
                {"name": "v", "kind": "numeric"},
                {"name": "g", "kind": "factor", "levels": ["lo", "hi"]}]
  })"));
  auto path = write_file("rt_in.csv",
                         "id,note,v,g\n"
                         "a,\"x,y\",0.125,hi\n"
                         "b,,NA,lo\n");
  auto first = load_table(path, d).table;
  auto out_path = write_file("rt_out.csv", "");
  save_table(first, out_path);
  auto second = load_table(out_path, d).table;
  CHECK(second.row_count == first.row_count);
  CHECK(second.col("note").text[0] == "x,y");
  CHECK(second.col("note").is_missing(1));  // empty identifier saved as missing
  CHECK(second.col("v").num[0] == 0.125);
  CHECK(second.col("v").is_missing(1));
  CHECK(second.col("g").code[0] == 1);
}

TEST_CASE("select_columns and filter_rows") {
  auto path = write_file("sel.csv", "id,dose,group,dob\nP1,1,A,\nP2,2,B,\nP3,3,C,\n");
  auto t = load_table(path, demo_dict()).table;

  Table sub = select_columns(t, {"id", "dose"});
  CHECK(sub.columns.size() == 2);
  CHECK(sub.primary_key.has_value());
  CHECK_THROWS_AS(select_columns(t, {"nope"}), SchemaError);

  Table nopk = select_columns(t, {"dose"});
  CHECK(!nopk.primary_key.has_value());
  CHECK(nopk.record_id(0) == "row1");

  Table kept = filter_rows(t, {1, 0, 1});
  CHECK(kept.row_count == 2);
  CHECK(kept.record_id(1) == "P3");
  CHECK_THROWS_AS(filter_rows(t, {1, 0}), ShapeError);
}

TEST_CASE("join: many-to-one with appended columns and disagreement report") {
  DataDictionary d = DataDictionary::from_json(json::parse(R"({
    "primary_key": "id",
    "columns": [{"name": "id", "kind": "identifier"},
                {"name": "dose", "kind": "numeric"},
                {"name": "centre", "kind": "factor", "levels": ["north", "south"]}]
  })"));
  auto left = load_table(write_file("jl.csv",
                                    "id,dose\n"
                                    "P1,1\nP2,2\nP3,3\nP4,\n"),
                         d)
                  .table;
  auto right = load_table(write_file("jr.csv",
                                     "id,centre,dose\n"
                                     "P2,south,2\nP1,north,1.5\nP9,north,9\n"),
                          d)
                   .table;
  auto [joined, report] = join(left, right, "id", "id");

  // every left row kept in order; matched rows get the right columns
  CHECK(joined.row_count == 4);
  CHECK(joined.record_id(3) == "P4");
  CHECK(joined.col("centre").code[0] == 0);
  CHECK(joined.col("centre").code[1] == 1);
  CHECK(joined.col("centre").is_missing(2));  // P3 unmatched
  CHECK(joined.col("centre").is_missing(3));  // P4 key missing
  CHECK(report.matched == 2);
  CHECK(report.unmatched == 2);

  // shared column 'dose' disagrees on P1 only
  REQUIRE(report.disagreements.size() == 1);
  CHECK(report.disagreements[0].column == "dose");
  CHECK(report.disagreements[0].left_row == 0);
  CHECK(report.disagreements[0].left_value == "1");
  CHECK(report.disagreements[0].right_value == "1.5");
  CHECK(report.disagreeing_columns() == std::vector<std::string>{"dose"});
  // the left value wins in the joined table
  CHECK(joined.col("dose").num[0] == 1.0);
}

TEST_CASE("join: right key must exist, match kind, and be unique") {
  DataDictionary d = demo_dict();
  auto t = load_table(write_file("jk.csv", "id,dose\nP1,1\nP2,2\n"), d).table;
  auto dup = load_table(write_file("jd.csv", "dose,dob\n1,1990-01-01\n1,1991-01-01\n"), d).table;
  CHECK_THROWS_AS(join(t, dup, "id", "missing_key"), SchemaError);
  CHECK_THROWS_AS(join(t, dup, "id", "dob"), SchemaError);      // identifier vs date
  CHECK_THROWS_AS(join(t, dup, "dose", "dose"), IntegrityError);  // right key repeats
}

TEST_CASE("rules: predicates, severities, and per-rule attribution") {
  auto t = load_table(write_file("rules.csv",
                                 "id,dose,group,dob\n"
                                 "P1,45,A,2001-01-01\n"
                                 "P2,10,B,1989-06-01\n"
                                 "P3,60,C,1995-01-01\n"
                                 "P4,,A,2010-05-05\n"),
                      demo_dict())
                .table;
  RuleSet rs = RuleSet::from_json(json::parse(R"({
    "rules": [
      {"name": "dose_cap",   "column": "dose",  "severity": "exclude", "when": {"gt": 40}},
      {"name": "dose_known", "column": "dose",  "severity": "exclude", "when": {"is_missing": true}},
      {"name": "early_dob",  "column": "dob",   "severity": "exclude", "when": {"lt": "1990-01-01"}},
      {"name": "group_c",    "column": "group", "severity": "warn",    "when": {"in": ["C"]}},
      {"name": "dose_band",  "column": "dose",  "severity": "warn",    "when": {"outside": [5, 50]}}
    ]
  })"));
  auto [kept, report] = apply_rules(t, rs);

  // P1 (dose 45), P2 (dob 1989), P3 (dose 60), P4 (dose missing) all go
  CHECK(report.rows_in == 4);
  CHECK(report.rows_removed == 4);
  CHECK(report.rows_out == 0);
  CHECK(kept.row_count == 0);

  // each rule counts all of its own hits even when rows are shared
  REQUIRE(report.per_rule.size() == 5);
  CHECK(report.per_rule[0].hits == 2);  // P1, P3
  CHECK(report.per_rule[0].excluded_ids == std::vector<std::string>{"P1", "P3"});
  CHECK(report.per_rule[1].hits == 1);  // P4
  CHECK(report.per_rule[2].hits == 1);  // P2
  CHECK(report.per_rule[3].hits == 1);  // warn only
  CHECK(report.per_rule[3].severity == "warn");
  CHECK(report.per_rule[3].excluded_ids.empty());
  CHECK(report.per_rule[4].hits == 1);  // P3 at 60; missing P4 does not fire it
  CHECK(report.removed_ids == std::vector<std::string>{"P1", "P2", "P3", "P4"});
}

TEST_CASE("rules: warn severity keeps rows; cmp_col compares two columns") {
  DataDictionary d = DataDictionary::from_json(json::parse(R"({
    "columns": [{"name": "dx_date", "kind": "date"},
                {"name": "visit",   "kind": "date"}]
  })"));
  auto t = load_table(write_file("cmp.csv",
                                 "dx_date,visit\n"
                                 "2010-01-01,2012-01-01\n"
                                 "2015-01-01,2014-01-01\n"),
                      d)
                .table;
  RuleSet rs = RuleSet::from_json(json::parse(R"({
    "rules": [{"name": "visit_before_dx", "column": "visit", "severity": "exclude",
               "when": {"cmp": {"op": "<", "other": "dx_date"}}}]
  })"));
  auto [kept, report] = apply_rules(t, rs);
  CHECK(kept.row_count == 1);
  CHECK(report.per_rule[0].hits == 1);
  CHECK(report.removed_ids == std::vector<std::string>{"row2"});
}

TEST_CASE("rules: schema errors surface before any row work") {
  auto t = load_table(write_file("rs.csv", "id,dose\nP1,1\n"), demo_dict()).table;
  auto rule_with = [](const char* body) {
    return RuleSet::from_json(json::parse(body));
  };
  // unknown rule column
  CHECK_THROWS_AS(
      apply_rules(t, rule_with(R"({"rules": [{"column": "ghost", "when": {"gt": 1}}]})")),
      SchemaError);
  // date column with a numeric threshold
  CHECK_THROWS_AS(apply_rules(load_table(write_file("rs2.csv", "dob\n1990-01-01\n"),
                                         demo_dict())
                                  .table,
                              rule_with(R"({"rules": [{"column": "dob", "when": {"gt": 3}}]})")),
                  SchemaError);
  CHECK_THROWS_AS(rule_with(R"({"rules": [{"column": "dose", "severity": "purge",
                                           "when": {"gt": 1}}]})"),
                  SchemaError);
  CHECK_THROWS_AS(rule_with(R"({"rules": [{"column": "dose", "when": {"near": 1}}]})"),
                  SchemaError);
  CHECK_THROWS_AS(rule_with(R"({"rules": [{"column": "dose", "when": {"outside": [1]}}]})"),
                  SchemaError);
}

TEST_CASE("encoding: reference coding, interactions, complete cases") {
  DataDictionary d = DataDictionary::from_json(json::parse(R"({
    "primary_key": "id",
    "columns": [{"name": "id", "kind": "identifier"},
                {"name": "age", "kind": "numeric"},
                {"name": "grp", "kind": "factor", "levels": ["a", "b", "c"]},
                {"name": "outcome", "kind": "numeric"}]
  })"));
  auto t = load_table(write_file("enc.csv",
                                 "id,age,grp,outcome\n"
                                 "P1,10,a,0\n"
                                 "P2,20,b,1\n"
                                 "P3,30,c,1\n"
                                 "P4,,b,0\n"),
                      d)
                .table;
  auto enc = encode_for_training(t, "outcome", {"age", "grp"},
                                 {parse_interaction("age*grp")});

  CHECK(enc.m.feature_names ==
        std::vector<std::string>{"age", "grp=b", "grp=c", "age*grp=b", "age*grp=c"});
  CHECK(enc.m.n == 3);  // P4 dropped: age missing
  CHECK(enc.dropped_rows == 1);
  CHECK(enc.dropped_ids == std::vector<std::string>{"P4"});
  CHECK(enc.m.record_ids == std::vector<std::string>{"P1", "P2", "P3"});
  CHECK(enc.m.y == std::vector<std::int8_t>{0, 1, 1});

  // reference level 'a' encodes as all-zero dummies; products recompute
  CHECK(enc.m.at(0, 1) == 0.0);
  CHECK(enc.m.at(0, 2) == 0.0);
  CHECK(enc.m.at(1, 1) == 1.0);
  CHECK(enc.m.at(1, 3) == 20.0);  // age * grp=b
  CHECK(enc.m.at(2, 4) == 30.0);  // age * grp=c

  // recipe JSON round-trip preserves the encoding exactly
  auto recipe2 = EncodingRecipe::from_json(enc.recipe.to_json());
  auto enc2 = encode_with_recipe(t, recipe2, true);
  CHECK(enc2.m.x == enc.m.x);
  CHECK(enc2.m.feature_names == enc.m.feature_names);
}

TEST_CASE("encoding: failure modes") {
  DataDictionary d = DataDictionary::from_json(json::parse(R"({
    "columns": [{"name": "age", "kind": "numeric"},
                {"name": "grp", "kind": "factor", "levels": ["a", "b", "x"]},
                {"name": "outcome", "kind": "numeric"}]
  })"));
  auto t = load_table(write_file("encf.csv",
                                 "age,grp,outcome\n10,a,0\n20,b,2\n"),
                      d)
                .table;
  // outcome outside {0,1}
  CHECK_THROWS_AS(encode_for_training(t, "outcome", {"age"}, {}), LabelError);
  // interaction parent not among predictors
  CHECK_THROWS_AS(encode_for_training(t, "outcome", {"age"},
                                      {parse_interaction("age*grp")}),
                  ConfigError);
  // unseen factor level at recipe application time
  auto t_ok = load_table(write_file("encok.csv", "age,grp,outcome\n10,a,0\n20,b,1\n"), d).table;
  auto enc = encode_for_training(t_ok, "outcome", {"age", "grp"}, {});
  EncodingRecipe shrunk = enc.recipe;
  shrunk.factor_levels["grp"] = {"a", "x"};  // 'b' no longer known
  CHECK_THROWS_AS(encode_with_recipe(t_ok, shrunk, true), EncodingError);

  // prediction-time encoding never reads the outcome
  Table no_outcome = select_columns(t_ok, {"age", "grp"});
  auto pred_enc = encode_with_recipe(no_outcome, enc.recipe, false);
  CHECK(pred_enc.m.n == 2);
  CHECK(pred_enc.m.y.empty());

  CHECK_THROWS_AS(parse_interaction("noStar"), ConfigError);
  CHECK_THROWS_AS(parse_interaction("a*b*c"), ConfigError);
  CHECK_THROWS_AS(parse_interaction("*b"), ConfigError);
}

TEST_CASE("format_double: shortest round-trip forms") {
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(-3.25) == "-3.25");
  CHECK(format_double(0.1) == "0.1");
  double awkward = 1.0 / 3.0;
  CHECK(std::stod(format_double(awkward)) == awkward);
}
