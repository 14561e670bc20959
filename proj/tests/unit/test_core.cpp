#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "doctest.h"

#include "cyclebench/core/columns.hpp"
#include "cyclebench/core/csv.hpp"
#include "cyclebench/core/digest.hpp"
#include "cyclebench/core/error.hpp"
#include "cyclebench/core/serialize.hpp"
#include "cyclebench/core/text.hpp"

using namespace cyclebench;
namespace fs = std::filesystem;

TEST_CASE("FormatDouble round-trips") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 2000; ++k) {
    double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 30) - 15);
    auto s = text::FormatDouble(v);
    REQUIRE(text::ParseDouble(s).has_value());
    CHECK(*text::ParseDouble(s) == v);
  }
  CHECK(text::FormatDouble(0.1) == "0.1");
  CHECK(text::FormatDouble(3.0) == "3");
}

TEST_CASE("ParseDouble is strict and honours the decimal separator") {
  CHECK(*text::ParseDouble(" 1.5 ") == 1.5);
  CHECK(*text::ParseDouble("3,25", ',') == 3.25);
  CHECK_FALSE(text::ParseDouble("1.5x"));
  CHECK_FALSE(text::ParseDouble(""));
  CHECK_FALSE(text::ParseDouble("3,25"));
  CHECK(*text::ParseInt("-42") == -42);
  CHECK_FALSE(text::ParseInt("4.2"));
}

TEST_CASE("timestamps") {
  auto t = text::ParseTimestamp("2024-01-02T03:04:05.250Z");
  REQUIRE(t);
  CHECK(text::FormatTimestamp(*t) == "2024-01-02T03:04:05.250Z");
  CHECK(text::ParseTimestamp("2024-01-02 03:04:05") == text::FromUnixSeconds(1704164645));
  auto m = text::ParseTimestamp("01/02/2024 03:04:05", "%m/%d/%Y %H:%M:%S");
  REQUIRE(m);
  CHECK(text::ToUnixSeconds(*m) == 1704164645);
  CHECK_FALSE(text::ParseTimestamp("yesterday"));
}

TEST_CASE("text helpers") {
  CHECK(text::Trim("  a b \t") == "a b");
  CHECK(text::ToLower("MiXeD") == "mixed");
  CHECK(text::ContainsIgnoreCase("Charge_Capacity(Ah)", "capacity"));
  CHECK(text::Split("a,,b", ',') == std::vector<std::string>{"a", "", "b"});
}

TEST_CASE("csv reader handles quotes, CRLF and embedded newlines") {
  csv::Reader r("a,\"b,c\",\"d\"\"e\"\r\n1,\"x\ny\",3\n");
  csv::Record rec;
  REQUIRE(r.Next(rec));
  CHECK(rec.fields == std::vector<std::string>{"a", "b,c", "d\"e"});
  CHECK(rec.line == 1);
  REQUIRE(r.Next(rec));
  CHECK(rec.fields == std::vector<std::string>{"1", "x\ny", "3"});
  CHECK(rec.line == 2);
  CHECK_FALSE(r.Next(rec));

  csv::Reader bad("a,\"open\n");
  REQUIRE(bad.Next(rec));
  CHECK(rec.unterminated_quote);
}

TEST_CASE("csv writer escapes and reads back") {
  std::vector<std::string> fields{"plain", "with,comma", "with\"quote", ""};
  std::string out;
  csv::AppendRow(out, fields);
  csv::Reader r(out);
  csv::Record rec;
  REQUIRE(r.Next(rec));
  CHECK(rec.fields == fields);
  CHECK(csv::Escape("a\tb", '\t') == "\"a\tb\"");
  CHECK(csv::SplitLines("x\r\ny\n").size() == 2);
}

TEST_CASE("sha256") {
  CHECK(Sha256Hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  Sha256 h;
  h.Update("a");
  h.Update("bc");
  CHECK(h.HexDigest() == Sha256Hex("abc"));
}

TEST_CASE("error codes") {
  Error e(ErrorCode::kBadBinWidth, "dv");
  CHECK(e.code_name() == "BadBinWidth");
  CHECK(ErrorCodeName(ErrorCode::kNotFound) == "NotFound");
  ParseError p(12, "bad number");
  CHECK(p.code() == ErrorCode::kParseError);
  CHECK(p.line() == 12);
}

TEST_CASE("published column lists") {
  CHECK(columns::kCycleColumns.size() == 32);
  CHECK(columns::kRollupColumns.size() == 51);
  CHECK(columns::kCycleColumns.front() == "ProjectId");
  CHECK(columns::kCycleColumns.back() == "AveragePower");
  CHECK(columns::kRollupColumns.front() == "ChargeCapacityAverage");
  CHECK(columns::kRollupColumns.back() == "VoltageVariance");
}

namespace {

CanonicalDataset Sample() {
  CanonicalDataset d;
  d.channel = 3;
  d.source_format = "arbin-csv";
  d.unit_provenance = {{"current", "mA"}, {"voltage", "V"}};
  d.source_names = {"a.csv"};
  for (int k = 0; k < 5; ++k) {
    DataPoint p;
    p.index = k;
    p.time = k * 0.1;
    p.voltage = 3.0 + k / 3.0;
    p.current = k % 2 ? -0.5 : 0.5;
    if (k > 1) p.capacity = k * 1e-3;
    if (k == 2) p.wall_time = text::FromUnixSeconds(1700000000);
    p.cycle_index = 1;
    d.points.push_back(p);
  }
  d.extra.push_back({1, "Aux, \"T\"", "25.5"});
  return d;
}

}  // namespace

TEST_CASE("dataset serialization round-trips") {
  auto d = Sample();
  CHECK(serialize::PointsFromCsv(serialize::PointsToCsv(d.points)) == d.points);
  CHECK(serialize::ExtraFromCsv(serialize::ExtraToCsv(d.extra)) == d.extra);
  auto dir = fs::temp_directory_path() / "cb_core_roundtrip";
  fs::remove_all(dir);
  serialize::WriteDatasetDir(dir, d);
  auto back = serialize::ReadDatasetDir(dir);
  CHECK(back == d);
  CHECK(serialize::CanonicalBytes(back) == serialize::CanonicalBytes(d));
  fs::remove_all(dir);
}

TEST_CASE("points csv header") {
  auto csv = serialize::PointsToCsv({});
  std::string header;
  for (auto f : columns::kPointFields) header += std::string(header.empty() ? "" : ",") + std::string(f);
  CHECK(csv.rfind(header, 0) == 0);
}

TEST_CASE("cycle row has exactly the published keys") {
  CycleStats c;
  c.cycle_index = 2;
  c.charge_capacity = 1.0;
  c.mid_voltage = 3.6;
  auto row = serialize::CycleRow(c, 9);
  REQUIRE(row.size() == columns::kCycleColumns.size());
  std::size_t k = 0;
  for (auto const& [key, v] : row.items()) CHECK(key == columns::kCycleColumns[k++]);
  CHECK(row["ProjectId"] == 9);
  CHECK(row["Index"] == 2);
  CHECK(row["EndVoltage"].is_null());

  c.charge_voltage = 3.9;
  c.statistic_metadata = "{}";
  CHECK(serialize::CycleFromStoredRow(serialize::StoredCycleRow(c, 9)) == c);
}

TEST_CASE("project and tag json round-trip") {
  ProjectRecord p;
  p.id = 4;
  p.name = "cell";
  p.file_name = "cell.csv";
  p.mass = 0.012;
  p.status = ProjectStatus::kReady;
  p.created_at = text::FromUnixSeconds(1700000000);
  p.organization_id = 2;
  p.stitched_from = std::vector<std::int64_t>{1, 2};
  p.opaque["Legacy"] = "x";
  CHECK(serialize::ProjectFromJson(serialize::ProjectToJson(p)) == p);
  ProjectTag t{1, 4, "chemistry", "NMC"};
  CHECK(serialize::TagFromJson(serialize::TagToJson(t)) == t);
  CHECK(ParseProjectStatus(ProjectStatusName(ProjectStatus::kFailed)) == ProjectStatus::kFailed);
}

TEST_CASE("ValidateDataset flags broken invariants") {
  auto d = Sample();
  CHECK(ValidateDataset(d).empty());
  d.points[3].time = 0.0;
  d.points[4].voltage = std::numeric_limits<double>::quiet_NaN();
  auto v = ValidateDataset(d);
  REQUIRE(v.size() >= 2);
  bool time = false, nonfinite = false;
  for (auto const& x : v) {
    time |= x.kind == ViolationKind::kMonotoneTime;
    nonfinite |= x.kind == ViolationKind::kNonFinite;
  }
  CHECK(time);
  CHECK(nonfinite);
  CHECK(ValidateDataset(CanonicalDataset{}).front().kind == ViolationKind::kEmptyDataset);
}

TEST_CASE("WriteFileAtomic replaces content") {
  auto f = fs::temp_directory_path() / "cb_atomic.txt";
  serialize::WriteFileAtomic(f, "one");
  serialize::WriteFileAtomic(f, "two");
  CHECK(serialize::ReadFile(f) == "two");
  fs::remove(f);
  CHECK_THROWS_AS(serialize::ReadFile(f), Error);
}
