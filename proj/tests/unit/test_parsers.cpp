#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"

#include "cyclebench/core/csv.hpp"
#include "cyclebench/core/error.hpp"
#include "cyclebench/core/serialize.hpp"
#include "cyclebench/engine/cycle_stats.hpp"
#include "cyclebench/parsers/parser.hpp"
#include "cyclebench/parsers/units.hpp"

using namespace cyclebench;
using namespace cyclebench::parsers;
namespace fs = std::filesystem;

namespace {

fs::path const kFixtures = CYCLEBENCH_FIXTURES_DIR;

std::string Slurp(fs::path const& p) { return serialize::ReadFile(p); }

std::shared_ptr<ProfileSnapshot const> Builtins() {
  static auto reg = ProfileRegistry::WithBuiltins();
  return reg->Snapshot();
}

}  // namespace

TEST_CASE("every fixture converts to the expected channels and cycles") {
  auto expected = nlohmann::json::parse(Slurp(kFixtures / "expected.json"));
  REQUIRE(expected.size() == 6);
  for (auto const& [name, want] : expected.items()) {
    CAPTURE(name);
    auto bytes = Slurp(kFixtures / name);
    auto conv = ConvertBytes(*Builtins(), name, bytes, {name, 0.0});
    CHECK(conv.format_id == want["format_id"].get<std::string>());
    REQUIRE(conv.datasets.size() == want["channels"].size());
    for (auto const& d : conv.datasets) {
      auto const& ch = want["channels"][std::to_string(d.channel)];
      CHECK(d.points.size() == ch["rows"].get<std::size_t>());
      CHECK(ValidateDataset(d).empty());
      auto processed = engine::ProcessDataset(d);
      CHECK(processed.stats.size() == ch["cycles"].get<std::size_t>());
    }
  }
}

TEST_CASE("conversion is deterministic") {
  for (auto const& e : fs::directory_iterator(kFixtures)) {
    auto name = e.path().filename().string();
    if (name == "expected.json") continue;
    auto bytes = Slurp(e.path());
    auto a = ConvertBytes(*Builtins(), name, bytes);
    auto b = ConvertBytes(*Builtins(), name, bytes);
    REQUIRE(a.datasets.size() == b.datasets.size());
    for (std::size_t k = 0; k < a.datasets.size(); ++k) {
      CHECK(serialize::CanonicalBytes(a.datasets[k]) == serialize::CanonicalBytes(b.datasets[k]));
    }
  }
}

TEST_CASE("units are converted to canonical") {
  auto conv = ConvertBytes(*Builtins(), "gitt_pulses.mpt", Slurp(kFixtures / "gitt_pulses.mpt"));
  auto const& d = conv.datasets.at(0);
  // mA in the file, 0.2 mA discharge pulses.
  bool saw_pulse = false;
  for (auto const& p : d.points) {
    if (p.current != 0.0) {
      CHECK(p.current == doctest::Approx(-0.2e-3).epsilon(1e-9));
      saw_pulse = true;
    }
  }
  CHECK(saw_pulse);
  CHECK(d.unit_provenance.at("current") == "mA");

  auto ma = LookupUnit(PointField::kCurrent, "mA");
  REQUIRE(ma);
  CHECK(ma->scale == doctest::Approx(1e-3));
  auto h = LookupUnit(PointField::kTime, "h");
  REQUIRE(h);
  CHECK(h->scale == 3600.0);
  CHECK_FALSE(LookupUnit(PointField::kVoltage, "furlongs"));
  CHECK(*ParseDuration("1d 01:00:30.5") == doctest::Approx(90030.5));
}

TEST_CASE("state column signs unsigned current") {
  auto conv = ConvertBytes(*Builtins(), "cellA.017", Slurp(kFixtures / "cellA.017"));
  auto const& d = conv.datasets.at(0);
  CHECK(d.channel == 17);
  bool neg = false, pos = false;
  for (auto const& p : d.points) {
    neg |= p.current < 0;
    pos |= p.current > 0;
  }
  CHECK(neg);
  CHECK(pos);
  // Zero-based cycle numbers in the file become 1-based.
  CHECK(*d.points.front().cycle_index == 1);
}

TEST_CASE("unmapped columns land in extra data") {
  auto conv = ConvertBytes(*Builtins(), "arbin_multichannel.csv", Slurp(kFixtures / "arbin_multichannel.csv"));
  auto const& d = conv.datasets.at(0);
  CHECK(d.channel == 4);
  bool found = false;
  for (auto const& x : d.extra) found |= x.name == "dV/dt(V/s)";
  CHECK(found);
}

TEST_CASE("format detection failures") {
  CHECK_THROWS_WITH_AS(Builtins()->DetectFormat("notes.csv", "hello,world\n1,2\n"), doctest::Contains(""),
                       Error);
  try {
    Builtins()->DetectFormat("notes.csv", "hello,world\n");
    FAIL("expected UnknownFormat");
  } catch (Error const& e) {
    CHECK(e.code() == ErrorCode::kUnknownFormat);
  }

  ProfileRegistry reg;
  auto arbin = *Builtins()->Find("arbin-csv");
  reg.Register(arbin);
  arbin.format_id = "arbin-copy";
  reg.Register(arbin);
  auto head = Slurp(kFixtures / "arbin_multichannel.csv").substr(0, 4096);
  try {
    reg.DetectFormat("arbin_multichannel.csv", head);
    FAIL("expected AmbiguousFormat");
  } catch (AmbiguousFormat const& e) {
    CHECK(e.code() == ErrorCode::kAmbiguousFormat);
    CHECK(e.candidates().size() == 2);
  }
  CHECK_THROWS_AS(reg.Find("nope"), Error);
}

TEST_CASE("malformed rows fail the file unless tolerated") {
  auto text = Slurp(kFixtures / "squidstat_export.txt");
  // Corrupt the voltage of the third data row.
  auto lines = csv::SplitLines(text);
  std::string bad;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    auto line = lines[k];
    if (k == 3) line.replace(line.find(",3."), 3, ",x.");
    bad += line + "\n";
  }
  try {
    ConvertBytes(*Builtins(), "squidstat_export.txt", bad);
    FAIL("expected ParseError");
  } catch (ParseError const& e) {
    CHECK(e.line() == 4);
  }
  auto ok = ConvertBytes(*Builtins(), "squidstat_export.txt", bad, {"squidstat_export.txt", 0.01});
  CHECK(ok.parse.series.at(0).malformed.size() == 1);
  CHECK(ok.datasets.at(0).points.size() + 1 == lines.size() - 1);

  try {
    ConvertBytesWithProfile(*Builtins()->Find("admiral-txt"), "squidstat_export.txt", "");
    FAIL("expected EmptyFile");
  } catch (Error const& e) {
    CHECK(e.code() == ErrorCode::kEmptyFile);
  }
}

TEST_CASE("missing required column") {
  auto p = *Builtins()->Find("admiral-txt");
  std::string text = "Elapsed Time (s),Current (mA)\n0,1\n1,1\n";
  try {
    ConvertBytesWithProfile(p, "x.txt", text);
    FAIL("expected MissingRequiredColumn");
  } catch (Error const& e) {
    CHECK(e.code() == ErrorCode::kMissingRequiredColumn);
  }
}

TEST_CASE("stitch shifts time and continues cycles") {
  auto conv = ConvertBytes(*Builtins(), "squidstat_export.txt", Slurp(kFixtures / "squidstat_export.txt"));
  auto a = conv.datasets.at(0);
  auto b = a;
  b.source_names = {"second.txt"};
  auto s = Stitch({a, b});
  REQUIRE(s.points.size() == 2 * a.points.size());
  auto const& first_b = s.points[a.points.size()];
  CHECK(first_b.time == doctest::Approx(a.points.back().time + b.points.front().time));
  CHECK(*first_b.cycle_index == *a.points.back().cycle_index + 1);
  CHECK(s.source_names.size() == 2);
  for (std::size_t k = 0; k < s.points.size(); ++k) CHECK(s.points[k].index == static_cast<std::int64_t>(k));

  b.channel = 9;
  CHECK_THROWS_AS(Stitch({a, b}), Error);
  CHECK_THROWS_AS(Stitch({}), Error);
}

TEST_CASE("channel from file extension") {
  CHECK(ChannelFromExtension("cellA.017") == 17);
  CHECK(ChannelFromExtension("run.3") == 3);
  CHECK_FALSE(ChannelFromExtension("cellA.csv"));
  CHECK_FALSE(ChannelFromExtension("noext"));
}

TEST_CASE("profile json round-trips and shipped profiles match builtins") {
  auto dir = LoadProfilesDir(CYCLEBENCH_PROFILES_DIR);
  CHECK(dir.size() == 6);
  for (auto const& p : dir) {
    CAPTURE(p.format_id);
    ValidateProfile(p);
    auto again = ProfileFromJson(ProfileToJson(p));
    CHECK(ProfileToJson(again) == ProfileToJson(p));
    auto builtin = Builtins()->Find(p.format_id);
    REQUIRE(builtin);
    CHECK(ProfileToJson(*builtin) == ProfileToJson(p));
  }
}

TEST_CASE("invalid profiles are rejected") {
  auto p = *Builtins()->Find("arbin-csv");
  p.format_id = "";
  CHECK_THROWS_AS(ValidateProfile(p), Error);
  p = *Builtins()->Find("arbin-csv");
  p.columns.erase(p.columns.begin());  // drop time
  try {
    ValidateProfile(p);
    FAIL("expected InvalidProfile");
  } catch (Error const& e) {
    CHECK(e.code() == ErrorCode::kInvalidProfile);
  }
  p = *Builtins()->Find("arbin-csv");
  p.filename_pattern = "([";
  CHECK_THROWS_AS(ValidateProfile(p), Error);
}

TEST_CASE("registry register replaces by id") {
  ProfileRegistry reg;
  auto p = *Builtins()->Find("basytec-txt");
  reg.Register(p);
  auto before = reg.Snapshot();
  p.description = "changed";
  reg.Register(p);
  CHECK(before->Find("basytec-txt")->description != "changed");
  CHECK(reg.Find("basytec-txt")->description == "changed");
  CHECK(reg.Snapshot()->Ids() == std::vector<std::string>{"basytec-txt"});
}
