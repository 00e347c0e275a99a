#include "coopsense/cli/commands.hpp"
#include "coopsense/cpm/codec.hpp"

#include "svg_check.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

namespace fs = std::filesystem;
using coopsense::cli::run;

namespace {

const fs::path kData = COOPSENSE_DATA_DIR;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "coopsense");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("coopsense-cli-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t count_ext(const fs::path& dir, const std::string& ext) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ext ? 1 : 0;
  return n;
}

// Data rows of a CSV split into fields; the version comment and header are
// skipped.
std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.starts_with("#")) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

constexpr std::size_t kDecisionColumn = 9;

void expect_svg_valid(const fs::path& p) {
  const auto doc = oracle::parse_svg(slurp(p));
  ASSERT_TRUE(doc.well_formed) << p << ": " << doc.error;
  const auto box = oracle::view_box(doc);
  ASSERT_TRUE(box.has_value()) << p;
  for (const auto& e : oracle::ellipse_boxes(doc)) {
    EXPECT_GE(e.min_x, box->min_x) << p;
    EXPECT_GE(e.min_y, box->min_y) << p;
    EXPECT_LE(e.max_x, box->max_x) << p;
    EXPECT_LE(e.max_y, box->max_y) << p;
  }
}

}  // namespace

TEST(CliTransform, IdentityFramesEchoObject) {
  const auto r = cli({"transform", "--receiver", "5,5,30", "--sender", "5,5,30", "--object", "3,-2,12"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("mean: x=3.000000 y=-2.000000 heading_deg=12.000000"), std::string::npos) << r.out;
}

TEST(CliTransform, PlacementExample) {
  const auto r = cli({"transform", "--receiver", "0,75,0", "--sender", "100,100,0", "--object", "10,0,0",
                      "--receiver-std", "0.25,0.5", "--object-std", "0.5,6"});
  ASSERT_EQ(r.code, 0) << r.err;
  double x = 0, y = 0, h = 0;
  ASSERT_EQ(std::sscanf(r.out.c_str(), "mean: x=%lf y=%lf heading_deg=%lf", &x, &y, &h), 3) << r.out;
  // Heading noise pulls the mean slightly toward the rotation centre.
  EXPECT_NEAR(x, 110.0, 0.01);
  EXPECT_NEAR(y, 25.0, 0.01);
  EXPECT_NEAR(h, 0.0, 1e-9);
  EXPECT_NE(r.out.find("ellipse(0.95)"), std::string::npos) << r.out;

  const auto exact = cli({"transform", "--receiver", "0,75,0", "--sender", "100,100,0", "--object", "10,0,0"});
  ASSERT_EQ(exact.code, 0) << exact.err;
  EXPECT_NE(exact.out.find("mean: x=110.000000 y=25.000000 heading_deg=0.000000"), std::string::npos) << exact.out;
}

TEST(CliTransform, SvgFromJsonInput) {
  const auto dir = fresh_dir("transform");
  const auto input = dir / "frames.json";
  std::ofstream(input) << R"({"receiver": {"x": 0, "y": 75, "heading_deg": 0, "position_std": 0.25, "heading_std_deg": 0.5},
 "sender": {"x": 100, "y": 100, "heading_deg": 0},
 "object": {"x": 10, "y": 0, "heading_deg": 0, "position_std": 0.5, "heading_std_deg": 6}})";
  const auto r = cli({"--out", dir.string(), "transform", "--input", input.string(), "--svg"});
  ASSERT_EQ(r.code, 0) << r.err;
  expect_svg_valid(dir / "transform.svg");
}

TEST(CliTransform, NonPsdCovarianceNamesMatrix) {
  const auto r = cli({"transform", "--receiver", "0,0,0", "--sender", "1,1,0", "--object", "1,0,0", "--sender-cov",
                      "1,2,0,2,1,0,0,0,1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("sender"), std::string::npos) << r.err;
}

TEST(CliTransform, MalformedInputExitsTwo) {
  EXPECT_EQ(cli({"transform", "--receiver", "0,0"}).code, 2);
  EXPECT_EQ(cli({"transform", "--receiver", "0,0,0", "--sender", "0,0,x", "--object", "1,0,0"}).code, 2);
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
}

TEST(CliSweep, BundledSweepsWriteThirtySvgs) {
  for (const char* name : {"test1", "test2"}) {
    const auto dir = fresh_dir(std::string("sweep-") + name);
    const auto r = cli({"--out", dir.string(), "--format", "svg", "sweep",
                        (kData / "sweeps" / (std::string(name) + ".sweep")).string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(count_ext(dir, ".svg"), 30u) << name;
    EXPECT_EQ(count_ext(dir, ".csv"), 0u) << name;
    for (const auto& e : fs::directory_iterator(dir)) expect_svg_valid(e.path());
  }
}

TEST(CliSweep, EmptyValuesExitTwo) {
  const auto dir = fresh_dir("sweep-empty");
  const auto file = dir / "empty.sweep";
  std::ofstream(file) << R"({"name": "empty", "parameter": "receiver_position_std", "values": []})";
  const auto r = cli({"--out", dir.string(), "sweep", file.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/values"), std::string::npos) << r.err;
}

TEST(CliSweep, CsvHasVersionLineAndOneRowPerRecord) {
  const auto dir = fresh_dir("sweep-csv");
  const auto file = dir / "small.sweep";
  std::ofstream(file) << R"({"name": "small", "parameter": "receiver_heading_std_deg", "values": [0.5, 1],
    "object_count": 4, "monte_carlo_samples": 500})";
  const auto r = cli({"--out", dir.string(), "--format", "csv", "sweep", file.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto text = slurp(dir / "small.csv");
  EXPECT_TRUE(text.starts_with("# coopsense-sweep v1\n"));
  EXPECT_EQ(csv_rows(text).size(), 2u * 2u * 3u * 5u);
}

TEST(CliScenario, CrossingPresetGivesWay) {
  const auto dir = fresh_dir("scenario-crossing");
  const auto r = cli({"--out", dir.string(), "scenario", (kData / "scenarios" / "lab-crossing.scenario").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::size_t give_way = 0;
  for (const auto& row : csv_rows(slurp(dir / "lab-crossing.csv"))) give_way += row.at(kDecisionColumn) == "GiveWay";
  EXPECT_GE(give_way, 1u);
  expect_svg_valid(dir / "lab-crossing.svg");
}

TEST(CliScenario, OppositeLaneWalkerNeverReplans) {
  const auto dir = fresh_dir("scenario-walker");
  const auto r =
      cli({"--out", dir.string(), "scenario", (kData / "scenarios" / "opposite-lane-walker.scenario").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(slurp(dir / "opposite-lane-walker.csv"));
  ASSERT_FALSE(rows.empty());
  for (const auto& row : rows) EXPECT_NE(row.at(kDecisionColumn), "Replan") << "tick " << row.at(0);
}

TEST(CliScenario, SameSeedIsByteIdentical) {
  const auto a = fresh_dir("scenario-a"), b = fresh_dir("scenario-b");
  const auto file = (kData / "scenarios" / "alley-occlusion.scenario").string();
  ASSERT_EQ(cli({"--out", a.string(), "--seed", "99", "scenario", file}).code, 0);
  ASSERT_EQ(cli({"--out", b.string(), "--seed", "99", "scenario", file}).code, 0);
  EXPECT_EQ(slurp(a / "alley-occlusion.csv"), slurp(b / "alley-occlusion.csv"));
  EXPECT_EQ(slurp(a / "alley-occlusion.svg"), slurp(b / "alley-occlusion.svg"));
}

TEST(CliScenario, SchemaErrorExitsTwo) {
  const auto dir = fresh_dir("scenario-bad");
  const auto file = dir / "bad.scenario";
  std::ofstream(file) << "{\n  \"name\": \"bad\",\n  \"duration\": 1,\n  \"stations\": 7\n}\n";
  const auto r = cli({"--out", dir.string(), "scenario", file.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("bad.scenario:4:"), std::string::npos) << r.err;
}

TEST(CliCpm, MinimalFileDumpsFortySevenBytes) {
  const auto r = cli({"cpm", (kData / "fixtures" / "minimal.cpm").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.starts_with("47 bytes\n")) << r.out;
  EXPECT_NE(r.out.find("00000000  43 50 4d 31"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("00000020  "), std::string::npos) << r.out;
  EXPECT_EQ(r.out.find("00000030  "), std::string::npos) << r.out;
}

TEST(CliCpm, TruncatedFileExitsThreeWithOffset) {
  const auto r = cli({"cpm", (kData / "fixtures" / "invalid" / "truncated.cpm").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("truncated"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("at byte 75"), std::string::npos) << r.err;
}

TEST(CliCpm, CheckPassesOnEveryFixture) {
  for (const auto& e : fs::directory_iterator(kData / "fixtures")) {
    if (!e.is_regular_file()) continue;
    const auto r = cli({"cpm", "--check", e.path().string()});
    EXPECT_EQ(r.code, 0) << e.path() << r.err;
    EXPECT_NE(r.out.find("check: roundtrip ok"), std::string::npos);
  }
}

TEST(CliCpm, HexInput) {
  const auto bytes = slurp(kData / "fixtures" / "minimal.cpm");
  std::string hex;
  for (unsigned char c : bytes) {
    char buf[3];
    std::snprintf(buf, sizeof buf, "%02x", c);
    hex += buf;
  }
  EXPECT_EQ(cli({"cpm", "--hex", hex}).code, 0);
  EXPECT_EQ(cli({"cpm", "--hex", hex.substr(0, 20)}).code, 3);
  EXPECT_EQ(cli({"cpm", "--hex", "zz"}).code, 2);
  EXPECT_EQ(cli({"cpm"}).code, 2);
}

TEST(CliBinary, ExitCodesThroughProcess) {
  const std::string bin = COOPSENSE_CLI;
  const auto truncated = (kData / "fixtures" / "invalid" / "truncated.cpm").string();
  auto status = [](const std::string& cmd) {
    const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status(bin + " cpm " + (kData / "fixtures" / "sample.cpm").string()), 0);
  EXPECT_EQ(status(bin + " cpm " + truncated), 3);
  EXPECT_EQ(status(bin + " transform --receiver 1"), 2);
}
