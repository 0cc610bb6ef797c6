#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "../tools/cli.hpp"
#include "ultra/io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Result {
  int status;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int status = ultra::cli::run(args, out, err);
  return {status, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("ultra-cli-test-" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("limit for p = (2,2,2), sigma = (10,10,10)") {
  TempDir dir;
  const auto r = run({"limit", "--branching", "2,2,2", "--sigmas", "10,10,10", "--manifest", dir / "m.json"});
  REQUIRE(r.status == 0);
  std::istringstream in(r.out);
  const ultra::Matrix d = ultra::read_matrix_csv(in).matrix;
  REQUIRE(d.rows() == 8);
  std::set<double> values(d.data().begin(), d.data().end());
  CHECK(values.size() == 4);
  CHECK(values.count(0.0) == 1);
  CHECK(values.count(20.0) == 1);
  CHECK(d(0, 1) == doctest::Approx(14.142135623730951).epsilon(1e-15));
  CHECK(d(0, 7) == doctest::Approx(24.49489742783178).epsilon(1e-15));

  const auto labelled = run({"limit", "--branching", "2,2", "--sigmas", "1,1", "--labels", "--manifest", dir / "m2.json"});
  CHECK(labelled.out.rfind("1.1,1.2,2.1,2.2\n", 0) == 0);
}

TEST_CASE("generate is deterministic for a fixed seed") {
  TempDir dir;
  const std::vector<std::string> base{"generate", "--model", "hierarchical", "--m", "2", "--k", "3",
                                      "--branching", "2,2,2", "--sigma", "10", "--lambda", "2", "--seed", "1"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", dir / "a.csv"});
  b.insert(b.end(), {"--out", dir / "b.csv"});
  REQUIRE(run(a).status == 0);
  REQUIRE(run(b).status == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(fs::exists(dir / "a.csv.manifest.json"));
  const json m = json::parse(slurp(dir / "a.csv.manifest.json"));
  CHECK(m["seed"] == 1);
  CHECK(m["spec"]["n"] == 8);
}

TEST_CASE("analyze rejects a non-symmetric matrix and names the cells") {
  TempDir dir;
  std::ofstream(dir / "bad.csv") << "0,1,2\n1,0,1\n2.5,1,0\n";
  const auto r = run({"analyze", "--in", dir / "bad.csv", "--manifest", dir / "m.json"});
  CHECK(r.status != 0);
  const json e = json::parse(r.err);
  const std::string msg = e["error"]["message"];
  CHECK(msg.find("row 1, column 3") != std::string::npos);
  CHECK(msg.find("row 3, column 1") != std::string::npos);

  const auto sym = run({"analyze", "--in", dir / "bad.csv", "--symmetrize", "--manifest", dir / "m.json"});
  CHECK(sym.status == 0);
}

TEST_CASE("usage errors exit with status 2") {
  CHECK(run({}).status == 2);
  CHECK(run({"bogus"}).status == 2);
  CHECK(run({"limit", "--nope"}).status == 2);
  const auto r = run({"generate", "--model", "independent", "--branching", "2", "--sigmas", "1", "--n", "3",
                      "--lambda", "2"});
  CHECK(r.status == 2);
  CHECK(json::parse(r.err)["error"]["kind"] == "usage");
  CHECK(run({"generate", "--model", "hierarchical", "--branching", "2", "--m", "2", "--k", "2", "--lambda", "2",
             "--sigma", "1", "--n", "4"})
            .status == 2);
  CHECK(run({"sweep", "--branching", "2,2,2", "--sigmas", "1,1,1"}).status == 2);
}

TEST_CASE("generate | distances | analyze pipeline") {
  TempDir dir;
  for (const std::string alpha : {"1", "2", "inf"}) {
    REQUIRE(run({"generate", "--branching", "2,3", "--sigmas", "4,1", "--n", "50", "--seed", "9", "--out",
                 dir / "c.csv"})
                .status == 0);
    REQUIRE(run({"distances", "--in", dir / "c.csv", "--alpha", alpha, "--out", dir / "d.csv"}).status == 0);
    const auto r = run({"analyze", "--in", dir / "d.csv", "--subdominant", dir / "s.csv", "--out", dir / "r.json"});
    REQUIRE(r.status == 0);
    const json rep = json::parse(slurp(dir / "r.json"));
    CHECK(rep["U"].get<double>() >= 0.0);
    CHECK(rep["U"].get<double>() <= 1.0);
    CHECK(rep["metric_axioms"]["pass"] == true);
    const auto sub = run({"analyze", "--in", dir / "s.csv", "--tol", "0", "--manifest", dir / "m.json"});
    CHECK(json::parse(sub.out)["U"] == 1.0);
  }
  const auto text = slurp(dir / "d.csv");
  CHECK(text.find(' ') == std::string::npos);
}

TEST_CASE("manifest replay reproduces outputs") {
  TempDir dir;
  REQUIRE(run({"sweep", "--branching", "2,2", "--sigmas", "3,1", "--n-list", "4,16", "--realizations", "3",
               "--epsilon", "auto", "--csv", dir / "s.csv", "--convergence-csv", dir / "c.csv", "--out",
               dir / "s.json"})
              .status == 0);
  const json m = json::parse(slurp(dir / "s.json.manifest.json"));
  CHECK(m["outputs"].size() == 3);
  CHECK(m["seed"].is_number_unsigned());  // entropy seed recorded

  const std::string before = slurp(dir / "s.json");
  fs::remove(dir / "s.csv");
  const auto r = run({"replay", "--manifest", dir / "s.json.manifest.json"});
  CHECK(r.status == 0);
  CHECK(json::parse(r.out)["reproduced"] == true);
  CHECK(slurp(dir / "s.json") == before);
  CHECK(fs::exists(dir / "s.csv"));

  // A tampered manifest is reported as a mismatch.
  json tampered = m;
  tampered["outputs"][0]["fnv1a64"] = "0000000000000000";
  std::ofstream(dir / "t.json") << tampered.dump();
  const auto bad = run({"replay", "--manifest", dir / "t.json"});
  CHECK(bad.status == 1);
  CHECK(json::parse(bad.out)["reproduced"] == false);
}

TEST_CASE("moments and sweep JSON") {
  TempDir dir;
  const auto r = run({"moments", "--m", "2", "--k", "3", "--lambda", "2", "--sigma", "10", "--realizations",
                      "2000", "--seed", "3", "--manifest", dir / "m.json"});
  REQUIRE(r.status == 0);
  const json j = json::parse(r.out);
  CHECK(j["closed_form"]["variance"].get<double>() == doctest::Approx(131.25));
  CHECK(j["markov_condition"]["l1_2_l2_1"] == 0.0);
  CHECK(j["probe"]["statistics"].size() == 5);

  const auto low = run({"moments", "--m", "2", "--k", "2", "--lambda", "0.8", "--sigma", "1", "--realizations",
                        "10", "--seed", "3", "--manifest", dir / "m.json"});
  REQUIRE(low.status == 0);
  CHECK_FALSE(json::parse(low.out)["warnings"].empty());

  const auto s = run({"sweep", "--model", "hierarchical", "--branching", "2,2,2", "--m", "2", "--lambda", "2",
                      "--sigma", "10", "--k-list", "2,3", "--realizations", "2", "--seed", "5", "--manifest",
                      dir / "m.json"});
  REQUIRE(s.status == 0);
  const json sj = json::parse(s.out);
  CHECK(sj["sweep"]["rows"].size() == 2);
  CHECK(sj["sweep"]["rows"][1]["n"] == 8);
}
