#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hforest/experiment.hpp"
#include "hforest/forest.hpp"

using namespace hforest;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "hforest");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "hforest_cli_tests" / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::vector<std::string> csv_rows(const std::string& text) {
  std::vector<std::string> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) rows.push_back(line);
  return rows;
}

}  // namespace

TEST_CASE("run writes per-seed traces and an aggregate") {
  const fs::path out = fresh_dir("run");
  const auto r = cli({"run", "--generator", "waveform", "--count", "300", "--model", "hybrid", "--m", "4", "--d",
                      "0.2", "--k", "15", "--seeds", "3", "--out", out.string()});
  REQUIRE(r.code == 0);
  for (int s = 1; s <= 3; ++s) {
    const auto rows = csv_rows(slurp(out / ("trace_seed" + std::to_string(s) + ".csv")));
    CHECK(rows.size() == 301);
    CHECK(fs::exists(out / ("summary_seed" + std::to_string(s) + ".json")));
  }
  const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
  CHECK(summary["method"] == "hybrid");
  CHECK(summary["dataset"] == "waveform");
  CHECK(summary["seeds"].size() == 3);
  CHECK(summary["mean_accuracy"].is_number());
  CHECK(summary.contains("stddev"));
  CHECK(summary.contains("convergence_index"));
  CHECK(summary.contains("drift_latencies"));
  for (const auto& entry : fs::directory_iterator(out)) CHECK(entry.path().extension() != ".tmp");
}

TEST_CASE("identical runs give byte-identical traces") {
  const fs::path da = fresh_dir("det_a"), db = fresh_dir("det_b");
  const std::vector<std::string> base{"run", "--generator", "waveform", "--count", "400", "--m", "3", "--seeds", "2,9"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", da.string()});
  b.insert(b.end(), {"--out", db.string()});
  REQUIRE(cli(a).code == 0);
  REQUIRE(cli(b).code == 0);
  for (const char* name : {"trace_seed2.csv", "trace_seed9.csv"}) {
    CHECK_FALSE(slurp(da / name).empty());
    CHECK(slurp(da / name) == slurp(db / name));
  }
}

TEST_CASE("abalone regression reports a convergence entry") {
  const fs::path out = fresh_dir("abalone");
  const auto r = cli({"run", "--csv", std::string(HFOREST_DATA_DIR) + "/abalone.csv", "--task", "regression",
                      "--model", "single", "--out", out.string()});
  REQUIRE(r.code == 0);
  const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
  CHECK(summary.contains("convergence_index"));
  CHECK(summary["dataset"] == "abalone");
  CHECK(r.err.find("convergence index") != std::string::npos);
}

TEST_CASE("exit codes") {
  auto missing = cli({"run", "--csv", "/no/such/data.csv", "--task", "regression", "--out",
                      fresh_dir("missing").string()});
  CHECK(missing.code == 3);
  CHECK(missing.err.find("/no/such/data.csv") != std::string::npos);
  CHECK(cli({"run", "--generator", "waveform", "--d", "1.5", "--out", fresh_dir("bad").string()}).code == 2);
  CHECK(cli({"run", "--generator", "waveform", "--model", "svm"}).code == 2);
  CHECK(cli({"run", "--generator", "waveform", "--csv", "x.csv"}).code == 2);
  CHECK(cli({"run"}).code == 2);
  CHECK(cli({"run", "--generator", "waveform", "--drift", "sideways:5"}).code == 2);
  CHECK(cli({"run", "--generator", "waveform", "--count", "100", "--drift", "abrupt:500", "--out",
             fresh_dir("drift_oob").string()})
            .code == 3);
  CHECK(cli({"frobnicate"}).code == 2);
}

TEST_CASE("help lists every flag") {
  const auto r = cli({"run", "--help"});
  CHECK(r.code == 0);
  for (const char* flag : {"--csv", "--arff", "--generator", "--count", "--task", "--model", "--m", "--d", "--k",
                           "--delta", "--grace", "--tie", "--tol", "--drift", "--seeds", "--out", "--wmetric",
                           "--threshold", "--config"})
    CHECK_MESSAGE(r.out.find(std::string(flag) + " ") != std::string::npos, flag);
  // defaults shown in help come from the library defaults
  const RunConfig cfg;
  CHECK(r.out.find("1e-07") != std::string::npos);
  CHECK(r.out.find(std::to_string(cfg.grace_period)) != std::string::npos);
}

TEST_CASE("config file with flag overrides") {
  const fs::path dir = fresh_dir("config");
  fs::create_directories(dir);
  const fs::path file = dir / "exp.ini";
  std::ofstream(file) << "generator=waveform\ncount=150\nmodel=single\nseeds=2\nout=" << (dir / "from_file").string()
                      << "\n";
  REQUIRE(cli({"run", "--config", file.string()}).code == 0);
  CHECK(csv_rows(slurp(dir / "from_file" / "trace_seed2.csv")).size() == 151);
  REQUIRE(cli({"run", "--config", file.string(), "--count", "60", "--out", (dir / "override").string()}).code == 0);
  CHECK(csv_rows(slurp(dir / "override" / "trace_seed2.csv")).size() == 61);
}

TEST_CASE("confidence command") {
  auto one = cli({"confidence", "--n", "1", "--m", "1"});
  REQUIRE(one.code == 0);
  CHECK(one.out == "n,m,confidence\n1,1,1\n");

  auto grid = cli({"confidence", "--n", "10..100:10", "--m", "1..100"});
  REQUIRE(grid.code == 0);
  const auto rows = csv_rows(grid.out);
  REQUIRE(rows.size() == 1 + 10 * 100);
  for (std::size_t i = 2; i < rows.size(); ++i) {
    const auto prev = rows[i - 1], cur = rows[i];
    if (prev.substr(0, prev.find(',')) != cur.substr(0, cur.find(','))) continue;
    CHECK(std::stod(cur.substr(cur.rfind(',') + 1)) >= std::stod(prev.substr(prev.rfind(',') + 1)));
  }

  auto target = cli({"confidence", "--n", "100", "--target", "0.99"});
  REQUIRE(target.code == 0);
  CHECK(target.out == "n,target,min_m\n100,0.99," + std::to_string(min_learners_for_confidence(100, 0.99)) + "\n");

  CHECK(cli({"confidence", "--n", "0", "--m", "1"}).code == 2);
  CHECK(cli({"confidence", "--n", "5", "--target", "1"}).code == 2);
}

TEST_CASE("sweep") {
  SUBCASE("product of d and k") {
    const fs::path out = fresh_dir("sweep");
    const auto r = cli({"sweep", "--generator", "waveform", "--count", "200", "--m", "3", "--d", "0.2,0.6", "--k",
                        "15,100", "--out", out.string()});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(slurp(out / "sweep.csv"));
    REQUIRE(rows.size() == 5);
    CHECK(rows[0] == "d,k,mean_acc,stddev,convergence_index");
    CHECK(rows[1].rfind("0.2,15,", 0) == 0);
    CHECK(rows[4].rfind("0.6,100,", 0) == 0);
  }
  SUBCASE("single cell equals a plain run") {
    const fs::path sweep_out = fresh_dir("sweep_one"), run_out = fresh_dir("run_one");
    REQUIRE(cli({"sweep", "--generator", "waveform", "--count", "250", "--m", "3", "--d", "0.4", "--k", "20",
                 "--seeds", "2", "--out", sweep_out.string()})
                .code == 0);
    REQUIRE(cli({"run", "--generator", "waveform", "--count", "250", "--m", "3", "--d", "0.4", "--k", "20",
                 "--seeds", "2", "--out", run_out.string()})
                .code == 0);
    for (const char* f : {"trace_seed1.csv", "trace_seed2.csv", "summary.json"})
      CHECK(slurp(sweep_out / "d0.4_k20" / f) == slurp(run_out / f));
  }
}

TEST_CASE("drift spec parsing") {
  const DriftSpec a = parse_drift("abrupt:10000");
  CHECK(a.kind == DriftSpec::Kind::Abrupt);
  CHECK(a.start == 10000);
  const DriftSpec g = parse_drift("gradual:100:200");
  CHECK(g.kind == DriftSpec::Kind::Gradual);
  CHECK(g.end == 200);
  CHECK_THROWS_AS(parse_drift("abrupt"), ConfigError);
  CHECK_THROWS_AS(parse_drift("gradual:1:x"), ConfigError);
}

TEST_CASE("worker pool runs every job and reports failures") {
  std::vector<int> hits(50, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::count(hits.begin(), hits.end(), 1) == 50);
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 7) throw ConfigError("boom");
                  }),
                  ConfigError);
}
