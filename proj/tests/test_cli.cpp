#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cpc_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cpc::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("cpc_cli_test_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

std::string random_rows(int rows, int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::ostringstream os;
  os.precision(17);
  for (int r = 0; r < rows; ++r) {
    for (int i = 0; i < n; ++i) os << (i ? "," : "") << g(rng);
    os << '\n';
  }
  return os.str();
}

}  // namespace

TEST_CASE("design with one sphere writes the exact levels") {
  TempDir dir;
  const auto r = cpc_run({"design", "--n", "5", "--J", "1", "--composition", "2,1,2", "--out", dir / "c.json"});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(slurp(dir / "c.json"));
  CHECK(doc["n"] == 5);
  const double mu0 = doc["subcodes"][0]["levels"][0];
  CHECK(std::abs(mu0 - 0.5 * (1.1629644736405196 + 0.49501897045774224)) < 1e-12);
  CHECK(fs::exists(dir / "c.json.manifest.json"));
}

TEST_CASE("flag and input errors map to exit codes") {
  TempDir dir;
  CHECK(cpc_run({"design", "--n", "7", "--mode", "wsc-var", "--J", "2", "--out", dir / "w.json"}).code == 2);
  CHECK(cpc_run({"design", "--n", "5", "--composition", "2,2", "--out", dir / "x.json"}).code == 2);
  CHECK(cpc_run({"design", "--n", "5", "--mode", "bogus", "--composition", "5", "--out", dir / "x.json"}).code == 2);
  CHECK(cpc_run({"frobnicate"}).code == 2);
  CHECK(cpc_run({"design", "--n", "7", "--J", "2", "--mode", "wsc-var", "--rate", "0.01", "--samples", "2000",
                 "--out", dir / "w.json"})
            .code == 3);
  CHECK(cpc_run({"ratepoints", "--n-range", "30", "--J-range", "6", "--limit", "1000"}).code == 6);
}

TEST_CASE("encode and decode roundtrip") {
  TempDir dir;
  REQUIRE(cpc_run({"design", "--n", "6", "--J", "3", "--variant", "2", "--composition", "2,2,2", "--samples", "5000",
                   "--out", dir / "c.json"})
              .code == 0);
  spit(dir / "x.csv", random_rows(1000, 6, 3));
  REQUIRE(cpc_run({"encode", "--codebook", dir / "c.json", "--input", dir / "x.csv", "--output", dir / "s.bin",
                   "--codewords", dir / "w.csv"})
              .code == 0);
  REQUIRE(cpc_run({"decode", "--codebook", dir / "c.json", "--input", dir / "s.bin", "--output", dir / "y.csv"})
              .code == 0);
  CHECK(slurp(dir / "y.csv") == slurp(dir / "w.csv"));
  std::istringstream lines(slurp(dir / "y.csv"));
  std::string line;
  int count = 0;
  while (std::getline(lines, line))
    if (!line.empty()) ++count;
  CHECK(count == 1000);

  // truncated stream
  auto bytes = slurp(dir / "s.bin");
  spit(dir / "t.bin", bytes.substr(0, bytes.size() - 1));
  CHECK(cpc_run({"decode", "--codebook", dir / "c.json", "--input", dir / "t.bin", "--output", dir / "z.csv"}).code ==
        5);
  // flipped header byte
  bytes[0] = static_cast<char>(bytes[0] ^ 0x5A);
  spit(dir / "h.bin", bytes);
  CHECK(cpc_run({"decode", "--codebook", dir / "c.json", "--input", dir / "h.bin", "--output", dir / "z.csv"}).code ==
        5);

  // wrong dimension names the row
  spit(dir / "bad.csv", random_rows(3, 6, 1) + "1,2,3\n");
  const auto r = cpc_run({"encode", "--codebook", dir / "c.json", "--input", dir / "bad.csv", "--output", dir / "b.bin"});
  CHECK(r.code == 4);
  CHECK(r.err.find("4") != std::string::npos);

  // empty input
  spit(dir / "empty.csv", "");
  REQUIRE(cpc_run({"encode", "--codebook", dir / "c.json", "--input", dir / "empty.csv", "--output", dir / "e.bin"})
              .code == 0);
  CHECK(fs::file_size(dir / "e.bin") == 0);
  REQUIRE(cpc_run({"decode", "--codebook", dir / "c.json", "--input", dir / "e.bin", "--output", dir / "e.csv"})
              .code == 0);
  CHECK(slurp(dir / "e.csv").empty());
}

TEST_CASE("ratepoints census") {
  const auto r = cpc_run({"ratepoints", "--n-range", "2:4", "--J-range", "1:4"});
  REQUIRE(r.code == 0);
  std::istringstream is(r.out);
  std::string line;
  std::getline(is, line);
  CHECK(line == "n,J,count");
  std::getline(is, line);
  CHECK(line == "2,1,2");
  std::vector<std::string> rows;
  while (std::getline(is, line)) rows.push_back(line);
  REQUIRE(rows.size() == 11);
  CHECK(rows.back() == "4,4,56");
}

TEST_CASE("eval output is deterministic and replayable") {
  TempDir dir;
  REQUIRE(cpc_run({"design", "--n", "5", "--J", "2", "--composition", "2,3", "--samples", "5000", "--out",
                   dir / "c.json"})
              .code == 0);
  const std::vector<std::string> args{"eval", "--codebook", dir / "c.json", "--samples", "20000", "--seed", "11",
                                      "--rate-mode", "both", "--baselines", "ecsq,bound", "--output", dir / "a.csv"};
  REQUIRE(cpc_run(args).code == 0);
  auto threaded = args;
  threaded.back() = dir / "b.csv";
  threaded.insert(threaded.begin(), {"--threads", "8"});
  REQUIRE(cpc_run(threaded).code == 0);
  const auto a = slurp(dir / "a.csv");
  CHECK(a == slurp(dir / "b.csv"));
  CHECK(a.rfind("method,n,J,rate_bits,distortion,stderr,seed,samples\n", 0) == 0);
  CHECK(a.find("cpc-fixed,5,2,") != std::string::npos);
  CHECK(a.find("cpc-variable,5,2,") != std::string::npos);
  CHECK(a.find("\necsq,") != std::string::npos);

  fs::remove(dir / "a.csv");
  REQUIRE(cpc_run({"replay", dir / "a.csv.manifest.json"}).code == 0);
  CHECK(slurp(dir / "a.csv") == a);
}

TEST_CASE("wsc design writes a report") {
  TempDir dir;
  const auto r = cpc_run({"design", "--n", "7", "--J", "2", "--mode", "wsc-fixed", "--rate", "1.5", "--samples",
                          "5000", "--seed", "3", "--out", dir / "w.json"});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(slurp(dir / "w.json"));
  CHECK(doc["subcodes"].size() == 2);
  const auto& rep = doc["design"];
  for (const char* key : {"inputs", "gains", "probs", "M_targets", "chosen_compositions", "achieved_rate",
                          "empirical_D", "seed"})
    CHECK(rep.contains(key));
}
