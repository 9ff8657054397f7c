#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "wdsparse/json_io.hpp"

using namespace wdsparse;

namespace {

const std::filesystem::path kData = WDSPARSE_DATA_DIR;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::filesystem::path scratch() {
  auto dir = std::filesystem::temp_directory_path() / "wdsparse_test_cli";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run(const std::string& args) {
  const auto err_path = scratch() / "stderr.txt";
  const std::string cmd =
      std::string("\"") + WDSPARSE_CLI_PATH + "\" " + args + " 2>\"" + err_path.string() + "\"";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err_path);
  return r;
}

std::string data(const std::string& name) { return "\"" + (kData / name).string() + "\""; }

}  // namespace

TEST_CASE("norm and dual") {
  auto r = run("norm --norm-spec " + data("l1.json") + " --vector \"3,-4\"");
  CHECK(r.code == 0);
  CHECK(Json::parse(r.out).at("value").get<double>() == 7.0);

  r = run("norm --norm-spec " + data("l1.json") + " --vector \"3,-4\" --format csv");
  CHECK(r.code == 0);
  CHECK(r.out == "value\n7\n");

  r = run("dual --norm-spec " + data("group.json") + " --vector \"3,4,0,0,1,1\"");
  CHECK(r.code == 0);
  const auto j = Json::parse(r.out);
  CHECK(std::abs(j.at("dual").get<double>() - 5 / std::sqrt(2.0)) <= 1e-15);
  CHECK(j.at("maximizer").size() == 6);
}

TEST_CASE("eigenvalue of the worked examples") {
  auto r = run("eigenvalue --matrix " + data("ex2a.csv") + " --set 3 --big-l 3");
  CHECK(r.code == 0);
  auto j = Json::parse(r.out);
  CHECK(std::abs(j.at("value").get<double>() - 2 / std::sqrt(26.0)) <= 1e-9);
  CHECK(j.at("certified").get<bool>());
  CHECK(std::abs(j.at("compatibility").get<double>() - 2.0 / 13) <= 1e-9);
  CHECK(std::abs(number_from_json(j.at("effective_sparsity"), "g") - 6.5) <= 1e-8);

  r = run("eigenvalue --matrix " + data("ex2b.csv") + " --set 3 --big-l 3");
  CHECK(r.code == 0);
  j = Json::parse(r.out);
  CHECK(j.at("value").get<double>() == 0.0);
  CHECK(j.at("effective_sparsity") == "inf");

  r = run("eigenvalue --matrix " + data("ex2a.csv") + " --set 3 --big-l 3 --format csv");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("value,lower_bound,upper_bound,certified", 0) == 0);
}

TEST_CASE("solve") {
  const auto dir = scratch();
  {
    std::ofstream x(dir / "x.csv");
    x << "1,0\n0,1\n1,1\n-1,1\n";
    std::ofstream y(dir / "y.csv");
    y << "1\n2\n3\n1\n";
  }
  const std::string base = "solve --matrix \"" + (dir / "x.csv").string() + "\" --response \"" +
                           (dir / "y.csv").string() + "\"";
  auto r = run(base + " --lambda 0.1");
  CHECK(r.code == 0);
  const auto fit = Json::parse(r.out);
  CHECK(fit.at("converged").get<bool>());
  CHECK(fit.at("beta").size() == 2);

  r = run(base + " --lambda 0.1 --max-iter 1 --tol 1e-15");
  CHECK(r.code == 2);
  CHECK_FALSE(Json::parse(r.out).at("converged").get<bool>());
}

TEST_CASE("oracle experiment") {
  const auto report = scratch() / "report.jsonl";
  auto r = run("oracle --config " + data("experiment.json") + " --out \"" + report.string() + "\"");
  CHECK(r.code == 0);
  const auto j = Json::parse(r.out);
  CHECK(j.at("summary").at("failed").get<int>() == 0);
  CHECK(j.at("summary").at("replicates").get<int>() == 50);
  const auto csv = slurp(scratch() / "report.summary.csv");
  CHECK(csv.rfind("replicates,", 0) == 0);
  CHECK(r.err.find("replicates: 50") != std::string::npos);

  // The report lines parse with the library's own loaders.
  std::ifstream in(report);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    CHECK(replicate_to_json(replicate_from_json(Json::parse(line))).dump() == line);
    ++lines;
  }
  CHECK(lines == 50);

  const auto first = slurp(report);
  const auto again = scratch() / "again.jsonl";
  run("oracle --config " + data("experiment.json") + " --out \"" + again.string() + "\" --threads 1");
  CHECK(slurp(again) == first);
}

TEST_CASE("compare and bound") {
  auto r = run("compare --matrix " + data("ex2a.csv") + " --set 1 --big-l 2 --norm-spec " +
               data("monotone.json"));
  CHECK(r.code == 0);
  const auto j = Json::parse(r.out);
  CHECK(j.at("adaptive_vs_l1") == "holds");
  CHECK(j.at("adaptive_vs_cone") == "holds");

  r = run("bound --matrix " + data("ex2a.csv") + " --norm-spec " + data("monotone.json") +
          " --draws 200");
  CHECK(r.code == 0);
  CHECK(Json::parse(r.out).at("verdict").get<bool>());

  r = run("bound --matrix " + data("ex2a.csv") + " --norm-spec " + data("l1.json"));
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error: invalid_argument:", 0) == 0);
}

TEST_CASE("usage errors") {
  CHECK(run("").code == 1);
  CHECK(run("frobnicate").code == 1);
  CHECK(run("norm --norm-spec " + data("l1.json") + " --vector 1,2 --bogus 3").code == 1);
  CHECK(run("eigenvalue --matrix " + data("ex2a.csv") + " --set 3").code == 1);
  auto r = run("eigenvalue --matrix /nonexistent.csv --set 1 --big-l 1");
  CHECK(r.code == 1);
  CHECK(r.err.find("error: io:") == 0);
  r = run("eigenvalue --matrix " + data("ex2a.csv") + " --set 9 --big-l 1");
  CHECK(r.code == 1);
  r = run("norm --norm-spec " + data("group.json") + " --vector 1,2");
  CHECK(r.code == 1);
  CHECK(r.err.find("error: dimension:") == 0);
  CHECK(run("--help").code == 0);
}

TEST_CASE("deterministic output") {
  const std::string args = "eigenvalue --matrix " + data("ex2a.csv") + " --set 1,2 --big-l 1.5 " +
                           "--norm-spec " + data("monotone.json");
  const auto a = run(args);
  const auto b = run(args);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  // Every emitted number round-trips exactly.
  const auto j = Json::parse(a.out);
  const double v = j.at("value").get<double>();
  CHECK(Json::parse(Json(v).dump()).get<double>() == v);
}
