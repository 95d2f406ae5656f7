#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "monocert/cli.hpp"

using namespace monocert;

namespace {

const std::string kConfigs = MONOCERT_CONFIG_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("monocert_test_" + name);
  std::ofstream(path) << content;
  return path;
}

}  // namespace

TEST_CASE("check-monotone exit codes", "[cli]") {
  CHECK(run({"check-monotone", kConfigs + "/planar.cfg"}).code == 0);
  CHECK(run({"check-monotone", kConfigs + "/noncooperative.cfg"}).code == 1);
  const auto scaled = run({"check-monotone", kConfigs + "/planar.cfg", "--psi"});
  CHECK(scaled.code == 0);
  CHECK(scaled.out.find("field: psi(x, f(x))") != std::string::npos);
  CHECK(run({"check-monotone", kConfigs + "/bistable.cfg", "--psi"}).code == 2);
  const auto missing = run({"check-monotone", kConfigs + "/missing.cfg"});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("IoError") != std::string::npos);
  const auto bad = temp_file("bad.cfg", "dimension = 2\nf = [x1, \n");
  const auto parse_error = run({"check-monotone", bad.string()});
  CHECK(parse_error.code == 2);
  CHECK(parse_error.err.find("ConfigParseError") != std::string::npos);
  CHECK(run({"check-monotone"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("certify", "[cli]") {
  const auto path = run({"certify", kConfigs + "/planar.cfg", "--method", "path"});
  CHECK(path.code == 0);
  CHECK(path.out.find("box: 4 2\n") != std::string::npos);
  CHECK(path.out.find("lyapunov: max{x1, x2^2}") != std::string::npos);

  const auto bistable = run({"certify", kConfigs + "/bistable.cfg", "--method", "w"});
  CHECK(bistable.code == 1);
  CHECK(bistable.out.find("status: INCONCLUSIVE") != std::string::npos);

  const auto lin = run({"certify", kConfigs + "/linear.cfg", "--method", "linear", "--format", "csv"});
  CHECK(lin.code == 0);
  CHECK(lin.out.find("status,CERTIFIED") != std::string::npos);
  CHECK(lin.out.find("\nw,") != std::string::npos);

  const auto table = std::filesystem::temp_directory_path() / "monocert_test_lyap.csv";
  CHECK(run({"certify", kConfigs + "/planar.cfg", "--emit-lyap", table.string()}).code == 0);
  std::ifstream in(table);
  std::string header;
  std::getline(in, header);
  CHECK(header == "i,x_i,V_i,dV_i");

  CHECK(run({"certify", kConfigs + "/planar.cfg", "--method", "bogus"}).code == 2);
}

TEST_CASE("simulate and sweep", "[cli]") {
  const auto csv = std::filesystem::temp_directory_path() / "monocert_test_traj.csv";
  const auto sim = run({"simulate", kConfigs + "/planar_delayed.cfg", "--law", "prop:0.5", "--out", csv.string()});
  CHECK(sim.code == 0);
  CHECK(std::filesystem::file_size(csv) > 0);
  const auto boundary = run({"simulate", kConfigs + "/planar_delayed.cfg", "--law", "prop:1.0"});
  CHECK(boundary.code == 2);
  CHECK(boundary.err.find("Assumption1Violated") != std::string::npos);
  CHECK(run({"simulate", kConfigs + "/planar_delayed.cfg", "--tend", "0"}).code == 2);

  const auto out = std::filesystem::temp_directory_path() / "monocert_test_sweep.csv";
  const auto sweep = run({"sweep", kConfigs + "/planar_delayed.cfg", "--laws", kConfigs + "/laws.txt", "--out", out.string()});
  CHECK(sweep.code == 0);
  std::ifstream in(out);
  std::string header;
  std::getline(in, header);
  CHECK(header == "law_id,converged,t_converge,max_excursion,terminal_norm");

  CHECK(run({"sweep", kConfigs + "/planar_delayed.cfg", "--laws", temp_file("empty.txt", "# none\n").string()}).code == 0);
  CHECK(run({"sweep", kConfigs + "/planar_delayed.cfg", "--laws", temp_file("bad.txt", "wobble:3\n").string()}).code == 2);
}

TEST_CASE("fixed seed gives identical reports", "[cli]") {
  const std::vector<std::string> args{"check-monotone", kConfigs + "/planar.cfg", "--trials", "5", "--seed", "7",
                                      "--format", "csv"};
  const auto a = run(args);
  const auto b = run(args);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
}
