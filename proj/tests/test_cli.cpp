#include <catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "qfb/cli.hpp"

using namespace qfb;
using namespace qfb::cli;
using Catch::Matchers::WithinAbs;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " SOURCE_DATE_EPOCH=0 " + QFB_CLI_PATH + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::string column(const std::vector<std::vector<std::string>>& csv, std::size_t row, const std::string& name) {
  const auto& header = csv.front();
  const auto it = std::find(header.begin(), header.end(), name);
  REQUIRE(it != header.end());
  return csv.at(row).at(static_cast<std::size_t>(it - header.begin()));
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qfb_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("column names and order are pinned") {
  CHECK(protocol_columns() == std::vector<std::string>{
                                  "schema",         "scheme",          "theta",           "p",
                                  "chi",            "cos_chi",         "eta",             "f_plus",
                                  "f_minus",        "f_avg",           "bloch_plus_x",    "bloch_plus_y",
                                  "bloch_plus_z",   "bloch_minus_x",   "bloch_minus_y",   "bloch_minus_z",
                                  "prob_plus_plus", "prob_plus_minus", "prob_minus_plus", "prob_minus_minus",
                                  "mc_shots",       "mc_f_avg",        "mc_stderr_avg",   "mc_f_plus",
                                  "mc_stderr_plus", "mc_f_minus",      "mc_stderr_minus"});
  CHECK(sweep_columns() == std::vector<std::string>{"schema", "theta", "p", "chi_opt", "cos_chi_opt", "eta_opt",
                                                    "f_opt", "f_dn", "f_h", "f_diff", "chi_degenerate"});
  CHECK(crossover_columns() == std::vector<std::string>{"schema", "theta", "p_star", "p_star_closed_form"});
  CHECK(model_columns() == std::vector<std::string>{"schema", "cos_chi", "chi", "eta", "f_ideal", "f_model", "f_plus",
                                                    "f_minus", "bloch_plus_x", "bloch_plus_y", "bloch_plus_z",
                                                    "bloch_minus_x", "bloch_minus_y", "bloch_minus_z",
                                                    "success_probability"});
  CHECK(tomography_columns() == std::vector<std::string>{"schema", "input", "theta", "p", "chi", "eta", "bloch_x",
                                                         "bloch_y", "bloch_z", "min_eigenvalue", "physical",
                                                         "fidelity_exact", "fidelity_point", "fidelity_boot",
                                                         "fidelity_stderr"});
  CHECK(counts_columns() ==
        std::vector<std::string>{"schema", "input", "ensemble", "basis", "outcome", "counts", "duration"});
}

TEST_CASE("every row has one cell per column") {
  ProtocolConfig pc;
  pc.schemes = {SchemeChoice::preset(SchemeKind::helstrom)};
  pc.shots = 100;
  pc.seed = 1;
  for (const auto& row : cmd_protocol(pc).rows) CHECK(row.size() == protocol_columns().size());
  pc.shots.reset();
  for (const auto& row : cmd_protocol(pc).rows) CHECK(row.size() == protocol_columns().size());
  for (const auto& row : cmd_experiment_model(ModelConfig{}).rows) CHECK(row.size() == model_columns().size());
  TomographyConfig tc;
  tc.seed = 2;
  tc.resamples = 100;
  const auto t = cmd_tomography(tc);
  for (const auto& row : t.result.rows) CHECK(row.size() == tomography_columns().size());
  CHECK(t.counts.rows.size() == 2 * 3 * 6);
}

TEST_CASE("CSV formatting") {
  CHECK(report::format_double(0.1) == "0.1");
  CHECK(report::format_double(1.0) == "1");
  CHECK(report::format_double(-2.5e-17) == "-2.5e-17");
  ResultEnvelope env;
  env.columns = {"a", "b", "c"};
  env.rows = {{std::string("x,y"), report::Value{}, true}};
  std::ostringstream os;
  report::write_csv(env, os);
  CHECK(os.str() == "a,b,c\n\"x,y\",,true\n");
}

TEST_CASE("JSON envelope structure") {
  const auto j = report::to_json(cmd_experiment_model(ModelConfig{}));
  CHECK(j["schema"] == "qfb.model/1");
  CHECK(j["command"] == "experiment-model");
  CHECK(j["version"] == report::kToolVersion);
  CHECK(j["config"]["r_h"] == 0.345);
  CHECK(j["rows"].size() == 3);
  CHECK(j["rows"][1]["cos_chi"] == 0.93);
  CHECK(j["summary"]["at_measured_strength"]["exceeds_f_h"] == true);
}

TEST_CASE("protocol presets via the executable") {
  auto h = parse_csv(run("protocol --theta 0.715 --p 0.145 --scheme helstrom").out);
  REQUIRE(h.size() == 2);
  CHECK(h[1][0] == schema::protocol);
  CHECK_THAT(std::stod(column(h, 1, "f_avg")), WithinAbs(0.9344, 5e-4));

  auto dn = parse_csv(run("protocol --theta 0.715 --p 0 --scheme dn").out);
  CHECK_THAT(std::stod(column(dn, 1, "f_avg")), WithinAbs(1.0, 1e-15));

  auto opt = parse_csv(run("protocol --theta 0.715 --p 0.145 --scheme optimal").out);
  const double f = std::stod(column(opt, 1, "f_avg"));
  const double cc = std::stod(column(opt, 1, "cos_chi"));
  const ProtocolOptimum brute = brute_force_protocol_opt(0.715, 0.145, 1e-3);
  CHECK_THAT(f, WithinAbs(brute.fidelity, 1e-9));
  CHECK_THAT(cc, WithinAbs(std::cos(brute.chi), 2e-3));
  CHECK_THAT(f, WithinAbs(0.955, 1e-3));
  CHECK_THAT(cc, WithinAbs(0.90, 1e-2));

  auto all = parse_csv(run("protocol --scheme all").out);
  CHECK(all.size() == 4);
}

TEST_CASE("degrees are converted at the boundary") {
  auto rad = parse_csv(run("protocol --theta 0.5 --chi 0.3 --eta 0.2").out);
  auto deg = parse_csv(run("protocol --degrees --theta " + std::to_string(0.5 * 180 / std::numbers::pi) +
                           " --chi " + std::to_string(0.3 * 180 / std::numbers::pi) + " --eta " +
                           std::to_string(0.2 * 180 / std::numbers::pi))
                           .out);
  CHECK_THAT(std::stod(column(deg, 1, "f_avg")), WithinAbs(std::stod(column(rad, 1, "f_avg")), 1e-6));
}

TEST_CASE("experiment-model with ideal reflectivities matches the ideal column") {
  auto csv = parse_csv(run("experiment-model --rh 0.3333333333333333 --rv 1 --scan 21").out);
  REQUIRE(csv.size() == 22);
  for (std::size_t r = 1; r < csv.size(); ++r) {
    CHECK_THAT(std::stod(column(csv, r, "f_model")), WithinAbs(std::stod(column(csv, r, "f_ideal")), 1e-10));
  }
  auto dflt = parse_csv(run("experiment-model").out);
  REQUIRE(dflt.size() == 4);
  CHECK(std::stod(column(dflt, 2, "f_model")) > 0.9344);
}

TEST_CASE("exit codes") {
  CHECK(run("protocol --theta 2.0").exit_code == 2);
  CHECK(run("protocol --p 0.7").exit_code == 2);
  CHECK(run("protocol --bogus").exit_code == 2);
  CHECK(run("protocol --shots 10").exit_code == 2);  // missing seed
  CHECK(run("tomography").exit_code == 2);
  CHECK(run("experiment-model --cos-chi 1.5").exit_code == 2);
  CHECK(run("sweep --n-theta 1").exit_code == 2);
  CHECK(run("protocol").exit_code == 0);
}

TEST_CASE("runtime failures exit with 3 and leave no file behind") {
  const fs::path dir = scratch_dir("runtime");
  // a directory where the output file should go makes the final rename fail
  fs::create_directories(dir / "taken");
  CHECK(run("protocol --out " + (dir / "taken").string()).exit_code == 3);
  CHECK(fs::is_directory(dir / "taken"));
  CHECK_FALSE(fs::exists(dir / "taken.tmp"));
  fs::remove_all(dir);
}

TEST_CASE("validation failures write nothing") {
  const fs::path dir = scratch_dir("validation");
  CHECK(run("protocol --theta 9 --out " + (dir / "x.csv").string()).exit_code == 2);
  CHECK(fs::is_empty(dir));
  fs::remove_all(dir);
}

TEST_CASE("relative output paths resolve against QFB_OUTPUT_DIR") {
  const fs::path dir = scratch_dir("outdir");
  CHECK(run("protocol --out sub/p.csv", "QFB_OUTPUT_DIR=" + dir.string()).exit_code == 0);
  CHECK(fs::exists(dir / "sub" / "p.csv"));
  fs::remove_all(dir);
}

TEST_CASE("sweep writes rows, summary and crossover files") {
  const fs::path dir = scratch_dir("sweep");
  const auto r = run("sweep --n-theta 21 --n-p 11 --out " + (dir / "s.csv").string() + " --crossover-out " +
                     (dir / "x.csv").string());
  REQUIRE(r.exit_code == 0);
  std::ifstream in(dir / "s.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto csv = parse_csv(ss.str());
  CHECK(csv.size() == 1 + 21 * 11);
  CHECK(fs::exists(dir / "x.csv"));
  std::ifstream sj(dir / "s.csv.summary.json");
  const auto summary = report::Json::parse(sj);
  CHECK(summary["schema"] == "qfb.sweep/1");
  CHECK(summary.contains("summary"));
  CHECK_FALSE(summary.contains("rows"));
  CHECK_THAT(summary["summary"]["max_improvement"]["f_diff"].get<double>(), WithinAbs(0.026, 1e-3));
  fs::remove_all(dir);
}

TEST_CASE("identical config and seed give byte-identical output") {
  const std::string args = "tomography --seed 5 --resamples 200 --format json";
  const auto a = run(args);
  const auto b = run(args);
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);
  const auto c = run("protocol --scheme all --shots 500 --seed 9");
  CHECK(c.out == run("protocol --scheme all --shots 500 --seed 9").out);
  CHECK(c.out != run("protocol --scheme all --shots 500 --seed 10").out);
}

TEST_CASE("sweep payload does not depend on the thread count") {
  const auto a = run("sweep --n-theta 30 --n-p 30 --threads 1");
  const auto b = run("sweep --n-theta 30 --n-p 30 --threads 5");
  CHECK(a.out == b.out);
}

TEST_CASE("tomography counts file") {
  const fs::path dir = scratch_dir("counts");
  REQUIRE(run("tomography --seed 3 --resamples 100 --counts-out " + (dir / "c.csv").string()).exit_code == 0);
  std::ifstream in(dir / "c.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto csv = parse_csv(ss.str());
  REQUIRE(csv.size() == 1 + 36);
  CHECK(csv[1][0] == schema::counts);
  CHECK(column(csv, 1, "ensemble") == "clean");
  CHECK(column(csv, 1, "basis") == "X");
  CHECK(column(csv, 1, "outcome") == "plus");
  CHECK(column(csv, 1, "duration") == "60");
  fs::remove_all(dir);
}
