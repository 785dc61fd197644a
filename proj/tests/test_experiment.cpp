#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "pliflows/experiment.hpp"
#include "pliflows/iss.hpp"
#include "support/instances.hpp"

using namespace pliflows;
using namespace pliflows::experiment;
using nlohmann::json;
using testsupport::thrown_code;

namespace {

ExperimentConfig from(const std::string& text) { return resolve(parse_config(text)); }

const OutputFile& find(const std::vector<OutputFile>& files, const std::string& suffix) {
  for (const OutputFile& f : files) {
    if (f.path.size() >= suffix.size() && f.path.compare(f.path.size() - suffix.size(), suffix.size(), suffix) == 0) {
      return f;
    }
  }
  FAIL("no output ending in " << suffix);
  return files.front();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::size_t fields(const std::string& line) { return 1 + static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')); }

void check_csv_shape(const std::string& csv) {
  const auto ls = lines(csv);
  REQUIRE(ls.size() >= 2);
  const std::size_t n = fields(ls.front());
  for (const std::string& l : ls) CHECK(fields(l) == n);
}

const char* kFlow = R"({"command": "flow", "problem": {"builtin": "integrator"}, "k0": 2, "output": "out/flow"})";
const char* kIss = R"({
  "command": "iss", "seed": 7,
  "problem": {"builtin": "scalar_a", "a": -1},
  "flow": {"samples": 201},
  "disturbance": {"kind": "sinusoid", "amplitude": 1},
  "iss": {"amplitudes": [0, 0.01, 0.1], "inits": [2, 0.5], "random_inits": 2, "init_scale": 0.5, "phases": 2}
})";

}  // namespace

TEST_CASE("format_double") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5e-300) == "-2.5e-300");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(-INFINITY) == "-inf");
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -1e-17}) CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
}

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_config(kFlow);
  CHECK(c.command == "flow");
  REQUIRE(c.k0.has_value());
  CHECK(*c.k0 == Matrix::scalar(2.0));
  CHECK_FALSE(c.flow.t_max.has_value());
  CHECK(thrown_code([] { parse_config(R"({"command": "flow", "bogus": 1})"); }) == Errc::invalid_argument);
  CHECK(thrown_code([] { parse_config(R"({"flow": {"eta": "fast"}})"); }) == Errc::invalid_argument);
  CHECK(thrown_code([] { parse_config("{not json"); }) == Errc::invalid_argument);
  CHECK(thrown_code([] { parse_config(R"({"k0": [[1, 2], [3]]})"); }) == Errc::invalid_argument);
  const ExperimentConfig m = parse_config(R"({"k0": [[1, 2], [3, 4]], "factors": [3, [[1, 2]]]})");
  CHECK(*m.k0 == Matrix{{1, 2}, {3, 4}});
  CHECK(m.factors.size() == 2);
}

TEST_CASE("configs round-trip through JSON") {
  std::vector<ExperimentConfig> configs{ExperimentConfig{}, parse_config(kFlow), from(kFlow), from(kIss),
                                        from(R"({"command": "portrait"})"),
                                        from(R"({"command": "riccati", "problem": {"builtin": "planar_zero"}})")};
  ExperimentConfig rich = parse_config(kIss);
  rich.problem.builtin = "";
  rich.problem.A = Matrix{{0.1, 1.0 / 3.0}, {-2.0, 1e-300}};
  rich.problem.B = Matrix{{1.0}, {0.5}};
  rich.pli.rhos = {0.1, 7.0};
  rich.pli.base = Matrix{{1, 2}};
  rich.disturbance->switch_times = {1.0, 2.0};
  rich.disturbance->levels = {0.5, -0.5, 1.0};
  rich.disturbance->seed = 18446744073709551615ull;
  rich.iss.factored = true;
  rich.iss.inits = {{Matrix{{1}, {2}}, Matrix{{0.5, 0.25}}}};
  configs.push_back(rich);
  for (const ExperimentConfig& c : configs) {
    const std::string text = to_json_text(c);
    CHECK(parse_config(text) == c);
    CHECK(to_json_text(parse_config(text)) == text);
  }
}

TEST_CASE("resolve validates before running") {
  CHECK(thrown_code([] { from(R"({"command": "fly"})"); }) == Errc::invalid_argument);
  CHECK(thrown_code([] { from(R"({"command": "flow"})"); }) == Errc::invalid_argument);
  CHECK(thrown_code([] { from(R"({"command": "flow", "k0": -1})"); }) == Errc::not_stabilizing);
  CHECK(thrown_code([] { from(R"({"command": "flow", "k0": [1, 2]})"); }) == Errc::dimension_mismatch);
  CHECK(thrown_code([] { from(R"({"command": "flow", "k0": 2, "flow": {"eta": 0}})"); }) == Errc::invalid_argument);
  CHECK(thrown_code([] { from(R"({"command": "flow", "k0": 2, "flow": {"kind": "newton"}})"); }) ==
        Errc::invalid_argument);
  CHECK(thrown_code([] { from(R"({"command": "lffnn", "factors": [2, -1]})"); }) == Errc::not_stabilizing);
  CHECK(thrown_code([] {
          from(R"({"command": "iss", "disturbance": {"kind": "constant", "amplitude": 1}, "iss": {"amplitudes": [0.1], "inits": [2]}})");
        }) == Errc::invalid_argument);
  CHECK(thrown_code([] { from(R"({"command": "iss", "iss": {"inits": [2]}})"); }) == Errc::invalid_argument);
  CHECK(thrown_code([] { from(R"({"command": "pli", "pli": {"source": "slice"}})"); }) == Errc::invalid_argument);
  CHECK(thrown_code([] { run(from(R"({"command": "riccati", "problem": {"builtin": "", "A": [[1, 0], [0, -1]], "B": [[0], [1]], "Q": [[1, 0], [0, 1]], "R": [[1]]}})")); }) ==
        Errc::no_stabilizing_gain);

  const ExperimentConfig planar = from(R"({"command": "flow", "problem": {"builtin": "planar_zero"}, "k0": [1.5, 0, 0, 1.5]})");
  CHECK(*planar.k0 == 1.5 * Matrix::identity(2));
  CHECK(planar.output == "pliflows_flow");
  CHECK(*planar.flow.t_max == 100.0);
}

TEST_CASE("iss resolve fills the horizon and draws seeded inits") {
  const ExperimentConfig a = from(kIss);
  const ExperimentConfig b = from(kIss);
  CHECK(a == b);
  CHECK(a.iss.inits.size() == 4);
  CHECK(a.iss.random_inits == 0);
  CHECK(*a.flow.t_max == doctest::Approx(default_horizon(LqrProblem::scalar(-1.0))));
  json other = json::parse(kIss);
  other["seed"] = 8;
  CHECK_FALSE(from(other.dump()).iss.inits == a.iss.inits);
  // resolving twice is a fixed point
  CHECK(resolve(a) == a);
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(Error(Errc::invalid_argument, "")) == 2);
  CHECK(exit_code_for(Error(Errc::not_stabilizing, "")) == 2);
  CHECK(exit_code_for(Error(Errc::precondition_violated, "")) == 2);
  CHECK(exit_code_for(Error(Errc::left_domain, "")) == 3);
  CHECK(exit_code_for(Error(Errc::not_converged, "")) == 3);
}

TEST_CASE("flow run: integrator from k0 = 2") {
  const auto files = run(from(kFlow));
  REQUIRE(files.size() == 2);
  const OutputFile& csv = find(files, ".csv");
  CHECK(csv.path == "out/flow.csv");
  CHECK(lines(csv.contents).front() == "t,loss,regret,grad_norm");
  check_csv_shape(csv.contents);
  const json summary = json::parse(find(files, ".json").contents);
  CHECK(summary["version"] == kVersion);
  CHECK(summary["command"] == "flow");
  CHECK(summary["result"]["final_regret"].get<double>() <= 1e-8);
  CHECK(summary["config"]["flow"]["t_max"] == 100.0);
  CHECK(parse_config(summary["config"].dump()) == from(kFlow));
}

TEST_CASE("riccati run: planar example") {
  const auto files = run(from(R"({"command": "riccati", "problem": {"builtin": "planar_zero"}})"));
  REQUIRE(files.size() == 1);
  const json r = json::parse(files[0].contents)["result"];
  const auto k = r["k_opt"].get<std::vector<std::vector<double>>>();
  CHECK(std::fabs(k[0][0] - 1.0) <= 1e-10);
  CHECK(std::fabs(k[0][1]) <= 1e-10);
  CHECK(std::fabs(k[1][1] - 1.0) <= 1e-10);
}

TEST_CASE("csv outputs keep their declared shape") {
  const auto lffnn = run(from(R"({"command": "lffnn", "problem": {"builtin": "scalar_a", "a": -1}, "factors": [2, 0.5],
                                 "flow": {"t_max": 20}, "disturbance": {"kind": "sinusoid", "amplitude": 0.01}})"));
  const std::string& csv = find(lffnn, ".csv").contents;
  CHECK(lines(csv).front() == "t,loss,regret,grad_norm,c_1,u_sup");
  check_csv_shape(csv);

  const auto portrait = run(from(R"({"command": "portrait", "portrait": {"k1": {"from": -1, "to": 1, "count": 5}}})"));
  const std::string& pcsv = find(portrait, "_portrait.csv").contents;
  CHECK(lines(pcsv).front() == "k1,k2,v1,v2,flag_equilibrium,flag_boundary,flag_manifold");
  CHECK(lines(pcsv).size() == 1 + 5 * 41);
  check_csv_shape(pcsv);

  const auto pli = run(from(R"({"command": "pli", "pli": {"grid": {"from": 0.1, "to": 1e4, "count": 200, "log": true}, "rhos": [0.1, 1, 1e3]}})"));
  check_csv_shape(find(pli, "_samples.csv").contents);
  const json pr = json::parse(find(pli, ".json").contents)["result"];
  CHECK(pr["classify"]["sat_feasible"] == true);
  CHECK(pr["sgl"].size() == 3);

  const auto iss = run(from(kIss));
  const std::string& scsv = find(iss, "_sweep.csv").contents;
  CHECK(lines(scsv).size() == 1 + 3 * 4 * 2);
  check_csv_shape(scsv);
  const json ir = json::parse(find(iss, ".json").contents)["result"];
  CHECK(ir["gamma_hat"][0].get<double>() <= 1e-8);
}

TEST_CASE("identical configs reproduce identical bytes") {
  for (const char* text : {kFlow, kIss}) {
    const auto first = run(from(text));
    setenv("PLIFLOWS_THREADS", "3", 1);
    const auto second = run(from(text));
    unsetenv("PLIFLOWS_THREADS");
    REQUIRE(first.size() == second.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
      CHECK(first[i].path == second[i].path);
      CHECK(first[i].contents == second[i].contents);
    }
  }
}

TEST_CASE("write_outputs writes every file") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "pliflows_write_test";
  fs::remove_all(dir);
  write_outputs({{(dir / "a.txt").string(), "alpha\n"}, {(dir / "sub" / "b.txt").string(), "beta"}});
  std::ifstream a(dir / "a.txt");
  std::string content((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  CHECK(content == "alpha\n");
  CHECK(fs::exists(dir / "sub" / "b.txt"));
  CHECK_FALSE(fs::exists(dir / "a.txt.partial"));
  fs::remove_all(dir);
}
