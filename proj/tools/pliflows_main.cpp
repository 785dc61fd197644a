#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pliflows/experiment.hpp"

namespace ex = pliflows::experiment;

namespace {

struct Flags {
  std::string config_path;
  std::string config_json;
  std::string builtin;
  std::optional<double> a;
  std::vector<double> k0;
  std::string out;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw pliflows::Error(pliflows::Errc::invalid_argument, "cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ex::ExperimentConfig assemble(const std::string& command, const Flags& f) {
  ex::ExperimentConfig c;
  if (!f.config_path.empty() && !f.config_json.empty()) {
    throw pliflows::Error(pliflows::Errc::invalid_argument,
                          "--config and --config-json are mutually exclusive");
  }
  if (!f.config_path.empty()) c = ex::parse_config(slurp(f.config_path));
  if (!f.config_json.empty()) c = ex::parse_config(f.config_json);
  c.command = command;
  if (!f.builtin.empty()) c.problem.builtin = f.builtin;
  if (f.a) {
    c.problem.a = *f.a;
    c.portrait.a = *f.a;
    if (f.builtin.empty()) c.problem.builtin = "scalar_a";
  }
  if (!f.k0.empty()) {
    c.k0 = pliflows::Matrix(1, f.k0.size(), f.k0);
  }
  if (!f.out.empty()) c.output = f.out;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient flows for continuous-time LQR policy optimization"};
  app.set_version_flag("--version", ex::kVersion);
  app.require_subcommand(1);

  Flags flags;
  const std::pair<const char*, const char*> commands[] = {
      {"flow", "Integrate a gradient, natural or Gauss-Newton flow"},
      {"pli", "Sample a loss landscape, fit sat-PLI and classify it"},
      {"lffnn", "Integrate a factored (linear network) flow"},
      {"iss", "Run a disturbance-amplitude sweep"},
      {"riccati", "Solve the Riccati equation for the problem"},
      {"portrait", "Phase portrait of the scalar two-layer network"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config_path, "JSON config file");
    sub->add_option("--config-json", flags.config_json, "Inline JSON config");
    sub->add_option("--builtin", flags.builtin, "integrator, planar_zero or scalar_a");
    sub->add_option("--a", flags.a, "Scalar plant coefficient (implies scalar_a)");
    sub->add_option("--k0", flags.k0, "Initial gain entries, row-major");
    sub->add_option("--out", flags.out, "Output path prefix");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "pliflows: " << e.what() << '\n';
    return 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  std::vector<ex::OutputFile> files;
  try {
    const ex::ExperimentConfig config = ex::resolve(assemble(command, flags));
    files = ex::run(config);
  } catch (const pliflows::Error& e) {
    std::cerr << "pliflows " << command << ": " << e.what() << '\n';
    return ex::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "pliflows " << command << ": " << e.what() << '\n';
    return 3;
  }
  try {
    ex::write_outputs(files);
  } catch (const std::exception& e) {
    std::cerr << "pliflows " << command << ": " << e.what() << '\n';
    return 3;
  }
  for (const auto& f : files) std::cout << f.path << '\n';
  return 0;
}
