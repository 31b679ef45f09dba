// Command-line front end: solve the bundled problems with the adaptive
// Hermite spectral solver, sweep controller parameters, or compare the four
// moving-technique variants.  Emits one CSV time series plus JSON event and
// summary files per run.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hsm/hsm.hpp"

namespace {

hsm::MoveMode parse_move_mode(const std::string& s) {
  if (s == "off") return hsm::MoveMode::Off;
  if (s == "left") return hsm::MoveMode::LeftOnly;
  if (s == "right") return hsm::MoveMode::RightOnly;
  if (s == "both") return hsm::MoveMode::Both;
  throw hsm::ConfigError("move-mode must be one of off|left|right|both");
}

// Flat key=value file; '#' starts a comment.  Keys use the dotted field
// paths of RunConfig (initial_basis.beta, adaptive.q, ...).  CLI flags
// override anything read here.
std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw hsm::ConfigError("cannot read config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const size_t comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    const size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const size_t a = s.find_first_not_of(" \t\r");
      const size_t b = s.find_last_not_of(" \t\r");
      return (a == std::string::npos) ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!key.empty()) kv[key] = value;
  }
  return kv;
}

struct CliOptions {
  std::string config_file;
  std::string problem = "example1";
  double beta = 1.0, x0 = 0.0;
  int n = 40;
  double dt = -1.0, t_final = -1.0;
  hsm::AdaptiveConfig adaptive;
  bool disable_move = false, disable_scale = false, disable_order = false;
  std::string move_mode = "both";
  int gl_order = 5;
  std::string out;
  int log_every = 1;
};

// Config-file values fill in only the options the command line left alone.
void apply_config_file(CliOptions& opt, const CLI::App* cmd) {
  if (opt.config_file.empty()) return;
  const auto kv = read_config_file(opt.config_file);
  auto wants = [&](const std::string& key, const std::string& flag) {
    return kv.count(key) > 0 && cmd->count(flag) == 0;
  };
  auto get_double = [&](const std::string& key, const std::string& flag, double& slot) {
    if (wants(key, flag)) slot = std::stod(kv.at(key));
  };
  auto get_int = [&](const std::string& key, const std::string& flag, int& slot) {
    if (wants(key, flag)) slot = std::stoi(kv.at(key));
  };
  auto get_string = [&](const std::string& key, const std::string& flag,
                        std::string& slot) {
    if (wants(key, flag)) slot = kv.at(key);
  };
  get_string("problem", "--problem", opt.problem);
  get_double("initial_basis.beta", "--beta", opt.beta);
  get_double("initial_basis.x0", "--x0", opt.x0);
  get_int("initial_basis.n", "--n", opt.n);
  get_double("dt", "--dt", opt.dt);
  get_double("t_final", "--t-final", opt.t_final);
  get_double("adaptive.q", "--q", opt.adaptive.q);
  get_double("adaptive.nu", "--nu", opt.adaptive.nu);
  get_double("adaptive.delta", "--delta", opt.adaptive.delta);
  get_double("adaptive.mu", "--mu", opt.adaptive.mu);
  get_double("adaptive.eta", "--eta", opt.adaptive.eta);
  get_double("adaptive.eta0", "--eta0", opt.adaptive.eta0);
  get_double("adaptive.gamma", "--gamma", opt.adaptive.gamma);
  get_double("adaptive.d_max", "--d-max", opt.adaptive.d_max);
  get_int("adaptive.n_max", "--n-max", opt.adaptive.n_max);
  get_double("adaptive.beta_min", "--beta-min", opt.adaptive.beta_min);
  get_double("adaptive.beta_max", "--beta-max", opt.adaptive.beta_max);
  if (wants("adaptive.enable_scale", "--disable-scale"))
    opt.disable_scale = !(kv.at("adaptive.enable_scale") == "1" ||
                          kv.at("adaptive.enable_scale") == "true");
  if (wants("adaptive.enable_order", "--disable-order"))
    opt.disable_order = !(kv.at("adaptive.enable_order") == "1" ||
                          kv.at("adaptive.enable_order") == "true");
  get_string("adaptive.move_mode", "--move-mode", opt.move_mode);
  get_int("gl_order", "--gl-order", opt.gl_order);
  get_string("output_path", "--out", opt.out);
  get_int("log_every", "--log-every", opt.log_every);
}

hsm::RunConfig build_run_config(const CliOptions& opt) {
  hsm::RunConfig config;
  config.problem = opt.problem;
  config.initial_basis = hsm::BasisParams(opt.beta, opt.x0, opt.n);
  config.adaptive = opt.adaptive;
  config.adaptive.move_mode = parse_move_mode(opt.move_mode);
  if (opt.disable_move) config.adaptive.move_mode = hsm::MoveMode::Off;
  if (opt.disable_scale) config.adaptive.enable_scale = false;
  if (opt.disable_order) config.adaptive.enable_order = false;
  config.gl_order = opt.gl_order;
  config.output_path = opt.out;
  config.log_every = opt.log_every;
  if (opt.dt > 0.0) config.dt_override = opt.dt;
  if (opt.t_final > 0.0) config.t_final_override = opt.t_final;
  config.keep_event_fields = false;  // the CLI only serializes events
  return config;
}

void add_common_options(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--config", opt.config_file, "flat key=value config file");
  cmd->add_option("--problem", opt.problem, "example1 or example2");
  cmd->add_option("--beta", opt.beta, "initial scaling factor");
  cmd->add_option("--x0", opt.x0, "initial displacement");
  cmd->add_option("--n", opt.n, "initial expansion order");
  cmd->add_option("--dt", opt.dt, "time step (default: problem preset)");
  cmd->add_option("--t-final", opt.t_final, "final time (default: problem preset)");
  cmd->add_option("--q", opt.adaptive.q, "scaling update ratio");
  cmd->add_option("--nu", opt.adaptive.nu, "scaling activation multiplier");
  cmd->add_option("--delta", opt.adaptive.delta, "minimal displacement");
  cmd->add_option("--mu", opt.adaptive.mu, "moving activation multiplier");
  cmd->add_option("--eta", opt.adaptive.eta, "initial refinement multiplier");
  cmd->add_option("--eta0", opt.adaptive.eta0, "coarsening multiplier");
  cmd->add_option("--gamma", opt.adaptive.gamma, "refinement multiplier growth");
  cmd->add_option("--d-max", opt.adaptive.d_max, "max displacement per step");
  cmd->add_option("--n-max", opt.adaptive.n_max, "max order increment per step");
  cmd->add_option("--beta-min", opt.adaptive.beta_min, "scaling factor lower clamp");
  cmd->add_option("--beta-max", opt.adaptive.beta_max, "scaling factor upper clamp");
  cmd->add_option("--gl-order", opt.gl_order, "Gauss-Legendre order for the source integral");
  cmd->add_flag("--disable-move", opt.disable_move, "turn the moving technique off");
  cmd->add_flag("--disable-scale", opt.disable_scale, "turn the scaling technique off");
  cmd->add_flag("--disable-order", opt.disable_order, "turn order adaptation off");
  cmd->add_option("--move-mode", opt.move_mode, "off|left|right|both");
  cmd->add_option("--out", opt.out, "output directory");
  cmd->add_option("--log-every", opt.log_every, "log stride in steps");
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) values.push_back(std::stod(tok));
  }
  if (values.empty()) throw hsm::ConfigError("sweep: --values is empty");
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive Hermite spectral solver for parabolic problems on the line"};
  app.require_subcommand(1);

  CliOptions run_opt, sweep_opt, cmp_opt;
  std::string sweep_param, sweep_values;

  CLI::App* cmd_run = app.add_subcommand("run", "solve one configured problem");
  add_common_options(cmd_run, run_opt);

  CLI::App* cmd_sweep = app.add_subcommand("sweep", "one run per parameter value");
  add_common_options(cmd_sweep, sweep_opt);
  cmd_sweep->add_option("--param", sweep_param, "q|nu|delta|mu|gamma|eta|eta0")->required();
  cmd_sweep->add_option("--values", sweep_values, "comma-separated values")->required();

  CLI::App* cmd_cmp =
      app.add_subcommand("compare-moving", "four moving-mode runs on example2");
  add_common_options(cmd_cmp, cmp_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (cmd_run->parsed()) {
      apply_config_file(run_opt, cmd_run);
      const hsm::RunRecord record = hsm::run(build_run_config(run_opt));
      std::printf("completed %ld steps, t=%g, final_error=%g, beta=%g, x0=%g, n=%d\n",
                  record.summary.steps, record.summary.final_time,
                  record.summary.final_error, record.summary.final_basis.beta,
                  record.summary.final_basis.x0, record.summary.final_basis.n);
    } else if (cmd_sweep->parsed()) {
      apply_config_file(sweep_opt, cmd_sweep);
      const hsm::SweepResult result =
          hsm::sweep(build_run_config(sweep_opt), sweep_param, parse_values(sweep_values));
      for (const hsm::SweepCell& cell : result.cells) {
        if (cell.record)
          std::printf("%s=%g -> final_error=%g, beta=%g, x0=%g, n=%d\n",
                      result.parameter.c_str(), cell.value,
                      cell.record->summary.final_error,
                      cell.record->summary.final_basis.beta,
                      cell.record->summary.final_basis.x0,
                      cell.record->summary.final_basis.n);
        else
          std::printf("%s=%g -> failed: %s\n", result.parameter.c_str(), cell.value,
                      cell.error_message.c_str());
      }
    } else if (cmd_cmp->parsed()) {
      apply_config_file(cmp_opt, cmd_cmp);
      cmp_opt.problem = "example2";
      for (const hsm::ModeRun& mr : hsm::compare_moving_modes(build_run_config(cmp_opt)))
        std::printf("%-13s final_error=%g x0=%g e_move=%g\n", mr.mode.c_str(),
                    mr.record.summary.final_error, mr.record.summary.final_basis.x0,
                    mr.record.summary.totals.e_move);
    }
  } catch (const hsm::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const hsm::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
  return 0;
}
