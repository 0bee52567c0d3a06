// ctrlid: sparse controller identification from closed-loop data.
//
//   ctrlid estimate           noise bound and plant gains of a dataset
//   ctrlid learn              two-stage sparse controller learning
//   ctrlid simulate           certificate and bound checks on a benchmark plant
//   ctrlid reproduce-example  the scalar example sweep and fit
//
// Exit codes: 0 success, 1 internal error, 2 bad input or parameters,
// 3 nothing to estimate from, 4 infeasible learning problem, 5 LP solver
// failure, 6 uncertified loop under --require-cert, 7 simulated bound violated.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "ctrlid/cli.hpp"
#include "ctrlid/errors.hpp"

namespace {

using namespace ctrlid;

std::string flag_name(const std::string& key) {
  std::string s = key;
  for (char& ch : s) {
    if (ch == '_') ch = '-';
  }
  return "--" + s;
}

struct Subcommand {
  Subcommand(CLI::App* a, cli::Command c) : app(a), command(c) {}

  CLI::App* app;
  cli::Command command;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;
  std::string config_file;
};

void add_options(Subcommand& sc) {
  for (const auto& info : cli::option_table()) {
    if (!(info.commands & sc.command)) continue;
    if (info.is_flag) {
      sc.flags[info.key] = false;
      sc.app->add_flag(flag_name(info.key), sc.flags[info.key], info.help);
    } else {
      sc.app->add_option(flag_name(info.key), sc.values[info.key], info.help);
    }
  }
  sc.app->add_option("--config", sc.config_file, "config file of key = value lines; overrides flags");
}

// Flags first, then the config file on top.
cli::RunConfig collect(const Subcommand& sc) {
  cli::RunConfig cfg;
  for (const auto& [key, value] : sc.values) {
    if (sc.app->count(flag_name(key)) > 0) cli::set_option(cfg, key, value);
  }
  for (const auto& [key, on] : sc.flags) {
    if (sc.app->count(flag_name(key)) > 0) cli::set_option(cfg, key, on ? "true" : "false");
  }
  if (!sc.config_file.empty()) {
    std::ifstream is(sc.config_file);
    if (!is) throw DataError("cannot open config file " + sc.config_file);
    try {
      cli::apply_config_file(is, cfg);
    } catch (const ParameterError& e) {
      throw ParameterError(sc.config_file + ": " + e.what());
    }
  }
  cli::validate(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse controller identification from closed-loop data"};
  app.require_subcommand(1);
  Subcommand subs[] = {
      {app.add_subcommand("estimate", "estimate the noise bound and plant gains of a dataset"), cli::kEstimate},
      {app.add_subcommand("learn", "learn a sparse controller from a dataset"), cli::kLearn},
      {app.add_subcommand("simulate", "certify a controller on a benchmark plant and check the bounds"),
       cli::kSimulate},
      {app.add_subcommand("reproduce-example", "run the scalar example sweep and fit"), cli::kReproduce},
  };
  for (auto& sc : subs) add_options(sc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kInput;
  }

  try {
    for (auto& sc : subs) {
      if (!sc.app->parsed()) continue;
      const cli::RunConfig cfg = collect(sc);
      switch (sc.command) {
        case cli::kEstimate: return cli::cmd_estimate(cfg, std::cout);
        case cli::kLearn: return cli::cmd_learn(cfg, std::cout);
        case cli::kSimulate: return cli::cmd_simulate(cfg, std::cout);
        case cli::kReproduce: return cli::cmd_reproduce_example(cfg, std::cout);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::exit_code_for(e);
  }
  return cli::kInternal;
}
