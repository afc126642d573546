#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "sra/cli.hpp"
#include "sra/errors.hpp"

namespace {

using sra::cli::RunConfig;

struct Flags {
  std::string model, config_path, format, out, kind, quantity, n_grid_csv,
      provider;
  int q = 0, n = 0, workers = 0, which = 1;
  double psi0 = 0.0;
  std::uint64_t reps = 0, seed = 0;
  bool precise = false;
};

void add_common_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--model", f.model, "registered model name");
  cmd->add_option("--config", f.config_path, "JSON run or model config");
  cmd->add_option("--q", f.q, "nuisance/stratum count override");
  cmd->add_option("--n", f.n, "per-stratum sample size override");
  cmd->add_option("--psi0", f.psi0, "interest value under test");
  cmd->add_option("--reps", f.reps, "replicate count");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--format", f.format, "output format: json|csv")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--out", f.out, "write output to this path");
  cmd->add_flag("--precise", f.precise, "full-precision table entries");
  cmd->add_option("--workers", f.workers, "worker threads (0 = auto)");
  cmd->add_option("--provider", f.provider, "cumulant provider: analytic|mc")
      ->check(CLI::IsMember({"analytic", "mc"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"second-order likelihood adjustment toolkit"};
  app.require_subcommand(1);

  Flags f;
  for (const char* name : {"adjust", "bartlett", "pivots", "table", "bootstrap",
                           "verify", "validate"}) {
    CLI::App* sub = app.add_subcommand(name);
    add_common_flags(sub, f);
    if (std::string(name) == "table") {
      sub->add_option("--which", f.which, "table number: 1|2")
          ->check(CLI::IsMember({1, 2}));
    }
    if (std::string(name) == "pivots") {
      sub->add_option("--kind", f.kind, "pivot kind (default: all)");
    }
    if (std::string(name) == "verify") {
      sub->add_option("--quantity", f.quantity,
                      "ER|EW|bias_psi_hat|profile_score_mean|M3_diag");
      sub->add_option("--n-grid", f.n_grid_csv, "comma-separated n values");
    }
  }

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* sub = app.get_subcommands().front();
    RunConfig cfg;
    if (!f.config_path.empty()) {
      std::ifstream file(f.config_path);
      if (!file) {
        throw sra::ConfigError("cannot read config file '" + f.config_path + "'");
      }
      nlohmann::json doc = nlohmann::json::parse(file);
      if (doc.contains("config")) doc = doc.at("config");
      if (doc.contains("command")) {
        cfg = sra::cli::config_from_json(doc);
      } else {
        cfg.model_config = doc;  // bare model config
      }
    }
    cfg.command = sub->get_name();
    auto passed = [&](const char* flag) { return sub->count(flag) > 0; };
    if (passed("--model")) cfg.model_name = f.model;
    if (passed("--format")) cfg.format = f.format;
    if (passed("--out")) cfg.out = f.out;
    if (passed("--precise")) cfg.precise = f.precise;
    if (passed("--reps")) cfg.reps = f.reps;
    if (passed("--seed")) cfg.seed = f.seed;
    if (passed("--workers")) cfg.workers = f.workers;
    if (passed("--provider")) cfg.provider = f.provider;
    if (passed("--psi0")) cfg.psi0 = f.psi0;
    if (passed("--q")) cfg.model_config["q"] = f.q;
    if (passed("--n")) cfg.model_config["n"] = f.n;
    if (cfg.command == "table" && passed("--which")) cfg.table_which = f.which;
    if (cfg.command == "pivots" && passed("--kind")) cfg.pivot_kind = f.kind;
    if (cfg.command == "verify") {
      if (passed("--quantity")) cfg.quantity = f.quantity;
      if (passed("--n-grid")) {
        cfg.n_grid.clear();
        std::stringstream ss(f.n_grid_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) cfg.n_grid.push_back(std::stoi(tok));
      }
    }

    const sra::cli::RunOutput out = sra::cli::run_command(cfg);
    return sra::cli::emit_output(cfg, out);
  } catch (const sra::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return sra::cli::kExitConfigError;
  } catch (const sra::ValidationError& e) {
    std::cerr << "validation failure: " << e.what() << "\n";
    return sra::cli::kExitValidationError;
  } catch (const sra::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return sra::cli::kExitNumericError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return sra::cli::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return sra::cli::kExitNumericError;
  }
}
