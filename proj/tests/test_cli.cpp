#include <cmath>

#include "doctest.h"
#include "sra/cli.hpp"
#include "sra/errors.hpp"

using namespace sra;
using nlohmann::json;

namespace {

cli::RunConfig base_config(const std::string& command) {
  cli::RunConfig cfg;
  cfg.command = command;
  cfg.seed = 99;
  cfg.reps = 2000;
  cfg.workers = 2;
  return cfg;
}

}  // namespace

TEST_CASE("config documents round-trip bit-exactly") {
  cli::RunConfig cfg = base_config("adjust");
  cfg.model_name = "neyman-scott";
  cfg.model_config = {{"n", 12}, {"q", 3}, {"sigma", 1.25}};
  const json echoed = cli::to_json(cfg);
  const cli::RunConfig back = cli::config_from_json(echoed);
  CHECK(cli::to_json(back) == echoed);

  const cli::RunOutput out1 = cli::run_command(cfg);
  const cli::RunOutput out2 =
      cli::run_command(cli::config_from_json(out1.doc.at("config")));
  CHECK(out1.doc == out2.doc);
}

TEST_CASE("adjust command emits the documented schema") {
  cli::RunConfig cfg = base_config("adjust");
  cfg.model_name = "normal-regression";
  cfg.model_config = {{"n", 25}, {"q", 3}};
  const json r = cli::run_command(cfg).doc.at("result");
  for (const char* key : {"g_inf", "g_np", "d", "rho", "ratio", "eta", "a0",
                          "z0", "er_leading", "provenance"}) {
    CHECK(r.contains(key));
  }
  CHECK(std::sqrt(25.0) * r.at("g_np").get<double>() ==
        doctest::Approx(3.0 / std::sqrt(2.0)).epsilon(1e-10));
  CHECK(r.at("provenance") == "analytic");
}

TEST_CASE("behrens-fisher adjustments are reported as zero with null ratio") {
  cli::RunConfig cfg = base_config("adjust");
  cfg.model_name = "behrens-fisher";
  cfg.model_config = {{"n", 10}, {"q", 3}};
  const json r = cli::run_command(cfg).doc.at("result");
  CHECK(std::abs(r.at("g_inf").get<double>()) < 1e-10);
  CHECK(std::abs(r.at("g_np").get<double>()) < 1e-10);
  CHECK(r.at("ratio").is_null());
}

TEST_CASE("inverse gaussian ratio through the command layer") {
  cli::RunConfig cfg = base_config("adjust");
  cfg.model_name = "inverse-gaussian";
  cfg.model_config = {{"n", 8}, {"q", 2}};
  const json r = cli::run_command(cfg).doc.at("result");
  CHECK(r.at("ratio").get<double>() == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("bartlett command value") {
  cli::RunConfig cfg = base_config("bartlett");
  cfg.model_name = "normal-regression";
  cfg.model_config = {{"n", 10}, {"q", 4}};
  const json r = cli::run_command(cfg).doc.at("result");
  CHECK(r.at("b_np").get<double>() == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("pivots command: signed root has zero skewness correction") {
  cli::RunConfig cfg = base_config("pivots");
  cfg.model_name = "curved-normal";
  cfg.model_config = {{"n", 6}, {"q", 2}};
  cfg.pivot_kind = "signed-root";
  const json r = cli::run_command(cfg).doc.at("result");
  REQUIRE(r.at("pivots").size() == 1);
  CHECK(r.at("pivots")[0].at("pivot_kind") == "signed-root");
  CHECK(r.at("pivots")[0].at("kappa3").get<double>() == 0.0);

  cfg.pivot_kind.clear();
  const json all = cli::run_command(cfg).doc.at("result");
  CHECK(all.at("pivots").size() == 8);
}

TEST_CASE("table command golden output") {
  cli::RunConfig cfg = base_config("table");
  cfg.table_which = 1;
  cfg.format = "csv";
  const cli::RunOutput out = cli::run_command(cfg);
  CHECK(out.csv ==
        "case,2,5,10,20,50\n"
        "a,2.25,9.00,20.25,42.75,110.25\n"
        "b,-2.10,-5.50,-8.56,-15.76,-130.28\n");

  cfg.table_which = 2;
  const cli::RunOutput out2 = cli::run_command(cfg);
  CHECK(out2.csv ==
        "case,1,2,5,10,20,50\n"
        "a,1.11,2.45,6.77,14.17,29.09,74.01\n"
        "b,1.11,2.21,5.53,11.05,22.11,55.26\n");

  // schema stability of the json document
  cfg.format = "json";
  const json r = cli::run_command(cfg).doc.at("result");
  CHECK(r.at("q").size() == 6);
  CHECK(r.at("a").size() == 6);
  CHECK(r.at("b").size() == 6);
}

TEST_CASE("bootstrap command reports diagnostics and p-values") {
  cli::RunConfig cfg = base_config("bootstrap");
  cfg.model_name = "neyman-scott";
  cfg.model_config = {{"n", 8}, {"q", 2}};
  cfg.reps = 500;
  cfg.psi0 = 1.0;
  const json r = cli::run_command(cfg).doc.at("result");
  CHECK(r.at("reps").get<int>() == 500);
  CHECK(r.at("diagnostics").contains("r"));
  CHECK(r.at("diagnostics").at("r").contains("p_lower"));
  CHECK(r.at("diagnostics").at("r").contains("ks"));
  CHECK(r.at("diagnostics").at("r").at("coverage").contains("95"));
}

TEST_CASE("verify command verdict schema") {
  cli::RunConfig cfg = base_config("verify");
  cfg.model_name = "neyman-scott";
  cfg.model_config = {{"q", 3}};
  cfg.quantity = "ER";
  cfg.n_grid = {10};
  cfg.reps = 4000;
  const json r = cli::run_command(cfg).doc.at("result");
  REQUIRE(r.at("checks").size() == 1);
  const auto& chk = r.at("checks")[0];
  for (const char* key : {"n", "mc", "se", "theory", "slack",
                          "residual_times_n", "verdict"}) {
    CHECK(chk.contains(key));
  }
  const std::string verdict = chk.at("verdict").get<std::string>();
  CHECK((verdict == "pass" || verdict == "inconclusive"));
}

TEST_CASE("validate command passes on the built-ins") {
  cli::RunConfig cfg = base_config("validate");
  cfg.model_name = "curved-normal";
  cfg.model_config = {{"n", 6}, {"q", 2}};
  cfg.reps = 4000;
  const json r = cli::run_command(cfg).doc.at("result");
  CHECK(r.at("ok").get<bool>());
}

TEST_CASE("error taxonomy") {
  cli::RunConfig cfg = base_config("adjust");
  cfg.model_name = "unknown-model";
  CHECK_THROWS_AS(cli::run_command(cfg), ConfigError);

  cfg = base_config("no-such-command");
  CHECK_THROWS_AS(cli::run_command(cfg), ConfigError);

  cfg = base_config("adjust");
  cfg.model_name = "neyman-scott";
  cfg.model_config = {{"n", 10}, {"q", "three"}};
  CHECK_THROWS_AS(cli::run_command(cfg), ConfigError);
}
