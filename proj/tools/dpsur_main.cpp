// dpsur command-line harness: train / account / calibrate /
// verify-mechanism / generate-data / show-config.
//
// Exit codes: 0 success, 2 configuration error, 3 infeasible privacy
// budget, 4 verification failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dpsur/accountant.hpp"
#include "dpsur/config.hpp"
#include "dpsur/experiment.hpp"
#include "dpsur/verify.hpp"
#include "json.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitVerification = 4;

using nlohmann::json;

int cmd_train(const std::string& config_path, std::uint64_t seed,
              const std::string& output_dir) {
  dpsur::ExperimentConfig cfg = config_path.empty()
                                    ? dpsur::default_config()
                                    : dpsur::load_config_file(config_path);
  cfg.seed = seed;
  cfg.seed_set = true;
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  const auto result = dpsur::run_experiment(cfg);
  std::cout << "run directory: " << result.run_dir << "\n"
            << "events: " << result.accepted << " accepted, "
            << result.rejected << " rejected, " << result.skipped
            << " skipped over " << result.iterations << " iterations\n"
            << "final train loss: " << result.final_train_loss << "\n";
  if (!std::isnan(result.final_test_metric))
    std::cout << "final test metric: " << result.final_test_metric << "\n";
  if (std::isinf(result.epsilon))
    std::cout << "privacy: not accounted (zero noise multiplier)\n";
  else
    std::cout << "privacy: epsilon " << result.epsilon << " at delta "
              << result.delta << " (alpha " << result.best_alpha << ")\n";
  return kExitOk;
}

int cmd_account(double q_train, double sigma_train, double q_valid,
                double sigma_valid, long updates, double delta,
                bool as_json) {
  dpsur::PrivacyLedger ledger;
  ledger.accepted_updates = updates;
  ledger.train_spec = {q_train, sigma_train};
  if (q_valid > 0.0)
    ledger.valid_spec = dpsur::SubsampledGaussianSpec{q_valid, sigma_valid};
  ledger.delta = delta;
  const auto bound = dpsur::ledger_epsilon(ledger);

  const auto& orders = dpsur::RdpCurve::default_orders();
  auto train_curve = dpsur::sgm_rdp_curve(ledger.train_spec, orders);
  auto total = dpsur::compose_repeated(train_curve, updates);
  if (ledger.valid_spec) {
    total = dpsur::compose(
        total, dpsur::compose_repeated(
                   dpsur::sgm_rdp_curve(*ledger.valid_spec, orders), updates));
  }
  if (as_json) {
    json j;
    j["epsilon"] = bound.epsilon;
    j["delta"] = delta;
    j["best_alpha"] = bound.best_alpha;
    j["updates"] = updates;
    j["rdp"] = json::array();
    for (std::size_t i = 0; i < total.size(); ++i)
      j["rdp"].push_back({{"alpha", total.orders()[i]},
                          {"value", total.values()[i]}});
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("epsilon = %.10g at delta = %g (best alpha = %d, t = %ld)\n",
                bound.epsilon, delta, bound.best_alpha, updates);
    std::printf("%6s  %-22s\n", "alpha", "composed RDP (nats)");
    for (std::size_t i = 0; i < total.size(); ++i)
      std::printf("%6d  %.12g\n", total.orders()[i], total.values()[i]);
  }
  return kExitOk;
}

int cmd_calibrate(double q_train, double sigma_train, double q_valid,
                  double sigma_valid, double epsilon, double delta,
                  bool as_json) {
  std::optional<dpsur::SubsampledGaussianSpec> valid;
  if (q_valid > 0.0)
    valid = dpsur::SubsampledGaussianSpec{q_valid, sigma_valid};
  const long t_max = dpsur::calibrate_max_updates({q_train, sigma_train},
                                                  valid, epsilon, delta);
  if (as_json) {
    json j;
    j["max_updates"] = t_max;
    j["epsilon"] = epsilon;
    j["delta"] = delta;
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("max accepted updates within (%g, %g): %ld\n", epsilon, delta,
                t_max);
  }
  return kExitOk;
}

int cmd_verify(long samples, std::uint64_t seed, const std::string& csv_path) {
  const auto report = dpsur::verify_mechanisms(samples, seed);
  std::cout << report.summary();
  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    if (!out) {
      std::cerr << "cannot write '" << csv_path << "'\n";
      return kExitConfig;
    }
    out << report.to_csv();
    std::cout << "wrote " << csv_path << "\n";
  }
  return report.all_passed() ? kExitOk : kExitVerification;
}

int cmd_generate(const std::string& kind, std::size_t n, int dim, int classes,
                 double noise, double separation, std::uint64_t seed,
                 const std::string& out_train, const std::string& out_test) {
  const auto k = dpsur::synthetic_kind_from_string(kind);
  const auto data = dpsur::generate_synthetic(k, n, dim, classes, noise, seed,
                                              separation);
  dpsur::write_csv(data.train, out_train);
  dpsur::write_csv(data.test, out_test);
  std::cout << "wrote " << out_train << " (" << data.train.size()
            << " rows) and " << out_test << " (" << data.test.size()
            << " rows)\n";
  return kExitOk;
}

int cmd_show_config(const std::string& config_path) {
  const auto cfg = config_path.empty() ? dpsur::default_config()
                                       : dpsur::load_config_file(config_path);
  std::cout << cfg.serialize();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "differentially private training with selective update and release"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "run a training experiment");
  std::string train_config, train_output;
  std::uint64_t train_seed = 0;
  train->add_option("--config", train_config, "experiment config file");
  train->add_option("--seed", train_seed, "master RNG seed")->required();
  train->add_option("--output-dir", train_output,
                    "run directory (overrides config)");

  // account
  auto* account =
      app.add_subcommand("account", "privacy accounting for a given run shape");
  double a_qt = 0.0, a_st = 0.0, a_qv = 0.0, a_sv = 0.0, a_delta = 1e-5;
  long a_updates = 0;
  bool a_json = false;
  account->add_option("--q-train", a_qt, "training sampling rate")->required();
  account->add_option("--sigma-train", a_st, "training noise multiplier")
      ->required();
  account->add_option("--q-valid", a_qv,
                      "validation sampling rate (0: train-only)");
  account->add_option("--sigma-valid", a_sv, "validation noise multiplier");
  account->add_option("--updates", a_updates, "accepted updates t")->required();
  account->add_option("--delta", a_delta, "failure probability");
  account->add_flag("--json", a_json, "machine-readable output");

  // calibrate
  auto* calibrate = app.add_subcommand(
      "calibrate", "largest update count within a privacy budget");
  double c_qt = 0.0, c_st = 0.0, c_qv = 0.0, c_sv = 0.0, c_eps = 0.0,
         c_delta = 1e-5;
  bool c_json = false;
  calibrate->add_option("--q-train", c_qt, "training sampling rate")
      ->required();
  calibrate->add_option("--sigma-train", c_st, "training noise multiplier")
      ->required();
  calibrate->add_option("--q-valid", c_qv,
                        "validation sampling rate (0: train-only)");
  calibrate->add_option("--sigma-valid", c_sv, "validation noise multiplier");
  calibrate->add_option("--epsilon", c_eps, "privacy budget")->required();
  calibrate->add_option("--delta", c_delta, "failure probability");
  calibrate->add_flag("--json", c_json, "machine-readable output");

  // verify-mechanism
  auto* verify = app.add_subcommand("verify-mechanism",
                                    "run the mechanism verification suites");
  long v_samples = 1000000;
  std::uint64_t v_seed = 1;
  std::string v_csv;
  verify->add_option("--samples", v_samples, "Monte-Carlo sample budget");
  verify->add_option("--seed", v_seed, "RNG seed");
  verify->add_option("--csv", v_csv, "write (analytic, empirical) pairs here");

  // generate-data
  auto* generate =
      app.add_subcommand("generate-data", "write synthetic datasets as CSV");
  std::string g_kind = "blobs", g_train = "train.csv", g_test = "test.csv";
  std::size_t g_n = 12500;
  int g_dim = 20, g_classes = 5;
  double g_noise = 1.0, g_sep = 0.0;
  std::uint64_t g_seed = 1;
  generate->add_option("--kind", g_kind, "blobs | linear");
  generate->add_option("--n", g_n, "total points before the 80/20 split");
  generate->add_option("--dim", g_dim, "feature dimension");
  generate->add_option("--classes", g_classes, "blob count (blobs only)");
  generate->add_option("--noise", g_noise, "noise level / cluster std");
  generate->add_option("--separation", g_sep,
                       "pairwise center distance (0: 10x noise)");
  generate->add_option("--seed", g_seed, "generator seed")->required();
  generate->add_option("--out-train", g_train, "training CSV path");
  generate->add_option("--out-test", g_test, "test CSV path");

  // show-config
  auto* show = app.add_subcommand(
      "show-config", "print the effective configuration with defaults");
  std::string s_config;
  show->add_option("--config", s_config, "config file to expand");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (train->parsed()) return cmd_train(train_config, train_seed, train_output);
    if (account->parsed())
      return cmd_account(a_qt, a_st, a_qv, a_sv, a_updates, a_delta, a_json);
    if (calibrate->parsed())
      return cmd_calibrate(c_qt, c_st, c_qv, c_sv, c_eps, c_delta, c_json);
    if (verify->parsed()) return cmd_verify(v_samples, v_seed, v_csv);
    if (generate->parsed())
      return cmd_generate(g_kind, g_n, g_dim, g_classes, g_noise, g_sep,
                          g_seed, g_train, g_test);
    if (show->parsed()) return cmd_show_config(s_config);
  } catch (const dpsur::InfeasibleBudget& e) {
    std::cerr << "infeasible budget: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const dpsur::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid arguments: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
