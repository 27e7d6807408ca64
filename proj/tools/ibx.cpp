// ibx: train the exploration agent, verify the analytic claims, evaluate
// checkpoints, render metric plots. Exit codes: 0 ok, 1 runtime failure,
// 2 usage error.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ibx/error.hpp"
#include "ibx/harness.hpp"
#include "ibx/verify.hpp"

int main(int argc, char** argv) {
  CLI::App app{"self-supervised exploration with an information-bottleneck dynamics model"};
  app.require_subcommand(1);

  std::string train_config, train_out;
  CLI::App* train = app.add_subcommand("train", "run a training experiment");
  train->add_option("--config", train_config, "experiment config JSON")->required();
  train->add_option("--out", train_out, "output directory (overrides run.out_dir)");

  std::string suite;
  CLI::App* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("--suite", suite,
                     "one of theorem1|theorem2|nce-bound|gradcheck|collapse")
      ->required();

  std::string eval_ckpt, eval_config;
  std::size_t eval_episodes = 10;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a stored policy");
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  eval->add_option("--config", eval_config, "experiment config JSON")->required();
  eval->add_option("--episodes", eval_episodes, "episode count");

  std::string plot_metrics, plot_out = ".";
  CLI::App* plot = app.add_subcommand("plot", "render SVG charts and a CSV export");
  plot->add_option("--metrics", plot_metrics, "metrics JSONL file")->required();
  plot->add_option("--out", plot_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*train) {
      return ibx::run_train_command(ibx::load_experiment_config(train_config), train_out);
    }
    if (*verify) {
      nlohmann::json report = ibx::run_verify_suite(suite);
      std::cout << report.dump(2) << "\n";
      return ibx::verify_passed(report) ? 0 : 1;
    }
    if (*eval) {
      return ibx::run_eval_command(eval_ckpt, ibx::load_experiment_config(eval_config),
                                   eval_episodes);
    }
    if (*plot) {
      return ibx::run_plot_command(plot_metrics, plot_out);
    }
  } catch (const ibx::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
