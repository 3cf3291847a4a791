// dtcx: train, evaluate and explain the recurrence classifier.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "dtcx/commands.hpp"
#include "dtcx/error.hpp"

namespace cli = dtcx::cli;

int main(int argc, char** argv) {
  CLI::App app{"Recurrence classifier with LIME and Morris explanations"};
  app.require_subcommand(1);

  std::string data;
  std::string out = "out";
  std::uint64_t seed = 1;
  std::string model;
  std::string partition = "test";

  cli::TrainOptions train;
  std::string val_source = "train";
  auto* train_cmd = app.add_subcommand("train", "Fit the network and write model + reports");
  train_cmd->add_option("--data", data, "Input CSV")->required();
  train_cmd->add_option("--seed", seed, "Split/initialisation/training seed");
  train_cmd->add_option("--out", out, "Output directory");
  train_cmd->add_option("--epochs", train.config.epochs)->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--batch-size", train.config.batch_size)->check(CLI::PositiveNumber);
  train_cmd->add_option("--lr", train.config.learning_rate)->check(CLI::PositiveNumber);
  train_cmd->add_option("--dropout", train.config.dropout)->check(CLI::Range(0.0, 0.999999));
  train_cmd->add_option("--val-source", val_source, "Validation rows: train | test-as-paper")
      ->check(CLI::IsMember({"train", "test-as-paper"}));
  train_cmd->add_option("--hidden", train.hidden, "Hidden layer widths")->expected(1, -1);
  train_cmd->add_option("--split-ratio", train.split_ratio, "Training fraction");
  train_cmd->add_flag("--stratify", train.stratify, "Stratify the split by class");

  auto* eval_cmd = app.add_subcommand("evaluate", "Recompute metrics for a trained model");
  std::string eval_out;
  eval_cmd->add_option("--model", model, "Model artifact")->required();
  eval_cmd->add_option("--data", data, "Input CSV")->required();
  eval_cmd->add_option("--partition", partition)->check(CLI::IsMember({"train", "test", "all"}));
  eval_cmd->add_option("--out", eval_out, "Optional output directory");
  eval_cmd->add_option("--seed", seed, "Accepted for symmetry; the split seed is stored in the model");

  cli::ExplainOptions explain;
  auto* explain_cmd = app.add_subcommand("explain", "LIME explanation of one row");
  explain_cmd->add_option("--model", model, "Model artifact")->required();
  explain_cmd->add_option("--data", data, "Input CSV")->required();
  explain_cmd->add_option("--out", out, "Output directory");
  explain_cmd->add_option("--seed", seed, "Sampling seed");
  explain_cmd->add_option("--index", explain.index, "Row within the partition")->required();
  explain_cmd->add_option("--partition", partition)->check(CLI::IsMember({"train", "test", "all"}));
  explain_cmd->add_option("--num-samples", explain.lime.num_samples);
  explain_cmd->add_option("--kernel-width", explain.lime.kernel_width, "Default 0.75*sqrt(d)");
  explain_cmd->add_option("--num-features", explain.lime.num_features);
  explain_cmd->add_option("--ridge-lambda", explain.lime.ridge_lambda);

  cli::SensitivityOptions sens;
  auto* sens_cmd = app.add_subcommand("sensitivity", "Morris elementary-effects screening");
  sens_cmd->add_option("--model", model, "Model artifact")->required();
  sens_cmd->add_option("--data", data, "Input CSV")->required();
  sens_cmd->add_option("--out", out, "Output directory");
  sens_cmd->add_option("--seed", seed, "Trajectory seed");
  sens_cmd->add_option("--trajectories", sens.morris.trajectories);
  sens_cmd->add_option("--levels", sens.morris.levels);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kUsage;
  }

  try {
    if (*train_cmd) {
      train.data = data;
      train.out = out;
      train.seed = seed;
      train.config.validation_source = val_source == "train"
                                           ? dtcx::neural::ValidationSource::FromTrain
                                           : dtcx::neural::ValidationSource::FromTestAsPaper;
      return cli::cmd_train(train, std::cout);
    }
    if (*eval_cmd) {
      cli::EvaluateOptions opts{model, data, cli::parse_partition(partition), std::nullopt};
      if (!eval_out.empty()) opts.out = eval_out;
      return cli::cmd_evaluate(opts, std::cout);
    }
    if (*explain_cmd) {
      explain.model = model;
      explain.data = data;
      explain.out = out;
      explain.partition = cli::parse_partition(partition);
      explain.lime.seed = seed;
      return cli::cmd_explain(explain, std::cout);
    }
    if (*sens_cmd) {
      sens.model = model;
      sens.data = data;
      sens.out = out;
      sens.morris.seed = seed;
      return cli::cmd_sensitivity(sens, std::cout);
    }
  } catch (const dtcx::Error& e) {
    std::cerr << "dtcx: " << e.what() << '\n';
    return cli::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "dtcx: " << e.what() << '\n';
    return cli::kDataError;
  }
  return cli::kUsage;
}
