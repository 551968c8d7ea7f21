// deepridge: command-line front end for the deepridge library.
//
//   deepridge norms <model>
//   deepridge balance <in> <out>
//   deepridge collapse <in> <out>
//   deepridge eval <model> <data>
//   deepridge train <data> --config <cfg> --out <model> [--trace <csv>]
//   deepridge radon-verify <model> [--samples N] [--seed S] [--tol T]
//   deepridge lipschitz <model> [--samples N] [--seed S] [--radius R]
//   deepridge sweep <data> --config <cfg> --lambdas a,b,c
//
// DEEPRIDGE_SEED, when set, overrides the config seed of train and sweep and
// the default seed of radon-verify and lipschitz (an explicit --seed wins).

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "deepridge/commands.hpp"

namespace {

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("DEEPRIDGE_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  try {
    return std::stoull(raw);
  } catch (const std::exception&) {
    std::cerr << "warning: ignoring non-numeric DEEPRIDGE_SEED='" << raw << "'\n";
    return std::nullopt;
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace deepridge;

  CLI::App app{"Deep ReLU bottleneck networks: norms, rescaling, Radon checks, training"};
  app.require_subcommand(1);

  std::string model, in, out, data, config, trace, lambdas;

  auto* norms = app.add_subcommand("norms", "Print every norm and regularizer of a model");
  norms->add_option("model", model, "Model file")->required();

  auto* balance = app.add_subcommand("balance", "Rescale neurons so that |v|_1 = |w|_2");
  balance->add_option("in", in, "Input model")->required();
  balance->add_option("out", out, "Output model")->required();

  auto* collapse = app.add_subcommand("collapse", "Merge bottlenecks into standard weight matrices");
  collapse->add_option("in", in, "Bias- and skip-free input model")->required();
  collapse->add_option("out", out, "Output file")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate a model on a dataset");
  eval->add_option("model", model, "Model file")->required();
  eval->add_option("data", data, "Dataset CSV")->required();

  auto* train_cmd = app.add_subcommand("train", "Train a model with a regularized objective");
  train_cmd->add_option("data", data, "Dataset CSV")->required();
  train_cmd->add_option("--config", config, "Config JSON")->required();
  train_cmd->add_option("--out", out, "Output model")->required();
  train_cmd->add_option("--trace", trace, "Write per-epoch objective CSV here");

  RadonVerifyCommand radon_opts;
  auto* radon = app.add_subcommand("radon-verify", "Check the Radon-domain reconstruction identity");
  radon->add_option("model", radon_opts.model_path, "Shallow scalar model")->required();
  radon->add_option("--samples", radon_opts.samples, "Random evaluation points")->capture_default_str();
  auto* radon_seed = radon->add_option("--seed", radon_opts.seed, "RNG seed")->capture_default_str();
  radon->add_option("--tol", radon_opts.tol, "Reconstruction tolerance")->capture_default_str();

  LipschitzCommand lip_opts;
  auto* lip = app.add_subcommand("lipschitz", "Compare the Lipschitz bound with sampled slopes");
  lip->add_option("model", lip_opts.model_path, "Model file")->required();
  lip->add_option("--samples", lip_opts.samples, "Random pairs")->capture_default_str();
  auto* lip_seed = lip->add_option("--seed", lip_opts.seed, "RNG seed")->capture_default_str();
  lip->add_option("--radius", lip_opts.radius, "Sampling box half-width")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Train across a lambda grid and tabulate sparsity");
  sweep->add_option("data", data, "Dataset CSV")->required();
  sweep->add_option("--config", config, "Config JSON")->required();
  sweep->add_option("--lambdas", lambdas, "Comma-separated lambda values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  const auto seed = env_seed();
  auto& o = std::cout;
  auto& e = std::cerr;

  if (*norms) return cmd_norms(model, o, e);
  if (*balance) return cmd_balance(in, out, o, e);
  if (*collapse) return cmd_collapse(in, out, o, e);
  if (*eval) return cmd_eval(model, data, o, e);
  if (*train_cmd) return cmd_train({data, config, out, trace, seed}, o, e);
  if (*radon) {
    if (seed && radon_seed->count() == 0) radon_opts.seed = *seed;
    return cmd_radon_verify(radon_opts, o, e);
  }
  if (*lip) {
    if (seed && lip_seed->count() == 0) lip_opts.seed = *seed;
    return cmd_lipschitz(lip_opts, o, e);
  }
  if (*sweep) return cmd_sweep({data, config, lambdas, seed}, o, e);
  return kExitValidation;
}
