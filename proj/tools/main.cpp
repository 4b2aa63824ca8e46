#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

  void add_common(CLI::App* cmd, losfis::cli::Common& c, bool regions) {
    cmd->add_option("--fis", c.fis_path, "Fuzzy system (.fis)")->required();
    if (regions) {
      cmd->add_option("--regions", c.regions_path, "Region model (.los)")->required();
    }
    cmd->add_option("--epsilon", c.epsilon, "Boundary tolerance around integer outputs");
    cmd->add_option_function<std::string>(
           "--and-op",
           [&c](std::string const& v) { c.and_op = losfis::parse_and_operator(v); },
           "Override the AND operator")
        ->check(CLI::IsMember({"min", "product"}));
  }

}  // namespace

int main(int argc, char** argv) {
  using namespace losfis::cli;

  CLI::App app{"Fuzzy level-of-service toolkit for urban traffic"};
  app.require_subcommand(1);

  LabelOptions label;
  auto* label_cmd = app.add_subcommand("label", "Append ground-truth LoS from a region model to a measurement CSV");
  label_cmd->add_option("--regions", label.regions_path, "Region model (.los)")->required();
  label_cmd->add_option("--data", label.data_path, "Input CSV (timestamp,speed_kmh,flow_vph)")->required();
  label_cmd->add_option("--out", label.out_path, "Output CSV (default: stdout)");

  InferOptions infer;
  auto* infer_cmd = app.add_subcommand("infer", "Classify a single (flow, speed) pair");
  add_common(infer_cmd, infer.common, false);
  infer_cmd->add_option("--flow", infer.flow, "Traffic flow in veh/h")->required();
  infer_cmd->add_option("--speed", infer.speed, "Speed in km/h")->required();

  EvaluateOptions evaluate;
  std::size_t synthetic = 0;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score the fuzzy system against ground truth");
  add_common(eval_cmd, evaluate.common, true);
  auto* data_opt = eval_cmd->add_option("--data", evaluate.data_path, "Measurement CSV, optionally with a los column");
  auto* synth_opt = eval_cmd->add_option("--synthetic", synthetic, "Generate N synthetic measurements instead");
  data_opt->excludes(synth_opt);
  eval_cmd->add_option("--seed", evaluate.seed, "Seed for --synthetic");
  eval_cmd->add_option("--out", evaluate.out_base, "Write <out>.txt and <out>.json reports");

  SurfaceOptions surface;
  auto* surface_cmd = app.add_subcommand("surface", "Export the raw output surface as CSV");
  add_common(surface_cmd, surface.common, false);
  surface_cmd->add_option("--steps", surface.steps, "Grid points per axis (>= 2)");
  surface_cmd->add_option("--out", surface.out_path, "Output CSV (default: stdout)");

  GenrulesOptions genrules;
  auto* gen_cmd = app.add_subcommand("genrules", "Derive a rule base from a region model");
  add_common(gen_cmd, genrules.common, true);
  gen_cmd->add_option("--grid", genrules.grid, "Samples per axis");
  gen_cmd->add_option("--agreement", genrules.agreement, "Required share of the majority level, in (0.5, 1]");
  gen_cmd->add_option("--out", genrules.out_path, "Output .fis (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const& e) {
    auto const code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*synth_opt) evaluate.synthetic = synthetic;

  if (*label_cmd) return cmd_label(label, std::cout, std::cerr);
  if (*infer_cmd) return cmd_infer(infer, std::cout, std::cerr);
  if (*eval_cmd) return cmd_evaluate(evaluate, std::cout, std::cerr);
  if (*surface_cmd) return cmd_surface(surface, std::cout, std::cerr);
  if (*gen_cmd) return cmd_genrules(genrules, std::cout, std::cerr);
  return kExitUsage;
}
