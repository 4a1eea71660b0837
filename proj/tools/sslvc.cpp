// sslvc/tools/sslvc.cpp

// Copyright 2026  sslvc authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Batch command line: prepare | train | convert | evaluate | visualize |
// fixture. Failures print {"error": {"kind", "message"}} on stderr and
// exit nonzero.

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

#include "sslvc/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sslvc;

namespace {

void print_error(const std::string &kind, const std::string &message) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Any-to-one voice conversion with adversarial speaker disentanglement"};
  app.require_subcommand(1);

  fs::path config_path;
  std::vector<std::string> overrides;
  auto with_config = [&](CLI::App *sub) {
    sub->add_option("-c,--config", config_path, "project config (TOML)")->required();
    sub->add_option("-s,--set", overrides, "override, e.g. training.steps=100")->take_all();
  };

  auto *prepare = app.add_subcommand("prepare", "scan corpora, split, augment and extract features");
  with_config(prepare);

  auto *train = app.add_subcommand("train", "train from the prepared manifests");
  with_config(train);
  bool resume = false;
  int log_every = 50;
  train->add_flag("--resume", resume, "continue from the latest checkpoint");
  train->add_option("--log-every", log_every, "progress line interval (steps)");

  auto *convert = app.add_subcommand("convert", "convert wav files to the target voice");
  with_config(convert);
  fs::path checkpoint, output_dir = "converted";
  std::vector<fs::path> inputs;
  std::string vocoder;
  convert->add_option("--checkpoint", checkpoint, "checkpoint blob")->required();
  convert->add_option("-o,--output", output_dir, "output directory");
  convert->add_option("--vocoder", vocoder, "griffin_lim or external_command")
      ->check(CLI::IsMember({"griffin_lim", "external_command"}));
  convert->add_option("inputs", inputs, "input wav files");

  auto *evaluate = app.add_subcommand("evaluate", "objective metrics over a convert output directory");
  with_config(evaluate);
  fs::path converted_dir = "converted";
  bool report_json = false;
  evaluate->add_option("--converted", converted_dir, "directory written by convert");
  evaluate->add_flag("--json", report_json, "print the report as JSON instead of a table");

  auto *visualize = app.add_subcommand("visualize", "content-embedding t-SNE and speaker probe");
  with_config(visualize);
  std::optional<fs::path> with_lsim, without_lsim;
  fs::path plot_output = "embedding_tsne";
  visualize->add_option("--with-lsim", with_lsim, "checkpoint trained with the similarity loss");
  visualize->add_option("--without-lsim", without_lsim, "checkpoint trained without it");
  visualize->add_option("-o,--output", plot_output, "output prefix (.png, .vctf, .json)");

  auto *fixture = app.add_subcommand("fixture", "write a synthetic corpus and a matching config.toml");
  fs::path fixture_root;
  FixtureSpec spec;
  fixture->add_option("dir", fixture_root, "output directory")->required();
  fixture->add_option("--target-utterances", spec.target_utterances);
  fixture->add_option("--external-per-speaker", spec.external_per_speaker);
  fixture->add_option("--seconds", spec.utterance_s);
  fixture->add_option("--seed", spec.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    print_error("usage_error", e.what());
    return 2;
  }

  try {
    if (fixture->parsed()) {
      cmd_fixture(fixture_root, spec);
      std::cout << json{{"fixture", fixture_root.string()}, {"config", (fixture_root / "config.toml").string()}}.dump(2)
                << std::endl;
      return 0;
    }

    ProjectConfig config = load_project_config(config_path, overrides);
    if (prepare->parsed()) {
      std::cout << json(cmd_prepare(config)).dump(2) << std::endl;
    } else if (train->parsed()) {
      const auto t0 = std::chrono::steady_clock::now();
      TrainOptions options;
      options.resume = resume;
      options.on_step = [&](std::int64_t step, const LossReport &r) {
        if (log_every > 0 && (step + 1) % log_every == 0) {
          const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
          std::cerr << "step " << step << " rec " << r.l_rec << " g " << r.total_g << " d " << r.total_d
                    << " lambda " << r.lambda_sim << " (" << s << " s)" << std::endl;
        }
      };
      const RunResult result = cmd_train(config, options);
      json out = {{"final_step", result.final_step}, {"checkpoint", result.last_checkpoint.string()}};
      if (!result.reports.empty()) out["last"] = result.reports.back();
      if (!result.validation.empty())
        out["validation"] = {{"step", result.validation.back().first}, {"l_rec", result.validation.back().second}};
      std::cout << out.dump(2) << std::endl;
    } else if (convert->parsed()) {
      if (!vocoder.empty()) config.eval.vocoder = vocoder;
      std::cout << json(cmd_convert(config, checkpoint, inputs, output_dir)).dump(2) << std::endl;
    } else if (evaluate->parsed()) {
      const EvalReport report = cmd_evaluate(config, converted_dir);
      if (report_json) {
        std::cout << json(report).dump(2) << std::endl;
      } else {
        std::cout << report.table() << "report: " << (converted_dir / "eval_report.json").string() << std::endl;
      }
    } else if (visualize->parsed()) {
      std::cout << json(cmd_visualize(config, without_lsim, with_lsim, plot_output)).dump(2) << std::endl;
    }
  } catch (const Error &e) {
    print_error(e.kind(), e.what());
    return 1;
  } catch (const std::exception &e) {
    print_error("internal_error", e.what());
    return 1;
  }
  return 0;
}
