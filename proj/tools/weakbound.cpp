// Copyright 2026 The weakbound Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver for the weak-supervision boundary pipeline.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

#include "weakbound/errors.hpp"
#include "weakbound/pipeline.hpp"

namespace {

using namespace weakbound;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string out;
};

void report(const char* stage, const StageResult& r) {
  std::cout << stage << ": wrote " << r.written << " item(s) to " << r.dir.string();
  if (!r.skipped.empty()) std::cout << ", skipped " << r.skipped.size();
  std::cout << "\n";
}

int run(const std::string& command, const Options& o) {
  PipelineConfig cfg = load_config(o.config);
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.train.forest.seed = *o.seed;
  }
  if (o.jobs) {
    if (*o.jobs < 0) throw ConfigError("--jobs must be >= 0");
    cfg.jobs = *o.jobs;
  }
  if (!o.out.empty()) cfg.output = fs::absolute(o.out);
  cfg.canonical = canonical_config(cfg);

  if (command == "annotate") report("annotate", cmd_annotate(cfg));
  else if (command == "train") report("train", cmd_train(cfg));
  else if (command == "predict") report("predict", cmd_predict(cfg));
  else if (command == "fuse") report("fuse", cmd_fuse(cfg));
  else if (command == "eval") report("eval", cmd_eval(cfg));
  else if (command == "report") report("report", cmd_report(cfg));
  else if (command == "synth") report("synth", cmd_synth(cfg, cfg.dataset.root.empty() ? cfg.output : cfg.dataset.root));
  else if (command == "model-inspect") std::cout << cmd_model_inspect(cfg) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weakbound: boundary detection trained from weak box annotations"};
  app.require_subcommand(1, 1);
  Options opts;
  const char* commands[][2] = {
      {"annotate", "build tri-state training annotations from detections"},
      {"train", "train the structured edge forest"},
      {"predict", "run the forest on the prediction split"},
      {"fuse", "multiply predictions by detection objectness"},
      {"eval", "boundary precision/recall benchmark"},
      {"report", "collect eval summaries into a comparison table"},
      {"synth", "generate a synthetic dataset"},
      {"model-inspect", "print the model header as JSON"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config, "JSON config file")->required();
    sub->add_option("--seed", opts.seed, "override the config seed");
    sub->add_option("--jobs", opts.jobs, "worker threads (0 = all cores)");
    sub->add_option("--out", opts.out, "override the output directory");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const VersionError& e) {
    std::cerr << "version mismatch: " << e.what() << "\n";
    return kExitVersion;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const FormatError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const ValidationError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
