// exposome: command-line driver for the analysis pipeline.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "exposome/error.hpp"
#include "exposome/pipeline.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw exposome::Error(exposome::ErrorKind::IoError, "cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DigitalExposome analysis pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string manifest;
  std::string preset;

  const std::pair<const char*, const char*> commands[] = {
      {"synth", "generate (or load) a session and write it out"},
      {"validate", "validate stream coverage and constant channels"},
      {"fuse", "resample, normalize and fuse to a 1 Hz table"},
      {"stats", "correlation, PCA, OLS and Q-Q outputs"},
      {"spatial", "Voronoi tessellation and heat grids"},
      {"train", "train the deep belief network"},
      {"evaluate", "cross-validate classifiers and modality ablation"},
      {"run", "full pipeline"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "base seed");
    sub->add_option("--out", out_dir, "output directory (default: $EXPOSOME_OUT_DIR or exposome_out)");
    sub->add_option("--manifest", manifest, "session manifest JSON; omit to synthesize")->check(CLI::ExistingFile);
    sub->add_option("--preset", preset, "synthetic preset: coupled | pollution_driven");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and friends exit 0; real usage errors share the config-error code.
    return app.exit(e) == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    exposome::PipelineConfig cfg;
    if (!config_path.empty()) cfg = exposome::pipeline_config_from_json(slurp(config_path));
    if (!preset.empty()) cfg.synth = exposome::synth_preset_from_string(preset);
    if (seed) cfg.seed = *seed;
    if (!manifest.empty()) cfg.manifest = manifest;
    // --out, then the config's out_dir, then the environment.
    if (!out_dir.empty()) {
      cfg.out_dir = out_dir;
    } else if (const char* env = std::getenv("EXPOSOME_OUT_DIR");
               env && *env && cfg.out_dir == exposome::PipelineConfig{}.out_dir) {
      cfg.out_dir = env;
    }
    cfg.stop_after = command == "run" ? "" : command == "synth" ? "ingest" : command;

    const auto report = exposome::run_pipeline(cfg);
    for (const auto& s : report.stages)
      std::cout << s.name << ": " << (s.ok ? "ok" : "FAILED") << (s.ok ? "" : " - " + s.error) << '\n';
    std::cout << report.outputs.size() << " files written to " << cfg.out_dir.string() << '\n';
    return report.success() ? 0 : 1;
  } catch (const exposome::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
