// cvse: cluster report findings, train the retrieval model, retrieve, evaluate.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cvse/errors.hpp"
#include "cvse/pipeline/commands.hpp"
#include "cvse/pipeline/config.hpp"
#include "cvse/pipeline/synthetic.hpp"

namespace fs = std::filesystem;
using namespace cvse;
using namespace cvse::pipeline;

namespace {

// Keys whose values name files; command-line values resolve against the working directory.
bool is_path_key(const std::string& key) {
  return key == "out" || key == "manifest" || key == "groups" || key == "gold" || key == "checkpoint" ||
         key == "predictions" || key == "keywords";
}

std::string absolute_embedder(const std::string& kind) {
  const auto colon = kind.find(':');
  if (colon == std::string::npos) return kind;
  return kind.substr(0, colon + 1) + fs::absolute(kind.substr(colon + 1)).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-modal retrieval of abnormal findings for two-view chest X-ray studies"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  std::map<std::string, std::string> flags;
  for (const auto& [key, help] : config_keys()) app.add_option("--" + key, flags[key], help);

  auto* cluster = app.add_subcommand("cluster", "group abnormal report sentences");
  auto* train = app.add_subcommand("train", "train the embedding model");
  std::string split = "test";
  auto* retrieve = app.add_subcommand("retrieve", "retrieve top-k findings per study");
  retrieve->add_option("--split", split, "train, dev or test")->capture_default_str();
  auto* evaluate = app.add_subcommand("eval", "score predictions against gold findings");
  std::string study_id;
  std::uint64_t sentence_id = 0;
  auto* attention = app.add_subcommand("export-attention", "write attention grids as CSV");
  attention->add_option("--study", study_id, "study id")->required();
  attention->add_option("--sentence", sentence_id, "global sentence id")->required();
  auto* synthetic = app.add_subcommand("gen-synthetic", "write a synthetic dataset into --out");
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    ConfigMap config = config_path.empty() ? ConfigMap{} : ConfigMap::load(config_path);
    ConfigMap overrides;
    for (const auto& [key, value] : flags) {
      if (app.count("--" + key) == 0) continue;
      if (is_path_key(key)) {
        overrides.set(key, fs::absolute(value).string());
      } else if (key == "embedder") {
        overrides.set(key, absolute_embedder(value));
      } else {
        overrides.set(key, value);
      }
    }
    config.merge(overrides);

    if (synthetic->parsed()) {
      const auto sc = SyntheticConfig::from(config);
      const fs::path out = config.get_path("out", ".");
      const auto corpus = make_synthetic(sc);
      write_synthetic(corpus, out);
      std::cout << "gen-synthetic: " << corpus.studies.size() << " studies, " << corpus.expected_groups()
                << " expected groups, written to " << out.string() << "\n";
      return 0;
    }

    const RunConfig run = RunConfig::from(config);
    if (cluster->parsed()) {
      cmd_cluster(run, std::cout);
    } else if (train->parsed()) {
      cmd_train(run, std::cout);
    } else if (retrieve->parsed()) {
      cmd_retrieve(run, parse_split(split), std::cout);
    } else if (evaluate->parsed()) {
      cmd_eval(run, std::cout);
    } else if (attention->parsed()) {
      cmd_export_attention(run, study_id, sentence_id, std::cout);
    }
    return 0;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {  // UsageError, ShapeError
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::out_of_range& e) {  // LookupError
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
