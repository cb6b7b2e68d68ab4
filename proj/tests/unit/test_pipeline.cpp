#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <regex>
#include <set>
#include <sstream>

#include "cvse/errors.hpp"
#include "cvse/eval/labeler.hpp"
#include "cvse/eval/recall.hpp"
#include "cvse/model/checkpoint.hpp"
#include "cvse/model/retrieval.hpp"
#include "cvse/model/trainer.hpp"
#include "cvse/num/random.hpp"
#include "cvse/pipeline/binary_io.hpp"
#include "cvse/pipeline/commands.hpp"
#include "cvse/pipeline/feature_io.hpp"
#include "cvse/pipeline/synthetic.hpp"
#include "cvse/text/embedder.hpp"
#include "cvse/text/mutex.hpp"
#include "cvse/text/sentence.hpp"
#include "doctest.h"

namespace fs = std::filesystem;
using namespace cvse;
using namespace cvse::pipeline;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "cvse_pipeline_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

SyntheticConfig small_synthetic() {
  SyntheticConfig c;
  c.concepts = 4;
  c.train_studies = 40;
  c.dev_studies = 10;
  c.test_studies = 10;
  c.width = 3;
  c.height = 3;
  c.d2 = 8;
  c.d1 = 12;
  return c;
}

RunConfig run_config(const fs::path& dir, const std::map<std::string, std::string>& overrides = {}) {
  ConfigMap map = ConfigMap::load(dir / "run.cfg");
  map.set("out", (dir / "out").string());
  map.set("d", "16");
  map.set("epochs", "4");
  map.set("batch_size", "8");
  map.set("lr", "0.01");
  for (const auto& [k, v] : overrides) map.set(k, v);
  return RunConfig::from(map);
}

std::vector<json> read_lines(const fs::path& path) {
  std::vector<json> out;
  std::ifstream in(path);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

model::FeatureMap random_map(num::Rng& rng, std::size_t w, std::size_t h, std::size_t c) {
  std::vector<double> v(w * h * c);
  for (double& x : v) x = static_cast<float>(rng.normal());
  return model::FeatureMap(w, h, c, std::move(v));
}

// One-study-per-line manifest with maps of the given channel counts.
fs::path write_manifest(const fs::path& dir, const std::vector<std::pair<std::string, std::size_t>>& studies) {
  num::Rng rng(1);
  std::string text;
  for (const auto& [id, channels] : studies) {
    write_feature_map(dir / (id + "_f.cvfm"), random_map(rng, 2, 2, channels));
    write_feature_map(dir / (id + "_l.cvfm"), random_map(rng, 2, 2, channels));
    text += json{{"study_id", id},     {"split", "train"},          {"report", "mild cardiomegaly. lungs clear."},
                 {"abnormal", {0}},    {"frontal", id + "_f.cvfm"}, {"lateral", id + "_l.cvfm"}}
                .dump() +
            "\n";
  }
  io::write_text(dir / "manifest.jsonl", text);
  return dir / "manifest.jsonl";
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CVSE_BINARY) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string file_text(const fs::path& p) { return io::read_text(p); }

// Runs cluster, train, retrieve and eval; returns the output directory.
fs::path full_run(const fs::path& dir, const std::map<std::string, std::string>& overrides = {}) {
  const RunConfig run = run_config(dir, overrides);
  std::ostringstream log;
  cmd_cluster(run, log);
  cmd_train(run, log);
  cmd_retrieve(run, Split::kTest, log);
  cmd_eval(run, log);
  return run.out;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto map = ConfigMap::parse("# comment\n d = 32 \nmargin=0.5\n\nembedder = hash # trailing\n");
  CHECK(map.get_count("d", 0) == 32);
  CHECK(map.get_real("margin", 0) == 0.5);
  CHECK(map.get_string("embedder", "") == "hash");
  CHECK(map.get_count("k", 7) == 7);
  CHECK_THROWS_AS(ConfigMap::parse("no equals sign"), UsageError);
  CHECK_THROWS_AS(ConfigMap::parse("d = x").get_count("d", 0), UsageError);
  CHECK_THROWS_AS(ConfigMap::parse("typo_key = 1").check_known_keys(), UsageError);

  const RunConfig defaults = RunConfig::from(ConfigMap{});
  CHECK(defaults.d == 512);
  CHECK(defaults.margin == 0.2);
  CHECK(defaults.negatives == 8);
  CHECK(defaults.epochs == 40);
  CHECK(defaults.lr == 0.001);
  CHECK(defaults.k == 3);
  CHECK(defaults.groups == fs::path(".") / "groups.jsonl");
  CHECK_THROWS_AS(RunConfig::from(ConfigMap::parse("margin = 0")), UsageError);
  CHECK_THROWS_AS(RunConfig::from(ConfigMap::parse("negatives = 0")), UsageError);
  CHECK_THROWS_AS(RunConfig::from(ConfigMap::parse("threshold = 1.5")), UsageError);

  const fs::path dir = scratch("config");
  io::write_text(dir / "a.cfg", "manifest = data/m.jsonl\nseed = 9\n");
  auto loaded = ConfigMap::load(dir / "a.cfg");
  CHECK(loaded.get_path("manifest", {}) == dir / "data/m.jsonl");
  ConfigMap over;
  over.set("seed", "11");
  loaded.merge(over);
  CHECK(loaded.get_u64("seed", 0) == 11);
}

TEST_CASE("feature map files round-trip bit-exactly") {
  num::Rng rng(2);
  const fs::path dir = scratch("cvfm");
  for (int trial = 0; trial < 20; ++trial) {
    const auto map = random_map(rng, 1 + rng.below(4), 1 + rng.below(4), 1 + rng.below(6));
    write_feature_map(dir / "m.cvfm", map);
    CHECK(read_feature_map(dir / "m.cvfm") == map);
  }
  const auto bytes = encode_feature_map(random_map(rng, 2, 2, 3));
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "CVFM");
  CHECK(bytes.size() == 4 + 2 + 12 + 2 * 2 * 3 * 4);
  CHECK(bytes[4] == 1);  // version, little-endian
  CHECK(bytes[6] == 2);  // width
  auto truncated = bytes;
  truncated.pop_back();
  CHECK_THROWS_AS(decode_feature_map(truncated, "x"), DataError);
  auto magic = bytes;
  magic[1] = 'X';
  CHECK_THROWS_AS(decode_feature_map(magic, "x"), DataError);
  auto nan = bytes;
  for (int i = 0; i < 4; ++i) nan[18 + i] = 0xff;
  CHECK_THROWS_AS(decode_feature_map(nan, "x"), DataError);
}

TEST_CASE("ingest") {
  const fs::path dir = scratch("ingest");
  const auto one = write_manifest(dir, {{"s1", 4}});
  const Dataset d = ingest(one);
  CHECK(d.studies.size() == 1);
  CHECK(d.split_counts[0] == 1);
  CHECK(d.studies[0].sentences.size() == 2);
  CHECK(d.channels == 4);
  CHECK(d.sentence(1).text == "lungs clear.");
  CHECK_THROWS_AS(d.study("nope"), LookupError);
  CHECK_THROWS_AS(d.sentence(2), LookupError);

  io::write_text(dir / "empty.jsonl", "\n");
  CHECK(message_of([&] { ingest(dir / "empty.jsonl"); }).find("no studies") != std::string::npos);

  const fs::path wide = scratch("ingest_wide");
  const auto m64 = write_manifest(wide, {{"wide-study", 64}});
  const std::string msg = message_of([&] { ingest(m64, 32); });
  CHECK(msg.find("wide-study") != std::string::npos);
  CHECK(msg.find("d2=64") != std::string::npos);
  CHECK_THROWS_AS(ingest(m64, 32), IngestError);

  const fs::path mixed = scratch("ingest_mixed");
  CHECK_THROWS_AS(ingest(write_manifest(mixed, {{"a", 4}, {"b", 5}})), IngestError);

  const fs::path dup = scratch("ingest_dup");
  CHECK(message_of([&] { ingest(write_manifest(dup, {{"twin", 4}, {"twin", 4}})); }).find("twin") !=
        std::string::npos);

  const fs::path missing = scratch("ingest_missing");
  const auto mm = write_manifest(missing, {{"gone", 4}});
  fs::remove(missing / "gone_l.cvfm");
  CHECK(message_of([&] { ingest(mm); }).find("gone") != std::string::npos);
  CHECK_THROWS_AS(ingest(missing / "absent.jsonl"), DataError);
}

TEST_CASE("synthetic generator") {
  const auto a = make_synthetic(small_synthetic());
  const auto b = make_synthetic(small_synthetic());
  const fs::path da = scratch("syn_a"), db = scratch("syn_b");
  write_synthetic(a, da);
  write_synthetic(b, db);
  for (const char* f : {"manifest.jsonl", "truth.json", "sentence_vectors.txt", "run.cfg", "features/train-0003_frontal.cvfm"}) {
    CAPTURE(f);
    CHECK(io::read_file(da / f) == io::read_file(db / f));
  }
  CHECK(a.studies.size() == 60);
  for (const auto& s : a.studies) {
    const auto abnormal = s.abnormal_positions();
    CHECK((abnormal.size() >= 1 && abnormal.size() <= 3));
  }

  SUBCASE("zero noise plants exact prototypes") {
    auto c = small_synthetic();
    c.concepts = 2;
    c.max_findings = 2;
    c.noise = 0.0;
    const auto z = make_synthetic(c);
    for (const auto& s : z.studies) {
      for (const auto* pair : {&s.frontal_blocks, &s.lateral_blocks}) {
        const auto& map = pair == &s.frontal_blocks ? s.frontal : s.lateral;
        for (const auto& block : *pair) {
          const auto region = map.region(block.y * c.width + block.x);
          const auto& proto = z.visual_prototypes[block.concept_id];
          CHECK(std::equal(region.begin(), region.end(), proto.values().begin()));
        }
      }
    }
  }
  SUBCASE("left and right variants get different mutex patterns") {
    auto c = small_synthetic();
    c.variants = 3;
    const auto v = make_synthetic(c);
    std::map<std::pair<int, std::size_t>, std::set<std::string>> patterns;
    for (const auto& s : v.studies)
      for (std::size_t i = 0; i < s.sentences.size(); ++i)
        if (s.concept_ids[i] >= 0)
          patterns[{s.concept_ids[i], s.variant_ids[i]}].insert(text::mutex_pattern(text::tokenize(s.sentences[i])).to_string());
    for (const auto& [key, set] : patterns) CHECK(set.size() == 1);
    // concept 0 uses {right, left, bilateral}
    CHECK(*patterns[{0, 0}].begin() != *patterns[{0, 1}].begin());
    CHECK(v.modifiers[0][0] == "right");
    CHECK(v.modifiers[0][1] == "left");
    CHECK(v.expected_groups() == 12);
  }
  auto bad = small_synthetic();
  bad.concepts = 1;
  CHECK_THROWS_AS(make_synthetic(bad), UsageError);
  bad = small_synthetic();
  bad.noise = -1;
  CHECK_THROWS_AS(make_synthetic(bad), UsageError);
}

TEST_CASE("cluster recovers the generator's groups") {
  for (std::size_t variants : {1, 3}) {
    auto c = small_synthetic();
    c.variants = variants;
    const auto corpus = make_synthetic(c);
    const fs::path dir = scratch("cluster_" + std::to_string(variants));
    write_synthetic(corpus, dir);
    const RunConfig run = run_config(dir);
    std::ostringstream log;
    const auto summary = cmd_cluster(run, log);
    CHECK(summary.clusters == c.concepts);
    CHECK(summary.groups == corpus.expected_groups());
    CHECK(summary.groups >= summary.clusters);
    CHECK(log.str().find("groups") != std::string::npos);

    const auto groups = read_groups(run.groups);
    CHECK(groups.size() == corpus.expected_groups());
    std::set<std::uint64_t> members;
    std::size_t total = 0;
    for (const auto& g : groups) {
      total += g.members.size();
      members.insert(g.members.begin(), g.members.end());
      CHECK(std::find(g.members.begin(), g.members.end(), g.representative_id) != g.members.end());
    }
    CHECK(total == members.size());
    CHECK(total == summary.abnormal_sentences);
  }
}

TEST_CASE("cluster on a one-sentence corpus") {
  const fs::path dir = scratch("one_sentence");
  const auto manifest = write_manifest(dir, {{"only", 4}});
  // keep just the abnormal sentence
  io::write_text(manifest, std::regex_replace(file_text(manifest), std::regex(" lungs clear\\."), ""));
  ConfigMap map;
  map.set("manifest", manifest.string());
  map.set("out", (dir / "out").string());
  map.set("d2", "4");
  map.set("clusters", "5");
  const RunConfig run = RunConfig::from(map);
  std::ostringstream log;
  const auto summary = cmd_cluster(run, log);
  CHECK(summary.abnormal_sentences == 1);
  CHECK(summary.groups == 1);
}

TEST_CASE("train, retrieve, eval") {
  const auto corpus = make_synthetic(small_synthetic());
  const fs::path dir = scratch("end_to_end");
  write_synthetic(corpus, dir);
  std::ostringstream log;

  SUBCASE("zero epochs saves the initial weights") {
    const RunConfig run = run_config(dir, {{"epochs", "0"}});
    cmd_cluster(run, log);
    cmd_train(run, log);
    const auto saved = model::load_checkpoint(run.checkpoint);
    CHECK(saved.parameters() ==
          model::CvseModel::initialize(saved.dims(), {}, num::derive_seed(run.seed, 0x696e)).parameters());
  }

  SUBCASE("full run") {
    const RunConfig run = run_config(dir, {{"epochs", "6"}});
    cmd_cluster(run, log);
    const auto train = cmd_train(run, log);
    REQUIRE(train.losses.size() == 6);
    CHECK(train.losses[4] < train.losses[0]);
    const auto lines = read_lines(run.out / "train_log.jsonl");
    CHECK(lines.front()["k"] == 3);
    CHECK(lines.size() == 6 + 2);

    // the best checkpoint reproduces the logged dev recall
    const Dataset data = ingest(run.manifest, run.d2);
    const auto groups = read_groups(run.groups);
    const auto embedder = text::make_embedder(run.embedder, run.d1, run.embedder_base);
    const auto candidates = build_candidates(data, groups, *embedder);
    const auto model = model::load_checkpoint(run.checkpoint, {run.margin, run.negatives});
    const auto dev = build_studies(data, Split::kDev, groups, *embedder);
    std::vector<model::Study> dev_nonempty;
    for (const auto& s : dev) if (!s.findings.empty()) dev_nonempty.push_back(s);
    CHECK(model::dev_recall(model, dev_nonempty, candidates, run.k) == doctest::Approx(train.best_dev_recall).epsilon(1e-12));

    CHECK(cmd_retrieve(run, Split::kTest, log) == 10);
    const auto preds = read_lines(run.predictions);
    REQUIRE(preds.size() == 10);
    const auto test = build_studies(data, Split::kTest, groups, *embedder);
    std::vector<std::vector<std::uint32_t>> retrieved, gold;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const auto& ranked = preds[i]["ranked"];
      CHECK(ranked.size() == 3);
      for (std::size_t r = 1; r < ranked.size(); ++r) CHECK(ranked[r - 1]["score"] >= ranked[r]["score"]);
      // file scores equal direct library calls
      CHECK(preds[i]["study_id"] == test[i].id);
      const auto direct = model::retrieve(model, test[i], candidates, 3, false);
      std::vector<std::uint32_t> ids;
      for (std::size_t r = 0; r < 3; ++r) {
        CHECK(ranked[r]["group_id"].get<std::uint32_t>() == direct.items[r].group_id);
        CHECK(ranked[r]["score"].get<double>() == direct.items[r].score);
        ids.push_back(direct.items[r].group_id);
      }
      retrieved.push_back(ids);
      std::vector<std::uint32_t> g;
      for (const auto& f : test[i].findings) g.push_back(f.group_id);
      gold.push_back(g);
    }
    const auto report = cmd_eval(run, log);
    CHECK(report["recall_at_k"]["value"].get<double>() == doctest::Approx(eval::recall_at_k(retrieved, gold, 3)).epsilon(1e-15));
    CHECK(json::parse(file_text(run.out / "metrics.json"))["recall_at_k"]["k"] == 3);

    const RunConfig k1 = run_config(dir, {{"k", "1"}, {"epochs", "6"}});
    cmd_retrieve(k1, Split::kTest, log);
    for (const auto& p : read_lines(k1.predictions)) CHECK(p["ranked"].size() == 1);
  }
}

TEST_CASE("evaluate_texts") {
  EvalInput same;
  same.study_ids = {"a", "b", "c", "d"};
  same.predicted = same.gold = {{"mild cardiomegaly.", "small left pleural effusion."},
                                {"right lower lobe opacity."},
                                {"no pneumothorax."},
                                {"pacemaker wires in place."}};
  same.predicted_groups = same.gold_groups = {{1, 2}, {3}, {4}, {5}};
  const auto report = evaluate_texts(same, eval::KeywordTable::builtin(), 1);
  CHECK(report["clinical"]["macro"]["accuracy"] == 1.0);
  CHECK(report["nlg"]["bleu_1"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report["nlg"]["bleu_4"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report["studies"] == 4);

  EvalInput empty = same;
  for (auto& p : empty.predicted) p.clear();
  const auto blank = evaluate_texts(empty, eval::KeywordTable::builtin(), 1);
  const auto& nf = blank["clinical"]["per_disease"]["No Finding"];
  // every empty prediction is No Finding; only study "c" is No Finding in gold
  CHECK(nf["tp"] == 1);
  CHECK(nf["fp"] == 3);
  CHECK(blank["nlg"]["bleu_1"] == 0.0);
  CHECK(blank["clinical"]["per_disease"]["Cardiomegaly"]["recall"] == 0.0);
  CHECK(blank["clinical"]["per_disease"]["Cardiomegaly"]["precision"] == 0.0);

  EvalInput no_gold = same;
  for (auto& g : no_gold.gold_groups) g.clear();
  CHECK(evaluate_texts(no_gold, eval::KeywordTable::builtin(), 1)["recall_at_k"]["value"].is_null());
}

TEST_CASE("eval names studies missing from gold") {
  const fs::path dir = scratch("eval_missing");
  io::write_text(dir / "gold.jsonl", R"({"study_id":"a","split":"test","sentence_ids":[],"sentences":[],"group_ids":[]})" "\n");
  io::write_text(dir / "pred.jsonl", R"({"study_id":"zz-unknown","ranked":[]})" "\n");
  ConfigMap map;
  map.set("gold", (dir / "gold.jsonl").string());
  map.set("predictions", (dir / "pred.jsonl").string());
  map.set("out", dir.string());
  std::ostringstream log;
  CHECK(message_of([&] { cmd_eval(RunConfig::from(map), log); }).find("zz-unknown") != std::string::npos);
}

TEST_CASE("attention export") {
  num::Matrix one(1, 1);
  one(0, 0) = 1.0;
  CHECK(attention_csv(one) == "1.0\n");
  num::Matrix grid{{0.25, 0.5}, {0.125, 0.125}};
  CHECK(attention_csv(grid) == "0.25,0.5\n0.125,0.125\n");

  auto c = small_synthetic();
  const auto corpus = make_synthetic(c);
  const fs::path dir = scratch("attention");
  write_synthetic(corpus, dir);
  const RunConfig run = run_config(dir, {{"epochs", "1"}});
  std::ostringstream log;
  cmd_cluster(run, log);
  cmd_train(run, log);
  const Dataset data = ingest(run.manifest, run.d2);
  const auto& study = data.study("test-0000");
  const auto [frontal, lateral] = cmd_export_attention(run, "test-0000", study.sentences[0].id, log);
  for (const auto& path : {frontal, lateral}) {
    const std::string csv = file_text(path);
    std::size_t rows = 0;
    double total = 0.0;
    std::istringstream in(csv);
    for (std::string line; std::getline(in, line); ++rows) {
      std::istringstream cells(line);
      std::size_t cols = 0;
      for (std::string cell; std::getline(cells, cell, ','); ++cols) total += std::stod(cell);
      CHECK(cols == c.width);
    }
    CHECK(rows == c.height);
    CHECK(std::abs(total - 1.0) < 1e-6);
  }
  CHECK_THROWS_AS(cmd_export_attention(run, "no-such-study", 0, log), LookupError);
  CHECK_THROWS_AS(cmd_export_attention(run, "test-0000", 1u << 30, log), LookupError);
}

TEST_CASE("pipeline runs are byte-identical") {
  const auto corpus = make_synthetic(small_synthetic());
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  write_synthetic(corpus, a);
  write_synthetic(corpus, b);
  const fs::path oa = full_run(a), ob = full_run(b);
  for (const char* f : {"groups.jsonl", "gold.jsonl", "checkpoint.cvse", "predictions.jsonl", "metrics.json",
                        "train_log.jsonl"}) {
    CAPTURE(f);
    CHECK(io::read_file(oa / f) == io::read_file(ob / f));
  }
}

TEST_CASE("command-line exit codes") {
  const fs::path dir = scratch("cli");
  CHECK(run_cli("") == 1);
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("cluster --no-such-flag 1") == 1);
  CHECK(run_cli("gen-synthetic --concepts 1 --out " + dir.string()) == 1);
  CHECK(run_cli("cluster --manifest " + (dir / "absent.jsonl").string()) == 1);
  CHECK(run_cli("gen-synthetic --concepts 3 --train_studies 12 --dev_studies 4 --test_studies 4 --out " +
                (dir / "syn").string()) == 0);
  const std::string cfg = "--config " + (dir / "syn" / "run.cfg").string() + " --out " + (dir / "out").string();
  CHECK(run_cli("cluster " + cfg) == 0);
  CHECK(run_cli("train " + cfg + " --epochs 1 --d 8") == 0);
  CHECK(run_cli("retrieve " + cfg + " --d 8") == 0);
  CHECK(run_cli("eval " + cfg) == 0);
  CHECK(fs::exists(dir / "out" / "metrics.json"));
  CHECK(run_cli("export-attention " + cfg + " --study nobody --sentence 0") == 1);
  CHECK(run_cli("export-attention " + cfg + " --study test-0000") == 1);
  // An unreadable checkpoint is a data error; a corrupted float stream is not reachable from the CLI.
  io::write_text(dir / "out" / "checkpoint.cvse", "garbage");
  CHECK(run_cli("retrieve " + cfg) == 1);
}
