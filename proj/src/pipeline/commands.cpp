#include "cvse/pipeline/commands.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "cvse/errors.hpp"
#include "cvse/eval/clinical.hpp"
#include "cvse/eval/nlg.hpp"
#include "cvse/eval/recall.hpp"
#include "cvse/model/checkpoint.hpp"
#include "cvse/model/trainer.hpp"
#include "cvse/num/random.hpp"
#include "cvse/pipeline/binary_io.hpp"
#include "cvse/text/grouping.hpp"
#include "cvse/text/kmeans.hpp"
#include "cvse/text/mutex.hpp"

namespace cvse::pipeline {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Stream tags for derive_seed; each consumer gets its own sequence.
constexpr std::uint64_t kClassifierStream = 0x636c;
constexpr std::uint64_t kKMeansStream = 0x6b6d;
constexpr std::uint64_t kInitStream = 0x696e;

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("file not found: " + path.string());
  std::istringstream in(io::read_text(path));
  std::vector<json> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw DataError(path.filename().string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

template <typename T>
T field(const json& rec, const char* key, const std::string& where) {
  try {
    return rec.at(key).get<T>();
  } catch (const json::exception&) {
    throw DataError(where + ": missing or invalid field '" + key + "'");
  }
}

std::unique_ptr<text::SentenceEmbedder> embedder_for(const RunConfig& config) {
  return text::make_embedder(config.embedder, config.d1, config.embedder_base);
}

eval::KeywordTable keywords_for(const RunConfig& config) {
  return config.keywords.empty() ? eval::KeywordTable::builtin() : eval::KeywordTable::load(config.keywords);
}

model::CvseModel load_model(const RunConfig& config, const Dataset& data) {
  model::CvseModel m = model::load_checkpoint(config.checkpoint, {config.margin, config.negatives});
  if (m.dims().region_dim != data.channels) {
    throw DataError("checkpoint expects d2=" + std::to_string(m.dims().region_dim) + " but the dataset has d2=" +
                    std::to_string(data.channels));
  }
  if (m.dims().text_dim != config.d1) {
    throw DataError("checkpoint expects d1=" + std::to_string(m.dims().text_dim) + " but the configuration says d1=" +
                    std::to_string(config.d1));
  }
  return m;
}

std::string format_real(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, end);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

std::vector<GroupRecord> read_groups(const std::filesystem::path& path) {
  std::vector<GroupRecord> groups;
  for (const json& rec : read_jsonl(path)) {
    const std::string where = path.filename().string() + " group " + std::to_string(groups.size());
    GroupRecord g;
    g.group_id = field<std::uint32_t>(rec, "group_id", where);
    g.cluster_id = field<std::size_t>(rec, "cluster_id", where);
    for (int bit : field<std::vector<int>>(rec, "pattern", where)) g.pattern += bit ? '1' : '0';
    g.members = field<std::vector<std::uint64_t>>(rec, "member_ids", where);
    g.representative_id = field<std::uint64_t>(rec, "representative_id", where);
    g.representative_text = field<std::string>(rec, "representative_text", where);
    if (g.members.empty()) throw DataError(where + ": group without members");
    groups.push_back(std::move(g));
  }
  if (groups.empty()) throw DataError("no groups in " + path.string());
  return groups;
}

std::unordered_map<std::uint64_t, std::uint32_t> group_index(const std::vector<GroupRecord>& groups) {
  std::unordered_map<std::uint64_t, std::uint32_t> index;
  for (const auto& g : groups) {
    for (std::uint64_t id : g.members) {
      if (!index.emplace(id, g.group_id).second) {
        throw DataError("sentence " + std::to_string(id) + " belongs to more than one group");
      }
    }
  }
  return index;
}

std::vector<model::Study> build_studies(const Dataset& data, Split split, const std::vector<GroupRecord>& groups,
                                        const text::SentenceEmbedder& embedder) {
  const auto index = group_index(groups);
  std::vector<model::Study> out;
  for (const auto& rec : data.studies) {
    if (rec.split != split) continue;
    model::Study s{rec.study_id, rec.frontal, rec.lateral, {}};
    for (const auto& sentence : rec.sentences) {
      auto it = index.find(sentence.id);
      if (it == index.end()) continue;
      s.findings.push_back({sentence.id, it->second, embedder.embed(sentence)});
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<model::Candidate> build_candidates(const Dataset& data, const std::vector<GroupRecord>& groups,
                                               const text::SentenceEmbedder& embedder) {
  std::vector<model::Candidate> out;
  for (const auto& g : groups) {
    const text::Sentence& rep = data.sentence(g.representative_id);
    out.push_back({g.group_id, rep.id, rep.text, embedder.embed(rep)});
  }
  return out;
}

ClusterSummary cmd_cluster(const RunConfig& config, std::ostream& log) {
  const Dataset data = ingest(config.manifest, config.d2);
  const auto embedder = embedder_for(config);
  ClusterSummary summary;

  // Annotated reports are taken as labeled; the classifier labels the rest.
  std::vector<text::LabeledText> labeled;
  bool needs_classifier = false;
  for (const auto& s : data.studies) {
    if (!s.abnormal) {
      needs_classifier = needs_classifier || !s.sentences.empty();
      continue;
    }
    for (const auto& sentence : s.sentences) {
      const bool abnormal = std::find(s.abnormal->begin(), s.abnormal->end(), sentence.position) != s.abnormal->end();
      labeled.push_back({sentence.text, abnormal});
    }
  }
  std::optional<text::BowClassifier> classifier;
  if (needs_classifier) {
    text::ClassifierConfig cc;
    cc.seed = num::derive_seed(config.seed, kClassifierStream);
    cc.threshold = config.threshold;
    classifier = text::BowClassifier::train(labeled, cc);
    summary.classifier = text::score_classifier(*classifier, labeled);
    log << "classifier: " << labeled.size() << " labeled sentences, training F1 " << summary.classifier->f1 << "\n";
  }

  std::vector<const text::Sentence*> abnormal;
  std::vector<std::vector<std::uint64_t>> per_study(data.studies.size());
  for (std::size_t i = 0; i < data.studies.size(); ++i) {
    const auto& s = data.studies[i];
    for (const auto& sentence : s.sentences) {
      const bool is_abnormal =
          s.abnormal ? std::find(s.abnormal->begin(), s.abnormal->end(), sentence.position) != s.abnormal->end()
                     : classifier->classify(sentence).abnormal;
      if (!is_abnormal) continue;
      abnormal.push_back(&sentence);
      per_study[i].push_back(sentence.id);
    }
  }
  if (abnormal.empty()) throw DataError("no abnormal sentences found");
  summary.abnormal_sentences = abnormal.size();

  std::vector<num::Vector> embeddings;
  std::vector<text::MutexPattern> patterns;
  std::vector<std::uint64_t> ids;
  for (const auto* s : abnormal) {
    embeddings.push_back(embedder->embed(*s));
    patterns.push_back(text::mutex_pattern(s->tokens));
    ids.push_back(s->id);
  }

  text::KMeansOptions km;
  km.k = std::min(config.clusters, abnormal.size());
  if (km.k < config.clusters) {
    log << "cluster: only " << abnormal.size() << " abnormal sentences, using K=" << km.k << "\n";
  }
  km.seed = num::derive_seed(config.seed, kKMeansStream);
  km.max_iters = config.kmeans_iters;
  km.restarts = config.kmeans_restarts;
  const text::KMeansResult clusters = text::kmeans(embeddings, km);
  std::vector<text::FindingGroup> groups = text::refine_groups(clusters.assignments, patterns, ids);

  std::unordered_map<std::uint64_t, std::size_t> position;
  for (std::size_t i = 0; i < ids.size(); ++i) position[ids[i]] = i;
  std::unordered_map<std::uint64_t, std::uint32_t> group_of;
  std::string groups_out;
  for (auto& g : groups) {
    std::vector<num::Vector> member_embeddings;
    for (std::uint64_t id : g.members) {
      member_embeddings.push_back(embeddings[position.at(id)]);
      group_of[id] = g.group_id;
    }
    g.representative = text::group_representative(g.members, member_embeddings);
    std::vector<int> bits;
    for (std::size_t f = 0; f < text::kMutexFlags; ++f) bits.push_back(g.pattern.test(f) ? 1 : 0);
    ordered_json rec;
    rec["group_id"] = g.group_id;
    rec["cluster_id"] = g.cluster_id;
    rec["pattern"] = bits;
    rec["member_ids"] = g.members;
    rec["representative_id"] = g.representative;
    rec["representative_text"] = abnormal[position.at(g.representative)]->text;
    groups_out += rec.dump() + "\n";
  }
  io::write_text(config.groups, groups_out);

  std::string gold_out;
  for (std::size_t i = 0; i < data.studies.size(); ++i) {
    const auto& s = data.studies[i];
    std::vector<std::string> texts;
    std::set<std::uint32_t> gids;
    for (std::uint64_t id : per_study[i]) {
      texts.push_back(s.sentences[id - s.sentences.front().id].text);
      gids.insert(group_of.at(id));
    }
    ordered_json rec;
    rec["study_id"] = s.study_id;
    rec["split"] = split_name(s.split);
    rec["sentence_ids"] = per_study[i];
    rec["sentences"] = texts;
    rec["group_ids"] = std::vector<std::uint32_t>(gids.begin(), gids.end());
    gold_out += rec.dump() + "\n";
  }
  io::write_text(config.gold, gold_out);

  std::set<std::size_t> used_clusters(clusters.assignments.begin(), clusters.assignments.end());
  summary.clusters = used_clusters.size();
  summary.groups = groups.size();
  log << "cluster: " << summary.abnormal_sentences << " abnormal sentences, " << summary.clusters
      << " clusters before refinement, " << summary.groups << " groups after refinement\n";
  return summary;
}

TrainSummary cmd_train(const RunConfig& config, std::ostream& log) {
  const Dataset data = ingest(config.manifest, config.d2);
  const auto groups = read_groups(config.groups);
  const auto embedder = embedder_for(config);

  model::TrainingData td;
  for (auto& s : build_studies(data, Split::kTrain, groups, *embedder)) {
    if (!s.findings.empty()) td.train.push_back(std::move(s));
  }
  const std::size_t skipped = data.split_counts[0] - td.train.size();
  if (skipped > 0) log << "train: skipping " << skipped << " train studies without grouped findings\n";
  if (td.train.empty()) throw DataError("no train study has a grouped finding");
  td.dev = build_studies(data, Split::kDev, groups, *embedder);
  td.candidates = build_candidates(data, groups, *embedder);

  const model::CvseDims dims{config.d1, data.channels, config.d, config.d_att};
  const model::CvseHyper hyper{config.margin, config.negatives};
  const auto init = model::CvseModel::initialize(dims, hyper, num::derive_seed(config.seed, kInitStream));

  model::TrainConfig tc;
  tc.epochs = config.epochs;
  tc.learning_rate = config.lr;
  tc.batch_size = config.batch_size;
  tc.recall_k = config.k;
  tc.seed = config.seed;

  std::string log_out = ordered_json{{"k", config.k},
                                     {"selection", "dev recall@k"},
                                     {"epochs", config.epochs},
                                     {"seed", config.seed},
                                     {"train_studies", td.train.size()},
                                     {"groups", td.candidates.size()}}
                            .dump() +
                        "\n";
  const auto result = model::train(init, td, tc, [&](const model::EpochLog& e) {
    ordered_json rec{{"epoch", e.epoch}, {"mean_loss", e.mean_loss}, {"dev_recall", e.dev_recall}};
    if (e.negatives_with_replacement) rec["negatives_with_replacement"] = true;
    log_out += rec.dump() + "\n";
    log << "epoch " << e.epoch << ": loss " << e.mean_loss << ", dev recall@" << config.k << " " << e.dev_recall
        << "\n";
  });
  log_out += ordered_json{{"best_epoch", result.best_epoch}, {"best_dev_recall", result.best_dev_recall}}.dump() + "\n";

  model::save_checkpoint(result.model, config.checkpoint);
  io::write_text(config.out / "train_log.jsonl", log_out);

  TrainSummary summary;
  summary.epochs = result.log.size();
  summary.best_epoch = result.best_epoch;
  summary.best_dev_recall = result.best_dev_recall;
  for (const auto& e : result.log) summary.losses.push_back(e.mean_loss);
  return summary;
}

std::size_t cmd_retrieve(const RunConfig& config, Split split, std::ostream& log) {
  const Dataset data = ingest(config.manifest, config.d2);
  const auto groups = read_groups(config.groups);
  const auto embedder = embedder_for(config);
  const model::CvseModel model = load_model(config, data);
  const auto candidates = build_candidates(data, groups, *embedder);
  if (config.k > candidates.size()) {
    throw UsageError("k=" + std::to_string(config.k) + " exceeds the " + std::to_string(candidates.size()) +
                     " candidate groups");
  }

  std::string out;
  std::size_t count = 0;
  for (const auto& rec : data.studies) {
    if (rec.split != split) continue;
    const model::Study study{rec.study_id, rec.frontal, rec.lateral, {}};
    const auto result = model::retrieve(model, study, candidates, config.k, false);
    ordered_json ranked = ordered_json::array();
    for (const auto& item : result.items) {
      const auto it = std::find_if(candidates.begin(), candidates.end(),
                                   [&](const model::Candidate& c) { return c.group_id == item.group_id; });
      ranked.push_back({{"group_id", item.group_id}, {"representative_text", it->text}, {"score", item.score}});
    }
    out += ordered_json{{"study_id", rec.study_id}, {"ranked", ranked}}.dump() + "\n";
    ++count;
  }
  if (count == 0) throw UsageError(std::string("split '") + split_name(split) + "' has no studies");
  io::write_text(config.predictions, out);
  log << "retrieve: " << count << " " << split_name(split) << " studies, top " << config.k << " of "
      << candidates.size() << " groups\n";
  return count;
}

ordered_json evaluate_texts(const EvalInput& input, const eval::KeywordTable& keywords, std::size_t k) {
  const std::size_t n = input.study_ids.size();
  if (n == 0) throw UsageError("eval: no studies");
  std::vector<eval::DiseaseLabels> predicted_labels, gold_labels;
  std::vector<eval::Tokens> candidates, references;
  for (std::size_t i = 0; i < n; ++i) {
    predicted_labels.push_back(eval::label_diseases(input.predicted[i], keywords));
    gold_labels.push_back(eval::label_diseases(input.gold[i], keywords));
    eval::Tokens cand, ref;
    for (const auto& s : input.predicted[i]) {
      auto t = text::tokenize(s);
      cand.insert(cand.end(), t.begin(), t.end());
    }
    for (const auto& s : input.gold[i]) {
      auto t = text::tokenize(s);
      ref.insert(ref.end(), t.begin(), t.end());
    }
    candidates.push_back(std::move(cand));
    references.push_back(std::move(ref));
  }
  const eval::ClinicalReport clinical = eval::clinical_metrics(predicted_labels, gold_labels);

  ordered_json per_disease = ordered_json::object();
  for (std::size_t d = 0; d < eval::kDiseaseCount; ++d) {
    const auto& m = clinical.per_disease[d];
    per_disease[std::string(eval::disease_names()[d])] = {
        {"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall},
        {"tp", m.tp},             {"fp", m.fp},               {"tn", m.tn},         {"fn", m.fn}};
  }

  ordered_json report;
  report["note"] = "BLEU is corpus-level over concatenated study texts; METEOR and ROUGE-L are study means";
  report["studies"] = n;
  report["clinical"] = {{"macro",
                         {{"accuracy", clinical.macro_accuracy},
                          {"precision", clinical.macro_precision},
                          {"recall", clinical.macro_recall}}},
                        {"per_disease", per_disease}};
  report["nlg"] = {{"bleu_1", eval::bleu(candidates, references, 1)},
                   {"bleu_4", eval::bleu(candidates, references, 4)},
                   {"rouge_l", eval::rouge_l_corpus(candidates, references)},
                   {"meteor", eval::meteor_corpus(candidates, references)}};

  const bool any_gold = std::any_of(input.gold_groups.begin(), input.gold_groups.end(),
                                    [](const auto& g) { return !g.empty(); });
  report["recall_at_k"] = {{"k", k},
                           {"value", any_gold ? json(eval::recall_at_k(input.predicted_groups, input.gold_groups, k))
                                              : json(nullptr)}};
  return report;
}

ordered_json cmd_eval(const RunConfig& config, std::ostream& log) {
  std::map<std::string, json> gold;
  for (const json& rec : read_jsonl(config.gold)) {
    gold[field<std::string>(rec, "study_id", config.gold.filename().string())] = rec;
  }
  EvalInput input;
  std::vector<std::string> missing;
  for (const json& rec : read_jsonl(config.predictions)) {
    const std::string where = config.predictions.filename().string();
    const auto id = field<std::string>(rec, "study_id", where);
    auto it = gold.find(id);
    if (it == gold.end()) {
      missing.push_back(id);
      continue;
    }
    std::vector<std::string> texts;
    std::vector<std::uint32_t> gids;
    for (const json& item : field<json>(rec, "ranked", where + " study '" + id + "'")) {
      texts.push_back(field<std::string>(item, "representative_text", where + " study '" + id + "'"));
      gids.push_back(field<std::uint32_t>(item, "group_id", where + " study '" + id + "'"));
    }
    input.study_ids.push_back(id);
    input.predicted.push_back(std::move(texts));
    input.predicted_groups.push_back(std::move(gids));
    input.gold.push_back(field<std::vector<std::string>>(it->second, "sentences", "gold study '" + id + "'"));
    input.gold_groups.push_back(field<std::vector<std::uint32_t>>(it->second, "group_ids", "gold study '" + id + "'"));
  }
  if (!missing.empty()) {
    std::string names;
    for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
    throw DataError("eval: studies missing from the gold file: " + names);
  }
  ordered_json report = evaluate_texts(input, keywords_for(config), config.k);
  io::write_text(config.out / "metrics.json", report.dump(2) + "\n");
  log << "eval: " << input.study_ids.size() << " studies, macro accuracy "
      << report["clinical"]["macro"]["accuracy"].get<double>() << ", BLEU-4 "
      << report["nlg"]["bleu_4"].get<double>() << "\n";
  return report;
}

std::string attention_csv(const num::Matrix& grid) {
  std::string out;
  for (std::size_t r = 0; r < grid.rows(); ++r) {
    for (std::size_t c = 0; c < grid.cols(); ++c) {
      if (c > 0) out += ',';
      out += format_real(grid(r, c));
    }
    out += '\n';
  }
  return out;
}

std::pair<std::filesystem::path, std::filesystem::path> cmd_export_attention(const RunConfig& config,
                                                                             const std::string& study_id,
                                                                             std::uint64_t sentence_id,
                                                                             std::ostream& log) {
  const Dataset data = ingest(config.manifest, config.d2);
  const StudyRecord& study = data.study(study_id);
  const text::Sentence& sentence = data.sentence(sentence_id);
  const auto embedder = embedder_for(config);
  const model::CvseModel model = load_model(config, data);
  const num::Vector v = embedder->embed(sentence);

  const std::string stem = "attention_" + study_id + "_" + std::to_string(sentence_id);
  const auto frontal = config.out / (stem + "_frontal.csv");
  const auto lateral = config.out / (stem + "_lateral.csv");
  io::write_text(frontal, attention_csv(model.attention_map(study.frontal, v)));
  io::write_text(lateral, attention_csv(model.attention_map(study.lateral, v)));
  log << "export-attention: wrote " << frontal.string() << " and " << lateral.string() << "\n";
  return {frontal, lateral};
}

}  // namespace cvse::pipeline
