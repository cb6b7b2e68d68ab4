#include "cvse/pipeline/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "cvse/errors.hpp"
#include "cvse/num/random.hpp"
#include "cvse/pipeline/binary_io.hpp"
#include "cvse/pipeline/feature_io.hpp"
#include "cvse/text/embedder.hpp"
#include "json.hpp"

namespace cvse::pipeline {

namespace {

// Phrases hit the built-in disease keywords and carry no mutex term.
const std::vector<std::string>& concept_phrases() {
  static const std::vector<std::string> phrases{
      "pleural effusion",  "cardiomegaly",       "pneumothorax", "lung opacity",
      "pulmonary edema",   "consolidation",      "atelectasis",  "rib fracture",
      "pneumonia",         "lung nodule",        "pleural thickening", "endotracheal tube",
      "prominent cardiomediastinal silhouette", "lung volume loss",
  };
  return phrases;
}

const std::vector<std::vector<std::string>>& term_sets() {
  static const std::vector<std::vector<std::string>> sets{
      {"right", "left", "bilateral"},  {"small", "large", ""},   {"low", "high", ""},
      {"increased", "decreased", ""}, {"improved", "worsened", ""}, {"mild", "severe", ""},
  };
  return sets;
}

// Abnormal frames and normal sentences share no tokens.
const char* const kFrames[] = {"{} noted.", "{} again seen.", "findings of {}."};
const char* const kNormal[] = {
    "heart size normal.", "lungs are well expanded.", "no acute cardiopulmonary process.",
    "osseous structures unremarkable.", "mediastinal contours stable.", "trachea midline.",
};
constexpr std::size_t kNormalCount = std::size(kNormal);

std::string realize(const char* frame, const std::string& modifier, const std::string& phrase) {
  std::string filler = modifier.empty() ? phrase : modifier + " " + phrase;
  std::string out(frame);
  out.replace(out.find("{}"), 2, filler);
  return out;
}

num::Vector gaussian(num::Rng& rng, std::size_t dim, double scale) {
  num::Vector v(dim);
  for (std::size_t i = 0; i < dim; ++i) v[i] = scale * rng.normal();
  return v;
}

std::vector<std::size_t> pick(num::Rng& rng, std::size_t n, std::size_t count) {
  std::vector<std::size_t> items(n);
  for (std::size_t i = 0; i < n; ++i) items[i] = i;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(items[i], items[j]);
  }
  items.resize(count);
  return items;
}

std::vector<PlantedBlock> place_blocks(num::Rng& rng, const SyntheticConfig& c,
                                       const std::vector<std::size_t>& concepts) {
  std::vector<bool> used(c.width * c.height, false);
  auto fits = [&](std::size_t x, std::size_t y) {
    for (std::size_t dy = 0; dy < c.block; ++dy)
      for (std::size_t dx = 0; dx < c.block; ++dx)
        if (used[(y + dy) * c.width + x + dx]) return false;
    return true;
  };
  const std::size_t nx = c.width - c.block + 1, ny = c.height - c.block + 1;
  std::vector<PlantedBlock> blocks;
  for (std::size_t concept_id : concepts) {
    std::size_t x = 0, y = 0;
    bool placed = false;
    for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
      x = static_cast<std::size_t>(rng.below(nx));
      y = static_cast<std::size_t>(rng.below(ny));
      placed = fits(x, y);
    }
    for (std::size_t p = 0; p < nx * ny && !placed; ++p) {
      x = p % nx;
      y = p / nx;
      placed = fits(x, y);
    }
    if (!placed) throw UsageError("synthetic: cannot place non-overlapping blocks; enlarge the grid");
    for (std::size_t dy = 0; dy < c.block; ++dy)
      for (std::size_t dx = 0; dx < c.block; ++dx) used[(y + dy) * c.width + x + dx] = true;
    blocks.push_back({concept_id, x, y});
  }
  return blocks;
}

model::FeatureMap render_view(num::Rng& rng, const SyntheticConfig& c, const std::vector<PlantedBlock>& blocks,
                              const std::vector<num::Vector>& prototypes) {
  std::vector<int> owner(c.width * c.height, -1);
  for (const auto& b : blocks)
    for (std::size_t dy = 0; dy < c.block; ++dy)
      for (std::size_t dx = 0; dx < c.block; ++dx)
        owner[(b.y + dy) * c.width + b.x + dx] = static_cast<int>(b.concept_id);
  std::vector<double> values(c.width * c.height * c.d2);
  for (std::size_t j = 0; j < owner.size(); ++j) {
    for (std::size_t ch = 0; ch < c.d2; ++ch) {
      // Noise is drawn even at sigma 0 so the structure does not depend on sigma.
      double v = c.noise * rng.normal();
      if (owner[j] >= 0) v += prototypes[static_cast<std::size_t>(owner[j])][ch];
      values[j * c.d2 + ch] = static_cast<float>(v);
    }
  }
  return model::FeatureMap(c.width, c.height, c.d2, std::move(values));
}

}  // namespace

SyntheticConfig SyntheticConfig::from(const ConfigMap& map) {
  map.check_known_keys();
  SyntheticConfig c;
  c.concepts = map.get_count("concepts", c.concepts);
  c.train_studies = map.get_count("train_studies", c.train_studies);
  c.dev_studies = map.get_count("dev_studies", c.dev_studies);
  c.test_studies = map.get_count("test_studies", c.test_studies);
  c.width = map.get_count("width", c.width);
  c.height = map.get_count("height", c.height);
  c.d2 = map.get_count("d2", c.d2);
  c.d1 = map.get_count("d1", c.d1);
  c.noise = map.get_real("noise", c.noise);
  c.variants = map.get_count("variants", c.variants);
  c.block = map.get_count("block", c.block);
  c.max_findings = map.get_count("max_findings", c.max_findings);
  c.seed = map.get_u64("seed", c.seed);
  c.validate();
  return c;
}

void SyntheticConfig::validate() const {
  if (concepts < 2) throw UsageError("synthetic: concepts must be at least 2");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw UsageError("synthetic: noise must be finite and >= 0");
  if (variants < 1 || variants > 3) throw UsageError("synthetic: variants must be 1, 2 or 3");
  if (width < 1 || height < 1 || d1 < 1 || d2 < 1) throw UsageError("synthetic: dimensions must be at least 1");
  if (block < 1 || block > std::min(width, height)) throw UsageError("synthetic: block must fit in the grid");
  if (max_findings < 1 || max_findings > 3 || max_findings > concepts)
    throw UsageError("synthetic: max_findings must be 1-3 and at most the concept count");
  if (max_findings * block * block > width * height)
    throw UsageError("synthetic: grid too small for max_findings blocks");
  if (train_studies + dev_studies + test_studies == 0) throw UsageError("synthetic: no studies requested");
}

std::string SyntheticStudy::report() const {
  std::string out;
  for (const auto& s : sentences) {
    if (!out.empty()) out += ' ';
    out += s;
  }
  return out;
}

std::vector<std::size_t> SyntheticStudy::abnormal_positions() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < concept_ids.size(); ++i)
    if (concept_ids[i] >= 0) out.push_back(i);
  return out;
}

std::size_t SyntheticCorpus::expected_groups() const {
  std::set<std::pair<int, std::size_t>> seen;
  for (const auto& s : studies)
    for (std::size_t i = 0; i < s.concept_ids.size(); ++i)
      if (s.concept_ids[i] >= 0) seen.emplace(s.concept_ids[i], s.variant_ids[i]);
  return seen.size();
}

SyntheticCorpus make_synthetic(const SyntheticConfig& config) {
  config.validate();
  SyntheticCorpus corpus;
  corpus.config = config;
  num::Rng rng(config.seed);

  for (std::size_t c = 0; c < config.concepts; ++c) {
    num::Vector visual = gaussian(rng, config.d2, 1.0);
    for (std::size_t i = 0; i < visual.dim(); ++i) visual[i] = static_cast<float>(visual[i]);
    corpus.visual_prototypes.push_back(std::move(visual));
    corpus.text_prototypes.push_back(gaussian(rng, config.d1, 1.0));
    const auto& phrases = concept_phrases();
    corpus.phrases.push_back(c < phrases.size() ? phrases[c] : "finding type " + std::to_string(c));
    const auto& terms = term_sets()[c % term_sets().size()];
    corpus.modifiers.emplace_back(terms.begin(), terms.begin() + static_cast<std::ptrdiff_t>(config.variants));
  }
  const num::Vector normal_prototype = gaussian(rng, config.d1, 1.0);

  const std::pair<Split, std::size_t> splits[] = {
      {Split::kTrain, config.train_studies}, {Split::kDev, config.dev_studies}, {Split::kTest, config.test_studies}};
  for (const auto& [split, count] : splits) {
    for (std::size_t i = 0; i < count; ++i) {
      SyntheticStudy s;
      char id[32];
      std::snprintf(id, sizeof id, "%s-%04zu", split_name(split), i);
      s.id = id;
      s.split = split;

      const std::size_t n = 1 + static_cast<std::size_t>(rng.below(config.max_findings));
      const auto concepts = pick(rng, config.concepts, n);
      struct Item {
        int concept_id;
        std::size_t variant;
        std::string text;
      };
      std::vector<Item> items;
      for (std::size_t c : concepts) {
        const std::size_t variant = static_cast<std::size_t>(rng.below(config.variants));
        const char* frame = kFrames[rng.below(std::size(kFrames))];
        items.push_back({static_cast<int>(c), variant, realize(frame, corpus.modifiers[c][variant], corpus.phrases[c])});
      }
      const std::size_t normals = 1 + static_cast<std::size_t>(rng.below(2));
      for (std::size_t k : pick(rng, kNormalCount, normals)) items.push_back({-1, 0, kNormal[k]});
      rng.shuffle(items);

      s.frontal_blocks = place_blocks(rng, config, concepts);
      s.frontal = render_view(rng, config, s.frontal_blocks, corpus.visual_prototypes);
      s.lateral_blocks = place_blocks(rng, config, concepts);
      s.lateral = render_view(rng, config, s.lateral_blocks, corpus.visual_prototypes);

      for (const auto& item : items) {
        s.sentences.push_back(item.text);
        s.concept_ids.push_back(item.concept_id);
        s.variant_ids.push_back(item.variant);
        const num::Vector& proto = item.concept_id >= 0 ? corpus.text_prototypes[static_cast<std::size_t>(item.concept_id)]
                                                        : normal_prototype;
        num::Vector e = gaussian(rng, config.d1, config.noise);
        for (std::size_t d = 0; d < e.dim(); ++d) e[d] += proto[d];
        s.embeddings.push_back(std::move(e));
      }
      corpus.studies.push_back(std::move(s));
    }
  }
  return corpus;
}

void write_synthetic(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  using nlohmann::ordered_json;
  fs::create_directories(dir / "features");

  std::string manifest;
  std::map<std::string, num::Vector> vectors;
  ordered_json truth_sentences = ordered_json::object();
  ordered_json truth_studies = ordered_json::object();
  for (const auto& s : corpus.studies) {
    const std::string frontal = "features/" + s.id + "_frontal.cvfm";
    const std::string lateral = "features/" + s.id + "_lateral.cvfm";
    write_feature_map(dir / frontal, s.frontal);
    write_feature_map(dir / lateral, s.lateral);

    ordered_json rec;
    rec["study_id"] = s.id;
    rec["split"] = split_name(s.split);
    rec["report"] = s.report();
    if (s.split == Split::kTrain) rec["abnormal"] = s.abnormal_positions();
    rec["frontal"] = frontal;
    rec["lateral"] = lateral;
    manifest += rec.dump() + "\n";

    for (std::size_t i = 0; i < s.sentences.size(); ++i) {
      const std::string key = s.id + "#" + std::to_string(i);
      vectors[key] = s.embeddings[i];
      if (s.concept_ids[i] >= 0) {
        truth_sentences[key] = {{"concept", s.concept_ids[i]}, {"variant", s.variant_ids[i]}};
      }
    }
    auto blocks = [](const std::vector<PlantedBlock>& bs) {
      ordered_json out = ordered_json::array();
      for (const auto& b : bs) out.push_back({{"concept", b.concept_id}, {"x", b.x}, {"y", b.y}});
      return out;
    };
    truth_studies[s.id] = {{"frontal", blocks(s.frontal_blocks)}, {"lateral", blocks(s.lateral_blocks)}};
  }
  io::write_text(dir / "manifest.jsonl", manifest);
  text::write_vector_table(dir / "sentence_vectors.txt", vectors);

  const auto& c = corpus.config;
  ordered_json concepts = ordered_json::array();
  for (std::size_t i = 0; i < corpus.phrases.size(); ++i)
    concepts.push_back({{"phrase", corpus.phrases[i]}, {"modifiers", corpus.modifiers[i]}});
  ordered_json truth = {
      {"seed", c.seed},
      {"block", c.block},
      {"expected_groups", corpus.expected_groups()},
      {"concepts", concepts},
      {"sentences", truth_sentences},
      {"studies", truth_studies},
  };
  io::write_text(dir / "truth.json", truth.dump(1) + "\n");

  std::ostringstream cfg;
  cfg << "# generated synthetic run\n"
      << "manifest = manifest.jsonl\n"
      << "embedder = precomputed:sentence_vectors.txt\n"
      << "d1 = " << c.d1 << "\n"
      << "d2 = " << c.d2 << "\n"
      << "clusters = " << c.concepts << "\n"
      << "seed = " << c.seed << "\n";
  io::write_text(dir / "run.cfg", cfg.str());
}

}  // namespace cvse::pipeline
