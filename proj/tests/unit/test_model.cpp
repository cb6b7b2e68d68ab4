#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "cvse/errors.hpp"
#include "cvse/model/checkpoint.hpp"
#include "cvse/model/cvse_model.hpp"
#include "cvse/model/loss.hpp"
#include "cvse/model/retrieval.hpp"
#include "cvse/model/trainer.hpp"
#include "cvse/num/grad_check.hpp"
#include "cvse/num/random.hpp"
#include "doctest.h"

using namespace cvse;
using namespace cvse::model;
using num::Matrix;
using num::Vector;

namespace {

Vector random_vector(num::Rng& rng, std::size_t n, double scale = 1.0) {
  Vector v(n);
  for (double& x : v.span()) x = scale * rng.uniform(-1.0, 1.0);
  return v;
}

FeatureMap random_map(num::Rng& rng, std::size_t w, std::size_t h, std::size_t c) {
  std::vector<double> values(w * h * c);
  for (double& x : values) x = rng.uniform(-1.0, 1.0);
  return FeatureMap(w, h, c, std::move(values));
}

FeatureMap constant_map(std::size_t w, std::size_t h, const Vector& region) {
  std::vector<double> values;
  for (std::size_t j = 0; j < w * h; ++j) values.insert(values.end(), region.values().begin(), region.values().end());
  return FeatureMap(w, h, region.dim(), std::move(values));
}

FeatureMap map_of(std::size_t w, std::size_t h, const std::vector<Vector>& regions) {
  std::vector<double> values;
  for (const auto& r : regions) values.insert(values.end(), r.values().begin(), r.values().end());
  return FeatureMap(w, h, regions.front().dim(), std::move(values));
}

// d1 = d2 = d = n with identity projections and zero biases.
CvseModel identity_model(std::size_t n, double margin = 0.2) {
  return CvseModel({n, n, n, n}, {margin, 8},
                   {Matrix::identity(n), Matrix(n, 1), Matrix::identity(n), Matrix(n, 1), Matrix(n, 2 * n),
                    Matrix(n, 1), Matrix(n, 1)});
}

// alpha-hat_j = v_a . (W_a [m_j; v] + b_a), evaluated literally.
Vector direct_attention(const CvseModel& m, const Matrix& joint_regions, const Vector& joint_text) {
  const Matrix& wa = m.param(Param::kAttentionWeight);
  const Matrix& ba = m.param(Param::kAttentionBias);
  const Matrix& va = m.param(Param::kAttentionVector);
  const std::size_t d = joint_text.dim();
  std::vector<double> logits;
  for (std::size_t j = 0; j < joint_regions.rows(); ++j) {
    double logit = 0.0;
    for (std::size_t r = 0; r < wa.rows(); ++r) {
      double hidden = ba(r, 0);
      for (std::size_t c = 0; c < d; ++c) hidden += wa(r, c) * joint_regions(j, c);
      for (std::size_t c = 0; c < d; ++c) hidden += wa(r, d + c) * joint_text[c];
      logit += va(r, 0) * hidden;
    }
    logits.push_back(logit);
  }
  double mx = *std::max_element(logits.begin(), logits.end()), z = 0.0;
  for (double& l : logits) z += (l = std::exp(l - mx));
  for (double& l : logits) l /= z;
  return Vector(logits);
}

double direct_similarity(const CvseModel& m, const Vector& sentence, const FeatureMap& map) {
  const Vector v = m.embed_text(sentence);
  const Matrix regions = m.embed_regions(map);
  const Vector alpha = direct_attention(m, regions, v);
  double d = 0.0;
  for (std::size_t j = 0; j < regions.rows(); ++j) {
    double dist = 0.0;
    for (std::size_t c = 0; c < v.dim(); ++c) dist += (regions(j, c) - v[c]) * (regions(j, c) - v[c]);
    d -= alpha[j] * dist;
  }
  return d;
}

// Every hinge term computed independently from pair similarities.
double brute_force_loss(const CvseModel& m, const std::vector<Study>& studies, const std::vector<TripletItem>& batch) {
  double total = 0.0;
  for (const auto& item : batch) {
    const Study& s = studies[item.positive.study];
    const Vector& a = s.findings[item.positive.finding].embedding;
    const double pos = direct_similarity(m, a, s.frontal) / 2 + direct_similarity(m, a, s.lateral) / 2;
    for (const auto& neg : item.negative_findings) {
      const Vector& an = studies[neg.study].findings[neg.finding].embedding;
      const double sn = direct_similarity(m, an, s.frontal) / 2 + direct_similarity(m, an, s.lateral) / 2;
      total += std::max(0.0, sn - pos + m.hyper().margin);
    }
    for (std::size_t ns : item.negative_studies) {
      const double sn = direct_similarity(m, a, studies[ns].frontal) / 2 + direct_similarity(m, a, studies[ns].lateral) / 2;
      total += std::max(0.0, sn - pos + m.hyper().margin);
    }
  }
  return total / static_cast<double>(batch.size());
}

// Random studies over `groups` finding groups; group g has a fixed text vector.
std::vector<Study> random_studies(num::Rng& rng, std::size_t count, std::size_t groups, const CvseDims& dims,
                                  std::size_t w = 2, std::size_t h = 2) {
  std::vector<Vector> group_vectors;
  for (std::size_t g = 0; g < groups; ++g) group_vectors.push_back(random_vector(rng, dims.text_dim));
  std::vector<Study> studies;
  std::uint64_t next_id = 0;
  for (std::size_t i = 0; i < count; ++i) {
    Study s{"s" + std::to_string(i), random_map(rng, w, h, dims.region_dim), random_map(rng, w, h, dims.region_dim), {}};
    const std::size_t n = 1 + rng.below(2);
    std::set<std::uint32_t> used;
    while (used.size() < n) used.insert(static_cast<std::uint32_t>(rng.below(groups)));
    for (std::uint32_t g : used) s.findings.push_back({next_id++, g, group_vectors[g]});
    studies.push_back(std::move(s));
  }
  return studies;
}

const CvseDims kToyDims{6, 5, 4, 0};

}  // namespace

TEST_CASE("embed_text") {
  num::Rng rng(1);
  const CvseModel m = CvseModel::initialize(kToyDims, {}, 7);
  for (int i = 0; i < 50; ++i) {
    CHECK(std::abs(num::l2_norm(m.embed_text(random_vector(rng, 6)).span()) - 1.0) < 1e-6);
  }
  SUBCASE("scale invariance with zero bias") {
    CvseModel z = m;
    z.param(Param::kTextBias) = Matrix(4, 1);
    const Vector v = random_vector(rng, 6);
    Vector v2 = v;
    for (double& x : v2.span()) x *= 2.0;
    const Vector a = z.embed_text(v), b = z.embed_text(v2);
    for (std::size_t i = 0; i < a.dim(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  }
  SUBCASE("hand-computed toy") {
    CvseModel t = identity_model(2);
    t.param(Param::kTextWeight) = Matrix{{1, 2}, {3, 4}};
    const Vector out = t.embed_text({1, 0});
    CHECK(out[0] == doctest::Approx(1 / std::sqrt(10.0)));
    CHECK(out[1] == doctest::Approx(3 / std::sqrt(10.0)));
  }
  CHECK_THROWS_AS(m.embed_text(Vector(5)), ShapeError);
}

TEST_CASE("embed_regions") {
  num::Rng rng(2);
  const CvseModel m = CvseModel::initialize(kToyDims, {}, 8);
  const Matrix single = m.embed_regions(random_map(rng, 1, 1, 5));
  CHECK(single.rows() == 1);
  CHECK(std::abs(num::l2_norm(single.row(0)) - 1.0) < 1e-6);

  const Matrix same = m.embed_regions(constant_map(3, 2, random_vector(rng, 5)));
  for (std::size_t j = 1; j < same.rows(); ++j) CHECK(std::equal(same.row(0).begin(), same.row(0).end(), same.row(j).begin()));

  CvseModel t = identity_model(2);
  t.param(Param::kRegionWeight) = Matrix{{2, 0}, {0, 1}};
  t.param(Param::kRegionBias) = Matrix{{1}, {0}};
  const Matrix out = t.embed_regions(map_of(2, 1, {{1, 3}, {0, 0}}));
  // [2*1+1, 3] / 3*sqrt(2) and [1, 0].
  CHECK(out(0, 0) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(out(0, 1) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(out(1, 0) == doctest::Approx(1.0));
  CHECK(out(1, 1) == doctest::Approx(0.0));
  CHECK_THROWS_AS(m.embed_regions(random_map(rng, 2, 2, 4)), ShapeError);
}

TEST_CASE("attention") {
  num::Rng rng(3);
  const CvseModel m = CvseModel::initialize(kToyDims, {}, 9);
  const Vector v = m.embed_text(random_vector(rng, 6));
  CHECK(m.attention(m.embed_regions(random_map(rng, 1, 1, 5)), v) == Vector{1.0});

  const Vector uniform = m.attention(m.embed_regions(constant_map(2, 3, random_vector(rng, 5))), v);
  for (std::size_t j = 0; j < uniform.dim(); ++j) CHECK(uniform[j] == doctest::Approx(1.0 / 6).epsilon(1e-12));

  SUBCASE("two-region toy") {
    CvseModel t = identity_model(2);
    t.param(Param::kAttentionWeight) = Matrix{{1, 0, 0.5, 0}, {0, 2, 0, 1}};
    t.param(Param::kAttentionBias) = Matrix{{0.1}, {-0.2}};
    t.param(Param::kAttentionVector) = Matrix{{1}, {1}};
    // logits: [1.3 + 0.1 + 0.8 - 0.2, 0.4 + 2.8 - 0.2] = [2, 3]
    const Vector a = t.attention(Matrix{{1, 0}, {0, 1}}, {0.6, 0.8});
    const double e = std::exp(1.0);
    CHECK(a[0] == doctest::Approx(1 / (1 + e)).epsilon(1e-12));
    CHECK(a[1] == doctest::Approx(e / (1 + e)).epsilon(1e-12));
    // d = -(a0 * 0.8 + a1 * 0.4)
    const double d = t.similarity({0.6, 0.8}, map_of(2, 1, {{1, 0}, {0, 1}}));
    CHECK(d == doctest::Approx(-(0.8 / (1 + e) + 0.4 * e / (1 + e))).epsilon(1e-12));
  }

  SUBCASE("matches the literal logit formula") {
    for (int trial = 0; trial < 200; ++trial) {
      const CvseModel r = CvseModel::initialize({3, 4, 5, 1 + rng.below(7)}, {}, rng.next_u64());
      const Matrix regions = r.embed_regions(random_map(rng, 1 + rng.below(3), 1 + rng.below(3), 4));
      const Vector text = r.embed_text(random_vector(rng, 3));
      const Vector fast = r.attention(regions, text), literal = direct_attention(r, regions, text);
      double total = 0.0;
      for (std::size_t j = 0; j < fast.dim(); ++j) {
        CHECK(std::abs(fast[j] - literal[j]) < 1e-12);
        total += fast[j];
      }
      CHECK(std::abs(total - 1.0) < 1e-9);
    }
  }
  CHECK_THROWS_AS(m.attention(Matrix(0, 4), v), ShapeError);
}

TEST_CASE("similarity") {
  num::Rng rng(4);
  SUBCASE("regions equal to the text vector") {
    const CvseModel t = identity_model(3);
    const Vector a{0.3, -0.1, 0.7};
    CHECK(t.similarity(a, constant_map(2, 2, a)) == 0.0);
  }
  SUBCASE("bounded by the unit sphere diameter") {
    for (int trial = 0; trial < 200; ++trial) {
      const CvseModel m = CvseModel::initialize(kToyDims, {}, rng.next_u64());
      const double d = m.similarity(random_vector(rng, 6, 3.0), random_map(rng, 2, 2, 5));
      CHECK(d <= 0.0);
      CHECK(d >= -4.0);
    }
  }
  SUBCASE("matches the literal formula") {
    for (int trial = 0; trial < 50; ++trial) {
      const CvseModel m = CvseModel::initialize(kToyDims, {}, rng.next_u64());
      const Vector a = random_vector(rng, 6);
      const FeatureMap f = random_map(rng, 3, 2, 5);
      CHECK(m.similarity(a, f) == doctest::Approx(direct_similarity(m, a, f)).epsilon(1e-12));
    }
  }
}

TEST_CASE("pair_similarity") {
  num::Rng rng(5);
  const CvseModel m = CvseModel::initialize(kToyDims, {}, 10);
  const Vector a = random_vector(rng, 6);
  const FeatureMap f = random_map(rng, 2, 2, 5), l = random_map(rng, 2, 2, 5);
  const Study same{"s", f, f, {}};
  CHECK(m.pair_similarity(a, same) == doctest::Approx(m.similarity(a, f)).epsilon(1e-14));
  const Study s{"s", f, l, {}}, swapped{"s", l, f, {}};
  CHECK(m.pair_similarity(a, s) == m.pair_similarity(a, swapped));
  CHECK(m.pair_similarity(a, s) == doctest::Approx((m.similarity(a, f) + m.similarity(a, l)) / 2).epsilon(1e-14));
  const Study missing{"broken", f, FeatureMap{}, {}};
  CHECK_THROWS_AS(m.pair_similarity(a, missing), DataError);
}

TEST_CASE("attention_map") {
  num::Rng rng(6);
  const CvseModel m = CvseModel::initialize(kToyDims, {}, 11);
  const Vector a = random_vector(rng, 6);
  const Matrix one = m.attention_map(random_map(rng, 1, 1, 5), a);
  CHECK(one.rows() == 1);
  CHECK(one.cols() == 1);
  CHECK(one(0, 0) == 1.0);

  const Matrix flat = m.attention_map(constant_map(3, 2, random_vector(rng, 5)), a);
  for (double x : flat.values()) CHECK(x == doctest::Approx(1.0 / 6).epsilon(1e-12));

  const FeatureMap f = random_map(rng, 3, 2, 5);
  const Matrix grid = m.attention_map(f, a);
  const Vector alpha = m.attention(m.embed_regions(f), m.embed_text(a));
  CHECK(grid.rows() == 2);
  CHECK(grid.cols() == 3);
  for (std::size_t y = 0; y < 2; ++y)
    for (std::size_t x = 0; x < 3; ++x) CHECK(grid(y, x) == alpha[y * 3 + x]);
}

TEST_CASE("triplet loss fixtures") {
  const CvseModel m = identity_model(2);
  const Vector right{1, 0}, left{-1, 0};
  SUBCASE("inactive hinges give exactly zero") {
    const std::vector<Study> studies{
        {"a", constant_map(1, 1, right), constant_map(1, 1, right), {{0, 0, right}}},
        {"b", constant_map(1, 1, left), constant_map(1, 1, left), {{1, 1, left}}},
    };
    const std::vector<TripletItem> batch{{{0, 0}, {{1, 0}}, {1}}, {{1, 0}, {{0, 0}}, {0}}};
    CHECK(triplet_loss(m, studies, batch) == 0.0);
  }
  SUBCASE("equal scores leave exactly the margin") {
    const Vector tilted{0.5, std::sqrt(3.0) / 2};  // distance 1 from `right`
    const std::vector<Study> studies{
        {"a", constant_map(1, 1, right), constant_map(1, 1, right), {{0, 0, tilted}}},
        {"b", constant_map(1, 1, left), constant_map(1, 1, left), {{1, 1, tilted}}},
    };
    CHECK(m.pair_similarity(tilted, studies[0]) == doctest::Approx(-1.0).epsilon(1e-12));
    const std::vector<TripletItem> batch{{{0, 0}, {{1, 0}}, {}}};
    CHECK(triplet_loss(m, studies, batch) == doctest::Approx(0.2).epsilon(1e-12));
  }
  SUBCASE("empty batch") {
    const std::vector<Study> studies{{"a", constant_map(1, 1, right), constant_map(1, 1, right), {{0, 0, right}}}};
    CHECK_THROWS_AS(triplet_loss(m, studies, std::vector<TripletItem>{}), UsageError);
  }
}

TEST_CASE("triplet loss matches the brute-force hinge sum") {
  num::Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const CvseModel m = CvseModel::initialize(kToyDims, {0.2, 3}, rng.next_u64());
    const auto studies = random_studies(rng, 6, 5, kToyDims);
    NegativeSampler sampler(studies, 3);
    std::vector<TripletItem> batch;
    for (const auto& a : sampler.anchors()) batch.push_back(sampler.sample(a, rng));
    const double loss = triplet_loss(m, studies, batch);
    CHECK(loss >= 0.0);
    CHECK(loss == doctest::Approx(brute_force_loss(m, studies, batch)).epsilon(1e-12));
  }
}

TEST_CASE("negative sampler respects gold groups") {
  num::Rng rng(8);
  const auto studies = random_studies(rng, 12, 6, kToyDims);
  NegativeSampler sampler(studies, 4);
  for (int round = 0; round < 20; ++round) {
    for (const auto& anchor : sampler.anchors()) {
      const auto item = sampler.sample(anchor, rng);
      const std::uint32_t group = studies[anchor.study].findings[anchor.finding].group_id;
      std::set<std::uint32_t> anchor_groups;
      for (const auto& f : studies[anchor.study].findings) anchor_groups.insert(f.group_id);
      CHECK(item.negative_findings.size() == 4);
      CHECK(item.negative_studies.size() == 4);
      for (const auto& nf : item.negative_findings) {
        CHECK(anchor_groups.count(studies[nf.study].findings[nf.finding].group_id) == 0);
      }
      for (std::size_t ns : item.negative_studies) {
        for (const auto& f : studies[ns].findings) CHECK(f.group_id != group);
      }
      if (!sampler.fell_back()) {
        std::set<std::size_t> distinct(item.negative_studies.begin(), item.negative_studies.end());
        CHECK(distinct.size() == item.negative_studies.size());
      }
    }
  }
  SUBCASE("small pools fall back to sampling with replacement") {
    const std::vector<Study> two = random_studies(rng, 2, 2, kToyDims);
    std::vector<Study> pool;
    for (const auto& s : two) {
      Study one = s;
      one.findings.resize(1);
      one.findings[0].group_id = static_cast<std::uint32_t>(pool.size());
      pool.push_back(one);
    }
    NegativeSampler small(pool, 8);
    const auto item = small.sample({0, 0}, rng);
    CHECK(small.fell_back());
    CHECK(item.negative_findings.size() == 8);
    for (std::size_t ns : item.negative_studies) CHECK(ns == 1);
  }
}

TEST_CASE("full loss gradient matches finite differences") {
  num::Rng rng(9);
  const CvseModel base = CvseModel::initialize(kToyDims, {0.2, 2}, 12);
  const auto studies = random_studies(rng, 2, 3, kToyDims);
  NegativeSampler sampler(studies, 2);
  std::vector<TripletItem> batch;
  for (const auto& a : sampler.anchors()) batch.push_back(sampler.sample(a, rng));

  num::ScalarGraph graph = [&](num::Tape& tape, std::span<const num::Var> params) {
    CvseGraph g(tape, base, params);
    return triplet_loss(g, studies, batch, base.hyper().margin);
  };
  const std::vector<Matrix> params(base.parameters().begin(), base.parameters().end());
  CHECK(num::evaluate(graph, params) > 0.0);
  const auto report = num::grad_check(graph, params);
  CAPTURE(report.worst_param);
  CAPTURE(report.worst_index);
  CHECK(report.max_relative_error < 1e-4);
}

TEST_CASE("retrieve") {
  num::Rng rng(10);
  const CvseModel m = CvseModel::initialize(kToyDims, {}, 13);
  const Study s{"s", random_map(rng, 2, 2, 5), random_map(rng, 2, 2, 5), {}};
  std::vector<Candidate> pool;
  for (std::uint32_t g = 0; g < 5; ++g) pool.push_back({g, 100 + g, "c" + std::to_string(g), random_vector(rng, 6)});

  std::vector<double> brute;
  for (const auto& c : pool) brute.push_back(m.pair_similarity(c.embedding, s));
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return brute[a] > brute[b]; });

  const auto all = retrieve(m, s, pool, pool.size());
  REQUIRE(all.items.size() == pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    CHECK(all.items[i].group_id == pool[order[i]].group_id);
    CHECK(all.items[i].score == brute[order[i]]);
    if (i > 0) CHECK(all.items[i - 1].score >= all.items[i].score);
    for (const Matrix* grid : {&all.items[i].frontal_attention, &all.items[i].lateral_attention}) {
      CHECK(grid->rows() == 2);
      double total = 0.0;
      for (double x : grid->values()) total += x;
      CHECK(std::abs(total - 1.0) < 1e-6);
    }
  }
  CHECK(retrieve(m, s, pool, 3).items.size() == 3);
  CHECK_THROWS_AS(retrieve(m, s, pool, 0), UsageError);
  CHECK_THROWS_AS(retrieve(m, s, pool, 6), UsageError);
  CHECK_THROWS_AS(retrieve(m, s, std::vector<Candidate>{}, 1), UsageError);

  SUBCASE("a perfectly matching candidate ranks first") {
    const CvseModel t = identity_model(3);
    const Vector target{0.0, 0.6, 0.8};
    const Study exact{"e", constant_map(2, 2, target), constant_map(2, 2, target), {}};
    const std::vector<Candidate> c{{0, 0, "a", {1, 0, 0}}, {1, 1, "b", target}, {2, 2, "c", {0, 1, 0}}};
    const auto r = retrieve(t, exact, c, 1);
    CHECK(r.items[0].group_id == 1);
    CHECK(r.items[0].score == 0.0);
  }
  SUBCASE("ties go to the lower group id") {
    const std::vector<double> scores{-1.0, -0.5, -0.5, -2.0};
    const std::vector<std::uint32_t> ids{3, 9, 4, 1};
    CHECK(top_k(scores, ids, 3) == std::vector<std::size_t>{2, 1, 0});
  }
  SUBCASE("ranking is invariant under increasing transforms") {
    const auto scores = score_candidates(m, s, pool);
    std::vector<std::uint32_t> ids;
    for (const auto& c : pool) ids.push_back(c.group_id);
    std::vector<double> transformed;
    for (double x : scores) transformed.push_back(std::exp(3.0 * x) + 7.0);
    CHECK(top_k(scores, ids, 4) == top_k(transformed, ids, 4));
  }
}

TEST_CASE("training") {
  num::Rng rng(11);
  const CvseDims dims{6, 5, 8, 0};
  const CvseModel init = CvseModel::initialize(dims, {0.2, 3}, 14);
  TrainingData data;
  data.train = random_studies(rng, 16, 4, dims);
  data.dev = random_studies(rng, 4, 4, dims);
  // Same group vectors across splits: reuse train embeddings.
  for (auto& s : data.dev)
    for (auto& f : s.findings)
      for (const auto& t : data.train)
        for (const auto& tf : t.findings)
          if (tf.group_id == f.group_id) f.embedding = tf.embedding;
  for (std::uint32_t g = 0; g < 4; ++g) {
    for (const auto& t : data.train)
      for (const auto& f : t.findings)
        if (f.group_id == g && data.candidates.size() == g) data.candidates.push_back({g, f.sentence_id, "", f.embedding});
  }
  REQUIRE(data.candidates.size() == 4);

  TrainConfig config;
  config.epochs = 0;
  CHECK(train(init, data, config).model == init);

  config.epochs = 3;
  config.batch_size = 4;
  config.seed = 5;
  const auto a = train(init, data, config);
  const auto b = train(init, data, config);
  CHECK(a.model == b.model);
  CHECK(a.log.size() == 3);
  CHECK(a.best_epoch >= 1);
  CHECK(a.best_dev_recall == doctest::Approx(dev_recall(a.model, data.dev, data.candidates, 3)).epsilon(1e-12));
  for (std::size_t i = 0; i < a.log.size(); ++i) CHECK(a.log[i].mean_loss == b.log[i].mean_loss);

  TrainingData empty = data;
  empty.train.clear();
  CHECK_THROWS_AS(train(init, empty, config), UsageError);
}

TEST_CASE("checkpoint round trip") {
  const CvseModel m = CvseModel::initialize({6, 5, 4, 3}, {}, 15);
  const auto bytes = encode_checkpoint(m);
  CHECK(decode_checkpoint(bytes) == m);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "CVSE");

  auto corrupt = bytes;
  corrupt[40] ^= 0x01;
  CHECK_THROWS_AS(decode_checkpoint(corrupt), DataError);
  auto magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(decode_checkpoint(magic), DataError);
  auto trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_AS(decode_checkpoint(trailing), DataError);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  CHECK_THROWS_AS(decode_checkpoint(truncated), DataError);
}

TEST_CASE("model validates parameter shapes") {
  auto params = CvseModel::initialize(kToyDims, {}, 1).parameters();
  params[4] = Matrix(4, 7);
  CHECK_THROWS_AS(CvseModel(kToyDims, {}, params), ShapeError);
  CHECK_THROWS_AS(CvseModel::initialize(kToyDims, {0.0, 8}, 1), UsageError);
  CHECK_THROWS_AS(CvseModel::initialize(kToyDims, {0.2, 0}, 1), UsageError);
}
