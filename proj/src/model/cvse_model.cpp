#include "cvse/model/cvse_model.hpp"

#include <cmath>
#include <string>

#include "cvse/errors.hpp"
#include "cvse/num/random.hpp"

namespace cvse::model {

using num::Matrix;
using num::Tape;
using num::Var;
using num::Vector;
namespace ad = num::ad;

namespace {

CvseDims resolved(CvseDims dims) {
  if (dims.attention_dim == 0) dims.attention_dim = dims.joint_dim;
  return dims;
}

void expect_shape(const Matrix& m, std::size_t rows, std::size_t cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ShapeError(std::string(name) + " must be " + std::to_string(rows) + "x" + std::to_string(cols) +
                     ", got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

}  // namespace

CvseModel::CvseModel(CvseDims dims, CvseHyper hyper, std::array<Matrix, kParamCount> params)
    : dims_(resolved(dims)), params_(std::move(params)) {
  if (dims_.text_dim == 0 || dims_.region_dim == 0 || dims_.joint_dim == 0) {
    throw ShapeError("model dimensions must be positive");
  }
  const std::size_t d = dims_.joint_dim, att = dims_.attention_dim;
  expect_shape(param(Param::kTextWeight), d, dims_.text_dim, "text weight");
  expect_shape(param(Param::kTextBias), d, 1, "text bias");
  expect_shape(param(Param::kRegionWeight), d, dims_.region_dim, "region weight");
  expect_shape(param(Param::kRegionBias), d, 1, "region bias");
  expect_shape(param(Param::kAttentionWeight), att, 2 * d, "attention weight");
  expect_shape(param(Param::kAttentionBias), att, 1, "attention bias");
  expect_shape(param(Param::kAttentionVector), att, 1, "attention vector");
  set_hyper(hyper);
}

void CvseModel::set_hyper(CvseHyper hyper) {
  if (!(hyper.margin > 0.0)) throw UsageError("margin must be positive");
  if (hyper.negatives < 1) throw UsageError("negatives must be at least 1");
  hyper_ = hyper;
}

CvseModel CvseModel::initialize(CvseDims dims, CvseHyper hyper, std::uint64_t seed) {
  dims = resolved(dims);
  num::Rng rng(seed);
  auto uniform = [&rng](std::size_t rows, std::size_t cols, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Matrix m(rows, cols);
    for (double& x : m.span()) x = rng.uniform(-bound, bound);
    return m;
  };
  const std::size_t d = dims.joint_dim, att = dims.attention_dim;
  std::array<Matrix, kParamCount> params{
      uniform(d, dims.text_dim, dims.text_dim), uniform(d, 1, dims.text_dim),
      uniform(d, dims.region_dim, dims.region_dim), uniform(d, 1, dims.region_dim),
      uniform(att, 2 * d, 2 * d), uniform(att, 1, 2 * d),
      uniform(att, 1, att)};
  return CvseModel(dims, hyper, std::move(params));
}

Vector CvseModel::embed_text(const Vector& sentence) const {
  Tape tape(false);
  CvseGraph graph(tape, *this, false);
  auto v = tape.value(graph.text(sentence));
  return Vector(std::vector<double>(v.begin(), v.end()));
}

Matrix CvseModel::embed_regions(const FeatureMap& map) const {
  Tape tape(false);
  CvseGraph graph(tape, *this, false);
  Var r = graph.regions(map);
  auto v = tape.value(r);
  return Matrix(tape.rows(r), tape.cols(r), std::vector<double>(v.begin(), v.end()));
}

Vector CvseModel::attention(const Matrix& joint_regions, const Vector& joint_text) const {
  Tape tape(false);
  CvseGraph graph(tape, *this, false);
  auto v = tape.value(graph.attention(tape.constant_ref(joint_regions), tape.constant_ref(joint_text)));
  return Vector(std::vector<double>(v.begin(), v.end()));
}

double CvseModel::similarity(const Vector& sentence, const FeatureMap& map) const {
  Tape tape(false);
  CvseGraph graph(tape, *this, false);
  return tape.scalar_value(graph.similarity(graph.regions(map), graph.text(sentence)));
}

double CvseModel::pair_similarity(const Vector& sentence, const Study& study) const {
  Tape tape(false);
  CvseGraph graph(tape, *this, false);
  return tape.scalar_value(graph.pair_similarity(sentence, study));
}

Matrix CvseModel::attention_map(const FeatureMap& map, const Vector& sentence) const {
  Tape tape(false);
  CvseGraph graph(tape, *this, false);
  auto alpha = tape.value(graph.attention(graph.regions(map), graph.text(sentence)));
  return Matrix(map.height(), map.width(), std::vector<double>(alpha.begin(), alpha.end()));
}

CvseGraph::CvseGraph(Tape& tape, const CvseModel& model, bool trainable) : tape_(tape), model_(model) {
  for (std::size_t i = 0; i < kParamCount; ++i) {
    params_[i] = trainable ? tape.variable(model.parameters()[i]) : tape.constant_ref(model.parameters()[i]);
  }
}

CvseGraph::CvseGraph(Tape& tape, const CvseModel& model, std::span<const Var> params) : tape_(tape), model_(model) {
  if (params.size() != kParamCount) throw ShapeError("CvseGraph needs " + std::to_string(kParamCount) + " parameters");
  for (std::size_t i = 0; i < kParamCount; ++i) {
    const Matrix& expected = model.parameters()[i];
    if (tape.rows(params[i]) != expected.rows() || tape.cols(params[i]) != expected.cols()) {
      throw ShapeError("CvseGraph parameter " + std::to_string(i) + " has the wrong shape");
    }
    params_[i] = params[i];
  }
}

Var CvseGraph::text(const Vector& sentence) {
  if (auto it = text_cache_.find(&sentence); it != text_cache_.end()) return it->second;
  if (sentence.dim() != model_.dims().text_dim) {
    throw ShapeError("sentence embedding has dim " + std::to_string(sentence.dim()) + ", model expects " +
                     std::to_string(model_.dims().text_dim));
  }
  Var x = tape_.constant_ref(sentence);
  Var joint = ad::l2_normalize(ad::linear(x, params_[0], params_[1]));
  text_cache_.emplace(&sentence, joint);
  return joint;
}

Var CvseGraph::regions(const FeatureMap& map) {
  if (auto it = region_cache_.find(&map); it != region_cache_.end()) return it->second;
  if (map.empty()) throw ShapeError("feature map has no regions");
  if (map.channels() != model_.dims().region_dim) {
    throw ShapeError("feature map has " + std::to_string(map.channels()) + " channels, model expects " +
                     std::to_string(model_.dims().region_dim));
  }
  Var x = tape_.constant_ref(map.regions());
  Var joint = ad::l2_normalize_rows(ad::linear_rows(x, params_[2], params_[3]));
  region_cache_.emplace(&map, joint);
  return joint;
}

// The attention logit for region j is v_a^T (W_a [m_j; v] + b_a). Writing
// u = W_a^T v_a = [u_m; u_v], it equals u_m^T m_j + (u_v^T v + v_a^T b_a).
// The bracketed term is identical for every region and cancels inside the
// softmax, so only u_m^T m_j is evaluated. This turns a (d_att x 2d) product
// per region into one d-length dot per region.
Var CvseGraph::region_scorer() {
  if (!region_scorer_.valid()) {
    Var u = ad::linear_transposed(params_[4], params_[6]);
    region_scorer_ = ad::slice(u, 0, model_.dims().joint_dim);
  }
  return region_scorer_;
}

Var CvseGraph::attention(Var joint_regions, Var joint_text) {
  const std::size_t d = model_.dims().joint_dim;
  if (tape_.rows(joint_regions) == 0) throw ShapeError("attention over an empty region list");
  if (tape_.cols(joint_regions) != d || tape_.size(joint_text) != d) {
    throw ShapeError("attention inputs must have joint dimension " + std::to_string(d));
  }
  return ad::softmax(ad::matvec(joint_regions, region_scorer()));
}

Var CvseGraph::similarity(Var joint_regions, Var joint_text) {
  Var alpha = attention(joint_regions, joint_text);
  Var dist = ad::row_sq_distances(joint_regions, joint_text);
  return ad::scale(ad::dot(alpha, dist), -1.0);
}

Var CvseGraph::pair_similarity(const Vector& sentence, const Study& study) {
  if (study.frontal.empty() || study.lateral.empty()) {
    throw DataError("study '" + study.id + "' is missing a view");
  }
  Var v = text(sentence);
  Var front = similarity(regions(study.frontal), v);
  Var side = similarity(regions(study.lateral), v);
  return ad::scale(ad::add(front, side), 0.5);
}

}  // namespace cvse::model
