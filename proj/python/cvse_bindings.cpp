#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "cvse/eval/labeler.hpp"
#include "cvse/eval/nlg.hpp"
#include "cvse/eval/recall.hpp"
#include "cvse/model/checkpoint.hpp"
#include "cvse/model/cvse_model.hpp"
#include "cvse/pipeline/commands.hpp"
#include "cvse/pipeline/feature_io.hpp"
#include "cvse/pipeline/synthetic.hpp"
#include "cvse/text/mutex.hpp"
#include "cvse/text/sentence.hpp"

namespace py = pybind11;
using namespace cvse;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// (h, w, channels) array -> feature map; region j = y * w + x.
model::FeatureMap to_feature_map(const Array& a) {
  if (a.ndim() != 3) throw py::value_error("feature map must have shape (height, width, channels)");
  const auto h = static_cast<std::size_t>(a.shape(0));
  const auto w = static_cast<std::size_t>(a.shape(1));
  const auto c = static_cast<std::size_t>(a.shape(2));
  return model::FeatureMap(w, h, c, std::vector<double>(a.data(), a.data() + a.size()));
}

Array from_feature_map(const model::FeatureMap& m) {
  Array out({m.height(), m.width(), m.channels()});
  std::copy(m.regions().values().begin(), m.regions().values().end(), out.mutable_data());
  return out;
}

Array from_matrix(const num::Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

num::Vector to_vector(const Array& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-d array");
  return num::Vector(std::vector<double>(a.data(), a.data() + a.size()));
}

// Builds the run configuration the same way the command line does.
pipeline::RunConfig run_config(const std::optional<std::filesystem::path>& config_path,
                               const std::map<std::string, std::string>& overrides) {
  pipeline::ConfigMap map = config_path ? pipeline::ConfigMap::load(*config_path) : pipeline::ConfigMap{};
  for (const auto& [k, v] : overrides) map.set(k, v);
  return pipeline::RunConfig::from(map);
}

py::object parse_json(const std::string& text) { return py::module_::import("json").attr("loads")(text); }

using Overrides = std::map<std::string, std::string>;

}  // namespace

PYBIND11_MODULE(_cvse, m) {
  m.doc() = "Cross-modal retrieval of abnormal findings (C++ core)";

  py::class_<model::CvseModel>(m, "Model")
      .def_static(
          "initialize",
          [](std::size_t d1, std::size_t d2, std::size_t d, std::uint64_t seed, std::size_t d_att) {
            return model::CvseModel::initialize({d1, d2, d, d_att}, {}, seed);
          },
          py::arg("d1"), py::arg("d2"), py::arg("d") = 512, py::arg("seed") = 0, py::arg("d_att") = 0)
      .def_static(
          "load", [](const std::filesystem::path& p) { return model::load_checkpoint(p); }, py::arg("path"))
      .def(
          "save", [](const model::CvseModel& self, const std::filesystem::path& p) { model::save_checkpoint(self, p); },
          py::arg("path"))
      .def_property_readonly("dims",
                             [](const model::CvseModel& self) {
                               const auto& d = self.dims();
                               return py::dict(py::arg("d1") = d.text_dim, py::arg("d2") = d.region_dim,
                                               py::arg("d") = d.joint_dim, py::arg("d_att") = d.attention_dim);
                             })
      .def(
          "embed_text",
          [](const model::CvseModel& self, const Array& v) { return self.embed_text(to_vector(v)).values(); },
          py::arg("sentence"))
      .def(
          "similarity",
          [](const model::CvseModel& self, const Array& v, const Array& fmap) {
            return self.similarity(to_vector(v), to_feature_map(fmap));
          },
          py::arg("sentence"), py::arg("feature_map"), "d(a, I) for one view")
      .def(
          "pair_similarity",
          [](const model::CvseModel& self, const Array& v, const Array& frontal, const Array& lateral) {
            model::Study s{"", to_feature_map(frontal), to_feature_map(lateral), {}};
            return self.pair_similarity(to_vector(v), s);
          },
          py::arg("sentence"), py::arg("frontal"), py::arg("lateral"), "mean of the two view similarities")
      .def(
          "attention_map",
          [](const model::CvseModel& self, const Array& fmap, const Array& v) {
            return from_matrix(self.attention_map(to_feature_map(fmap), to_vector(v)));
          },
          py::arg("feature_map"), py::arg("sentence"), "(height, width) attention weights");

  m.def(
      "read_feature_map", [](const std::filesystem::path& p) { return from_feature_map(pipeline::read_feature_map(p)); },
      py::arg("path"));
  m.def(
      "write_feature_map",
      [](const std::filesystem::path& p, const Array& a) { pipeline::write_feature_map(p, to_feature_map(a)); },
      py::arg("path"), py::arg("feature_map"));

  m.def("tokenize", [](const std::string& s) { return text::tokenize(s); }, py::arg("text"));
  m.def(
      "split_sentences",
      [](const std::string& report) {
        std::vector<std::string> out;
        for (const auto& s : text::split_sentences(report)) out.push_back(s.text);
        return out;
      },
      py::arg("report"));
  m.def(
      "mutex_pattern", [](const std::string& s) { return text::mutex_pattern(text::tokenize(s)).to_string(); },
      py::arg("sentence"), "13 mutex flags as a 0/1 string");
  m.def(
      "label_diseases",
      [](const std::vector<std::string>& sentences) {
        const auto labels = eval::label_diseases(sentences, eval::KeywordTable::builtin());
        std::vector<std::string> out;
        for (std::size_t d = 0; d < eval::kDiseaseCount; ++d)
          if (labels[d]) out.emplace_back(eval::disease_names()[d]);
        return out;
      },
      py::arg("sentences"), "positive disease names under the built-in keyword table");

  m.def(
      "bleu",
      [](const std::vector<std::string>& candidates, const std::vector<std::string>& references, std::size_t max_n) {
        std::vector<eval::Tokens> c, r;
        for (const auto& s : candidates) c.push_back(text::tokenize(s));
        for (const auto& s : references) r.push_back(text::tokenize(s));
        return eval::bleu(c, r, max_n);
      },
      py::arg("candidates"), py::arg("references"), py::arg("max_n") = 4, "corpus BLEU");
  m.def(
      "rouge_l",
      [](const std::string& c, const std::string& r) { return eval::rouge_l(text::tokenize(c), text::tokenize(r)); },
      py::arg("candidate"), py::arg("reference"));
  m.def(
      "meteor",
      [](const std::string& c, const std::string& r) { return eval::meteor(text::tokenize(c), text::tokenize(r)); },
      py::arg("candidate"), py::arg("reference"));
  m.def(
      "recall_at_k",
      [](const std::vector<std::vector<std::uint32_t>>& retrieved, const std::vector<std::vector<std::uint32_t>>& gold,
         std::size_t k) { return eval::recall_at_k(retrieved, gold, k); },
      py::arg("retrieved"), py::arg("gold"), py::arg("k"));

  m.def(
      "gen_synthetic",
      [](const std::filesystem::path& out, const Overrides& settings) {
        pipeline::ConfigMap map;
        for (const auto& [k, v] : settings) map.set(k, v);
        const auto corpus = pipeline::make_synthetic(pipeline::SyntheticConfig::from(map));
        pipeline::write_synthetic(corpus, out);
        return corpus.expected_groups();
      },
      py::arg("out"), py::arg("settings") = Overrides{},
      "writes a synthetic dataset; returns the expected group count");

  using OptPath = std::optional<std::filesystem::path>;
  m.def(
      "cluster",
      [](const OptPath& config, const Overrides& overrides) {
        std::ostringstream log;
        const auto s = pipeline::cmd_cluster(run_config(config, overrides), log);
        return py::dict(py::arg("clusters") = s.clusters, py::arg("groups") = s.groups,
                        py::arg("abnormal_sentences") = s.abnormal_sentences);
      },
      py::arg("config") = py::none(), py::arg("overrides") = Overrides{});
  m.def(
      "train",
      [](const OptPath& config, const Overrides& overrides) {
        std::ostringstream log;
        const auto s = pipeline::cmd_train(run_config(config, overrides), log);
        return py::dict(py::arg("epochs") = s.epochs, py::arg("best_epoch") = s.best_epoch,
                        py::arg("best_dev_recall") = s.best_dev_recall, py::arg("losses") = s.losses);
      },
      py::arg("config") = py::none(), py::arg("overrides") = Overrides{});
  m.def(
      "retrieve",
      [](const OptPath& config, const Overrides& overrides, const std::string& split) {
        std::ostringstream log;
        return pipeline::cmd_retrieve(run_config(config, overrides), pipeline::parse_split(split), log);
      },
      py::arg("config") = py::none(), py::arg("overrides") = Overrides{}, py::arg("split") = "test");
  m.def(
      "evaluate",
      [](const OptPath& config, const Overrides& overrides) {
        std::ostringstream log;
        return parse_json(pipeline::cmd_eval(run_config(config, overrides), log).dump());
      },
      py::arg("config") = py::none(), py::arg("overrides") = Overrides{});
  m.def(
      "export_attention",
      [](const OptPath& config, const Overrides& overrides, const std::string& study, std::uint64_t sentence) {
        std::ostringstream log;
        return pipeline::cmd_export_attention(run_config(config, overrides), study, sentence, log);
      },
      py::arg("config") = py::none(), py::arg("overrides") = Overrides{}, py::arg("study"), py::arg("sentence"));
}
