#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "homoglyph/baselines.hpp"
#include "homoglyph/corpus.hpp"
#include "homoglyph/errors.hpp"
#include "homoglyph/eval.hpp"
#include "homoglyph/index.hpp"
#include "homoglyph/levenshtein.hpp"
#include "homoglyph/rng.hpp"
#include "homoglyph/model_io.hpp"
#include "homoglyph/pipeline.hpp"
#include "homoglyph/render.hpp"
#include "homoglyph/train.hpp"
#include "homoglyph/utf8.hpp"

namespace py = pybind11;
using namespace homoglyph;

namespace {

using Matrix = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<FeatureVector> to_features(const Matrix& arr) {
  if (arr.ndim() != 2 || arr.shape(1) != kIndexDim) {
    throw py::value_error("expected an (n, " + std::to_string(kIndexDim) + ") array");
  }
  std::vector<FeatureVector> out(static_cast<std::size_t>(arr.shape(0)));
  auto r = arr.unchecked<2>();
  for (py::ssize_t i = 0; i < arr.shape(0); ++i) {
    for (int k = 0; k < kIndexDim; ++k) out[static_cast<std::size_t>(i)][k] = r(i, k);
  }
  return out;
}

FeatureVector to_feature(const Matrix& arr) {
  if (arr.ndim() != 1 || arr.shape(0) != kIndexDim) {
    throw py::value_error("expected a vector of length " + std::to_string(kIndexDim));
  }
  FeatureVector f{};
  for (int k = 0; k < kIndexDim; ++k) f[k] = arr.at(k);
  return f;
}

py::array_t<double> from_features(const std::vector<FeatureVector>& fs) {
  py::array_t<double> out({static_cast<py::ssize_t>(fs.size()), static_cast<py::ssize_t>(kIndexDim)});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < fs.size(); ++i) {
    for (int k = 0; k < kIndexDim; ++k) w(static_cast<py::ssize_t>(i), k) = fs[i][k];
  }
  return out;
}

py::list neighbors(const QueryResult& r) {
  py::list out;
  for (const auto& n : r.neighbors) out.append(py::make_tuple(n.id, n.label, n.distance));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Homoglyph detection core";
  m.attr("__version__") = HOMOGLYPH_VERSION;

  auto base = py::register_exception<Error>(m, "HomoglyphError");
  py::register_exception<StringTooLong>(m, "StringTooLong", base);
  py::register_exception<EmptyString>(m, "EmptyString", base);
  py::register_exception<EmptyIndex>(m, "EmptyIndex", base);
  py::register_exception<DegenerateLabels>(m, "DegenerateLabels", base);
  py::register_exception<NoSubstitutionPossible>(m, "NoSubstitutionPossible", base);

  m.def("data_dir", [] { return data_dir(); });

  m.def(
      "render",
      [](const std::string& text) {
        const auto img = render_string(std::string_view(text), *GlyphAtlas::bundled());
        py::array_t<std::uint8_t> out({kImageHeight, kImageWidth});
        std::copy(img.pixels.begin(), img.pixels.end(), out.mutable_data());
        return out;
      },
      py::arg("text"), "Render with the bundled font; returns a (12, 150) uint8 array of 0/1.");

  m.def("levenshtein", py::overload_cast<std::string_view, std::string_view>(&levenshtein), py::arg("a"),
        py::arg("b"));

  m.def(
      "visual_edit_distance",
      [](const std::string& a, const std::string& b) {
        std::vector<char32_t> cps;
        for (char32_t c : utf8_decode(a)) cps.push_back(c);
        for (char32_t c : utf8_decode(b)) cps.push_back(c);
        const auto table = CharSimilarityTable::build(*GlyphAtlas::bundled(), cps);
        return visual_edit_distance(std::string_view(a), std::string_view(b), table);
      },
      py::arg("a"), py::arg("b"));

  m.def("distance", [](const Matrix& a, const Matrix& b) { return distance(to_feature(a), to_feature(b)); });
  m.def("contrastive_loss", &contrastive_loss, py::arg("d"), py::arg("label"), py::arg("margin") = kDefaultMargin);

  m.def(
      "roc_auc",
      [](const std::vector<double>& scores, const std::vector<int>& labels) {
        const auto r = roc_auc(scores, labels);
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : r.points) pts.emplace_back(p.fpr, p.tpr);
        return py::make_tuple(r.auc, pts);
      },
      py::arg("scores"), py::arg("labels"),
      "AUC with label 0 (spoof) as the positive class and lower scores more spoof-like.");

  m.def(
      "synthesize_names",
      [](const std::string& mode, std::size_t count, std::uint64_t seed) {
        return parse_mode(mode) == DatasetMode::process ? synthesize_process_names(count, seed)
                                                        : synthesize_domain_names(count, seed);
      },
      py::arg("mode"), py::arg("count"), py::arg("seed") = kDefaultSeed);

  py::class_<ConfusableTable>(m, "ConfusableTable")
      .def_static("bundled", &ConfusableTable::bundled)
      .def_static("parse", &ConfusableTable::parse_tsv)
      .def("pair_count", &ConfusableTable::pair_count)
      .def("__len__", [](const ConfusableTable& t) { return t.entries().size(); });

  m.def(
      "generate_spoof",
      [](const std::string& name, const ConfusableTable& table, std::uint64_t seed, int max_edits) {
        Rng rng(seed);
        return utf8_encode(generate_spoof(utf8_decode(name), table, rng, max_edits));
      },
      py::arg("name"), py::arg("table"), py::arg("seed"), py::arg("max_edits") = 2);

  py::class_<Model>(m, "Model")
      .def_static("load", &load_model, py::arg("path"))
      .def("save", [](const Model& model, const std::filesystem::path& p) { save_model(p, model); })
      .def_static("random", [](std::uint64_t seed) { return Model{WeightSet::he_uniform(seed), kDefaultLeakySlope}; },
                  py::arg("seed"))
      .def_property_readonly("leaky_slope", [](const Model& model) { return model.leaky_slope; })
      .def_property_readonly("checksum", &model_checksum)
      .def(
          "embed",
          [](const Model& model, const std::vector<std::string>& names) {
            std::vector<FeatureVector> fs;
            {
              py::gil_scoped_release release;
              fs = embed_names(model, *GlyphAtlas::bundled(), names);
            }
            return from_features(fs);
          },
          py::arg("names"), "Embed names into an (n, 32) array.");

  py::class_<KDForest>(m, "KDForest")
      .def_static(
          "build",
          [](const Matrix& points, std::vector<std::string> labels, int trees, std::uint64_t seed) {
            return KDForest::build(to_features(points), std::move(labels), trees, seed);
          },
          py::arg("points"), py::arg("labels"), py::arg("trees") = kDefaultTrees, py::arg("seed") = 0)
      .def_static("load", [](const std::filesystem::path& p) { return KDForest::load(p); })
      .def("save", [](const KDForest& f, const std::filesystem::path& p) { f.save(p); })
      .def("__len__", &KDForest::size)
      .def_property_readonly("num_trees", &KDForest::num_trees)
      .def(
          "query",
          [](const KDForest& f, const Matrix& q, int k, int checks) {
            const auto r = f.query(to_feature(q), k, checks);
            return py::make_tuple(neighbors(r), r.checks_used);
          },
          py::arg("q"), py::arg("k") = 1, py::arg("checks") = kDefaultChecks)
      .def(
          "query_radius",
          [](const KDForest& f, const Matrix& q, double threshold, int checks) {
            return neighbors(f.query_radius(to_feature(q), threshold, checks));
          },
          py::arg("q"), py::arg("threshold"), py::arg("checks") = kDefaultChecks);

  m.def(
      "linear_scan",
      [](const Matrix& points, const std::vector<std::string>& labels, const Matrix& q, int k) {
        return neighbors(linear_scan(to_features(points), labels, to_feature(q), k));
      },
      py::arg("points"), py::arg("labels"), py::arg("q"), py::arg("k") = 1);
}
