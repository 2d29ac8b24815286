// Copyright 2026 The xling Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "xling/corpus.h"
#include "xling/error.h"
#include "xling/language.h"
#include "xling/proxy_mlm.h"
#include "xling/score_matrix.h"
#include "xling/selection.h"
#include "xling/service.h"
#include "xling/subword.h"
#include "xling/transfer_graph.h"

namespace py = pybind11;

namespace xling {
namespace {

py::object to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json from_py(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::dict matrix_to_py(const ScoreMatrix& m) {
  py::dict mono;
  for (const auto& [code, v] : m.mono) mono[py::str(code)] = v;
  py::dict bilingual;
  for (const auto& [pair, v] : m.bilingual) {
    bilingual[py::make_tuple(pair.first, pair.second)] = v;
  }
  py::dict out;
  out["languages"] = m.languages;
  out["mono"] = mono;
  out["bilingual"] = bilingual;
  out["provenance"] = std::string(to_string(m.provenance));
  out["regime"] = m.regime;
  out["seeds"] = m.seeds;
  return out;
}

SelectionRequest make_request(std::size_t k, const std::string& mode, std::size_t min_families,
                              const std::set<std::string>& exclude,
                              const std::vector<std::string>& force, std::uint64_t seed) {
  SelectionRequest r;
  r.k = k;
  r.mode = parse_selection_mode(mode);
  r.min_families = min_families;
  r.excluded = exclude;
  r.force_include = force;
  r.seed = seed;
  return r;
}

}  // namespace
}  // namespace xling

PYBIND11_MODULE(_xling, m) {
  using namespace xling;
  m.doc() = "Transfer-graph toolkit core";

  static py::exception<Error> error(m, "Error");
  static py::exception<ValidationError> validation(m, "ValidationError", error.ptr());
  static py::exception<IoError> io(m, "IoError", error.ptr());
  static py::exception<InfeasibleError> infeasible(m, "InfeasibleError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ValidationError& e) {
      py::set_error(validation, e.what());
    } catch (const IoError& e) {
      py::set_error(io, e.what());
    } catch (const InfeasibleError& e) {
      py::set_error(infeasible, e.what());
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<ScoreMatrix>(m, "ScoreMatrix")
      .def_readonly("languages", &ScoreMatrix::languages)
      .def_readonly("mono", &ScoreMatrix::mono)
      .def_property_readonly("bilingual", [](const ScoreMatrix& s) {
        return py::dict(matrix_to_py(s)["bilingual"]);
      })
      .def("complete", &ScoreMatrix::complete)
      .def("to_dict", &matrix_to_py)
      .def("to_tsv", [](const ScoreMatrix& s) {
        std::ostringstream ss;
        write_score_matrix(ss, s);
        return ss.str();
      });

  m.def(
      "parse_matrix",
      [](const std::string& text, const std::string& orientation) {
        std::optional<Orientation> expected;
        if (!orientation.empty()) expected = parse_orientation(orientation);
        return parse_score_matrix(text, "<string>", expected, nullptr);
      },
      py::arg("text"), py::arg("orientation") = "",
      "Parses score-matrix TSV text. A non-empty orientation must match the declared one.");
  m.def(
      "read_matrix",
      [](const std::filesystem::path& path, const std::string& orientation) {
        std::optional<Orientation> expected;
        if (!orientation.empty()) expected = parse_orientation(orientation);
        return ingest_score_matrix(path, expected, nullptr);
      },
      py::arg("path"), py::arg("orientation") = "");

  py::class_<TransferGraph>(m, "TransferGraph")
      .def("codes", &TransferGraph::codes)
      .def("ft", [](const TransferGraph& g, const std::string& s,
                    const std::string& t) { return g.edge(s, t).ft; })
      .def("bin", [](const TransferGraph& g, const std::string& s,
                     const std::string& t) { return std::string(to_string(g.edge(s, t).bin)); })
      .def("donation", [](const TransferGraph& g, const std::string& c) { return g.node(c).donation; })
      .def("recipience",
           [](const TransferGraph& g, const std::string& c) { return g.node(c).recipience; })
      .def("blood_type",
           [](const TransferGraph& g, const std::string& c) {
             return std::string(to_string(g.node(c).blood_type));
           })
      .def("bin_histogram",
           [](const TransferGraph& g) {
             const auto h = bin_histogram(g);
             py::dict out;
             for (auto b : kAllBins) out[py::str(std::string(to_string(b)))] = h[static_cast<int>(b)];
             return out;
           })
      .def("to_json", [](const TransferGraph& g) { return to_py(graph_to_json(g)); })
      .def("dumps", [](const TransferGraph& g) { return graph_to_json(g).dump(2); })
      .def("analytics", [](const TransferGraph& g) { return to_py(analytics_to_json(g)); })
      .def("save", &export_graph, py::arg("path"))
      .def("__eq__", [](const TransferGraph& a, const TransferGraph& b) { return a == b; })
      .def("__len__", [](const TransferGraph& g) { return g.nodes.size(); });

  m.def(
      "build_graph",
      [](const ScoreMatrix& matrix, const std::filesystem::path& meta,
         const std::optional<std::filesystem::path>& wals, const std::string& created_at) {
        MetaTable metas = read_language_table(meta);
        if (wals) attach_wals(metas, *wals);
        return build_graph(matrix, metas, created_at);
      },
      py::arg("matrix"), py::arg("meta"), py::arg("wals") = py::none(),
      py::arg("created_at") = "1970-01-01T00:00:00Z",
      "Builds the transfer graph from a complete matrix and a language table file.");
  m.def("load_graph", &load_graph, py::arg("path"));
  m.def(
      "graph_from_json", [](const py::object& doc) { return graph_from_json(from_py(doc)); },
      py::arg("doc"));
  m.def("finetune_score", &finetune_score, py::arg("matrix"), py::arg("source"),
        py::arg("target"));
  m.def(
      "classify_blood_type",
      [](double d, double r) { return std::string(to_string(classify_blood_type(d, r))); },
      py::arg("donation"), py::arg("recipience"));
  m.def(
      "bin_for_percent", [](double p) { return std::string(to_string(bin_for_percent(p))); },
      py::arg("ft_percent"));

  m.def("rank_donors", &rank_donors, py::arg("graph"));
  m.def(
      "select",
      [](const TransferGraph& g, std::size_t k, const std::string& mode, std::size_t min_families,
         const std::set<std::string>& exclude, const std::vector<std::string>& force,
         std::uint64_t seed) {
        return select_pretrain_set(g, make_request(k, mode, min_families, exclude, force, seed));
      },
      py::arg("graph"), py::arg("k") = 4, py::arg("mode") = "most_donating",
      py::arg("min_families") = 3, py::arg("exclude") = std::set<std::string>{},
      py::arg("force") = std::vector<std::string>{}, py::arg("seed") = 0);

  m.def(
      "zero_shot",
      [](const std::filesystem::path& results, const std::string& task, const std::string& config,
         const std::vector<std::string>& languages) {
        const auto all = read_downstream_results(results);
        auto it = all.find(task);
        if (it == all.end()) throw ValidationError("no results for task '" + task + "'");
        return zero_shot_score(it->second, config, languages);
      },
      py::arg("results"), py::arg("task"), py::arg("config"), py::arg("languages"));

  m.def(
      "score_partitions",
      [](const std::filesystem::path& partitions, const std::filesystem::path& vocab,
         const std::vector<std::uint64_t>& seeds, const std::string& regime, unsigned threads) {
        const auto parts = read_partitions(partitions);
        const auto v = SubwordVocabulary::load(vocab);
        ScoringOptions opts;
        opts.regime = parse_regime(regime);
        opts.threads = threads;
        py::gil_scoped_release release;
        return score_all_pairs(parts, v, seeds, opts);
      },
      py::arg("partitions"), py::arg("vocab"), py::arg("seeds") = std::vector<std::uint64_t>{1},
      py::arg("regime") = "joint", py::arg("threads") = 0,
      "Scores every language and ordered pair with the proxy model.");

  py::class_<Workspace>(m, "Workspace")
      .def_property_readonly("graph", [](const Workspace& w) { return w.graph; })
      .def_property_readonly("config_ids",
                             [](const Workspace& w) {
                               std::vector<std::string> ids;
                               for (const auto& c : w.configs) ids.push_back(c.id);
                               return ids;
                             })
      .def("hypotheses",
           [](const Workspace& w) {
             py::list out;
             for (const auto& h : w.hypothesis_cache) out.append(to_py(hypothesis_to_json(h)));
             return out;
           })
      .def(
          "request",
          [](const Workspace& w, const std::string& method, const std::string& path,
             const QueryParams& query, const std::string& body) {
            const auto r = handle_request(w, method, path, query, body);
            return py::make_tuple(r.status, r.body);
          },
          py::arg("method"), py::arg("path"), py::arg("query") = QueryParams{},
          py::arg("body") = "",
          "Dispatches one API request without a socket. Returns (status, body).");
  m.def("load_workspace", &load_workspace, py::arg("dir"));
}
