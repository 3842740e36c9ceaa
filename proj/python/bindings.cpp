#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "p2f/cli.hpp"
#include "p2f/core.hpp"
#include "p2f/dataset.hpp"
#include "p2f/evaluation.hpp"
#include "p2f/memory_sim.hpp"
#include "p2f/metrics.hpp"

namespace py = pybind11;

namespace {

p2f::SimilarityKind kind_of(const std::string& name) {
  if (name == "jaccard") return p2f::SimilarityKind::Jaccard;
  if (name == "cosine") return p2f::SimilarityKind::Cosine;
  throw p2f::InvalidArgument("unknown similarity '" + name + "' (expected jaccard or cosine)");
}

py::dict record_dict(const p2f::QuestionRecord& r) {
  py::list elements;
  for (const auto& e : r.gold_elements) {
    elements.append(py::dict(py::arg("start") = e.span.start, py::arg("end") = e.span.end,
                             py::arg("label") = e.label));
  }
  return py::dict(py::arg("id") = r.id, py::arg("category") = std::string(p2f::to_string(r.category)),
                  py::arg("text") = r.text, py::arg("gold_elements") = elements,
                  py::arg("gold_sub_questions") = r.gold_sub_questions);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Prompt2Forget core bindings";

  py::register_exception<p2f::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<p2f::InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<p2f::ValidationError>(m, "ValidationError", PyExc_ValueError);

  m.def("normalized_tokens", &p2f::normalized_tokens, py::arg("text"));
  m.def(
      "tokenize",
      [](const std::string& text) {
        const auto seq = p2f::tokenize(text);
        std::vector<std::pair<std::string, std::string>> out;
        for (std::size_t i = 0; i < seq.size(); ++i) {
          out.emplace_back(seq.tokens[i], std::string(p2f::to_string(seq.classes[i])));
        }
        return out;
      },
      py::arg("text"), "Tokens paired with their word class.");

  m.def(
      "similarity",
      [](const std::string& a, const std::string& b, const std::string& kind) {
        return p2f::similarity(std::string_view(a), std::string_view(b), kind_of(kind));
      },
      py::arg("a"), py::arg("b"), py::arg("kind") = "jaccard");
  m.def(
      "forgetfulness",
      [](const std::vector<std::string>& genuine, const std::vector<std::string>& attacked,
         const std::string& kind) { return p2f::forgetfulness(genuine, attacked, kind_of(kind)); },
      py::arg("genuine"), py::arg("attacked"), py::arg("kind") = "jaccard");
  m.def(
      "semantic_distinction_ratio",
      [](const std::string& g, const std::string& c) {
        return p2f::semantic_distinction_ratio(p2f::tokenize(g), p2f::tokenize(c));
      },
      py::arg("genuine"), py::arg("candidate"));
  m.def(
      "structure_consistency",
      [](const std::string& g, const std::string& c, double alpha, double beta) {
        return p2f::structure_consistency(p2f::tokenize(g), p2f::tokenize(c), {alpha, beta});
      },
      py::arg("genuine"), py::arg("candidate"), py::arg("alpha") = 0.5, py::arg("beta") = 0.5);
  m.def(
      "select_best_candidate",
      [](const std::string& genuine, const std::vector<std::string>& candidates) {
        std::vector<p2f::TokenSequence> seqs;
        for (const auto& c : candidates) seqs.push_back(p2f::tokenize(c));
        return p2f::select_best_candidate(p2f::tokenize(genuine), seqs).index;
      },
      py::arg("genuine"), py::arg("candidates"));
  m.def(
      "prf1",
      [](const std::vector<std::string>& extracted, const std::vector<std::string>& gold) {
        const auto r = p2f::prf1(extracted, gold);
        return py::make_tuple(r.precision, r.recall, r.f1);
      },
      py::arg("extracted"), py::arg("gold"));

  m.def("expected_genuine_recall", &p2f::expected_genuine_recall, py::arg("r"), py::arg("leak_rate"));
  m.def("expected_exact_forgetfulness", &p2f::expected_exact_forgetfulness, py::arg("r"),
        py::arg("leak_rate"), py::arg("hints") = 0);

  m.def(
      "ratio_sweep",
      [](std::vector<std::size_t> ratios, std::vector<std::size_t> hints, double leak_rate,
         std::size_t trials, std::uint64_t seed) {
        p2f::SweepConfig c;
        c.ratios = std::move(ratios);
        c.hints = std::move(hints);
        c.leak_rate = leak_rate;
        c.trials = trials;
        c.seed = seed;
        py::list out;
        for (const auto& cell : p2f::run_ratio_sweep(c).cells) {
          out.append(py::dict(py::arg("r") = cell.r, py::arg("hints") = cell.hints,
                              py::arg("exact") = cell.exact.mean,
                              py::arg("jaccard") = cell.jaccard.mean,
                              py::arg("cosine") = cell.cosine.mean));
        }
        return out;
      },
      py::arg("ratios"), py::arg("hints"), py::arg("leak_rate") = 1.0, py::arg("trials") = 1000,
      py::arg("seed") = 0);

  m.def(
      "parse_corpus",
      [](const std::string& content) {
        py::list out;
        for (const auto& r : p2f::parse_corpus(content)) out.append(record_dict(r));
        return out;
      },
      py::arg("content"));
  m.def(
      "scaffold",
      [](std::size_t per_category, std::uint64_t seed) {
        return p2f::serialize_corpus(
            p2f::scaffold_generate(p2f::builtin_scaffold_templates(), per_category, seed));
      },
      py::arg("per_category"), py::arg("seed") = 0, "Scaffold corpus as line-delimited JSON.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = p2f::run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the p2f tool in-process; returns (exit_code, stdout, stderr).");
}
