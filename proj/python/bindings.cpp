#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "trustconv/error.hpp"
#include "trustconv/pipeline.hpp"
#include "trustconv/survey_service.hpp"

namespace py = pybind11;
using namespace trustconv;

namespace {

DistanceMatrix points_matrix(const std::vector<std::vector<double>>& points, const std::string& metric) {
  auto m = parse_metric(metric);
  if (!m) throw Error(ErrorCode::InvalidArgument, "unknown metric '" + metric + "'");
  return distance_matrix(points, *m);
}

Linkage linkage_of(const std::string& name) {
  auto l = parse_linkage(name);
  if (!l) throw Error(ErrorCode::InvalidArgument, "unknown linkage '" + name + "'");
  return *l;
}

py::dict advance_dict(const AdvanceResult& r) {
  py::dict d;
  d["agent_reply"] = r.reply;
  d["phase"] = to_string(r.phase);
  d["session_complete"] = r.complete;
  return d;
}

}  // namespace

PYBIND11_MODULE(_trustconv, m) {
  m.doc() = "Bindings for the trustconv C++ core";

  static py::exception<Error> error_type(m, "TrustconvError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error_type.ptr())(py::str(e.what()));
      exc.attr("code") = py::str(std::string(to_string(e.code())));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    } catch (const StageError& e) {
      py::object exc = py::handle(error_type.ptr())(py::str(e.what()));
      exc.attr("code") = py::str("StageError");
      exc.attr("stage") = py::str(e.stage());
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  m.def("porter_stem", &porter_stem, py::arg("word"));
  m.def(
      "tokenize",
      [](const std::string& text) {
        std::vector<std::pair<std::string, std::string>> out;
        for (const Token& t : tokenize(text)) out.emplace_back(t.surface, t.stem);
        return out;
      },
      py::arg("text"), "List of (surface, stem) pairs.");
  m.def(
      "preprocess_text", [](const std::string& text) { return preprocess_text(text, default_stoplist()); },
      py::arg("text"));
  m.def("smoothed_log_odds", &smoothed_log_odds, py::arg("k"), py::arg("n"));
  m.def(
      "classify_intent",
      [](const std::string& text) {
        Intent i = classify_intent(text);
        return std::make_pair(std::string(to_string(i.label)), i.score);
      },
      py::arg("text"), "(label, score) with the bundled lexicons.");
  m.def("glove_weight", &glove_weight, py::arg("x"), py::arg("x_max") = 100.0, py::arg("alpha") = 0.75);
  m.def(
      "cosine_similarity",
      [](const std::vector<double>& u, const std::vector<double>& v) { return cosine_similarity(u, v); },
      py::arg("u"), py::arg("v"));
  m.def(
      "agglomerate",
      [](const std::vector<std::vector<double>>& points, const std::string& linkage, const std::string& metric) {
        Dendrogram d = agglomerate(points_matrix(points, metric), linkage_of(linkage));
        std::vector<std::tuple<std::size_t, std::size_t, double, std::size_t>> out;
        for (const Merge& mg : d.merges) out.emplace_back(mg.left, mg.right, mg.height, mg.size);
        return out;
      },
      py::arg("points"), py::arg("linkage") = "average", py::arg("metric") = "euclidean",
      "Merges as (left, right, height, size); leaves are 0..n-1, merge i creates node n+i.");
  m.def(
      "cut_tree",
      [](const std::vector<std::vector<double>>& points, const std::string& linkage, const std::string& metric,
         std::optional<std::size_t> k, std::optional<double> height) {
        Dendrogram d = agglomerate(points_matrix(points, metric), linkage_of(linkage));
        if (k.has_value() == height.has_value()) {
          throw Error(ErrorCode::InvalidArgument, "give exactly one of k and height");
        }
        return cut_tree(d, k ? TreeCut::into(*k) : TreeCut::at_height(*height)).assignment;
      },
      py::arg("points"), py::arg("linkage") = "average", py::arg("metric") = "euclidean", py::arg("k") = py::none(),
      py::arg("height") = py::none());

  m.def(
      "run_pipeline",
      [](std::optional<std::filesystem::path> out_dir, std::uint64_t seed, int epochs, std::size_t dim, std::size_t k,
         std::optional<std::filesystem::path> corpus, std::string metric, std::string linkage) {
        PipelineConfig c;
        c.corpus = std::move(corpus);
        c.glove.seed = seed;
        c.glove.epochs = epochs;
        c.glove.dim = dim;
        c.k = k;
        auto mt = parse_metric(metric);
        if (!mt) throw Error(ErrorCode::InvalidArgument, "unknown metric '" + metric + "'");
        c.metric = *mt;
        c.linkage = linkage_of(linkage);
        PipelineResult r = run_pipeline(c, out_dir);
        return prompt_set_json(r.prompts.set);
      },
      py::arg("out_dir") = py::none(), py::arg("seed") = 42, py::arg("epochs") = 50, py::arg("dim") = 50,
      py::arg("k") = 6, py::arg("corpus") = py::none(), py::arg("metric") = "cosine", py::arg("linkage") = "average",
      "Runs every stage and returns the prompt set as JSON text.");
  m.def("default_prompt_set_json", [] { return prompt_set_json(default_prompt_set()); });

  py::class_<DialogSession>(m, "DialogSession")
      .def(py::init([](const std::string& session_id, std::optional<std::string> prompt_set_json,
                       std::size_t max_turns) {
             auto set = std::make_shared<const PromptSet>(prompt_set_json ? parse_prompt_set(*prompt_set_json)
                                                                          : default_prompt_set());
             return DialogSession(session_id, set, bundled_intent_lexicons(), max_turns);
           }),
           py::arg("session_id") = "local", py::arg("prompt_set_json") = py::none(),
           py::arg("max_turns") = kDefaultMaxTurns)
      .def(
          "advance",
          [](DialogSession& s, const std::string& text) { return advance_dict(s.advance(text)); }, py::arg("text"))
      .def_property_readonly("phase", [](const DialogSession& s) { return to_string(s.phase()); })
      .def_property_readonly("closed", &DialogSession::closed)
      .def_property_readonly("opening", [](const DialogSession& s) { return s.transcript().front().text; })
      .def("transcript_jsonl", [](const DialogSession& s) { return transcript_jsonl(s); })
      .def("indicators_json", [](const DialogSession& s) { return indicators_json(extract_indicators(s)); });

  py::class_<SessionStore>(m, "SessionStore")
      .def(py::init([](const std::filesystem::path& root) { return std::make_unique<SessionStore>(root); }),
           py::arg("root"))
      .def(
          "create_session",
          [](SessionStore& s, const std::string& id) {
            SessionDescriptor d = s.create_session(id);
            py::dict out;
            out["session_id"] = d.session_id;
            out["prompt"] = d.prompt;
            out["phase"] = to_string(d.phase);
            return out;
          },
          py::arg("prompt_set_id") = "default")
      .def(
          "post_message",
          [](SessionStore& s, const std::string& id, const std::string& text, std::optional<std::string> key) {
            PostResult r = s.post_message(id, text, std::move(key));
            return advance_dict({r.agent_reply, r.phase, r.session_complete});
          },
          py::arg("session_id"), py::arg("text"), py::arg("idempotency_key") = py::none())
      .def("transcript_jsonl", &SessionStore::get_transcript_jsonl, py::arg("session_id"))
      .def(
          "indicators_json",
          [](const SessionStore& s, const std::string& id) { return indicators_json(s.get_indicators(id)); },
          py::arg("session_id"))
      .def("phase", [](const SessionStore& s, const std::string& id) { return to_string(s.phase(id)); })
      .def("session_ids", &SessionStore::session_ids);
}
