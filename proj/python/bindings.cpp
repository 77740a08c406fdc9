#include <fstream>
#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "m2oie/checkpoint.hpp"
#include "m2oie/commands.hpp"
#include "m2oie/corpus.hpp"
#include "m2oie/evaluator.hpp"
#include "m2oie/tuple_assembly.hpp"

namespace py = pybind11;
using namespace m2oie;

namespace {

py::object span_or_none(const std::optional<Span>& s) {
  if (!s) return py::none();
  return py::cast(*s);
}

py::dict extraction_dict(const Extraction& e) {
  py::list args, texts;
  for (std::size_t k = 0; k < kNumArgSlots; ++k) {
    args.append(span_or_none(e.args[k]));
    texts.append(e.args[k] ? py::cast(e.arg_text[k]) : py::none());
  }
  py::dict d;
  d["sentence_id"] = e.sentence_id;
  d["predicate"] = e.predicate;
  d["predicate_text"] = e.predicate_text;
  d["args"] = args;
  d["arg_text"] = texts;
  d["confidence"] = e.confidence;
  d["line"] = format_extraction(e);
  return d;
}

class PyModel {
 public:
  explicit PyModel(const std::string& path) : model_(model_from_checkpoint(load_checkpoint(path))) {}

  // Extractions per input sentence, each a list of dicts.
  py::list extract(const std::vector<std::vector<std::string>>& sentences, std::size_t batch) const {
    if (batch == 0) throw py::value_error("batch must be positive");
    py::list out;
    for (std::size_t start = 0; start < sentences.size(); start += batch) {
      std::vector<Sentence> chunk;
      std::vector<std::string> ids;
      for (std::size_t i = start; i < std::min(sentences.size(), start + batch); ++i) {
        chunk.push_back(make_sentence(sentences[i], model_.vocab()));
        ids.push_back(std::to_string(i));
      }
      std::vector<std::vector<Extraction>> result;
      {
        py::gil_scoped_release release;
        result = extract_batch(model_, chunk, ids);
      }
      for (const auto& per : result) {
        py::list l;
        for (const auto& e : per) l.append(extraction_dict(e));
        out.append(l);
      }
    }
    return out;
  }

  std::size_t vocab_size() const { return model_.vocab().size(); }

 private:
  Model<float> model_;
};

py::tuple run(const std::vector<std::string>& args) {
  std::vector<std::string> argv{"m2oie"};
  argv.insert(argv.end(), args.begin(), args.end());
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = run_cli(argv, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

std::vector<std::string> synth_lines(std::uint64_t seed, std::size_t size) {
  std::vector<std::string> lines;
  for (const auto& s : synth_corpus(seed, size)) lines.push_back(corpus_line(s));
  return lines;
}

py::dict evaluate_files(const std::string& gold_path, const std::string& pred_path, const std::string& matcher) {
  const auto gold = load_corpus(gold_path);
  std::ifstream f(pred_path);
  if (!f) throw py::value_error("cannot open predictions '" + pred_path + "'");
  const auto r = evaluate(read_extractions(f), gold_tuples(gold), parse_matcher(matcher));
  py::list points;
  for (const auto& p : r.points) points.append(py::make_tuple(p.threshold, p.precision, p.recall));
  py::dict d;
  d["matcher"] = matcher_name(r.matcher);
  d["predictions"] = r.predictions;
  d["golds"] = r.golds;
  d["auc"] = r.auc;
  d["f1"] = r.f1;
  d["precision"] = r.precision;
  d["recall"] = r.recall;
  d["threshold"] = r.threshold;
  d["points"] = points;
  return d;
}

}  // namespace

PYBIND11_MODULE(_m2oie, m) {
  m.doc() = "n-ary open information extraction with multi-head attention";

  py::register_exception<Error>(m, "M2oieError", PyExc_RuntimeError);

  m.def("run", &run, py::arg("args"),
        "Run a command-line subcommand; returns (exit_code, stdout, stderr).");
  m.def("synth_lines", &synth_lines, py::arg("seed"), py::arg("size"),
        "Synthetic annotated corpus as canonical JSON lines.");
  m.def("evaluate_files", &evaluate_files, py::arg("gold"), py::arg("pred"), py::arg("matcher") = "tuple",
        "Score an extraction file against a gold corpus.");

  py::class_<PyModel>(m, "Model")
      .def(py::init<const std::string&>(), py::arg("checkpoint"))
      .def("extract", &PyModel::extract, py::arg("sentences"), py::arg("batch") = 32)
      .def_property_readonly("vocab_size", &PyModel::vocab_size);
}
