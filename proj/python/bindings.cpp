#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "refladder/dataset.hpp"
#include "refladder/experiment.hpp"

namespace py = pybind11;
using namespace refladder;

namespace {

py::tuple probabilities(double policy_quality, double reference_quality, double tie, double position_bias) {
  SimJudgeParams params;
  params.tie = tie;
  params.position_bias = position_bias;
  params.validate();
  const auto p = judge_probabilities(policy_quality, reference_quality, params);
  return py::make_tuple(p.win, p.tie, p.loss);
}

double update_skill(double skill, Verdict verdict, double reference_quality, double learning_rate, double gap_peak,
                    double gap_width) {
  LearnerParams params;
  params.learning_rate = learning_rate;
  params.gap_peak = gap_peak;
  params.gap_width = gap_width;
  params.validate();
  return learner_update(skill, verdict_to_reward(verdict), reference_quality, params);
}

std::string render_pairwise(const std::string& variant, const std::string& question, const std::string& reference,
                            const std::string& policy, std::optional<std::vector<std::string>> criteria) {
  return render_pairwise_prompt(parse_prompt_variant(variant), question, reference, policy, criteria);
}

py::tuple select_jsonl(const std::string& jsonl, std::size_t k, double threshold, const std::string& policy_source) {
  SelectionConfig cfg;
  cfg.k = k;
  cfg.underperform_threshold = threshold;
  cfg.policy_source_id = policy_source;
  const auto records = parse_dataset(jsonl);
  const auto result = select_margin_aware(records, cfg);
  std::vector<DatasetRecord> out;
  for (const auto& s : result.selected) out.push_back(to_dataset_record(s));
  return py::make_tuple(format_dataset(out), format_report(result.report));
}

py::dict run(const std::string& config_json, const std::string& base_dir) {
  RunResult result;
  {
    py::gil_scoped_release release;
    result = run_experiment(parse_experiment_config(config_json, base_dir));
  }
  py::dict d;
  d["summary"] = format_summary(result.summary);
  d["trace"] = result.trace;
  d["schedule_csv"] = result.schedule_csv;
  d["checkpoint"] = format_checkpoint(result.checkpoint);
  return d;
}

std::string sweep(const std::string& config_json, const std::string& base_dir) {
  const auto cfg = parse_sweep_config(config_json, base_dir);
  py::gil_scoped_release release;
  return run_sweep(cfg).summary_json;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Reference-ladder curriculum: selection, pairwise rewards, scheduling and simulation";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<JudgeExhaustedError>(m, "JudgeExhaustedError", base.ptr());
  py::register_exception<VerdictParseError>(m, "VerdictParseError", base.ptr());

  py::enum_<Verdict>(m, "Verdict")
      .value("WIN", Verdict::Win)
      .value("TIE", Verdict::Tie)
      .value("LOSS", Verdict::Loss);

  m.attr("RNG_ALGORITHM") = std::string(kRngAlgorithm);

  m.def("verdict_to_reward", [](Verdict v) { return verdict_to_reward(v).value(); }, py::arg("verdict"));
  m.def("aggregate_scores", [](const std::vector<int>& s) { return aggregate_scores(s); }, py::arg("dimension_scores"));
  m.def("learning_potential",
        [](double policy, const std::vector<double>& competitors) { return learning_potential(policy, competitors); },
        py::arg("policy_score"), py::arg("competitor_scores"));
  m.def("select_margin_aware", &select_jsonl, py::arg("jsonl"), py::arg("k"), py::arg("underperform_threshold") = 7.0,
        py::arg("policy_source") = std::string(kDefaultPolicySource),
        "Select from dataset JSONL text. Returns (selected_jsonl, report_json).");
  m.def("judge_probabilities", &probabilities, py::arg("policy_quality"), py::arg("reference_quality"),
        py::arg("tie") = 1.25, py::arg("position_bias") = 0.3, "Returns (p_win, p_tie, p_loss).");
  m.def("learner_update", &update_skill, py::arg("skill"), py::arg("verdict"), py::arg("reference_quality"),
        py::arg("learning_rate") = 0.01, py::arg("gap_peak") = 0.5, py::arg("gap_width") = 0.75);
  m.def("render_pairwise_prompt", &render_pairwise, py::arg("variant"), py::arg("question"), py::arg("reference"),
        py::arg("policy"), py::arg("criteria") = std::nullopt);
  m.def(
      "render_pointwise_prompt",
      [](const std::string& c, const std::string& q, const std::string& r) { return render_pointwise_prompt(c, q, r); },
      py::arg("criteria"), py::arg("query"), py::arg("response"));
  m.def("parse_pairwise_verdict", [](const std::string& reply) { return parse_pairwise_verdict(reply); },
        py::arg("reply"));
  m.def("parse_pointwise_score", [](const std::string& reply) { return parse_pointwise_score(reply); },
        py::arg("reply"));
  m.def("run_experiment", &run, py::arg("config_json"), py::arg("base_dir") = std::string(),
        "Run one experiment from a JSON config. Returns summary, trace, schedule_csv and checkpoint as strings.");
  m.def("run_sweep", &sweep, py::arg("config_json"), py::arg("base_dir") = std::string());
  m.def(
      "schedule_from_trace",
      [](const std::string& trace) { return format_schedule_csv(schedule_from_trace(trace)); }, py::arg("trace"),
      "Rebuild the per-instruction schedule CSV from trace JSONL.");
}
