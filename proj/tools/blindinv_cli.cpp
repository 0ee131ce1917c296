// Command-line front end: corpus synthesis, saturation, blind inversion,
// enrollment, identification, and the full experiment driver.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "blindinv/channel.hpp"
#include "blindinv/experiment.hpp"
#include "blindinv/inversion.hpp"
#include "blindinv/recognition.hpp"
#include "blindinv/wav.hpp"

namespace fs = std::filesystem;
using namespace blindinv;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  os << text;
}

InversionConfig load_inversion_config(const std::string& path) {
  if (path.empty()) return {};
  nlohmann::json j = nlohmann::json::parse(slurp(path));
  InversionConfig cfg;
  cfg.n_knots = j.value("n_knots", cfg.n_knots);
  cfg.w_len = j.value("w_len", cfg.w_len);
  cfg.spacing_m = j.value("spacing_m", cfg.spacing_m);
  cfg.max_iters = j.value("max_iters", cfg.max_iters);
  cfg.rel_tol = j.value("rel_tol", cfg.rel_tol);
  cfg.step_init = j.value("step_init", cfg.step_init);
  cfg.fft_bins = j.value("fft_bins", cfg.fft_bins);
  cfg.max_cost_samples = j.value("max_cost_samples", cfg.max_cost_samples);
  cfg.fd_step = j.value("fd_step", cfg.fd_step);
  cfg.validate();
  return cfg;
}

int run(int argc, char** argv) {
  CLI::App app{"Blind inversion of saturated channels and covariance-model speaker identification"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Synthesize a speaker corpus as WAV files");
  std::string synth_config, synth_dir = "corpus";
  synth->add_option("--config", synth_config, "Experiment config JSON");
  synth->add_option("--out-dir", synth_dir, "Output directory");

  // saturate
  auto* sat = app.add_subcommand("saturate", "Peak-normalize and saturate a WAV file");
  double sat_k = 2.0;
  std::string sat_in, sat_out;
  sat->add_option("--k", sat_k, "Saturation constant");
  sat->add_option("--in", sat_in, "Input WAV")->required();
  sat->add_option("--out", sat_out, "Output WAV")->required();

  // invert
  auto* inv_cmd = app.add_subcommand("invert", "Blindly estimate and apply the channel inverse");
  std::string inv_in, inv_out, inv_model, inv_trace, inv_cfg;
  bool inv_full = false;
  inv_cmd->add_option("--in", inv_in, "Input WAV")->required();
  inv_cmd->add_option("--out", inv_out, "Compensated WAV");
  inv_cmd->add_option("--dump-model", inv_model, "Write estimated inverse as JSON");
  inv_cmd->add_option("--dump-trace", inv_trace, "Write cost trace as CSV");
  inv_cmd->add_option("--config", inv_cfg, "Inversion config JSON");
  inv_cmd->add_flag("--apply-filter", inv_full, "Apply the FIR part as well as the nonlinear map");

  // enroll
  auto* enr = app.add_subcommand("enroll", "Train covariance models from a directory of WAVs");
  std::string enr_dir, enr_models;
  enr->add_option("--train-dir", enr_dir, "Directory of <speaker>.wav files")->required();
  enr->add_option("--models", enr_models, "Output models JSON")->required();

  // identify
  auto* idn = app.add_subcommand("identify", "Identify the speaker of a test WAV");
  std::string idn_models, idn_test;
  idn->add_option("--models", idn_models, "Models JSON")->required();
  idn->add_option("--test", idn_test, "Test WAV")->required();

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run the full saturation/compensation experiment");
  std::string exp_config, exp_out = "report.json";
  exp->add_option("--config", exp_config, "Experiment config JSON");
  exp->add_option("--out", exp_out, "Report JSON output path");

  // report
  auto* rep = app.add_subcommand("report", "Render a report JSON");
  std::string rep_in, rep_format = "text-table";
  rep->add_option("--in", rep_in, "Report JSON")->required();
  rep->add_option("--format", rep_format, "text-table|json|csv")
      ->check(CLI::IsMember({"text-table", "json", "csv"}));

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed()) {
    ExperimentConfig cfg;
    if (!synth_config.empty()) cfg = experiment_config_from_json(slurp(synth_config));
    Corpus corpus = synth_corpus(cfg);
    fs::create_directories(fs::path(synth_dir) / "train");
    fs::create_directories(fs::path(synth_dir) / "test");
    for (int mic = 0; mic < 2; ++mic) {
      for (const auto& [id, sig] : corpus.training[std::size_t(mic)]) {
        write_wav((fs::path(synth_dir) / "train" / (id + "_mic" + std::to_string(mic + 1) + ".wav"))
                      .string(),
                  sig);
      }
    }
    for (const auto& t : corpus.tests) {
      for (int mic = 0; mic < 2; ++mic) {
        write_wav((fs::path(synth_dir) / "test" /
                   (t.speaker + "_" + std::to_string(t.sentence) + "_mic" +
                    std::to_string(mic + 1) + ".wav"))
                      .string(),
                  t.mic[std::size_t(mic)]);
      }
    }
    std::cout << "wrote corpus to " << synth_dir << "\n";
  } else if (sat->parsed()) {
    Signal x = read_wav(sat_in);
    auto out = make_saturated_testset({x}, sat_k);
    write_wav(sat_out, out.front());
  } else if (inv_cmd->parsed()) {
    Signal e = read_wav(inv_in);
    InversionConfig cfg = load_inversion_config(inv_cfg);
    auto [inverse, trace] = estimate_inverse(e, cfg);
    if (!inv_out.empty()) {
      Signal y = inv_full ? apply_inverse(inverse, e) : apply_inverse_map_only(inverse, e);
      write_wav(inv_out, normalize_peak(y));
    }
    if (!inv_model.empty()) spit(inv_model, inverse_to_json(inverse));
    if (!inv_trace.empty()) spit(inv_trace, trace_to_csv(trace));
    std::cout << "final cost " << trace.final_cost << " after "
              << trace.cost_per_iteration.size() - 1 << " iterations (" << trace.terminated_by
              << ")\n";
  } else if (enr->parsed()) {
    std::map<std::string, Signal> training;
    for (const auto& entry : fs::directory_iterator(enr_dir)) {
      if (entry.path().extension() == ".wav") {
        training.emplace(entry.path().stem().string(), read_wav(entry.path().string()));
      }
    }
    PipelineConfig pipe;
    spit(enr_models, models_to_json(enroll(training, pipe)));
    std::cout << "enrolled " << training.size() << " speakers\n";
  } else if (idn->parsed()) {
    SpeakerModelSet models = models_from_json(slurp(idn_models));
    PipelineConfig pipe;
    auto res = identify(read_wav(idn_test), models, pipe);
    nlohmann::json j;
    j["decision"] = res.decision;
    j["distances"] = res.distances;
    std::cout << j.dump(2) << "\n";
  } else if (exp->parsed()) {
    ExperimentConfig cfg;
    if (!exp_config.empty()) cfg = experiment_config_from_json(slurp(exp_config));
    ExperimentReport report = run_experiment(cfg);
    spit(exp_out, report_render(report, ReportFormat::Json));
    std::cout << report_render(report, ReportFormat::TextTable);
  } else if (rep->parsed()) {
    ExperimentReport report = report_from_json(slurp(rep_in));
    ReportFormat f = rep_format == "json"  ? ReportFormat::Json
                     : rep_format == "csv" ? ReportFormat::Csv
                                           : ReportFormat::TextTable;
    std::cout << report_render(report, f);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& err) {
    nlohmann::json j;
    j["error"] = true;
    j["what"] = err.what();
    std::cerr << j.dump() << "\n";
    return 1;
  }
}
