// Command-line front end: sensing-matrix design, BOMP decoding, coherence
// reports and the recovery/classification sweeps.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "wcm/bomp.hpp"
#include "wcm/coherence.hpp"
#include "wcm/ds_designer.hpp"
#include "wcm/experiment.hpp"
#include "wcm/io.hpp"
#include "wcm/wcm_optimizer.hpp"

namespace fs = std::filesystem;

namespace {

void write_trace_csv(const std::string& path, const wcm::WcmReport<double>& report) {
  std::ofstream out(path);
  if (!out) throw wcm::FormatError("cannot open " + path + " for writing");
  out << "iter,f,total_inter,total_sub,norm_penalty\n";
  for (std::size_t n = 0; n < report.trace.size(); ++n) {
    const auto& p = report.trace[n];
    out << n << ',' << wcm::format_double(p.f) << ',' << wcm::format_double(p.total_inter) << ','
        << wcm::format_double(p.total_sub) << ',' << wcm::format_double(p.norm_penalty) << '\n';
  }
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw wcm::FormatError("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sensing-matrix design for block-sparse recovery"};
  app.require_subcommand(1);

  // design ds / design wcm
  auto* design = app.add_subcommand("design", "Design a sensing matrix for a dictionary");
  design->require_subcommand(1);

  std::string dict_path, out_path, trace_path, init_name = "ds";
  wcm::Index m = 0;
  double alpha = 0.5, tol = 1e-8;
  std::uint64_t seed = 0;
  int max_iters = 1000;

  auto* ds = design->add_subcommand("ds", "Closed-form design minimizing |E'E - I|_F^2");
  ds->add_option("--dict", dict_path, "Dictionary JSON file")->required();
  ds->add_option("-M", m, "Number of measurements")->required();
  ds->add_option("--out", out_path, "Output sensing matrix (.csv or .json)")->required();

  auto* wcm_cmd = design->add_subcommand("wcm", "Weighted coherence minimization");
  wcm_cmd->add_option("--dict", dict_path, "Dictionary JSON file")->required();
  wcm_cmd->add_option("-M", m, "Number of measurements")->required();
  wcm_cmd->add_option("--alpha", alpha, "Weight of the sub-block term, in (0,1)")->required();
  wcm_cmd->add_option("--init", init_name, "Initialization: ds or random")
      ->check(CLI::IsMember({"ds", "random"}));
  wcm_cmd->add_option("--seed", seed, "Seed for random initialization");
  wcm_cmd->add_option("--max-iters", max_iters, "Iteration cap");
  wcm_cmd->add_option("--tol", tol, "Relative objective-change stopping threshold");
  wcm_cmd->add_option("--out", out_path, "Output sensing matrix (.csv or .json)")->required();
  wcm_cmd->add_option("--trace", trace_path, "Per-iteration objective CSV");

  // equiv
  std::string sensing_path;
  auto* equiv = app.add_subcommand("equiv", "Form the equivalent dictionary E = AD");
  equiv->add_option("--dict", dict_path, "Dictionary JSON file")->required();
  equiv->add_option("--sensing", sensing_path, "Sensing matrix (.csv or .json)")->required();
  equiv->add_option("--out", out_path, "Output equivalent dictionary JSON")->required();

  // report
  std::string equiv_path;
  std::optional<double> report_alpha;
  auto* report = app.add_subcommand("report", "Coherence report of an equivalent dictionary");
  report->add_option("--equiv", equiv_path, "Equivalent dictionary JSON file")->required();
  report->add_option("--alpha", report_alpha, "Also print the objective at this alpha");

  // decode bomp
  auto* decode = app.add_subcommand("decode", "Recover block-sparse representations");
  decode->require_subcommand(1);
  std::string measurements_path;
  wcm::Index k_blocks = 1;
  auto* bomp = decode->add_subcommand("bomp", "Block orthogonal matching pursuit");
  bomp->add_option("--equiv", equiv_path, "Equivalent dictionary JSON file")->required();
  bomp->add_option("--measurements", measurements_path, "M x L measurement CSV")->required();
  bomp->add_option("-k", k_blocks, "Number of blocks to select")->required();
  bomp->add_option("--out", out_path, "Output K x L coefficient CSV")->required();

  // sweep
  std::string config_path, out_dir, preset;
  int threads = -1;
  auto* sweep = app.add_subcommand("sweep", "Run a recovery/classification sweep");
  sweep->add_option("--config", config_path, "Experiment config JSON")->required();
  sweep->add_option("--out-dir", out_dir, "Directory for results.csv, summary.csv, config.echo.json")
      ->required();
  sweep->add_option("--preset", preset, "Scale preset applied before the config (desk, full)");
  sweep->add_option("--threads", threads, "Worker threads (0: hardware)");

  // histogram
  int replicates = 100;
  auto* histogram = app.add_subcommand("histogram", "Final WCM objectives from random starts");
  histogram->add_option("--dict", dict_path, "Dictionary JSON file")->required();
  histogram->add_option("-M", m, "Number of measurements")->required();
  histogram->add_option("--alpha", alpha, "Weight of the sub-block term, in (0,1)")->required();
  histogram->add_option("--replicates", replicates, "Number of random starts");
  histogram->add_option("--seed", seed, "Seed");
  histogram->add_option("--max-iters", max_iters, "Iteration cap");
  histogram->add_option("--tol", tol, "Relative objective-change stopping threshold");
  histogram->add_option("--out", out_path, "Output CSV (replicate,objective)")->required();

  // gen-dict
  std::string family = "gaussian";
  wcm::Index n_rows = 60, n_atoms = 120, block_size = 3;
  auto* gen = app.add_subcommand("gen-dict", "Generate a random unit-norm dictionary");
  gen->add_option("--family", family, "gaussian or dct_rows")
      ->check(CLI::IsMember({"gaussian", "dct_rows"}));
  gen->add_option("-N", n_rows, "Signal dimension");
  gen->add_option("-K", n_atoms, "Number of atoms");
  gen->add_option("--block-size", block_size, "Atoms per block");
  gen->add_option("--seed", seed, "Seed");
  gen->add_option("--out", out_path, "Output dictionary JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ds) {
      const auto d = wcm::read_dict(dict_path);
      const auto a = wcm::design_ds(d, m);
      wcm::write_matrix_file(out_path, a.matrix());
      std::cout << "objective " << wcm::format_double(wcm::ds_objective(a, d)) << '\n';
    } else if (*wcm_cmd) {
      const auto d = wcm::read_dict(dict_path);
      wcm::WcmConfig<double> cfg;
      cfg.alpha = alpha;
      cfg.max_iters = max_iters;
      cfg.rel_tol = tol;
      cfg.init = init_name == "random" ? wcm::WcmInit::random : wcm::WcmInit::ds;
      cfg.seed = seed;
      const auto result = wcm::run_wcm(d, m, cfg);
      wcm::write_matrix_file(out_path, result.sensing.matrix());
      if (!trace_path.empty()) write_trace_csv(trace_path, result);
      nlohmann::json j = wcm::to_json(result.final_report);
      j["objective"] = result.final_objective();
      j["iterations"] = result.iterations;
      j["converged"] = result.converged;
      std::cout << j.dump(2) << '\n';
    } else if (*equiv) {
      const auto d = wcm::read_dict(dict_path);
      const auto a = wcm::read_matrix_file(sensing_path).matrix;
      const auto e = wcm::equivalent_dictionary(a, d.matrix(), d.structure());
      wcm::write_matrix_file(out_path, e.matrix, e.structure);
    } else if (*report) {
      auto file = wcm::read_matrix_file(equiv_path);
      const auto structure = file.structure.value_or(
          wcm::BlockStructure::uniform(1, file.matrix.cols()));
      const auto r = wcm::coherence_report(file.matrix, structure, report_alpha);
      nlohmann::json j = wcm::to_json(r);
      if (r.objective_alpha) j["objective"] = *r.objective_alpha;
      std::cout << j.dump(2) << '\n';
    } else if (*bomp) {
      auto file = wcm::read_matrix_file(equiv_path);
      if (!file.structure) {
        throw wcm::FormatError(equiv_path + ": equivalent dictionary needs block_sizes");
      }
      const wcm::EquivDict<double> e{std::move(file.matrix), *file.structure};
      const auto y = wcm::read_csv(measurements_path);
      wcm::BompConfig cfg;
      cfg.k_blocks = k_blocks;
      wcm::write_csv(out_path, wcm::bomp_decode_all(e, y, cfg));
    } else if (*sweep) {
      std::ifstream in(config_path);
      if (!in) throw wcm::FormatError("cannot open " + config_path);
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& ex) {
        throw wcm::FormatError(config_path + ": " + ex.what());
      }
      if (!preset.empty() && !j.contains("preset")) j["preset"] = preset;
      auto cfg = wcm::ExperimentConfig::from_json(j);
      if (threads >= 0) cfg.threads = threads;
      fs::create_directories(out_dir);
      const auto result = wcm::run_sweep(cfg);
      auto results = open_out(fs::path(out_dir) / "results.csv");
      wcm::write_results_csv(results, result.rows);
      auto summary = open_out(fs::path(out_dir) / "summary.csv");
      wcm::write_summary_csv(summary, result.summary);
      auto echo = open_out(fs::path(out_dir) / "config.echo.json");
      echo << cfg.to_json().dump(2) << '\n';
    } else if (*histogram) {
      const auto d = wcm::read_dict(dict_path);
      wcm::Rng rng(seed);
      const auto values = wcm::run_histogram(d, m, alpha, replicates, rng, max_iters, tol);
      auto out = open_out(out_path);
      out << "replicate,objective\n";
      for (std::size_t i = 0; i < values.size(); ++i) {
        out << i << ',' << wcm::format_double(values[i]) << '\n';
      }
    } else if (*gen) {
      wcm::ExperimentConfig cfg;
      cfg.dict_family = family == "dct_rows" ? wcm::DictFamily::dct_rows : wcm::DictFamily::gaussian;
      cfg.N = n_rows;
      cfg.K = n_atoms;
      cfg.block_size = block_size;
      cfg.M = 1;
      if (cfg.N < 2 || cfg.N > cfg.K) throw wcm::DomainError("gen-dict: need 2 <= N <= K");
      wcm::Rng rng(seed);
      const auto d = wcm::gen_dictionary(cfg, rng);
      wcm::write_matrix_file(out_path, d.matrix(), d.structure());
    }
  } catch (const wcm::Error& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
