// Command-line front end: gen | run | sweep | eval.

#include "ldinfomax/ldinfomax.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace ldinfomax;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> algo;
  std::optional<int> trials;
  bool noiseless = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_algo) {
  cmd->add_option("--config", f.config, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--out", f.out, "output directory");
  if (with_algo) {
    cmd->add_option("--algo", f.algo, "ld_infomax | ica")->check(CLI::IsMember({"ld_infomax", "ica"}));
    cmd->add_option("--trials", f.trials, "number of trials")->check(CLI::PositiveNumber);
  }
  cmd->add_flag("--noiseless", f.noiseless, "no additive noise");
}

ExperimentConfig resolve(const CommonFlags& f) {
  ExperimentConfig cfg;
  if (!f.config.empty()) cfg = from_key_value(io::KeyValue::load(f.config));
  if (f.seed) cfg.master_seed = *f.seed;
  if (f.out) cfg.output_dir = *f.out;
  if (f.algo) {
    cfg.algo = parse_algo(*f.algo);
    cfg.sweep_algos = {cfg.algo};
  }
  if (f.trials) cfg.trials = *f.trials;
  if (f.noiseless) cfg.scenario.snr_db.reset();
  return cfg;
}

int report_failures(const std::vector<TrialOutcome>& trials, const std::string& label) {
  int failed = 0;
  for (const auto& t : trials) {
    if (!t.ok) {
      ++failed;
      std::cerr << label << "trial " << t.trial << " (seed " << t.seed << ") failed: " << t.message << '\n';
    }
  }
  return failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LD-infomax blind source separation toolkit"};
  app.require_subcommand(1);

  CommonFlags gen_f, run_f, sweep_f;
  auto* gen = app.add_subcommand("gen", "generate a scenario: S_g.csv, H_g.csv, Y.csv");
  add_common(gen, gen_f, false);

  auto* run_cmd = app.add_subcommand("run", "multi-trial run; writes convergence.csv and trials.csv");
  add_common(run_cmd, run_f, true);

  auto* sweep = app.add_subcommand("sweep", "correlation sweep; writes sweep.csv");
  add_common(sweep, sweep_f, true);
  std::string rho_grid;
  sweep->add_option("--rho-grid", rho_grid, "comma-separated correlation values");

  auto* eval = app.add_subcommand("eval", "score an estimate against ground truth");
  std::string estimate, truth, polytope, eval_out;
  eval->add_option("--estimate", estimate, "estimated sources CSV (r x N)")->required()->check(CLI::ExistingFile);
  eval->add_option("--truth", truth, "true sources CSV (r x N)")->required()->check(CLI::ExistingFile);
  eval->add_option("--polytope", polytope, "reflect signs about this polytope's center");
  eval->add_option("--out", eval_out, "directory for report.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const ExperimentConfig cfg = resolve(gen_f);
      const GenSummary s = cmd_gen(cfg);
      print_summary(std::cout, s);
      std::cout << "wrote " << cfg.output_dir << "/{S_g,H_g,Y}.csv\n";
      if (!s.feasible) {
        std::cerr << "error: generated sources violate the polytope\n";
        return 3;
      }
    } else if (*run_cmd) {
      const ExperimentConfig cfg = resolve(run_f);
      const RunOutput out = cmd_run(cfg);
      const int failed = report_failures(out.trials, "");
      std::cout << to_string(cfg.algo) << ": " << (cfg.trials - failed) << "/" << cfg.trials
                << " trials ok, final SINR " << io::format_double(out.curve.mean.back()) << " +/- "
                << io::format_double(out.curve.stddev.back()) << " dB\n"
                << "wrote " << cfg.output_dir << "/convergence.csv\n";
    } else if (*sweep) {
      ExperimentConfig cfg = resolve(sweep_f);
      if (!rho_grid.empty()) cfg.rho_grid = detail::parse_double_list(rho_grid);
      const auto rows = cmd_sweep(cfg);
      for (const auto& r : rows) {
        report_failures(r.trials, "rho=" + io::format_double(r.rho) + " " + to_string(r.algo) + ": ");
      }
      write_sweep_csv(std::cout, rows);
      std::cout << "wrote " << cfg.output_dir << "/sweep.csv\n";
    } else if (*eval) {
      std::optional<Vector> center;
      const Matrix ref = io::read_matrix_csv(std::filesystem::path(truth));
      if (!polytope.empty()) {
        center = reflection_center(PolytopeSpec::from_name(polytope, static_cast<int>(ref.rows())));
      }
      const EvaluationReport rep = cmd_eval(estimate, truth, center);
      std::cout << "mse: " << io::format_double(rep.mse) << '\n'
                << "sinr_db: " << io::format_double(rep.sinr_db) << '\n'
                << "alignment:";
      for (std::size_t i = 0; i < rep.alignment.perm.size(); ++i) {
        std::cout << ' ' << i << "->" << (rep.alignment.signs[i] < 0 ? "-" : "+") << rep.alignment.perm[i];
      }
      std::cout << '\n';
      if (!eval_out.empty()) {
        std::filesystem::create_directories(eval_out);
        std::ofstream os(std::filesystem::path(eval_out) / "report.csv");
        write_eval_report_csv(os, rep);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
