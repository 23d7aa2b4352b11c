// psindy: command-line front end for the Poincare-map discovery pipeline.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "psindy/config.hpp"
#include "psindy/csv.hpp"
#include "psindy/errors.hpp"
#include "psindy/experiment.hpp"
#include "psindy/mapmodel.hpp"

namespace fs = std::filesystem;
using namespace psindy;

namespace {

struct Common {
  std::string output_dir = "out";
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-o,--output-dir", c.output_dir, "Directory receiving the output files")
      ->capture_default_str();
  cmd->add_option("--seed", c.seed, "Seed for random initial conditions (overrides the config)");
}

// Exit code for each library error family.
int guarded(const std::function<void()>& body) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DivergenceError& e) {
    std::cerr << fmt::format("divergence: {} (last finite time {})\n", e.what(), e.last_finite_time());
    return kExitDivergence;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitIo;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitConfig;
  }
}

ExperimentConfig load_config(const std::string& path, const Common& c) {
  ExperimentConfig cfg = load_experiment_config(path);
  if (c.seed) {
    cfg.integration.seed = *c.seed;
    if (cfg.pde) cfg.pde->seed = *c.seed;
  }
  return cfg;
}

Vector parse_point(const std::string& text, const std::string& option) {
  std::vector<double> xs;
  std::string cell;
  std::istringstream in(text);
  while (std::getline(in, cell, ',')) {
    try {
      std::size_t used = 0;
      xs.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw InvalidArgument(fmt::format("{}: '{}' is not a number", option, cell));
    }
  }
  if (xs.empty()) throw InvalidArgument(option + ": empty point");
  return Eigen::Map<Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

std::vector<std::pair<double, double>> parse_box(const std::string& text) {
  return KeyValueConfig::parse("box = " + text).ranges("box");
}

std::string section_name_for(const fs::path& trajectory) {
  const std::string stem = trajectory.stem().string();
  const std::string prefix = "trajectory_";
  if (stem.rfind(prefix, 0) == 0) return "section_" + stem.substr(prefix.size()) + ".csv";
  return "section.csv";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discover sparse polynomial Poincare maps from simulated trajectories"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "psindy 0.1.0");

  // simulate
  Common sim_c;
  std::string sim_config;
  auto* sim = app.add_subcommand("simulate", "Integrate the configured system from random initial conditions");
  sim->add_option("-c,--config", sim_config, "Experiment config")->required()->check(CLI::ExistingFile);
  add_common(sim, sim_c);
  sim->callback([&] {
    throw CLI::RuntimeError(guarded([&] {
      const ExperimentConfig cfg = load_config(sim_config, sim_c);
      if (cfg.is_pde()) throw ConfigError("system.name", "simulate needs an ODE experiment");
      const OdeSystem sys = builtin_system(cfg.system, cfg.parameters);
      const auto trajs = simulate_trajectories(sys, cfg.integration);
      Artifacts art;
      for (std::size_t i = 0; i < trajs.size(); ++i) {
        art[fmt::format("trajectory_{:02}.csv", i)] = trajectory_csv(trajs[i]);
      }
      write_artifacts(sim_c.output_dir, art);
    }));
  });

  // section
  Common sec_c;
  std::string sec_config;
  std::vector<std::string> sec_inputs;
  auto* sec = app.add_subcommand("section", "Sample trajectory CSVs on the configured Poincare section");
  sec->add_option("-c,--config", sec_config, "Experiment config (system and section)")
      ->required()
      ->check(CLI::ExistingFile);
  sec->add_option("trajectories", sec_inputs, "Trajectory CSV files")->required();
  add_common(sec, sec_c);
  sec->callback([&] {
    throw CLI::RuntimeError(guarded([&] {
      const ExperimentConfig cfg = load_config(sec_config, sec_c);
      if (cfg.is_pde()) throw ConfigError("system.name", "section needs an ODE experiment");
      const OdeSystem sys = builtin_system(cfg.system, cfg.parameters);
      Artifacts art;
      for (const auto& input : sec_inputs) {
        const Trajectory traj = read_trajectory_csv(input);
        const std::string name = section_name_for(input);
        art[name] = samples_csv(sample_section(sys, traj, cfg.section, fs::path(name).stem().string()));
      }
      write_artifacts(sec_c.output_dir, art);
    }));
  });

  // pairs
  Common pr_c;
  std::vector<std::string> pr_inputs;
  std::size_t pr_skip = 0;
  auto* pr = app.add_subcommand("pairs", "Build successive-sample pair matrices from section CSVs");
  pr->add_option("sections", pr_inputs, "Section CSV files")->required()->check(CLI::ExistingFile);
  pr->add_option("--skip", pr_skip, "Leading samples dropped from every sequence")->capture_default_str();
  add_common(pr, pr_c);
  pr->callback([&] {
    throw CLI::RuntimeError(guarded([&] {
      std::vector<SampleSequence> seqs;
      for (const auto& input : pr_inputs) seqs.push_back(read_samples_csv(input));
      const PairData pairs = build_pairs(seqs, pr_skip);
      const auto names = default_var_names(static_cast<std::size_t>(pairs.x1.cols()));
      write_artifacts(pr_c.output_dir, {{"pairs_x1.csv", matrix_csv(pairs.x1, names)},
                                        {"pairs_x2.csv", matrix_csv(pairs.x2, names)}});
    }));
  });

  // discover
  Common dis_c;
  std::string dis_x1, dis_x2;
  int dis_degree = 5;
  StlsqConfig dis_stlsq;
  auto* dis = app.add_subcommand("discover", "Fit a sparse polynomial map to X1/X2 pair CSVs");
  dis->add_option("--x1", dis_x1, "CSV of states x_n")->required()->check(CLI::ExistingFile);
  dis->add_option("--x2", dis_x2, "CSV of successors x_{n+1}")->required()->check(CLI::ExistingFile);
  dis->add_option("-d,--degree", dis_degree, "Maximum monomial degree")->capture_default_str();
  dis->add_option("-l,--lambda", dis_stlsq.lambda, "Sparsity threshold")->capture_default_str();
  dis->add_option("--max-iterations", dis_stlsq.max_iterations, "STLSQ re-solve cap")->capture_default_str();
  dis->add_option("--ridge", dis_stlsq.ridge, "Tikhonov weight")->capture_default_str();
  add_common(dis, dis_c);
  dis->callback([&] {
    throw CLI::RuntimeError(guarded([&] {
      if (dis_degree < 1) throw InvalidArgument("--degree must be >= 1");
      const Matrix x1 = read_matrix_csv(dis_x1);
      const Matrix x2 = read_matrix_csv(dis_x2);
      FeatureLibrary library = build_library(static_cast<std::size_t>(x1.cols()), dis_degree);
      CoefficientMatrix xi = stlsq(library, x1, x2, dis_stlsq);
      const MapModel model(std::move(library), std::move(xi), read_csv_header(dis_x1));
      write_artifacts(dis_c.output_dir, {{"model.txt", serialize_model(model)}});
    }));
  });

  // iterate
  Common it_c;
  std::string it_model, it_x0;
  std::size_t it_n = 100;
  auto* it = app.add_subcommand("iterate", "Iterate a saved map model");
  it->add_option("-m,--model", it_model, "Model file")->required()->check(CLI::ExistingFile);
  it->add_option("--x0", it_x0, "Initial state, comma separated")->required();
  it->add_option("-n,--steps", it_n, "Number of map applications")->capture_default_str();
  add_common(it, it_c);
  it->callback([&] {
    throw CLI::RuntimeError(guarded([&] {
      const MapModel model = load_model(it_model);
      const Vector x0 = parse_point(it_x0, "--x0");
      if (static_cast<std::size_t>(x0.size()) != model.dimension()) {
        throw InvalidArgument("--x0 dimension differs from the model");
      }
      write_artifacts(it_c.output_dir, {{"orbit.csv", orbit_csv(iterate(model, x0, it_n))}});
    }));
  });

  // analyze
  Common an_c;
  std::string an_model, an_box, an_start;
  AnalysisConfig an;
  auto* ana = app.add_subcommand("analyze", "Fixed points, cycles and band structure of a saved model");
  ana->add_option("-m,--model", an_model, "Model file")->required()->check(CLI::ExistingFile);
  ana->add_option("--box", an_box, "Fixed-point search box 'lo:hi,...'; enables the search");
  ana->add_option("--seeds-per-axis", an.seeds_per_axis, "Newton seeds per axis (d >= 2)")->capture_default_str();
  ana->add_flag("--cycle", an.cycle, "Detect a periodic orbit");
  ana->add_flag("--bands", an.bands, "Count bands of the iterate histogram (d = 1)");
  ana->add_option("--start", an_start, "Start state for cycle and band iteration (default origin)");
  ana->add_option("--transient", an.cycle_transient, "Discarded iterates")->capture_default_str();
  ana->add_option("--max-period", an.max_period, "Longest cycle searched")->capture_default_str();
  ana->add_option("--cycle-tol", an.cycle_tol, "Cycle closure tolerance")->capture_default_str();
  ana->add_option("--band-iterates", an.band_iterates, "Iterates in the band histogram")->capture_default_str();
  ana->add_option("--band-bins", an.band_bins, "Histogram bins")->capture_default_str();
  add_common(ana, an_c);
  ana->callback([&] {
    throw CLI::RuntimeError(guarded([&] {
      const MapModel model = load_model(an_model);
      if (!an_box.empty()) {
        an.fixed_points = true;
        an.search_box = parse_box(an_box);
        if (an.search_box.size() == 1 && model.dimension() > 1) {
          an.search_box.assign(model.dimension(), an.search_box.front());
        }
      }
      std::optional<Vector> start;
      if (!an_start.empty()) start = parse_point(an_start, "--start");
      write_artifacts(an_c.output_dir, {{"report.txt", analysis_report(model, an, start)}});
    }));
  });

  // sweep
  Common sw_c;
  std::string sw_x1, sw_x2, sw_seq;
  std::vector<double> sw_lambdas{0.1, 0.05, 0.01, 0.005, 0.001};
  int sw_degree = 5;
  std::size_t sw_skip = 0;
  StlsqConfig sw_stlsq;
  auto* sw = app.add_subcommand("sweep", "Sparsity and training error across a lambda list");
  sw->add_option("--x1", sw_x1, "CSV of states x_n")->required()->check(CLI::ExistingFile);
  sw->add_option("--x2", sw_x2, "CSV of successors x_{n+1}")->required()->check(CLI::ExistingFile);
  sw->add_option("--sequence", sw_seq, "Section CSV used for the free-running error")
      ->required()
      ->check(CLI::ExistingFile);
  sw->add_option("--skip", sw_skip, "Leading samples dropped from the sequence")->capture_default_str();
  sw->add_option("--lambdas", sw_lambdas, "Thresholds, comma separated")->delimiter(',')->capture_default_str();
  sw->add_option("-d,--degree", sw_degree, "Maximum monomial degree")->capture_default_str();
  sw->add_option("--max-iterations", sw_stlsq.max_iterations, "STLSQ re-solve cap")->capture_default_str();
  sw->add_option("--ridge", sw_stlsq.ridge, "Tikhonov weight")->capture_default_str();
  add_common(sw, sw_c);
  sw->callback([&] {
    throw CLI::RuntimeError(guarded([&] {
      if (sw_degree < 1) throw InvalidArgument("--degree must be >= 1");
      const Matrix x1 = read_matrix_csv(sw_x1);
      const Matrix x2 = read_matrix_csv(sw_x2);
      SampleSequence seq = read_samples_csv(sw_seq);
      if (sw_skip >= seq.size()) throw InvalidArgument("--skip leaves an empty sequence");
      seq.samples = seq.samples.bottomRows(static_cast<Eigen::Index>(seq.size() - sw_skip)).eval();
      seq.times.erase(seq.times.begin(), seq.times.begin() + static_cast<std::ptrdiff_t>(sw_skip));
      const FeatureLibrary library = build_library(static_cast<std::size_t>(x1.cols()), sw_degree);
      const Matrix theta = library.evaluate(x1);
      const auto rows = sparsity_sweep(library, theta, x2, sw_lambdas, seq, sw_stlsq, read_csv_header(sw_x1));
      write_artifacts(sw_c.output_dir, {{"sweep.csv", sweep_csv(rows)}});
    }));
  });

  // pde
  Common pde_c;
  std::string pde_config;
  auto* pde = app.add_subcommand("pde", "Spiral-wave pipeline: simulate, SVD, fit the mode map, forecast, batch");
  pde->add_option("-c,--config", pde_config, "Experiment config with a pde block")
      ->required()
      ->check(CLI::ExistingFile);
  add_common(pde, pde_c);
  pde->callback([&] {
    throw CLI::RuntimeError(guarded([&] {
      const ExperimentConfig cfg = load_config(pde_config, pde_c);
      if (!cfg.is_pde()) throw ConfigError("pde", "config has no pde block");
      write_artifacts(pde_c.output_dir, run_pde_experiment(cfg));
    }));
  });

  // run
  Common run_c;
  std::string run_config;
  auto* run = app.add_subcommand("run", "Full experiment from a config file");
  run->add_option("-c,--config", run_config, "Experiment config")->required();
  add_common(run, run_c);
  run->callback([&] {
    std::string err;
    const int code = run_experiment_file(run_config, run_c.output_dir, run_c.seed, err);
    if (!err.empty()) std::cerr << err << "\n";
    throw CLI::RuntimeError(code);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::RuntimeError& e) {
    return e.get_exit_code();
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  return kExitOk;
}
