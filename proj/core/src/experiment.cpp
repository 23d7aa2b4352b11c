#include "psindy/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include <fmt/format.h>

#include "psindy/csv.hpp"
#include "psindy/errors.hpp"
#include "psindy/pde.hpp"
#include "psindy/rng.hpp"

namespace psindy {

namespace {

std::string g17(double v) { return fmt::format("{:.17g}", v); }

std::string vector_text(const Vector& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? ", " : "") + g17(v[i]);
  return out + "]";
}

std::string complex_text(std::complex<double> z) {
  if (z.imag() == 0.0) return g17(z.real());
  return fmt::format("{:.17g}{:+.17g}i", z.real(), z.imag());
}

std::string header_row(const std::string& first, const std::vector<std::string>& names) {
  std::string out = first;
  for (const auto& n : names) out += "," + n;
  return out;
}

// Drops the first `skip` samples (the transient excluded from regression).
SampleSequence tail(const SampleSequence& seq, std::size_t skip) {
  SampleSequence out;
  out.source_id = seq.source_id;
  const std::size_t n = seq.size() > skip ? seq.size() - skip : 0;
  out.samples = seq.samples.bottomRows(static_cast<Eigen::Index>(n));
  out.times.assign(seq.times.end() - static_cast<std::ptrdiff_t>(n), seq.times.end());
  return out;
}

std::string error_csv(const TrainingError& err, const std::vector<std::string>& names) {
  std::vector<std::string> cols;
  for (const auto& n : names) cols.push_back("e_" + n);
  cols.push_back("cumulative_l2");
  std::string out = header_row("n", cols) + "\n";
  for (Eigen::Index n = 0; n < err.errors.rows(); ++n) {
    out += fmt::format("{}", n);
    for (Eigen::Index k = 0; k < err.errors.cols(); ++k) out += "," + g17(err.errors(n, k));
    out += "," + g17(err.cumulative_l2[static_cast<std::size_t>(n)]) + "\n";
  }
  return out;
}

std::string model_lines(const MapModel& model) {
  std::string out = "model:\n";
  for (std::size_t i = 0; i < model.dimension(); ++i) {
    out += fmt::format("  {}_next = {}\n", model.var_names()[i], model.describe(i, 8));
  }
  out += fmt::format("active_terms: {}\n", model.coefficients().active_terms());
  return out;
}

MapModel fit_model(const PairData& pairs, int degree, const StlsqConfig& stlsq_cfg,
                   const std::vector<std::string>& names) {
  FeatureLibrary library = build_library(static_cast<std::size_t>(pairs.x1.cols()), degree);
  const Matrix theta = library.evaluate(pairs.x1);
  CoefficientMatrix xi = stlsq(theta, pairs.x2, stlsq_cfg, library.fingerprint());
  return MapModel(std::move(library), std::move(xi), names);
}

}  // namespace

std::vector<Vector> initial_conditions(const std::vector<std::pair<double, double>>& box,
                                       std::size_t count, std::uint64_t seed) {
  Xorshift64Star rng(seed);
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vector x(static_cast<Eigen::Index>(box.size()));
    for (std::size_t k = 0; k < box.size(); ++k) {
      x[static_cast<Eigen::Index>(k)] = rng.uniform(box[k].first, box[k].second);
    }
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<Trajectory> simulate_trajectories(const OdeSystem& system,
                                              const IntegrationConfig& in) {
  if (in.init_box.size() != system.dimension) {
    throw InvalidArgument("simulate: init_box dimension differs from the system");
  }
  std::vector<Trajectory> out;
  for (const auto& x0 : initial_conditions(in.init_box, in.n_trajectories, in.seed)) {
    out.push_back(integrate(system, x0, in.t0, in.t1, in.dt));
  }
  return out;
}

std::string orbit_csv(const Orbit& orbit) {
  std::vector<std::string> names;
  for (Eigen::Index k = 0; k < orbit.points.cols(); ++k) names.push_back(fmt::format("x{}", k + 1));
  std::string out = header_row("n", names) + "\n";
  for (Eigen::Index n = 0; n < orbit.points.rows(); ++n) {
    out += fmt::format("{}", n);
    for (Eigen::Index k = 0; k < orbit.points.cols(); ++k) out += "," + g17(orbit.points(n, k));
    out += "\n";
  }
  return out;
}

std::string analysis_report(const MapModel& model, const AnalysisConfig& an,
                            const std::optional<Vector>& start) {
  const auto d = static_cast<Eigen::Index>(model.dimension());
  const Vector x0 = start ? *start : Vector(Vector::Zero(d));
  std::string out;

  if (an.fixed_points) {
    if (an.search_box.size() != model.dimension()) {
      throw InvalidArgument("analysis: search box dimension differs from the model");
    }
    Vector lo(d), hi(d);
    for (Eigen::Index k = 0; k < d; ++k) {
      lo[k] = an.search_box[static_cast<std::size_t>(k)].first;
      hi[k] = an.search_box[static_cast<std::size_t>(k)].second;
    }
    const FixedPointSearch fps = find_fixed_points(model, lo, hi, an.seeds_per_axis);
    if (fps.identity_like) {
      out += "fixed_points: identity\n";
    } else {
      out += fmt::format("fixed_points: {}\n", fps.points.size());
      for (std::size_t i = 0; i < fps.points.size(); ++i) {
        const auto& fp = fps.points[i];
        std::string mult;
        for (const auto& z : fp.multipliers) mult += (mult.empty() ? "" : ", ") + complex_text(z);
        out += fmt::format("fixed_point_{}: location={} stability={} multipliers=[{}] residual={:.3g}\n",
                           i, vector_text(fp.location), to_string(fp.stability), mult, fp.residual);
      }
    }
  }

  if (an.cycle) {
    try {
      const auto cycle = detect_cycle(model, x0, an.cycle_transient, an.max_period, an.cycle_tol);
      if (cycle) {
        out += fmt::format("cycle_period: {}\n", cycle->period);
        for (Eigen::Index r = 0; r < cycle->points.rows(); ++r) {
          out += fmt::format("cycle_point_{}: {}\n", r, vector_text(cycle->points.row(r).transpose()));
        }
      } else {
        out += fmt::format("cycle_period: none (max_period {})\n", an.max_period);
      }
    } catch (const DivergenceError&) {
      out += "cycle_period: diverged\n";
    }
  }

  if (an.bands) {
    const Orbit orbit = iterate(model, x0, an.cycle_transient + an.band_iterates);
    if (orbit.diverged) {
      out += "bands: diverged\n";
    } else {
      std::vector<double> xs;
      for (std::size_t n = an.cycle_transient + 1; n < orbit.size(); ++n) {
        xs.push_back(orbit.points(static_cast<Eigen::Index>(n), 0));
      }
      out += fmt::format("bands: {}\n", band_histogram(xs, an.band_bins));
    }
  }
  return out;
}

Artifacts run_ode_experiment(const ExperimentConfig& cfg) {
  const OdeSystem sys = builtin_system(cfg.system, cfg.parameters);
  const auto trajectories = simulate_trajectories(sys, cfg.integration);

  Artifacts art;
  std::vector<SampleSequence> seqs;
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    seqs.push_back(sample_section(sys, trajectories[i], cfg.section, fmt::format("section_{:02}", i)));
    if (cfg.write_trajectories) art[fmt::format("trajectory_{:02}.csv", i)] = trajectory_csv(trajectories[i]);
    art[fmt::format("section_{:02}.csv", i)] = samples_csv(seqs.back());
  }

  const PairData pairs = build_pairs(seqs, cfg.skip);
  if (pairs.x1.rows() == 0) {
    throw ConfigError("integration.t1", "horizon too short to produce any section pairs");
  }
  const auto all_names = default_var_names(sys.dimension);
  std::vector<std::string> names = all_names;
  if (const auto* h = std::get_if<HyperplaneSection>(&cfg.section)) {
    names.clear();
    for (std::size_t idx : h->record_indices) names.push_back(all_names[idx]);
  }
  art["pairs_x1.csv"] = matrix_csv(pairs.x1, names);
  art["pairs_x2.csv"] = matrix_csv(pairs.x2, names);

  const MapModel model = fit_model(pairs, cfg.degree, cfg.stlsq, names);
  art["model.txt"] = serialize_model(model);

  const SampleSequence train = tail(seqs.front(), cfg.skip);
  const TrainingError err = training_error(model, train);
  art["error.csv"] = error_csv(err, names);

  if (!cfg.analysis.sweep.empty()) {
    const Matrix theta = model.library().evaluate(pairs.x1);
    art["sweep.csv"] = sweep_csv(
        sparsity_sweep(model.library(), theta, pairs.x2, cfg.analysis.sweep, train, cfg.stlsq, names));
  }
  const Vector last = train.sample(train.size() - 1);
  if (cfg.analysis.forecast > 0) {
    art["forecast.csv"] = orbit_csv(iterate(model, last, cfg.analysis.forecast));
  }

  std::string report = "status: ok\n";
  report += fmt::format("experiment: {}\n", cfg.name);
  report += fmt::format("system: {}\n", sys.name);
  for (const auto& [k, v] : sys.parameters) report += fmt::format("parameter_{}: {}\n", k, g17(v));
  report += fmt::format("trajectories: {}\n", trajectories.size());
  report += fmt::format("section_samples: {}\n", train.size() + cfg.skip);
  report += fmt::format("pairs: {}\n", pairs.x1.rows());
  report += fmt::format("library_terms: {}\n", model.library().size());
  report += fmt::format("lambda: {}\n", g17(cfg.stlsq.lambda));
  report += model_lines(model);
  report += fmt::format("training_l2: {}\n", g17(err.l2()));
  report += fmt::format("training_max_abs: {}\n", g17(err.max_abs()));
  report += fmt::format("training_diverged: {}\n", err.diverged ? "true" : "false");
  report += analysis_report(model, cfg.analysis, last);
  art["report.txt"] = report;
  return art;
}

Artifacts run_pde_experiment(const ExperimentConfig& cfg) {
  const PdeConfig& p = *cfg.pde;
  Field2D init = spiral_seed(p.nx, p.ny, p.lx, p.ly);
  if (p.spinup > 0.0) {
    const auto steps = static_cast<std::size_t>(std::max(1LL, std::llround(p.spinup / p.dt)));
    init = lambda_omega_simulate(p.params, init, p.spinup, p.dt, steps).final_state;
  }
  const LambdaOmegaRun run = lambda_omega_simulate(p.params, init, p.t_end, p.dt, p.snap_stride);
  const SnapshotMatrix& snaps = p.use_v ? run.v : run.u;
  const SvdResult svd = snapshot_svd(snaps, p.rank);
  if (svd.rank < 2) throw InvalidArgument("pde: snapshot matrix has fewer than two modes");

  Artifacts art;
  const std::string field = p.use_v ? "v" : "u";
  if (p.export_snapshots) {
    art["snapshots_" + field + ".csv"] = matrix_csv(snaps.columns, [&] {
      std::vector<std::string> h;
      for (std::size_t s = 0; s < snaps.count(); ++s) h.push_back(fmt::format("s{}", s));
      return h;
    }());
    std::string meta = fmt::format("field: {}\nnx: {}\nny: {}\nlx: {}\nly: {}\nlayout: j*nx+i\ntimes:", field,
                                   p.nx, p.ny, g17(p.lx), g17(p.ly));
    for (double t : snaps.times) meta += " " + g17(t);
    art["snapshots_" + field + "_meta.txt"] = meta + "\n";
  }

  std::string sv = "k,sigma,energy_fraction\n";
  for (Eigen::Index k = 0; k < svd.singular_values.size(); ++k) {
    sv += fmt::format("{},{},{}\n", k + 1, g17(svd.singular_values[k]),
                      g17(svd.energy_fraction(static_cast<std::size_t>(k + 1))));
  }
  art["singular_values.csv"] = sv;

  std::string spatial = "x,y,mode1,mode2\n";
  for (std::size_t j = 0; j < p.ny; ++j) {
    for (std::size_t i = 0; i < p.nx; ++i) {
      const auto r = static_cast<Eigen::Index>(j * p.nx + i);
      spatial += fmt::format("{},{},{},{}\n", g17(init.x(i)), g17(init.y(j)),
                             g17(svd.spatial_modes(r, 0)), g17(svd.spatial_modes(r, 1)));
    }
  }
  art["spatial_modes.csv"] = spatial;

  SampleSequence seq = mode_timeseries(svd, {0, 1}, p.sample_stride);
  seq.source_id = "modes";
  art["modes.csv"] = samples_csv(seq);
  const std::vector<std::string> names{"a1", "a2"};
  const PairData pairs = build_pairs({seq}, 0);
  if (pairs.x1.rows() == 0) throw ConfigError("pde.sample_stride", "too large for the snapshot count");
  art["pairs_x1.csv"] = matrix_csv(pairs.x1, names);
  art["pairs_x2.csv"] = matrix_csv(pairs.x2, names);

  const MapModel model = fit_model(pairs, cfg.degree, cfg.stlsq, names);
  art["model.txt"] = serialize_model(model);
  const TrainingError err = training_error(model, seq);
  art["error.csv"] = error_csv(err, names);
  if (!cfg.analysis.sweep.empty()) {
    const Matrix theta = model.library().evaluate(pairs.x1);
    art["sweep.csv"] = sweep_csv(
        sparsity_sweep(model.library(), theta, pairs.x2, cfg.analysis.sweep, seq, cfg.stlsq, names));
  }

  std::string report = "status: ok\n";
  report += fmt::format("experiment: {}\n", cfg.name);
  report += fmt::format("grid: {}x{}\n", p.nx, p.ny);
  report += fmt::format("field: {}\n", field);
  report += fmt::format("spinup: {}\n", g17(p.spinup));
  report += fmt::format("snapshots: {}\n", snaps.count());
  report += fmt::format("rank: {}\n", svd.rank);
  report += fmt::format("energy_top2: {}\n", g17(svd.energy_fraction(2)));
  report += fmt::format("mode_samples: {}\n", seq.size());
  report += fmt::format("library_terms: {}\n", model.library().size());
  report += fmt::format("lambda: {}\n", g17(cfg.stlsq.lambda));
  report += model_lines(model);
  report += fmt::format("training_l2: {}\n", g17(err.l2()));
  report += fmt::format("training_max_abs: {}\n", g17(err.max_abs()));
  report += fmt::format("training_diverged: {}\n", err.diverged ? "true" : "false");

  const Vector last = seq.sample(seq.size() - 1);
  const double sample_dt = p.dt * static_cast<double>(p.snap_stride * p.sample_stride);
  if (p.forecast_steps > 0) {
    const Orbit forecast = iterate(model, last, p.forecast_steps);
    std::string fc = "n,t,a1,a2";
    std::optional<LambdaOmegaRun> truth;
    if (p.verify_forecast) {
      fc += ",correlation";
      truth = lambda_omega_simulate(p.params, run.final_state,
                                    sample_dt * static_cast<double>(p.forecast_steps), p.dt,
                                    p.snap_stride * p.sample_stride);
    }
    fc += "\n";
    double min_corr = std::numeric_limits<double>::infinity();
    double final_corr = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t n = 0; n < forecast.size(); ++n) {
      const Vector a = forecast.point(n);
      fc += fmt::format("{},{},{},{}", n, g17(seq.times.back() + sample_dt * static_cast<double>(n)),
                        g17(a[0]), g17(a[1]));
      if (truth) {
        const SnapshotMatrix& ts = p.use_v ? truth->v : truth->u;
        const double c = field_correlation(reconstruct_field(svd, a), ts.columns.col(static_cast<Eigen::Index>(n)));
        fc += "," + g17(c);
        if (n > 0) min_corr = std::min(min_corr, c);
        final_corr = c;
      }
      fc += "\n";
    }
    art["forecast.csv"] = fc;
    report += fmt::format("forecast_steps: {}\n", forecast.size() - 1);
    report += fmt::format("forecast_diverged: {}\n", forecast.diverged ? "true" : "false");
    if (truth) {
      report += fmt::format("forecast_min_correlation: {}\n", g17(min_corr));
      report += fmt::format("forecast_final_correlation: {}\n", g17(final_corr));
      const SnapshotMatrix& ts = p.use_v ? truth->v : truth->u;
      const std::size_t n_last = forecast.size() - 1;
      const Vector recon = reconstruct_field(svd, forecast.point(n_last));
      std::string rc = "x,y,truth,reconstruction\n";
      for (std::size_t j = 0; j < p.ny; ++j) {
        for (std::size_t i = 0; i < p.nx; ++i) {
          const auto r = static_cast<Eigen::Index>(j * p.nx + i);
          rc += fmt::format("{},{},{},{}\n", g17(init.x(i)), g17(init.y(j)),
                            g17(ts.columns(r, static_cast<Eigen::Index>(n_last))), g17(recon[r]));
        }
      }
      art["reconstruction.csv"] = rc;
    }
  }

  if (p.batch > 0) {
    std::vector<std::pair<double, double>> box;
    for (Eigen::Index k = 0; k < 2; ++k) {
      const double lo = seq.samples.col(k).minCoeff();
      const double hi = seq.samples.col(k).maxCoeff();
      const double mid = 0.5 * (lo + hi);
      const double half = 0.5 * (hi - lo) * p.batch_scale;
      box.emplace_back(mid - half, mid + half);
    }
    std::string labels = "id,a1_0,a2_0,label,steps\n";
    std::string iterates = "id,n,a1,a2\n";
    std::size_t bounded = 0;
    const auto starts = initial_conditions(box, p.batch, p.seed);
    for (std::size_t id = 0; id < starts.size(); ++id) {
      const Orbit orbit = iterate(model, starts[id], p.batch_steps);
      bounded += orbit.diverged ? 0 : 1;
      labels += fmt::format("{},{},{},{},{}\n", id, g17(starts[id][0]), g17(starts[id][1]),
                            orbit.diverged ? "diverged" : "bounded", orbit.size() - 1);
      for (std::size_t n = 0; n < orbit.size(); ++n) {
        iterates += fmt::format("{},{},{},{}\n", id, n, g17(orbit.points(static_cast<Eigen::Index>(n), 0)),
                                g17(orbit.points(static_cast<Eigen::Index>(n), 1)));
      }
    }
    art["batch_labels.csv"] = labels;
    art["batch_iterates.csv"] = iterates;
    report += fmt::format("batch: {}\nbatch_bounded: {}\nbatch_diverged: {}\n", p.batch, bounded,
                          p.batch - bounded);
  }

  report += analysis_report(model, cfg.analysis, last);
  art["report.txt"] = report;
  return art;
}

Artifacts run_experiment(const ExperimentConfig& cfg) {
  return cfg.is_pde() ? run_pde_experiment(cfg) : run_ode_experiment(cfg);
}

void write_artifacts(const std::filesystem::path& dir, const Artifacts& artifacts) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create directory '{}': {}", dir.string(), ec.message()));
  for (const auto& [name, content] : artifacts) write_text(dir / name, content);
}

int run_experiment_file(const std::filesystem::path& config_path,
                        const std::filesystem::path& output_dir,
                        std::optional<std::uint64_t> seed_override, std::string& err) {
  try {
    ExperimentConfig cfg = load_experiment_config(config_path);
    if (seed_override) {
      cfg.integration.seed = *seed_override;
      if (cfg.pde) cfg.pde->seed = *seed_override;
    }
    write_artifacts(output_dir, run_experiment(cfg));
    return kExitOk;
  } catch (const ConfigError& e) {
    err = fmt::format("config error: {}", e.what());
    return kExitConfig;
  } catch (const DivergenceError& e) {
    err = fmt::format("divergence: {} (last finite time {})", e.what(), g17(e.last_finite_time()));
    try {
      write_artifacts(output_dir, {{"report.txt", fmt::format("status: diverged\nmessage: {}\nlast_finite_time: {}\n",
                                                               e.what(), g17(e.last_finite_time()))}});
    } catch (const IoError&) {
    }
    return kExitDivergence;
  } catch (const IoError& e) {
    err = fmt::format("i/o error: {}", e.what());
    return kExitIo;
  } catch (const ParseError& e) {
    err = fmt::format("parse error: {}", e.what());
    return kExitIo;
  } catch (const InvalidArgument& e) {
    err = fmt::format("invalid argument: {}", e.what());
    return kExitConfig;
  }
}

}  // namespace psindy
