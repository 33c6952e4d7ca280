#include "lgspec/app/cache.hpp"
#include "lgspec/app/export.hpp"
#include "lgspec/app/run_config.hpp"
#include "lgspec/app/server.hpp"
#include "lgspec/diagnostics.hpp"

#include "CLI11.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>

using namespace lgspec;
using namespace lgspec::app;

namespace {

struct ConfigFlags {
  std::string config;
  std::string figure;
  std::optional<std::string> csv;
  std::vector<std::string> columns;
  std::optional<std::string> transform;
  std::optional<Eigen::Index> n;
  std::optional<int> k, l;
  std::vector<std::string> points;
  std::vector<double> bandwidth;
  std::optional<int> truncation;
  std::optional<int> order;
  std::optional<std::string> window;
  std::optional<Eigen::Index> grid;
  std::optional<std::string> mode;
  std::optional<std::size_t> replicates;
  std::vector<double> probs;
  std::optional<Eigen::Index> block_length;
  std::optional<std::uint64_t> seed;
  std::string output;

  void add(CLI::App* cmd) {
    auto* c = cmd->add_option("--config", config, "Run configuration file");
    cmd->add_option("--figure", figure, "Named figure preset")->excludes(c);
    cmd->add_option("--csv", csv, "CSV data file (switches to a CSV source)");
    cmd->add_option("--columns", columns, "CSV columns to load")->delimiter(',');
    cmd->add_option("--transform", transform, "raw | log-return");
    cmd->add_option("--n", n, "Series length for model sources");
    cmd->add_option("--k", k, "First series index");
    cmd->add_option("--l", l, "Second series index");
    cmd->add_option("--point", points, "Percentile point a::b (repeatable)");
    cmd->add_option("--bandwidth", bandwidth, "b or b1,b2")->delimiter(',')->expected(1, 2);
    cmd->add_option("--truncation,-m", truncation, "Lag truncation m");
    cmd->add_option("--order,-p", order, "Approximation order 1 or 5");
    cmd->add_option("--window", window, "tukey-hanning | bartlett | parzen");
    cmd->add_option("--grid", grid, "Number of frequencies on [0, 1/2]");
    cmd->add_option("--mode", mode, "none | replicates | bootstrap");
    cmd->add_option("--replicates,-R", replicates, "Replicates R");
    cmd->add_option("--probs", probs, "Band probabilities lower,upper")->delimiter(',')->expected(2);
    cmd->add_option("--block-length,-L", block_length, "Bootstrap block length");
    cmd->add_option("--seed", seed, "Master seed");
    cmd->add_option("--out,-o", output, "Output path");
  }

  RunConfig build() const {
    RunConfig c = !config.empty() ? load_config(config) : !figure.empty() ? figure_config(figure) : RunConfig{};
    if (csv) {
      c.source = DataKind::csv;
      c.csv = *csv;
      if (!mode) c.bands = c.bands == BandMode::replicates ? BandMode::bootstrap : c.bands;
    }
    if (!columns.empty()) c.columns = columns;
    if (transform) c.transform = transform_from_string(*transform);
    if (n) c.n = *n;
    if (k) c.k = *k;
    if (l) c.l = *l;
    if (!points.empty()) c.points = points;
    if (bandwidth.size() == 1) c.bandwidth = {bandwidth[0], bandwidth[0]};
    if (bandwidth.size() == 2) c.bandwidth = {bandwidth[0], bandwidth[1]};
    if (truncation) c.truncation = *truncation;
    if (order) {
      if (*order != 1 && *order != 5) throw ConfigError("order", "expected 1 or 5");
      c.order = static_cast<ApproxOrder>(*order);
    }
    if (window) c.window = lag_window_from_string(*window);
    if (grid) c.grid = *grid;
    if (mode) c.bands = band_mode_from_string(*mode);
    if (replicates) c.replicates = *replicates;
    if (probs.size() == 2) {
      c.lower_prob = probs[0];
      c.upper_prob = probs[1];
    }
    if (block_length) c.block_length = *block_length;
    if (seed) c.seed = *seed;
    if (!output.empty()) c.output = output;
    validate(c);
    return c;
  }
};

void progress_bar(std::size_t done, std::size_t total) {
  if (done == total || done % std::max<std::size_t>(1, total / 20) == 0) {
    std::cerr << "\r" << done << "/" << total << (done == total ? "\n" : "") << std::flush;
  }
}

/// Cached run; reports hits on stderr.
json cached_run(const RunConfig& cfg, const std::string& cache_dir, bool quiet) {
  ResultCache cache(cache_dir.empty() ? ResultCache::default_dir() : std::filesystem::path(cache_dir));
  const std::string hash = config_hash(cfg);
  if (auto hit = cache.get(hash)) {
    std::cerr << "cache hit " << hash << "\n";
    return json::parse(*hit);
  }
  const json record = run_config(cfg, quiet ? ProgressFn{} : ProgressFn(progress_bar));
  cache.put(hash, record.dump());
  std::cerr << "computed " << hash << "\n";
  return record;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text << "\n";
    return;
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text << "\n";
}

void print_summary(const json& record) {
  std::cout << "config_hash " << record["config_hash"].get<std::string>() << "\n";
  for (const auto& p : record["points"]) {
    std::cout << p["label"].get<std::string>() << ": replicates used " << p["replicates"]["used"] << "/"
              << p["replicates"]["total"] << ", failed fits " << p["convergence"]["failed"] << "/"
              << p["convergence"]["fits"] << "\n";
  }
}

Service* active_service = nullptr;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local Gaussian cross-spectra"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string cache_dir;
  bool quiet = false;
  app.add_option("--cache-dir", cache_dir, "Result cache directory (default $LGSPEC_CACHE_DIR)");
  app.add_flag("--quiet,-q", quiet, "No progress output");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Write a simulated bivariate series as CSV");
  std::string sim_model = "gaussian-wn";
  Eigen::Index sim_n = 1859;
  std::uint64_t sim_seed = 1;
  std::optional<double> sim_rho, sim_alpha, sim_theta, sim_sigma;
  std::string sim_out;
  sim->add_option("--model", sim_model, "gaussian-wn | cosine | local-trig-common | local-trig-individual");
  sim->add_option("--n", sim_n, "Length");
  sim->add_option("--seed", sim_seed, "Seed");
  sim->add_option("--rho", sim_rho, "Gaussian WN correlation");
  sim->add_option("--alpha", sim_alpha, "Cosine frequency");
  sim->add_option("--theta", sim_theta, "Cosine phase shift");
  sim->add_option("--sigma", sim_sigma, "Cosine noise level");
  sim->add_option("--out,-o", sim_out, "Output CSV")->required();

  ConfigFlags est_flags, spec_flags, band_flags, exp_flags;
  auto* est = app.add_subcommand("estimate", "Local and global lag correlations at each point");
  est_flags.add(est);
  auto* spec = app.add_subcommand("spectra", "Spectrum estimates without bands (ResultRecord)");
  spec_flags.add(spec);
  auto* bands = app.add_subcommand("bands", "Spectra with replicate or bootstrap bands (ResultRecord)");
  band_flags.add(bands);
  auto* exp = app.add_subcommand("export", "Write per-point, per-curve plot data as CSV");
  exp_flags.add(exp);
  std::string exp_dir = "export";
  std::string exp_prefix;
  exp->add_option("--dir", exp_dir, "Output directory");
  exp->add_option("--prefix", exp_prefix, "File prefix (default: figure name or config stem)");

  auto* diag = app.add_subcommand("diagnose", "Run a diagnostic");
  std::string diag_check;
  std::uint64_t diag_seed = 1;
  std::size_t diag_R = 200;
  std::string diag_out;
  diag->add_option("check", diag_check, "oracle | gradient | coincidence | rate")
      ->required()
      ->check(CLI::IsMember({"oracle", "gradient", "coincidence", "rate"}));
  diag->add_option("--seed", diag_seed, "Seed");
  diag->add_option("--replicates,-R", diag_R, "Replicates");
  diag->add_option("--out,-o", diag_out, "Output JSON");

  auto* serve = app.add_subcommand("serve", "Start the HTTP service");
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = "data";
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port");
  serve->add_option("--data-dir", data_dir, "Directory of CSV datasets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      ModelSpec model;
      if (sim_model == "gaussian-wn") {
        model = GaussianWnParams{sim_rho.value_or(0.35)};
      } else if (sim_model == "cosine") {
        CosineParams p = std::get<CosineParams>(figure_config("cosine").model);
        if (sim_alpha) p.alpha = *sim_alpha;
        if (sim_theta) p.theta = *sim_theta;
        if (sim_sigma) p.sigma = *sim_sigma;
        model = p;
      } else if (sim_model == "local-trig-common" || sim_model == "local-trig-individual") {
        model = figure_config(sim_model).model;
      } else {
        throw ConfigError("model", "unknown model '" + sim_model + "'");
      }
      write_csv(sim_out, simulate(model, sim_n, sim_seed));
      return 0;
    }
    if (*est) {
      RunConfig cfg = est_flags.build();
      const PseudoNormalizedSeries z = observed_series(cfg);
      const EstimationConfig ec = estimation_config(cfg);
      json out;
      out["config_hash"] = config_hash(cfg);
      out["config"] = to_json(cfg);
      out["points"] = json::array();
      const auto pts = resolve_points(cfg);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        json p = correlations_json(estimate_point(z, ec, pts[i]));
        p["label"] = cfg.points[i];
        out["points"].push_back(std::move(p));
      }
      write_text(cfg.output, out.dump(2));
      return 0;
    }
    if (*spec || *bands) {
      RunConfig cfg = (*spec ? spec_flags : band_flags).build();
      if (*spec) {
        cfg.bands = BandMode::none;
      } else if (cfg.bands == BandMode::none) {
        throw ConfigError("bands.mode", "bands needs replicates or bootstrap");
      }
      const json record = cached_run(cfg, cache_dir, quiet);
      if (!cfg.output.empty()) write_text(cfg.output, record.dump());
      print_summary(record);
      return 0;
    }
    if (*exp) {
      if (exp_flags.config.empty() && exp_flags.figure.empty()) throw ConfigError("figure", "--figure or --config is required");
      const RunConfig cfg = exp_flags.build();
      const std::string prefix = !exp_prefix.empty()            ? exp_prefix
                                 : !exp_flags.figure.empty()    ? exp_flags.figure
                                                                : std::filesystem::path(exp_flags.config).stem().string();
      const json record = cached_run(cfg, cache_dir, quiet);
      const std::filesystem::path dir = cfg.output.empty() ? std::filesystem::path(exp_dir) : cfg.output;
      for (const auto& path : export_csv(record, dir, prefix)) std::cout << path.string() << "\n";
      return 0;
    }
    if (*diag) {
      json out;
      if (diag_check == "oracle") {
        Engine rng(diag_seed);
        std::uniform_real_distribution<double> coord(-1.3, 1.3), corr(-0.6, 0.6);
        double worst = 0.0;
        int compared = 0;
        for (int i = 0; i < 100; ++i) {
          const MultivariateSeries s = simulate(GaussianWnParams{corr(rng)}, 300, derive_seed(diag_seed, 2, i));
          const LagPairSet pairs = lag_pairs(s.column(0), s.column(1), 0);
          const Point v{coord(rng), coord(rng)};
          const FitResult fit = fit_local_gaussian(pairs, v, {0.6, 0.6}, ApproxOrder::one);
          if (!fit.converged) continue;
          worst = std::max(worst, std::abs(fit.theta.rho - grid_oracle_p1(pairs, v, {0.6, 0.6})));
          ++compared;
        }
        out = {{"check", "oracle"}, {"instances", compared}, {"max_abs_diff", worst}, {"pass", worst < 1e-4}};
      } else if (diag_check == "gradient") {
        const MultivariateSeries s = simulate(GaussianWnParams{0.3}, 500, diag_seed);
        const LagPairSet pairs = lag_pairs(s.column(0), s.column(1), 0);
        const double e1 = finite_difference_check(pairs, {0.5, 0.5}, {0.6, 0.6}, ApproxOrder::one, 20, diag_seed);
        const double e5 = finite_difference_check(pairs, {-1.0, 0.5}, {0.6, 0.6}, ApproxOrder::five, 20, diag_seed);
        out = {{"check", "gradient"}, {"max_rel_err_p1", e1}, {"max_rel_err_p5", e5}, {"pass", e1 < 1e-5 && e5 < 1e-5}};
      } else if (diag_check == "coincidence") {
        const RunConfig cfg = figure_config("gaussian-wn");
        const auto pts = resolve_points(cfg);
        out = to_json(gaussian_coincidence_check(cfg.n, 0.35, pts, estimation_config(cfg), diag_R, diag_seed, 0.05));
      } else {
        const std::vector<Eigen::Index> sizes{500, 2000, 8000};
        out = to_json(clt_rate_diagnostic(GaussianWnParams{0.35}, {0.0, 0.0}, 1, ApproxOrder::one, {0.6, 0.6}, sizes,
                                          diag_R, diag_seed));
      }
      write_text(diag_out, out.dump(2));
      return 0;
    }
    if (*serve) {
      ServerOptions opts;
      if (!cache_dir.empty()) opts.cache_dir = cache_dir;
      opts.data_dir = data_dir;
      Service service(opts);
      active_service = &service;
      std::signal(SIGINT, [](int) {
        if (active_service) active_service->stop();
      });
      std::cerr << "listening on http://" << host << ":" << port << "\n";
      if (!service.listen(host, port)) {
        std::cerr << "error: cannot bind " << host << ":" << port << "\n";
        return 1;
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: invalid config: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
