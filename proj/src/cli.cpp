#include "addpp/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <random>

#include "addpp/empirical.hpp"
#include "addpp/errors.hpp"
#include "addpp/fit.hpp"
#include "addpp/gridsearch.hpp"
#include "addpp/io.hpp"
#include "addpp/metrics.hpp"
#include "addpp/model.hpp"
#include "addpp/simulate.hpp"

namespace addpp::cli {

namespace {

namespace fs = std::filesystem;

FitConfig::Method parse_method(const std::string& name) {
  if (name == "natural") return FitConfig::Method::kNaturalGradient;
  if (name == "gradient") return FitConfig::Method::kGradientDescent;
  throw ParseError("--method must be 'natural' or 'gradient'");
}

std::string method_name(FitConfig::Method method) {
  return method == FitConfig::Method::kNaturalGradient ? "natural" : "gradient";
}

std::string subset_file_tag(std::uint32_t mask) {
  std::string tag = subset_key(mask);
  for (char& c : tag)
    if (c == ',') c = '-';
  return tag;
}

int env_threads() {
  if (const char* raw = std::getenv("APP_THREADS")) {
    const int n = std::atoi(raw);
    if (n > 0) return n;
  }
  return 0;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ParseError(flag + ": bad number '" + item + "'");
    }
  }
  if (out.empty()) throw ParseError(flag + ": empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<int> out;
  for (double v : parse_double_list(text, flag)) {
    if (v < 1 || v != std::floor(v)) throw ParseError(flag + ": entries must be positive integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  std::string kind;
  std::uint64_t seed = 0;
  std::string out;
  double duration = 10.0;
  int dims = 1;
  int components = 20;
  std::size_t count = 1000;
  double level = 1.0;
  double amplitude = 2.0;
  double frequency = 62.83185307179586;  // 20 pi
  int bins = 100;
  double wishart_dof = 0.0;
  double wishart_scale = 0.0;
};

void write_truths(const std::string& events_path,
                  const std::map<std::uint32_t, std::vector<double>>& truths) {
  const fs::path dir = fs::path(events_path).parent_path();
  for (const auto& [mask, values] : truths) {
    const fs::path path = dir / ("truth_" + subset_file_tag(mask) + ".csv");
    write_truth_csv(path.string(), values);
  }
}

int cmd_simulate(const SimulateOptions& opt) {
  if (!(opt.duration > 0.0)) throw ParseError("--duration must be positive");
  if (opt.bins < 1) throw ParseError("--bins must be at least 1");

  EventFileData data;
  data.duration = opt.duration;
  std::map<std::uint32_t, std::vector<double>> truths;

  if (opt.kind == "constant") {
    if (opt.dims != 1) throw ParseError("--dims must be 1 for --kind constant");
    if (opt.level < 0.0) throw ParseError("--level must be nonnegative");
    data.processes = 1;
    data.per_process.resize(1);
    if (opt.level > 0.0) {
      const double level = opt.level;
      data.per_process[0] = thinning_sample([level](double) { return level; }, level,
                                            opt.duration, opt.seed);
    }
    truths[1u] = std::vector<double>(opt.bins, opt.level);
  } else if (opt.kind == "sinusoidal") {
    if (opt.dims != 1) throw ParseError("--dims must be 1 for --kind sinusoidal");
    if (opt.amplitude < 0.0) throw ParseError("--amplitude must be nonnegative");
    data.processes = 1;
    data.per_process.resize(1);
    const double a = opt.amplitude, w0 = opt.frequency;
    auto lambda = [a, w0](double t) { return 0.5 * a * (1.0 + std::sin(w0 * t)); };
    if (opt.amplitude > 0.0)
      data.per_process[0] = thinning_sample(lambda, a, opt.duration, opt.seed);
    std::vector<double> truth(opt.bins);
    for (int tau = 1; tau <= opt.bins; ++tau)
      truth[tau - 1] = lambda((tau - 0.5) * opt.duration / opt.bins);
    truths[1u] = std::move(truth);
  } else if (opt.kind == "mixture") {
    if (opt.dims < 1) throw ParseError("--dims must be at least 1");
    if (opt.components < 1) throw ParseError("--components must be at least 1");
    MixtureOptions mopt;
    mopt.truth_bins = opt.bins;
    mopt.wishart_dof = opt.wishart_dof;
    mopt.wishart_scale = opt.wishart_scale;
    const auto truth = mixture_generator(opt.dims, opt.components, opt.count,
                                         opt.duration, opt.seed, mopt);
    data.processes = opt.dims;
    data.per_process = truth.streams;
    truths = truth.intensity;
  } else {
    throw ParseError("--kind must be constant, sinusoidal, or mixture");
  }

  write_event_csv(opt.out, data);
  write_truths(opt.out, truths);
  std::size_t total = 0;
  for (const auto& s : data.per_process) total += s.size();
  std::cout << "simulate: kind=" << opt.kind << " events=" << total
            << " out=" << opt.out << "\n";
  return 0;
}

// --------------------------------------------------------------------- fit

struct FitOptions {
  std::string input;
  int order = 0;
  int bins = 0;
  double bandwidth = 0.0;  // 0 = Scott's rule per projection
  double window = 0.1;
  std::string method = "natural";
  int max_iters = 1000;
  double tol = 1e-6;
  double step = 0.0;
  bool no_backtracking = false;
  std::string init = "zeros";
  unsigned seed = 0;
  std::string out;
  std::string format = "text";
  double duration = 0.0;  // 0 = from file header
  int dims = 0;           // 0 = max process id in the file
};

ModelFile build_model_file(const FitReport& report, const EventData& data,
                           const SmootherConfig& smoother, const SampleSpace& space,
                           int order, const std::string& method) {
  ModelFile mf;
  mf.processes = space.process_count();
  mf.bins = space.bin_count();
  mf.duration = space.duration();
  mf.order = order;
  mf.window = data.window;
  mf.method = method;
  mf.iterations = report.iterations_run;
  mf.converged = report.converged;
  mf.final_residual = report.final_residual;
  mf.bandwidth = smoother.bandwidth;
  for (const auto& [mask, events] : data.joint) mf.counts[mask] = events.count();
  mf.pruned = report.domain.pruned();
  mf.psi = report.final_theta.psi;
  for (int i = 0; i < report.domain.size(); ++i)
    mf.theta.emplace_back(report.domain.member(i), report.final_theta.theta[i]);
  return mf;
}

int cmd_fit(const FitOptions& opt) {
  if (opt.order < 1) throw ParseError("--order must be at least 1");
  if (opt.bins < 1) throw ParseError("--bins must be at least 1");
  if (opt.window < 0.0) throw ParseError("--window must be nonnegative");
  if (opt.bandwidth < 0.0) throw ParseError("--bandwidth must be positive");
  if (opt.format != "text" && opt.format != "json")
    throw ParseError("--format must be 'text' or 'json'");

  const auto ev = read_event_csv(
      opt.input, opt.duration > 0.0 ? std::optional<double>(opt.duration) : std::nullopt,
      opt.dims > 0 ? std::optional<int>(opt.dims) : std::nullopt);
  if (opt.order > ev.processes)
    throw ParseError("--order exceeds the process count of the input");

  const auto data =
      extract_joint_events(ev.per_process, ev.duration, opt.window, ev.processes);
  const auto space = SampleSpace::build(ev.processes, opt.bins, ev.duration);
  const auto domain = ParamDomain::build(space, opt.order);
  const auto smoother = make_smoother_config(data, opt.bins, opt.bandwidth);
  const auto phat = empirical_distribution(data, smoother, space);

  FitConfig cfg;
  cfg.method = parse_method(opt.method);
  cfg.max_iters = opt.max_iters;
  cfg.tol = opt.tol;
  cfg.step = opt.step;
  cfg.backtracking = !opt.no_backtracking;
  cfg.init = opt.init == "random" ? FitConfig::Init::kRandom : FitConfig::Init::kZeros;
  cfg.seed = opt.seed;

  const auto report = fit(phat, domain, space, cfg);
  const auto mf =
      build_model_file(report, data, smoother, space, opt.order, method_name(cfg.method));
  save_model(mf, opt.out, opt.format == "json");

  std::cout << "fit: iterations=" << report.iterations_run
            << " converged=" << (report.converged ? 1 : 0)
            << " kl=" << format_double(report.final_kl)
            << " residual=" << format_double(report.final_residual)
            << " pruned=" << report.domain.pruned().size() << "\n";
  return 0;
}

// -------------------------------------------------------------------- eval

struct EvalOptions {
  std::string model;
  std::string test;
  std::string subset;
  std::string metric;
  std::string truth;
  std::string append;
  double duration = 0.0;
};

int cmd_eval(const EvalOptions& opt) {
  if (opt.metric != "nll" && opt.metric != "kl")
    throw ParseError("--metric must be 'nll' or 'kl'");
  if (opt.metric == "kl" && opt.truth.empty())
    throw ParseError("--metric kl requires --truth");
  if (opt.metric == "nll" && opt.test.empty())
    throw ParseError("--metric nll requires --test");

  const auto mf = load_model(opt.model);
  const auto space = model_space(mf);
  const auto domain = model_domain(mf, space);
  const auto params = model_params(mf, domain, space);
  const auto p = model_distribution(params, space, domain);
  const std::uint32_t mask = parse_subset_key(opt.subset, mf.processes);

  const auto it = mf.counts.find(mask);
  const std::size_t count = it == mf.counts.end() ? 0 : it->second;
  const auto est = intensity_estimate(p, mask, count, space);

  double value = 0.0;
  if (opt.metric == "nll") {
    const auto test = read_event_csv(
        opt.test, opt.duration > 0.0 ? std::optional<double>(opt.duration)
                                     : std::optional<double>(mf.duration),
        std::optional<int>(mf.processes));
    const auto test_data =
        extract_joint_events(test.per_process, test.duration, mf.window, mf.processes);
    std::vector<double> events;
    if (const auto* ev = test_data.events_for(mask))
      for (std::size_t i = 0; i < ev->count(); ++i)
        events.push_back(ev->representative(i));
    value = negative_test_loglik(est.per_bin, events, mf.duration);
  } else {
    const auto truth = read_intensity_csv(opt.truth);
    if (truth.size() != static_cast<std::size_t>(mf.bins))
      throw ParseError("--truth bin grid does not match the model");
    value = kl_to_truth(est.per_bin, truth);
  }

  std::cout << format_double(value) << "\n";
  if (!opt.append.empty())
    append_result_csv(opt.append, opt.model, opt.test, opt.subset, opt.metric, value);
  return 0;
}

// --------------------------------------------------------------- intensity

struct IntensityOptions {
  std::string model;
  std::string subset;
  std::string events;
  std::string out;
  double duration = 0.0;
};

int cmd_intensity(const IntensityOptions& opt) {
  const auto mf = load_model(opt.model);
  const auto space = model_space(mf);
  const auto domain = model_domain(mf, space);
  const auto params = model_params(mf, domain, space);
  const auto p = model_distribution(params, space, domain);
  const std::uint32_t mask = parse_subset_key(opt.subset, mf.processes);

  std::size_t count = 0;
  if (!opt.events.empty()) {
    const auto ev = read_event_csv(
        opt.events, opt.duration > 0.0 ? std::optional<double>(opt.duration)
                                       : std::optional<double>(mf.duration),
        std::optional<int>(mf.processes));
    const auto data =
        extract_joint_events(ev.per_process, ev.duration, mf.window, mf.processes);
    count = data.count(mask);
  } else {
    const auto it = mf.counts.find(mask);
    count = it == mf.counts.end() ? 0 : it->second;
  }

  const auto est = intensity_estimate(p, mask, count, space);
  if (est.no_events)
    std::cerr << "warning: subset " << opt.subset
              << " has no events; writing a zero intensity\n";
  write_intensity_csv(opt.out, est.per_bin, mf.duration);
  return 0;
}

// -------------------------------------------------------------- gridsearch

struct GridOptions {
  std::string input;
  std::string h_grid;
  std::string m_grid;
  int order = 0;
  double holdout = 0.25;
  int folds = 0;
  std::string method = "natural";
  double window = 0.1;
  unsigned seed = 0;
  double tol = 1e-6;
  int max_iters = 1000;
  std::string out;
  double duration = 0.0;
  int dims = 0;
};

struct Split {
  std::vector<std::vector<double>> train, validation;
};

Split holdout_split(const std::vector<std::vector<double>>& streams, double fraction,
                    std::mt19937_64& rng) {
  Split split;
  split.train.resize(streams.size());
  split.validation.resize(streams.size());
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (std::size_t j = 0; j < streams.size(); ++j)
    for (double t : streams[j])
      (uniform(rng) < fraction ? split.validation : split.train)[j].push_back(t);
  return split;
}

int best_cell(const std::vector<GridCell>& table) {
  int best = -1;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i].failed) continue;
    if (best < 0) {
      best = static_cast<int>(i);
      continue;
    }
    const auto& cand = table[i];
    const auto& cur = table[best];
    if (cand.score < cur.score ||
        (cand.score == cur.score &&
         (cand.bandwidth < cur.bandwidth ||
          (cand.bandwidth == cur.bandwidth && cand.bins < cur.bins))))
      best = static_cast<int>(i);
  }
  return best;
}

int cmd_gridsearch(const GridOptions& opt) {
  if (opt.order < 1) throw ParseError("--order must be at least 1");
  if (opt.folds == 1 || opt.folds < 0) throw ParseError("--folds must be at least 2");
  if (opt.folds == 0 && !(opt.holdout > 0.0 && opt.holdout < 1.0))
    throw ParseError("--holdout must lie strictly between 0 and 1");

  const auto ev = read_event_csv(
      opt.input, opt.duration > 0.0 ? std::optional<double>(opt.duration) : std::nullopt,
      opt.dims > 0 ? std::optional<int>(opt.dims) : std::nullopt);
  if (opt.order > ev.processes)
    throw ParseError("--order exceeds the process count of the input");

  GridSpec spec;
  spec.bandwidths = parse_double_list(opt.h_grid, "--h-grid");
  for (double h : spec.bandwidths)
    if (!(h > 0.0)) throw ParseError("--h-grid entries must be positive");
  spec.bin_counts = parse_int_list(opt.m_grid, "--m-grid");
  spec.order = opt.order;
  spec.window = opt.window;
  spec.fit.method = parse_method(opt.method);
  spec.fit.tol = opt.tol;
  spec.fit.max_iters = opt.max_iters;
  spec.threads = env_threads();

  std::mt19937_64 rng(opt.seed);
  std::vector<GridCell> table;
  if (opt.folds >= 2) {
    // deterministic fold labels per event, then one search per fold
    std::vector<std::vector<int>> fold_of(ev.per_process.size());
    for (std::size_t j = 0; j < ev.per_process.size(); ++j)
      for (std::size_t i = 0; i < ev.per_process[j].size(); ++i)
        fold_of[j].push_back(static_cast<int>(rng() % opt.folds));
    for (int f = 0; f < opt.folds; ++f) {
      Split split;
      split.train.resize(ev.per_process.size());
      split.validation.resize(ev.per_process.size());
      for (std::size_t j = 0; j < ev.per_process.size(); ++j)
        for (std::size_t i = 0; i < ev.per_process[j].size(); ++i)
          (fold_of[j][i] == f ? split.validation : split.train)[j].push_back(
              ev.per_process[j][i]);
      const auto result = grid_search(split.train, split.validation, ev.duration, spec);
      if (table.empty()) {
        table = result.table;
      } else {
        for (std::size_t i = 0; i < table.size(); ++i) {
          table[i].score += result.table[i].score;
          table[i].failed = table[i].failed || result.table[i].failed;
        }
      }
    }
  } else {
    const auto split = holdout_split(ev.per_process, opt.holdout, rng);
    table = grid_search(split.train, split.validation, ev.duration, spec).table;
  }

  const int best = best_cell(table);
  if (best < 0) throw NumericalError("every grid cell failed to fit");

  std::vector<std::tuple<double, int, double>> rows;
  for (const auto& cell : table) rows.emplace_back(cell.bandwidth, cell.bins, cell.score);
  write_grid_csv(opt.out, rows);
  std::cout << "best h=" << format_double(table[best].bandwidth)
            << " M=" << table[best].bins
            << " score=" << format_double(table[best].score) << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"additive Poisson process toolkit"};
  app.name("addpp");
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "generate events and ground truth");
  simulate->add_option("--kind", sim.kind, "constant | sinusoidal | mixture")->required();
  simulate->add_option("--seed", sim.seed, "RNG seed")->required();
  simulate->add_option("--out", sim.out, "events CSV path")->required();
  simulate->add_option("--duration", sim.duration, "observation window T (s)");
  simulate->add_option("--dims", sim.dims, "number of processes");
  simulate->add_option("--components", sim.components, "mixture components");
  simulate->add_option("--count", sim.count, "mixture sample size");
  simulate->add_option("--level", sim.level, "constant intensity level");
  simulate->add_option("--amplitude", sim.amplitude, "sinusoidal peak intensity");
  simulate->add_option("--frequency", sim.frequency, "sinusoidal angular frequency (rad/s)");
  simulate->add_option("--bins", sim.bins, "truth grid bins");
  simulate->add_option("--wishart-dof", sim.wishart_dof,
                       "inverse-Wishart degrees of freedom (0 = D+4)");
  simulate->add_option("--wishart-scale", sim.wishart_scale,
                       "inverse-Wishart scale (0 = bumps near T/20)");
  simulate->callback([&] { cmd_simulate(sim); });

  FitOptions fit_opt;
  auto* fit_cmd = app.add_subcommand("fit", "fit a model to an event file");
  fit_cmd->add_option("--input", fit_opt.input, "events CSV")->required();
  fit_cmd->add_option("--order", fit_opt.order, "max interaction order k")->required();
  fit_cmd->add_option("--bins", fit_opt.bins, "time bins M")->required();
  fit_cmd->add_option("--bandwidth", fit_opt.bandwidth, "kernel bandwidth (0 = Scott)");
  fit_cmd->add_option("--window", fit_opt.window, "coincidence window (s)");
  fit_cmd->add_option("--method", fit_opt.method, "natural | gradient");
  fit_cmd->add_option("--max-iters", fit_opt.max_iters, "iteration cap");
  fit_cmd->add_option("--tol", fit_opt.tol, "eta-residual tolerance");
  fit_cmd->add_option("--step", fit_opt.step, "initial step size (0 = method default)");
  fit_cmd->add_flag("--no-backtracking", fit_opt.no_backtracking, "disable line search");
  fit_cmd->add_option("--init", fit_opt.init, "zeros | random");
  fit_cmd->add_option("--seed", fit_opt.seed, "seed for random init");
  fit_cmd->add_option("--out", fit_opt.out, "model file path")->required();
  fit_cmd->add_option("--format", fit_opt.format, "text | json");
  fit_cmd->add_option("--duration", fit_opt.duration, "override T (s)");
  fit_cmd->add_option("--dims", fit_opt.dims, "override process count");
  fit_cmd->callback([&] { cmd_fit(fit_opt); });

  EvalOptions eval_opt;
  auto* eval_cmd = app.add_subcommand("eval", "score a model");
  eval_cmd->add_option("--model", eval_opt.model, "model file")->required();
  eval_cmd->add_option("--test", eval_opt.test, "test events CSV (nll)");
  eval_cmd->add_option("--subset", eval_opt.subset, "subset key, e.g. 1,2")->required();
  eval_cmd->add_option("--metric", eval_opt.metric, "nll | kl")->required();
  eval_cmd->add_option("--truth", eval_opt.truth, "truth intensity CSV (kl)");
  eval_cmd->add_option("--append", eval_opt.append, "append a row to this results CSV");
  eval_cmd->add_option("--duration", eval_opt.duration, "override test duration");
  eval_cmd->callback([&] { cmd_eval(eval_opt); });

  IntensityOptions int_opt;
  auto* int_cmd = app.add_subcommand("intensity", "write a model's per-bin intensity");
  int_cmd->add_option("--model", int_opt.model, "model file")->required();
  int_cmd->add_option("--subset", int_opt.subset, "subset key")->required();
  int_cmd->add_option("--events", int_opt.events, "events CSV for the count rescale");
  int_cmd->add_option("--out", int_opt.out, "output CSV")->required();
  int_cmd->add_option("--duration", int_opt.duration, "override events duration");
  int_cmd->callback([&] { cmd_intensity(int_opt); });

  GridOptions grid_opt;
  auto* grid_cmd = app.add_subcommand("gridsearch", "select (h, M) by validation likelihood");
  grid_cmd->add_option("--input", grid_opt.input, "events CSV")->required();
  grid_cmd->add_option("--h-grid", grid_opt.h_grid, "comma list of bandwidths")->required();
  grid_cmd->add_option("--m-grid", grid_opt.m_grid, "comma list of bin counts")->required();
  grid_cmd->add_option("--order", grid_opt.order, "max interaction order k")->required();
  grid_cmd->add_option("--holdout", grid_opt.holdout, "validation fraction");
  grid_cmd->add_option("--folds", grid_opt.folds, "k-fold cross-validation instead");
  grid_cmd->add_option("--method", grid_opt.method, "natural | gradient");
  grid_cmd->add_option("--window", grid_opt.window, "coincidence window (s)");
  grid_cmd->add_option("--seed", grid_opt.seed, "split seed");
  grid_cmd->add_option("--tol", grid_opt.tol, "fit tolerance");
  grid_cmd->add_option("--max-iters", grid_opt.max_iters, "fit iteration cap");
  grid_cmd->add_option("--out", grid_opt.out, "score table CSV")->required();
  grid_cmd->add_option("--duration", grid_opt.duration, "override T (s)");
  grid_cmd->add_option("--dims", grid_opt.dims, "override process count");
  grid_cmd->callback([&] { cmd_gridsearch(grid_opt); });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace addpp::cli
