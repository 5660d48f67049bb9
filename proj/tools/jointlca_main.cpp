// jointlca: CLI for joint linked component analysis of multiview data.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "jointlca/metrics.hpp"
#include "jointlca/oracles.hpp"
#include "jointlca/rank_selection.hpp"
#include "jointlca/simulation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitComputation = 1;
constexpr int kExitValidation = 2;

json load_config(const std::string& path, const std::set<std::string>& allowed) {
  std::ifstream in(path);
  if (!in) throw jointlca::ValidationError("cannot open config file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw jointlca::ValidationError(std::string("invalid config JSON: ") + e.what());
  }
  if (!doc.is_object()) throw jointlca::ValidationError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.count(key))
      throw jointlca::ValidationError("unknown config key: \"" + key + "\"");
  }
  return doc;
}

// flag > config > default
template <typename T>
void merge(const CLI::Option* opt, const json& cfg, const char* key, T& value) {
  if (opt && opt->count() > 0) return;
  if (cfg.contains(key)) value = cfg.at(key).get<T>();
}

jointlca::SimCase parse_case(const std::string& text) {
  if (text == "I" || text == "1") return jointlca::SimCase::I;
  if (text == "II" || text == "2") return jointlca::SimCase::II;
  throw jointlca::ValidationError("case must be \"I\" or \"II\", got \"" + text + "\"");
}

jointlca::Normalization parse_normalization(const std::string& text) {
  if (text == "none") return jointlca::Normalization::None;
  if (text == "by_n") return jointlca::Normalization::ByN;
  if (text == "by_n_minus_1") return jointlca::Normalization::ByNMinus1;
  throw jointlca::ValidationError("normalization must be none|by_n|by_n_minus_1");
}

jointlca::MultiviewDataset load_views(const std::vector<std::string>& paths, bool header) {
  if (paths.size() < 2)
    throw jointlca::ValidationError("need at least 2 view files, got " +
                                    std::to_string(paths.size()));
  jointlca::MultiviewDataset dataset;
  jointlca::CsvOptions csv;
  csv.has_header = header;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    jointlca::ViewMatrix view = jointlca::load_view_csv(paths[i], csv);
    view.view_id = static_cast<int>(i);
    if (i == 0) {
      dataset.n = view.values.rows();
    } else if (view.values.rows() != dataset.n) {
      throw jointlca::ValidationError(
          "row count mismatch: \"" + paths[0] + "\" has " + std::to_string(dataset.n) +
          " rows but \"" + paths[i] + "\" has " + std::to_string(view.values.rows()));
    }
    dataset.views.push_back(std::move(view));
  }
  return dataset;
}

jointlca::MultiviewDataset center_all(const jointlca::MultiviewDataset& dataset) {
  jointlca::MultiviewDataset out;
  out.n = dataset.n;
  for (const auto& v : dataset.views) out.views.push_back(jointlca::center_columns(v));
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw jointlca::ValidationError("cannot write file: " + path.string());
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

void write_trace_json(const jointlca::FitTrace& trace, const fs::path& path) {
  json doc;
  doc["objective_values"] = trace.objective_values;
  doc["iterations_used"] = trace.iterations_used;
  doc["converged"] = trace.converged;
  write_text(path, doc.dump(2));
}

std::vector<jointlca::BenchmarkCell> parse_cells(const json& cfg) {
  if (!cfg.contains("cells") || !cfg.at("cells").is_array() || cfg.at("cells").empty())
    throw jointlca::ValidationError("benchmark config needs a nonempty \"cells\" array");
  const std::set<std::string> allowed = {"id", "n", "dims", "r0", "r_indiv", "case"};
  std::vector<jointlca::BenchmarkCell> cells;
  for (const auto& c : cfg.at("cells")) {
    for (const auto& [key, value] : c.items())
      if (!allowed.count(key))
        throw jointlca::ValidationError("unknown cell key: \"" + key + "\"");
    jointlca::BenchmarkCell cell;
    cell.id = c.at("id").get<std::string>();
    cell.config.n = c.at("n").get<Eigen::Index>();
    for (const auto& d : c.at("dims")) cell.config.dims.push_back(d.get<Eigen::Index>());
    cell.config.r0 = c.at("r0").get<Eigen::Index>();
    cell.config.r_indiv = c.value("r_indiv", 1);
    cell.config.sim_case = parse_case(c.value("case", "I"));
    cell.config.validate();
    cells.push_back(std::move(cell));
  }
  return cells;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"joint linked component analysis for multiview data"};
  app.require_subcommand(1);

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate", "generate synthetic multiview data");
  std::string sim_config_path, sim_case_text = "I", sim_out = ".";
  Eigen::Index sim_n = 100, sim_r0 = 2, sim_r_indiv = 1;
  std::vector<Eigen::Index> sim_dims;
  std::uint64_t sim_seed = 0;
  sim->add_option("--config", sim_config_path, "JSON config file");
  auto* o_sim_n = sim->add_option("--n", sim_n, "sample count");
  auto* o_sim_dims = sim->add_option("--dims", sim_dims, "per-view feature counts");
  auto* o_sim_r0 = sim->add_option("--r0", sim_r0, "joint rank");
  auto* o_sim_ri = sim->add_option("--r-indiv", sim_r_indiv, "individual rank per view");
  auto* o_sim_case = sim->add_option("--case", sim_case_text, "diagonal case: I or II");
  auto* o_sim_seed = sim->add_option("--seed", sim_seed, "RNG seed");
  auto* o_sim_out = sim->add_option("--out-dir", sim_out, "output directory");

  // ---- fit ----
  auto* fit = app.add_subcommand("fit", "fit the penalized model at a fixed lambda");
  std::string fit_config_path, fit_norm = "none", fit_out = ".";
  std::vector<std::string> fit_views;
  double fit_lambda = 0.0;
  Eigen::Index fit_p0 = 0;
  bool fit_header = false;
  jointlca::SolverOptions fit_solver;
  fit->add_option("--config", fit_config_path, "JSON config file");
  auto* o_fit_views = fit->add_option("--view", fit_views, "view CSV paths (repeat)");
  auto* o_fit_lambda = fit->add_option("--lambda", fit_lambda, "penalty weight");
  auto* o_fit_p0 = fit->add_option("--p0", fit_p0, "working component count (default: min p_i)");
  auto* o_fit_norm = fit->add_option("--normalization", fit_norm, "none|by_n|by_n_minus_1");
  auto* o_fit_header = fit->add_flag("--header", fit_header, "view CSVs carry a header row");
  auto* o_fit_iters = fit->add_option("--max-iters", fit_solver.max_iters, "solver iteration cap");
  auto* o_fit_tol = fit->add_option("--rel-tol", fit_solver.rel_tol, "convergence threshold");
  auto* o_fit_out = fit->add_option("--out-dir", fit_out, "output directory");

  // ---- select-rank ----
  auto* sel = app.add_subcommand("select-rank", "cross-validated lambda and rank selection");
  std::string sel_config_path, sel_norm = "by_n", sel_out = ".";
  std::vector<std::string> sel_views;
  int sel_folds = 5, sel_grid = 50;
  Eigen::Index sel_p0 = 0;
  std::uint64_t sel_seed = 0;
  bool sel_header = false;
  jointlca::SolverOptions sel_solver;
  sel->add_option("--config", sel_config_path, "JSON config file");
  auto* o_sel_views = sel->add_option("--view", sel_views, "view CSV paths (repeat)");
  auto* o_sel_folds = sel->add_option("--folds", sel_folds, "CV fold count");
  auto* o_sel_grid = sel->add_option("--grid-size", sel_grid, "lambda grid size");
  auto* o_sel_p0 = sel->add_option("--p0", sel_p0, "working component count (default: min p_i)");
  auto* o_sel_norm = sel->add_option("--normalization", sel_norm, "none|by_n|by_n_minus_1");
  auto* o_sel_header = sel->add_flag("--header", sel_header, "view CSVs carry a header row");
  auto* o_sel_seed = sel->add_option("--seed", sel_seed, "fold-split seed");
  auto* o_sel_iters = sel->add_option("--max-iters", sel_solver.max_iters, "solver iteration cap");
  auto* o_sel_tol = sel->add_option("--rel-tol", sel_solver.rel_tol, "convergence threshold");
  auto* o_sel_out = sel->add_option("--out-dir", sel_out, "output directory");

  // ---- benchmark ----
  auto* bench = app.add_subcommand("benchmark", "Monte-Carlo simulation benchmark");
  std::string bench_config_path, bench_out = ".";
  int bench_reps = 0, bench_threads = 1;
  std::uint64_t bench_seed = 0;
  bench->add_option("--config", bench_config_path, "JSON benchmark config (required)")
      ->required();
  auto* o_bench_reps = bench->add_option("--replications", bench_reps, "replications per cell");
  auto* o_bench_seed = bench->add_option("--seed", bench_seed, "master seed");
  auto* o_bench_threads = bench->add_option("--threads", bench_threads, "parallel replications");
  auto* o_bench_out = bench->add_option("--out-dir", bench_out, "output directory");

  // ---- scores ----
  auto* scores = app.add_subcommand("scores", "averaged score matrix from a fitted model");
  std::string scores_model_path, scores_out = ".";
  std::vector<std::string> scores_views;
  bool scores_header = false;
  scores->add_option("--view", scores_views, "view CSV paths (repeat)")->required();
  scores->add_option("--model", scores_model_path, "model JSON path")->required();
  scores->add_flag("--header", scores_header, "view CSVs carry a header row");
  scores->add_option("--out-dir", scores_out, "output directory");

  // ---- oracle-check ----
  auto* oracle = app.add_subcommand("oracle-check", "brute-force diagnostics for solver steps");
  std::string oracle_out = ".";
  std::uint64_t oracle_seed = 0;
  oracle->add_option("--seed", oracle_seed, "instance seed");
  oracle->add_option("--out-dir", oracle_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (sim->parsed()) {
      json cfg;
      if (!sim_config_path.empty())
        cfg = load_config(sim_config_path,
                          {"n", "dims", "r0", "r_indiv", "case", "seed", "out_dir"});
      merge(o_sim_n, cfg, "n", sim_n);
      merge(o_sim_dims, cfg, "dims", sim_dims);
      merge(o_sim_r0, cfg, "r0", sim_r0);
      merge(o_sim_ri, cfg, "r_indiv", sim_r_indiv);
      merge(o_sim_case, cfg, "case", sim_case_text);
      merge(o_sim_seed, cfg, "seed", sim_seed);
      merge(o_sim_out, cfg, "out_dir", sim_out);
      if (sim_dims.empty())
        throw jointlca::ValidationError("simulate: --dims (or config \"dims\") is required");

      jointlca::SimConfig config;
      config.n = sim_n;
      config.dims = sim_dims;
      config.r0 = sim_r0;
      config.r_indiv = sim_r_indiv;
      config.sim_case = parse_case(sim_case_text);
      config.seed = sim_seed;
      auto [dataset, truth] = jointlca::generate(config);

      fs::create_directories(sim_out);
      for (std::size_t i = 0; i < dataset.views.size(); ++i)
        jointlca::write_view_csv(dataset.views[i].values,
                                 (fs::path(sim_out) / ("view_" + std::to_string(i) + ".csv"))
                                     .string());
      write_text(fs::path(sim_out) / "truth.json", jointlca::ground_truth_to_json(truth));
      std::cout << "wrote " << dataset.views.size() << " views (" << dataset.n
                << " samples) to " << sim_out << "\n";
      return kExitOk;
    }

    if (fit->parsed()) {
      json cfg;
      if (!fit_config_path.empty())
        cfg = load_config(fit_config_path, {"views", "lambda", "p0", "normalization",
                                            "header", "max_iters", "rel_tol", "out_dir"});
      merge(o_fit_views, cfg, "views", fit_views);
      merge(o_fit_lambda, cfg, "lambda", fit_lambda);
      merge(o_fit_p0, cfg, "p0", fit_p0);
      merge(o_fit_norm, cfg, "normalization", fit_norm);
      merge(o_fit_header, cfg, "header", fit_header);
      merge(o_fit_iters, cfg, "max_iters", fit_solver.max_iters);
      merge(o_fit_tol, cfg, "rel_tol", fit_solver.rel_tol);
      merge(o_fit_out, cfg, "out_dir", fit_out);
      if (fit_lambda < 0.0) throw jointlca::ValidationError("lambda must be nonnegative");

      const jointlca::MultiviewDataset dataset = center_all(load_views(fit_views, fit_header));
      const jointlca::CrossCovarianceSet ccset =
          jointlca::cross_covariances(dataset, parse_normalization(fit_norm));
      Eigen::Index p0 = fit_p0;
      if (p0 == 0)
        for (Eigen::Index p : ccset.dims()) p0 = (p0 == 0) ? p : std::min(p0, p);

      auto [model, trace] = jointlca::fit_penalized(ccset, fit_lambda, p0, fit_solver);
      fs::create_directories(fit_out);
      jointlca::save_model(model, (fs::path(fit_out) / "model.json").string());
      write_trace_json(trace, fs::path(fit_out) / "trace.json");
      std::cout << "estimated rank: " << jointlca::estimated_rank(model) << "\n";
      return kExitOk;
    }

    if (sel->parsed()) {
      json cfg;
      if (!sel_config_path.empty())
        cfg = load_config(sel_config_path,
                          {"views", "folds", "grid_size", "p0", "normalization", "header",
                           "seed", "max_iters", "rel_tol", "out_dir"});
      merge(o_sel_views, cfg, "views", sel_views);
      merge(o_sel_folds, cfg, "folds", sel_folds);
      merge(o_sel_grid, cfg, "grid_size", sel_grid);
      merge(o_sel_p0, cfg, "p0", sel_p0);
      merge(o_sel_norm, cfg, "normalization", sel_norm);
      merge(o_sel_header, cfg, "header", sel_header);
      merge(o_sel_seed, cfg, "seed", sel_seed);
      merge(o_sel_iters, cfg, "max_iters", sel_solver.max_iters);
      merge(o_sel_tol, cfg, "rel_tol", sel_solver.rel_tol);
      merge(o_sel_out, cfg, "out_dir", sel_out);

      const jointlca::MultiviewDataset dataset = load_views(sel_views, sel_header);
      if (sel_folds > dataset.n)
        throw jointlca::ValidationError("fold count " + std::to_string(sel_folds) +
                                        " exceeds sample count " + std::to_string(dataset.n));
      Eigen::Index p0 = sel_p0;
      if (p0 == 0)
        for (const auto& v : dataset.views)
          p0 = (p0 == 0) ? v.values.cols() : std::min(p0, v.values.cols());

      jointlca::RankSelectionOptions opts;
      opts.K = sel_folds;
      opts.grid_size = sel_grid;
      opts.seed = sel_seed;
      opts.normalization = parse_normalization(sel_norm);
      opts.solver = sel_solver;
      const jointlca::SelectRankResult result = jointlca::select_rank(dataset, p0, opts);

      fs::create_directories(sel_out);
      write_text(fs::path(sel_out) / "cv.json", jointlca::cv_result_to_json(result.cv));
      jointlca::save_model(result.model, (fs::path(sel_out) / "model_refit.json").string());
      std::cout << "selected rank: " << result.rank
                << "\nselected lambda: " << result.cv.chosen_lambda << "\n";
      return kExitOk;
    }

    if (bench->parsed()) {
      json cfg = load_config(bench_config_path,
                             {"cells", "replications", "seed", "threads", "folds",
                              "grid_size", "max_iters", "rel_tol", "out_dir"});
      jointlca::BenchmarkOptions opts;
      opts.replications = cfg.value("replications", 1);
      merge(o_bench_reps, cfg, "replications", opts.replications);
      if (o_bench_reps->count() > 0) opts.replications = bench_reps;
      opts.master_seed = cfg.value("seed", 0ULL);
      if (o_bench_seed->count() > 0) opts.master_seed = bench_seed;
      opts.threads = cfg.value("threads", 1);
      if (o_bench_threads->count() > 0) opts.threads = bench_threads;
      opts.selection.K = cfg.value("folds", 5);
      opts.selection.grid_size = cfg.value("grid_size", 50);
      opts.selection.solver.max_iters = cfg.value("max_iters", 500);
      opts.selection.solver.rel_tol = cfg.value("rel_tol", 1e-6);
      merge(o_bench_out, cfg, "out_dir", bench_out);
      if (opts.replications < 1)
        throw jointlca::ValidationError("replications must be >= 1");

      const auto cells = parse_cells(cfg);
      const auto records = jointlca::run_benchmark(cells, opts);
      const auto summary = jointlca::summarize(cells, records);
      fs::create_directories(bench_out);
      write_text(fs::path(bench_out) / "benchmark_results.csv",
                 jointlca::benchmark_records_csv(records));
      write_text(fs::path(bench_out) / "benchmark_summary.json",
                 jointlca::benchmark_summary_json(summary));
      double total_time = 0.0;
      for (const auto& r : records) total_time += r.wall_time_s;
      std::cerr << "benchmark: " << records.size() << " replications, "
                << total_time << " s total\n";
      return kExitOk;
    }

    if (scores->parsed()) {
      const jointlca::MultiviewDataset dataset =
          center_all(load_views(scores_views, scores_header));
      const jointlca::JointLCAModel model = jointlca::load_model(scores_model_path);
      if (model.r < 1)
        throw jointlca::ValidationError("scores: model has rank 0");
      if (model.view_count() != dataset.view_count())
        throw jointlca::ValidationError("scores: model has " +
                                        std::to_string(model.view_count()) +
                                        " views but " + std::to_string(dataset.view_count()) +
                                        " view files were given");
      for (Eigen::Index i = 0; i < model.view_count(); ++i) {
        if (model.loadings[i].rows() != dataset.views[i].values.cols())
          throw jointlca::ValidationError("scores: view " + std::to_string(i) +
                                          " feature count does not match the model");
        for (Eigen::Index k = 0; k < model.r; ++k)
          if (!(model.scales[i](k) > 0.0))
            throw jointlca::ValidationError("scores: zero scale d at view " +
                                            std::to_string(i) + ", component " +
                                            std::to_string(k));
      }
      Eigen::MatrixXd u = Eigen::MatrixXd::Zero(dataset.n, model.r);
      for (Eigen::Index i = 0; i < model.view_count(); ++i)
        u += dataset.views[i].values * model.loadings[i] *
             model.scales[i].cwiseInverse().asDiagonal();
      u /= static_cast<double>(model.view_count());
      fs::create_directories(scores_out);
      jointlca::write_view_csv(u, (fs::path(scores_out) / "scores.csv").string());
      std::cout << "wrote " << dataset.n << "x" << model.r << " score matrix\n";
      return kExitOk;
    }

    if (oracle->parsed()) {
      using namespace jointlca::oracles;
      jointlca::Rng rng(oracle_seed);
      std::vector<OracleReport> reports;

      // prox vs group threshold
      for (int t = 0; t < 10; ++t) {
        Eigen::VectorXd y(3);
        for (Eigen::Index i = 0; i < 3; ++i) y(i) = rng.uniform(-2.0, 2.0);
        const double lambda = rng.uniform(0.0, 3.0);
        const std::vector<double> w(3, 1.0);
        const jointlca::SigmaGroup group = jointlca::update_sigma_group(0, y, w, lambda);
        const Eigen::VectorXd expect = prox_oracle(y, lambda);
        OracleReport rep;
        rep.name = "group_threshold_vs_prox";
        rep.instance = "random y[3], lambda=" + std::to_string(lambda);
        rep.oracle_value = expect.norm();
        rep.solver_value = group.values.norm();
        rep.discrepancy = (expect - group.values).norm();
        rep.tolerance = 1e-8;
        rep.pass = rep.discrepancy <= rep.tolerance;
        reports.push_back(std::move(rep));
      }

      // rank-1 two-view refit vs top singular value
      for (int t = 0; t < 5; ++t) {
        Eigen::MatrixXd s(5, 4);
        for (Eigen::Index r = 0; r < 5; ++r)
          for (Eigen::Index c = 0; c < 4; ++c) s(r, c) = rng.normal();
        const Rank1Cca cca = diag_cca_r1_oracle(s);
        jointlca::CrossCovarianceSet ccset({5, 4}, {s}, {1.0});
        jointlca::SolverOptions solver;
        solver.rel_tol = 1e-13;
        solver.max_iters = 2000;
        auto [model, trace] =
            jointlca::refit(ccset, 1, jointlca::initialize(ccset, 1), solver);
        OracleReport rep;
        rep.name = "refit_r1_vs_top_singular_value";
        rep.instance = "random 5x4";
        rep.oracle_value = cca.value;
        rep.solver_value = model.scales[0](0) * model.scales[1](0);
        rep.discrepancy = std::abs(rep.oracle_value - rep.solver_value);
        rep.tolerance = 1e-5;
        rep.pass = rep.discrepancy <= rep.tolerance;
        reports.push_back(std::move(rep));
      }

      fs::create_directories(oracle_out);
      write_text(fs::path(oracle_out) / "oracle-report.json", reports_to_json(reports));
      bool all_pass = true;
      for (const auto& r : reports) all_pass = all_pass && r.pass;
      std::cout << (all_pass ? "all oracle checks passed" : "oracle check FAILED") << "\n";
      return all_pass ? kExitOk : kExitComputation;
    }
  } catch (const jointlca::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitComputation;
  }
  return kExitOk;
}
