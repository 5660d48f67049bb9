#include "jointlca/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <sstream>

#include <json.hpp>

namespace jointlca {

double subspace_error(const std::vector<Eigen::MatrixXd>& estimates,
                      const std::vector<Eigen::MatrixXd>& truths) {
  if (estimates.size() != truths.size())
    throw ValidationError("subspace_error: view count mismatch");
  const auto I = static_cast<double>(truths.size());
  double total = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (estimates[i].rows() != truths[i].rows())
      throw ValidationError("subspace_error: row dimension mismatch at view " +
                            std::to_string(i));
    const auto r = static_cast<double>(truths[i].cols());
    const auto r_hat = static_cast<double>(estimates[i].cols());
    // ||P - Phat||_F^2 = r + rhat - 2 ||V^T Vhat||_F^2 for orthonormal columns
    const double cross = (truths[i].transpose() * estimates[i]).squaredNorm();
    total += (r + r_hat - 2.0 * cross) / (I * r);
  }
  return total;
}

double rank_accuracy(const std::vector<BenchmarkRecord>& records) {
  if (records.empty()) throw ValidationError("rank_accuracy: empty record set");
  std::size_t hits = 0;
  for (const auto& rec : records)
    if (!rec.failed && rec.estimated == rec.true_rank) ++hits;
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

BenchmarkRecord run_replication(const BenchmarkCell& cell, int rep,
                                const BenchmarkOptions& opts) {
  BenchmarkRecord rec;
  rec.config_id = cell.id;
  rec.replication = rep;
  rec.true_rank = cell.config.r0;
  std::uint64_t cell_seed = Rng::derive(opts.master_seed, fnv1a(cell.id));
  rec.seed = Rng::derive(cell_seed, static_cast<std::uint64_t>(rep));
  const auto t0 = std::chrono::steady_clock::now();
  try {
    SimConfig config = cell.config;
    config.seed = rec.seed;
    auto [dataset, truth] = generate(config, opts.hooks);
    Eigen::Index p0 = config.dims[0];
    for (Eigen::Index p : config.dims) p0 = std::min(p0, p);

    RankSelectionOptions sel = opts.selection;
    sel.seed = Rng::derive(rec.seed, 0x5e1ec7ULL);
    const SelectRankResult result = select_rank(dataset, p0, sel);

    rec.estimated = result.rank;
    rec.lambda = result.cv.chosen_lambda;
    rec.subspace_err = subspace_error(result.model.loadings, truth.loadings);
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
  }
  rec.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double quantile(std::vector<double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return sorted[lo] + (pos - std::floor(pos)) * (sorted[hi] - sorted[lo]);
}

} // namespace

std::vector<BenchmarkRecord> run_benchmark(const std::vector<BenchmarkCell>& grid,
                                           const BenchmarkOptions& opts) {
  if (opts.replications < 1)
    throw ValidationError("run_benchmark: replications must be >= 1");
  if (grid.empty()) throw ValidationError("run_benchmark: empty config grid");

  struct Task {
    std::size_t cell;
    int rep;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < grid.size(); ++c)
    for (int rep = 0; rep < opts.replications; ++rep) tasks.push_back({c, rep});

  std::vector<BenchmarkRecord> records(tasks.size());
  const int threads = std::max(1, opts.threads);
  if (threads == 1) {
    for (std::size_t t = 0; t < tasks.size(); ++t)
      records[t] = run_replication(grid[tasks[t].cell], tasks[t].rep, opts);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        const std::size_t t = next.fetch_add(1);
        if (t >= tasks.size()) return;
        records[t] = run_replication(grid[tasks[t].cell], tasks[t].rep, opts);
      }
    };
    std::vector<std::future<void>> pool;
    for (int w = 0; w < threads; ++w)
      pool.push_back(std::async(std::launch::async, worker));
    for (auto& f : pool) f.get();
  }
  return records;
}

std::vector<BenchmarkSummaryCell> summarize(const std::vector<BenchmarkCell>& grid,
                                            const std::vector<BenchmarkRecord>& records) {
  std::vector<BenchmarkSummaryCell> cells;
  for (const auto& cell : grid) {
    BenchmarkSummaryCell s;
    s.config_id = cell.id;
    std::vector<BenchmarkRecord> own;
    std::vector<double> errs;
    for (const auto& rec : records) {
      if (rec.config_id != cell.id) continue;
      own.push_back(rec);
      if (rec.failed)
        ++s.failures;
      else
        errs.push_back(rec.subspace_err);
    }
    s.replications = static_cast<int>(own.size());
    if (!own.empty()) s.accuracy = rank_accuracy(own);
    std::sort(errs.begin(), errs.end());
    if (!errs.empty()) {
      s.err_min = errs.front();
      s.err_max = errs.back();
      s.err_q1 = quantile(errs, 0.25);
      s.err_median = quantile(errs, 0.5);
      s.err_q3 = quantile(errs, 0.75);
    }
    cells.push_back(std::move(s));
  }
  return cells;
}

std::string benchmark_records_csv(const std::vector<BenchmarkRecord>& records) {
  // wall time is deliberately absent: the file must be byte-identical
  // across runs with the same master seed
  std::ostringstream out;
  out << "config_id,replication,seed,true_rank,estimated_rank,subspace_error,lambda,status\n";
  for (const auto& rec : records) {
    out << rec.config_id << ',' << rec.replication << ',' << rec.seed << ','
        << rec.true_rank << ',' << rec.estimated << ',' << fmt_double(rec.subspace_err)
        << ',' << fmt_double(rec.lambda) << ',' << (rec.failed ? "error" : "ok") << '\n';
  }
  return out.str();
}

std::string benchmark_summary_json(const std::vector<BenchmarkSummaryCell>& cells) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& s : cells) {
    nlohmann::json c;
    c["config_id"] = s.config_id;
    c["replications"] = s.replications;
    c["failures"] = s.failures;
    c["rank_accuracy"] = s.accuracy;
    c["subspace_error"] = {{"min", s.err_min}, {"q1", s.err_q1},    {"median", s.err_median},
                           {"q3", s.err_q3},   {"max", s.err_max}};
    doc.push_back(std::move(c));
  }
  return doc.dump(2);
}

} // namespace jointlca
