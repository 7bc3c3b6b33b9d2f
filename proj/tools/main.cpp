#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <nlohmann/json.hpp>
#include <random>
#include <string>
#include <vector>

#include "groupbound/aggregate.hpp"
#include "groupbound/calibration.hpp"
#include "groupbound/errors.hpp"
#include "groupbound/parallel.hpp"
#include "groupbound/simulate.hpp"
#include "groupbound/version.hpp"
#include "io.hpp"

namespace gb = groupbound;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

std::string iso8601_now() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

std::uint64_t draw_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::string default_cache_path() {
  if (const char* env = std::getenv("GROUPBOUND_CACHE")) return env;
  return "groupbound_calibration.json";
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie strictly between 0 and 1");
  }
}

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie strictly between 0 and 1");
  }
}

/// Deterministic manifest fields; the wall-clock timestamps go only into the
/// side file so result files reproduce bit-for-bit under the same seed.
json manifest_body(const std::string& command, const json& parameters,
                   std::uint64_t seed, const std::string& cache_path) {
  return json{{"command", command},
              {"parameters", parameters},
              {"seed", seed},
              {"calibration_cache", cache_path},
              {"version", gb::kVersion}};
}

void write_manifest_sidecar(const std::string& out_path, json manifest,
                            const std::string& started,
                            const std::string& finished) {
  manifest["started_at"] = started;
  manifest["finished_at"] = finished;
  std::ofstream out(out_path + ".manifest.json");
  out << manifest.dump(2) << "\n";
}

std::vector<int> to_one_based(const std::vector<int>& zero_based) {
  std::vector<int> out;
  out.reserve(zero_based.size());
  for (int j : zero_based) out.push_back(j + 1);
  return out;
}

struct CommonArgs {
  std::string x_path, y_path, out_path;
  double alpha = 0.05;
  int splits = 11;
  double epsilon = 0.1;
  int s = 10;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool header = false;
  unsigned threads = gb::default_threads();
  std::string cache_path = default_cache_path();
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_groups_io = true) {
  if (with_groups_io) {
    cmd->add_option("--x", args.x_path, "design matrix CSV (n rows, p cols)")
        ->required();
    cmd->add_option("--y", args.y_path, "response CSV (one column)")
        ->required();
    cmd->add_option("--out", args.out_path, "output path")->required();
    cmd->add_flag("--header", args.header, "skip one header row in the CSVs");
  }
  cmd->add_option("--alpha", args.alpha, "confidence level (default 0.05)");
  cmd->add_option("--splits", args.splits, "number of sample splits K");
  cmd->add_option("--epsilon", args.epsilon, "quantile parameter");
  cmd->add_option("--s", args.s, "projection dimension (0 = auto)");
  cmd->add_option("--seed", args.seed, "master seed (drawn if omitted)")
      ->each([&args](const std::string&) { args.seed_given = true; });
  cmd->add_option("--threads", args.threads, "worker threads");
  cmd->add_option("--cache", args.cache_path, "calibration cache file");
}

gb::RegressionData load_data(const CommonArgs& args) {
  gb::RegressionData data;
  data.X = gb::io::read_csv_matrix(args.x_path, args.header);
  data.Y = gb::io::read_csv_vector(args.y_path, args.header);
  data.validate();
  return data;
}

void check_group_indices(const std::vector<gb::io::GroupSpec>& groups,
                         Eigen::Index p) {
  for (const auto& g : groups) {
    for (int j : g.indices) {
      if (j < 0 || j >= p) {
        throw gb::DimensionMismatch(
            "group '" + g.name + "' index " + std::to_string(j + 1) +
            " out of range 1.." + std::to_string(p));
      }
    }
    if (g.indices.empty()) {
      throw gb::DimensionMismatch("group '" + g.name + "' is empty");
    }
  }
}

// --- calibrate -------------------------------------------------------------

int cmd_calibrate(int dim, double alpha, int reps, std::uint64_t seed,
                  const std::string& cache_path, unsigned threads) {
  check_alpha(alpha);
  gb::Calibration cache(reps, seed);
  cache.set_threads(threads);
  cache.load(cache_path);

  gb::CalibrationEntry entry;
  bool reused = false;
  if (cache.has(dim, alpha)) {
    entry = cache.entry(dim, alpha);
    reused = entry.reps == reps && entry.seed == seed;
  }
  if (!reused) {
    gb::CalibrateOptions opt;
    opt.threads = threads;
    entry = gb::calibrate_m(dim, alpha, reps, seed, opt);
    cache.upsert(entry);
    cache.save(cache_path);
  }
  std::cout << "m = " << entry.m << "\n"
            << "m/dim = " << static_cast<double>(entry.m) / dim << "\n"
            << "achieved coverage = " << entry.achieved_coverage
            << (reused ? " (cached)" : "") << "\n";
  return 0;
}

// --- bound -----------------------------------------------------------------

int cmd_bound(const CommonArgs& args, const std::string& groups_path) {
  check_alpha(args.alpha);
  check_epsilon(args.epsilon);
  const std::string started = iso8601_now();
  const gb::RegressionData data = load_data(args);
  const auto groups = gb::io::read_groups_json(groups_path);
  check_group_indices(groups, data.p());

  gb::Calibration cache;
  cache.set_threads(args.threads);
  cache.load(args.cache_path);

  gb::AggregateOptions opt;
  opt.K = args.splits;
  opt.epsilon = args.epsilon;
  opt.s = args.s;
  opt.threads = args.threads;

  std::vector<std::vector<int>> plain;
  plain.reserve(groups.size());
  for (const auto& g : groups) plain.push_back(g.indices);
  const auto results =
      gb::aggregate_bounds(data, plain, args.alpha, cache, args.seed, opt);
  cache.save(args.cache_path);

  json out_groups = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    out_groups.push_back({{"name", groups[i].name},
                          {"indices", to_one_based(r.bound.group)},
                          {"lower_bound", r.bound.lower_bound},
                          {"rejected", r.bound.rejected},
                          {"per_split_bounds", r.per_split},
                          {"alpha_split", r.alpha_split},
                          {"vertex_count", r.m}});
  }
  const json parameters = {{"x", args.x_path},       {"y", args.y_path},
                           {"groups", groups_path},  {"alpha", args.alpha},
                           {"splits", args.splits},  {"epsilon", args.epsilon},
                           {"s", args.s},            {"header", args.header}};
  const json manifest =
      manifest_body("bound", parameters, args.seed, args.cache_path);
  json doc = {{"groups", out_groups}, {"manifest", manifest}};
  {
    std::ofstream out(args.out_path);
    if (!out) throw std::runtime_error("cannot write " + args.out_path);
    out << doc.dump(2) << "\n";
  }
  write_manifest_sidecar(args.out_path, manifest, started, iso8601_now());

  for (std::size_t i = 0; i < results.size(); ++i) {
    std::cout << groups[i].name << ": T = " << results[i].bound.lower_bound
              << (results[i].bound.rejected ? "  (rejected)" : "") << "\n";
  }
  std::cout << "wrote " << args.out_path << "\n";
  return 0;
}

// --- cluster ---------------------------------------------------------------

json tree_to_json(const std::shared_ptr<gb::ClusterNode>& node) {
  json j = {{"id", node->id},
            {"members", to_one_based(node->members)},
            {"height", node->height},
            {"tested", node->tested},
            {"pruned", node->pruned}};
  if (node->bound) {
    j["bound"] = {{"lower_bound", node->bound->lower_bound},
                  {"rejected", node->bound->rejected},
                  {"alpha", node->bound->alpha}};
  } else {
    j["bound"] = nullptr;
  }
  json children = json::array();
  if (node->left) children.push_back(tree_to_json(node->left));
  if (node->right) children.push_back(tree_to_json(node->right));
  j["children"] = children;
  return j;
}

int cmd_cluster(const CommonArgs& args, bool bonferroni) {
  check_alpha(args.alpha);
  check_epsilon(args.epsilon);
  const std::string started = iso8601_now();
  const gb::RegressionData data = load_data(args);

  gb::Calibration cache;
  cache.set_threads(args.threads);
  cache.load(args.cache_path);

  gb::ClusterTestOptions opt;
  opt.aggregate.K = args.splits;
  opt.aggregate.epsilon = args.epsilon;
  opt.aggregate.s = args.s;
  opt.aggregate.threads = args.threads;
  opt.bonferroni = bonferroni;

  auto root = gb::average_linkage_tree(data.X);
  gb::cluster_test(data, root, args.alpha, cache, args.seed, opt);
  cache.save(args.cache_path);

  const json parameters = {
      {"x", args.x_path},         {"y", args.y_path},
      {"alpha", args.alpha},      {"splits", args.splits},
      {"epsilon", args.epsilon},  {"s", args.s},
      {"header", args.header},    {"bonferroni", bonferroni}};
  const json manifest =
      manifest_body("cluster", parameters, args.seed, args.cache_path);
  json doc = {{"tree", tree_to_json(root)}, {"manifest", manifest}};
  {
    std::ofstream out(args.out_path);
    if (!out) throw std::runtime_error("cannot write " + args.out_path);
    out << doc.dump(2) << "\n";
  }
  write_manifest_sidecar(args.out_path, manifest, started, iso8601_now());

  int tested = 0, rejected = 0;
  std::function<void(const std::shared_ptr<gb::ClusterNode>&)> walk =
      [&](const std::shared_ptr<gb::ClusterNode>& node) {
        if (!node) return;
        if (node->tested) ++tested;
        if (node->bound && node->bound->rejected) ++rejected;
        walk(node->left);
        walk(node->right);
      };
  walk(root);
  std::cout << "tested " << tested << " clusters, rejected " << rejected
            << "; wrote " << args.out_path << "\n";
  return 0;
}

// --- simulate ----------------------------------------------------------------

int cmd_simulate(const std::string& setting_name, int sims,
                 std::vector<double> sigmas, int scale_p, int scale_n,
                 const CommonArgs& args) {
  check_alpha(args.alpha);
  check_epsilon(args.epsilon);
  const std::string started = iso8601_now();
  if (sigmas.empty()) {
    sigmas = {0.001, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0};
  }

  gb::Calibration cache;
  cache.set_threads(args.threads);
  cache.load(args.cache_path);

  gb::AggregateOptions opt;
  opt.K = args.splits;
  opt.epsilon = args.epsilon;
  opt.s = args.s;
  opt.threads = args.threads;

  std::ofstream out(args.out_path);
  if (!out) throw std::runtime_error("cannot write " + args.out_path);
  out << "setting,sigma,group,sims,rejections,rate,mean_bound\n";
  out.precision(12);
  for (double sigma : sigmas) {
    gb::SimSetting setting = gb::build_setting(setting_name, sigma);
    if (scale_p > 0) setting.p = scale_p;
    if (scale_n > 0) setting.n = scale_n;
    const auto groups = gb::default_groups(setting);
    const auto result = gb::run_experiment(setting, groups, sims, args.alpha,
                                           cache, args.seed, opt);
    for (const auto& o : result.outcomes) {
      out << setting.name << "," << sigma << "," << o.group.name << ","
          << o.sims << "," << o.rejections << "," << o.rate << ","
          << o.mean_bound << "\n";
      std::cout << "sigma=" << sigma << " " << o.group.name
                << " rate=" << o.rate << " mean_bound=" << o.mean_bound
                << "\n";
    }
  }
  out.close();
  cache.save(args.cache_path);

  const json parameters = {{"setting", setting_name}, {"sims", sims},
                           {"sigmas", sigmas},        {"scale_p", scale_p},
                           {"scale_n", scale_n},      {"alpha", args.alpha},
                           {"splits", args.splits},   {"epsilon", args.epsilon},
                           {"s", args.s}};
  write_manifest_sidecar(
      args.out_path,
      manifest_body("simulate", parameters, args.seed, args.cache_path),
      started, iso8601_now());
  std::cout << "wrote " << args.out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Assumption-free lower confidence bounds for l1-norms of "
               "coefficient groups in high-dimensional regression"};
  app.require_subcommand(1);

  // calibrate
  auto* cal = app.add_subcommand(
      "calibrate", "compute the vertex count m for a dimension and level");
  int cal_dim = 0;
  double cal_alpha = 0.05;
  int cal_reps = 5000;
  CommonArgs cal_args;
  cal->add_option("--dim", cal_dim, "noise dimension")->required();
  cal->add_option("--alpha", cal_alpha, "level");
  cal->add_option("--reps", cal_reps, "Monte Carlo replicates");
  cal->add_option("--seed", cal_args.seed, "seed")
      ->each([&cal_args](const std::string&) { cal_args.seed_given = true; });
  cal->add_option("--cache", cal_args.cache_path, "calibration cache file");
  cal->add_option("--threads", cal_args.threads, "worker threads");

  // bound
  auto* bound = app.add_subcommand(
      "bound", "aggregated group lower bounds for given groups");
  CommonArgs bound_args;
  std::string groups_path;
  add_common(bound, bound_args);
  bound->add_option("--groups", groups_path, "groups JSON file")->required();

  // cluster
  auto* cluster = app.add_subcommand(
      "cluster", "top-down testing over the correlation dendrogram");
  CommonArgs cluster_args;
  bool bonferroni = false;
  add_common(cluster, cluster_args);
  cluster->add_flag("--bonferroni", bonferroni,
                    "test node G at level alpha*|G|/p instead of alpha");

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "rejection-frequency experiments on synthetic settings");
  CommonArgs sim_args;
  std::string setting_name;
  int sims = 100;
  std::vector<double> sigmas;
  int scale_p = 0, scale_n = 0;
  simulate->add_option("--setting", setting_name, "one of i..vi")->required();
  simulate->add_option("--sims", sims, "simulated datasets per sigma");
  simulate->add_option("--sigma", sigmas, "noise levels (repeatable)");
  simulate->add_option("--scale-p", scale_p, "override p");
  simulate->add_option("--scale-n", scale_n, "override n");
  simulate->add_option("--out", sim_args.out_path, "output CSV")->required();
  add_common(simulate, sim_args, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    for (CommonArgs* a : {&cal_args, &bound_args, &cluster_args, &sim_args}) {
      if (!a->seed_given) a->seed = draw_seed();
    }
    if (cal->parsed()) {
      if (!cal_args.seed_given) {
        std::cout << "seed = " << cal_args.seed << " (drawn)\n";
      }
      return cmd_calibrate(cal_dim, cal_alpha, cal_reps, cal_args.seed,
                           cal_args.cache_path, cal_args.threads);
    }
    if (bound->parsed()) {
      if (!bound_args.seed_given) {
        std::cout << "seed = " << bound_args.seed << " (drawn)\n";
      }
      return cmd_bound(bound_args, groups_path);
    }
    if (cluster->parsed()) {
      if (!cluster_args.seed_given) {
        std::cout << "seed = " << cluster_args.seed << " (drawn)\n";
      }
      return cmd_cluster(cluster_args, bonferroni);
    }
    if (simulate->parsed()) {
      if (!sim_args.seed_given) {
        std::cout << "seed = " << sim_args.seed << " (drawn)\n";
      }
      return cmd_simulate(setting_name, sims, sigmas, scale_p, scale_n,
                          sim_args);
    }
  } catch (const gb::io::ParseError& e) {
    std::cerr << "parse error";
    if (e.row > 0) std::cerr << " at row " << e.row << ", column " << e.column;
    std::cerr << ": " << e.message << "\n";
    return kExitUsage;
  } catch (const gb::DimensionMismatch& e) {
    std::cerr << "data inconsistency: " << e.what() << "\n";
    return kExitData;
  } catch (const gb::UnknownSetting& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const gb::CalibrationDiverged& e) {
    std::cerr << "calibration diverged: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
