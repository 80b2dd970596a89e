#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <CLI11.hpp>
#include <json.hpp>

#include "wtn/data.hpp"
#include "wtn/eval.hpp"
#include "wtn/experiments.hpp"
#include "wtn/io.hpp"
#include "wtn/linalg.hpp"
#include "wtn/norms.hpp"
#include "wtn/synth.hpp"
#include "wtn/train.hpp"

#ifndef WTN_VERSION
#define WTN_VERSION "unknown"
#endif

namespace wtn::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string version() { return WTN_VERSION; }

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(' ', used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(what + ": '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw UsageError(what + ": empty list");
  return out;
}

std::string format_list(const std::vector<double>& v) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t t = 0; t < v.size(); ++t) out << (t ? "," : "") << v[t];
  return out.str();
}

TrainMode parse_mode(const std::string& s) {
  if (s == "deterministic") return TrainMode::deterministic;
  if (s == "parallel") return TrainMode::parallel;
  throw UsageError("mode must be deterministic or parallel, got '" + s + "'");
}

// Options shared by every command that trains models.
struct TrainOptions {
  TrainConfig cfg;
  std::string mode = "deterministic";

  explicit TrainOptions(TrainConfig defaults) : cfg(defaults) {}

  void add(CLI::App* app) {
    app->add_option("--k", cfg.k, "factor rank");
    app->add_option("--lambda", cfg.lambda, "penalty weight");
    app->add_option("--alpha", cfg.alpha, "marginal exponent in [0,1]");
    app->add_option("--epochs", cfg.epochs);
    app->add_option("--learning-rate", cfg.learning_rate);
    app->add_option("--lr-decay", cfg.lr_decay, "multiplicative decay per epoch");
    app->add_option("--init-scale", cfg.init_scale, "sd of the initial factors");
    app->add_option("--seed", cfg.seed, "training seed");
    app->add_option("--mode", mode, "deterministic or parallel");
    app->add_option("--threads", cfg.threads, "parallel mode workers, 0 = all cores");
    app->add_option("--center", cfg.center, "subtract the training mean");
  }

  TrainConfig resolve() const {
    TrainConfig out = cfg;
    out.mode = parse_mode(mode);
    try {
      out.validate();
    } catch (const InvalidInput& e) {
      throw UsageError(e.what());
    }
    return out;
  }
};

struct GridOptions {
  std::string lambdas;
  double lambda_min;
  double lambda_max;
  int lambda_count;
  std::string alphas;

  GridOptions(double lo, double hi, int count, std::string a)
      : lambda_min(lo), lambda_max(hi), lambda_count(count), alphas(std::move(a)) {}

  void add(CLI::App* app) {
    app->add_option("--lambdas", lambdas, "explicit comma-separated lambda grid");
    app->add_option("--lambda-min", lambda_min);
    app->add_option("--lambda-max", lambda_max);
    app->add_option("--lambda-count", lambda_count, "log-spaced points");
    app->add_option("--alphas", alphas, "comma-separated alpha values");
  }

  std::vector<double> lambda_grid() const {
    if (!lambdas.empty()) return parse_list(lambdas, "lambdas");
    try {
      return log_grid(lambda_min, lambda_max, lambda_count);
    } catch (const InvalidInput& e) {
      throw UsageError(e.what());
    }
  }

  std::vector<double> alpha_grid() const {
    auto a = parse_list(alphas, "alphas");
    for (double x : a)
      if (!(x >= 0.0 && x <= 1.0)) throw UsageError("alphas must lie in [0, 1]");
    return a;
  }
};

// Every option value after parsing, defaults included.
json resolved_config(const CLI::App* app) {
  json cfg = json::object();
  for (const CLI::Option* opt : app->get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config" || name == "manifest") continue;
    cfg[name] = opt->count() > 0 ? opt->results().back() : opt->get_default_str();
  }
  return cfg;
}

void write_manifest(const fs::path& out_dir, const std::string& command, const CLI::App* app, json seeds,
                    const std::vector<std::string>& outputs) {
  json m;
  m["tool"] = "wtn";
  m["version"] = version();
  m["command"] = command;
  m["config"] = resolved_config(app);
  m["seeds"] = std::move(seeds);
  m["outputs"] = outputs;
  write_text(out_dir / "manifest.json", m.dump(2) + "\n");
}

std::unordered_map<std::string, Index> index_of(const std::vector<std::string>& ids) {
  std::unordered_map<std::string, Index> map;
  for (std::size_t k = 0; k < ids.size(); ++k) map.emplace(ids[k], static_cast<Index>(k));
  return map;
}

struct DistributionOptions {
  std::string kind = "uniform";
  Index n_a = 0;
  Index n_b = 0;
  std::string data;

  void add(CLI::App* app) {
    app->add_option("--distribution", kind, "uniform, two-block or empirical");
    app->add_option("--n-a", n_a, "two-block: size of block A");
    app->add_option("--n-b", n_b, "two-block: size of block B");
    app->add_option("--marginals-data", data, "empirical: triplet file whose marginals to use");
  }

  SamplingDistribution make(Index n, Index m) const {
    if (kind == "uniform") return SamplingDistribution::uniform(n, m);
    if (kind == "two-block") {
      if (n_a < 1 || n_b < 1) throw UsageError("two-block needs --n-a and --n-b");
      return SamplingDistribution::two_block(n_a, n_b, n, m);
    }
    if (kind == "empirical") {
      if (data.empty()) throw UsageError("empirical distribution needs --marginals-data");
      const RatingsDataset ds = load_triplets(data);
      if (ds.n_users() != n || ds.m_items() != m) throw InvalidInput("marginals data does not match the matrix size");
      return SamplingDistribution::product(empirical_marginals(ds));
    }
    throw UsageError("unknown distribution '" + kind + "'");
  }
};

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

void print_json(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

// Prepends `--key=value` for every key of the manifest and config file named in `args`, so that
// explicit flags (which come later) win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  if (args.empty()) return args;
  std::size_t sub = 0;
  while (sub < args.size() && !args[sub].empty() && args[sub][0] == '-') ++sub;
  if (sub == args.size()) return args;

  std::string config_path, manifest_path;
  for (std::size_t t = sub + 1; t < args.size(); ++t) {
    auto take = [&](const std::string& flag, std::string& dest) {
      if (args[t] == flag && t + 1 < args.size()) dest = args[t + 1];
      else if (args[t].rfind(flag + "=", 0) == 0) dest = args[t].substr(flag.size() + 1);
    };
    take("--config", config_path);
    take("--manifest", manifest_path);
  }

  std::vector<std::string> injected;
  auto inject = [&](const std::string& key, const std::string& value) {
    if (value.empty()) return;  // CLI11 reads `--key=` as a missing value
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    injected.push_back("--" + flag + "=" + value);
  };
  if (!manifest_path.empty()) {
    std::ifstream in(manifest_path);
    if (!in) throw UsageError("cannot open manifest " + manifest_path);
    json m;
    try {
      m = json::parse(in);
    } catch (const json::exception& e) {
      throw UsageError("manifest " + manifest_path + ": " + e.what());
    }
    if (m.value("command", "") != args[sub]) {
      throw UsageError("manifest was written by '" + m.value("command", "") + "', not '" + args[sub] + "'");
    }
    for (const auto& [key, value] : m.at("config").items()) {
      if (key == "out") continue;  // replays choose their own output directory
      inject(key, value.get<std::string>());
    }
  }
  if (!config_path.empty()) {
    std::map<std::string, std::string> cfg;
    try {
      cfg = load_config(config_path);
    } catch (const std::exception& e) {
      throw UsageError(std::string("config: ") + e.what());
    }
    for (const auto& [key, value] : cfg) inject(key, value);
  }

  std::vector<std::string> out(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(sub + 1));
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), args.begin() + static_cast<std::ptrdiff_t>(sub + 1), args.end());
  return out;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weighted trace-norm matrix completion", "wtn"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version());
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::string out_dir = ".";
  std::string config_file, manifest_file;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--config", config_file, "key = value file; flags override it");
    sub->add_option("--manifest", manifest_file, "replay the configuration of a manifest.json");
  };
  std::function<void()> action;

  // synth-blocks
  SyntheticBlocksConfig blocks;
  TrainOptions blocks_train(blocks.train);
  GridOptions blocks_grid(1e-3, 10.0, 30, "0,1");
  {
    auto* sub = app.add_subcommand("synth-blocks", "two-block excess-error curves over a lambda grid");
    add_common(sub);
    sub->add_option("--n-a", blocks.n_a);
    sub->add_option("--n-b", blocks.n_b);
    sub->add_option("--k-true", blocks.k_true, "rank of the target");
    sub->add_option("--noise-sd", blocks.noise_sd);
    sub->add_option("--samples", blocks.sample_size, "|S|");
    sub->add_option("--target-seed", blocks.target_seed);
    sub->add_option("--sample-seed", blocks.sample_seed);
    sub->add_option("--workers", blocks.workers, "grid points trained concurrently");
    blocks_train.add(sub);
    blocks_grid.add(sub);
    sub->callback([&, sub] {
      action = [&, sub] {
        SyntheticBlocksConfig cfg = blocks;
        cfg.train = blocks_train.resolve();
        cfg.lambdas = blocks_grid.lambda_grid();
        cfg.alphas = blocks_grid.alpha_grid();
        const CurveTable table = run_synthetic_blocks(cfg);
        const fs::path dir = out_dir;
        write_text(dir / "curve.csv", to_csv(table));
        json summary = json::array();
        for (double a : cfg.alphas) {
          json s{{"alpha", a}};
          if (const auto best = table.argmin(a)) {
            s["best_lambda"] = table.rows[*best].lambda;
            s["excess_error"] = table.rows[*best].excess;
            s["excess_a"] = table.rows[*best].excess_a;
            s["excess_b"] = table.rows[*best].excess_b;
          }
          summary.push_back(s);
        }
        write_text(dir / "summary.json", summary.dump(2) + "\n");
        write_manifest(dir, "synth-blocks", sub,
                       {{"target", cfg.target_seed}, {"sample", cfg.sample_seed}, {"train_base", cfg.train.seed}},
                       {"curve.csv", "summary.json"});
        print_json(out, summary);
      };
    });
  }

  // gen-lowrank
  Index gen_n = 100, gen_m = 100, gen_k = 2;
  std::uint64_t gen_seed = 1, gen_sample_seed = 2;
  std::size_t gen_samples = 0;
  double gen_noise = 0.0, gen_exponent = 0.8;
  bool gen_dense = true;
  DistributionOptions gen_dist;
  {
    auto* sub = app.add_subcommand("gen-lowrank", "orthogonal low-rank target and optional noisy sample");
    add_common(sub);
    sub->add_option("--n", gen_n, "rows");
    sub->add_option("--m", gen_m, "columns");
    sub->add_option("--k", gen_k, "rank");
    sub->add_option("--seed", gen_seed);
    sub->add_option("--dense", gen_dense, "also write the target as matrix.csv");
    sub->add_option("--samples", gen_samples, "observations to draw; 0 = none");
    sub->add_option("--noise-sd", gen_noise);
    sub->add_option("--sample-seed", gen_sample_seed);
    sub->add_option("--exponent", gen_exponent, "power-law distribution exponent");
    gen_dist.add(sub);
    sub->callback([&, sub] {
      action = [&, sub] {
        if (gen_n < 1 || gen_m < 1 || gen_k < 1 || gen_k > std::min(gen_n, gen_m)) {
          throw UsageError("need 1 <= k <= min(n, m)");
        }
        const fs::path dir = out_dir;
        const Factors target = gen_orthogonal_factors(gen_n, gen_m, gen_k, gen_seed);
        FactorModel holder;
        holder.factors = target;
        holder.seed = gen_seed;
        save_checkpoint(dir / "target", holder);
        std::vector<std::string> outputs{"target/"};
        if (gen_dense) {
          save_matrix_csv(dir / "matrix.csv", reconstruct(target));
          outputs.push_back("matrix.csv");
        }
        if (gen_samples > 0) {
          const SamplingDistribution d =
              gen_dist.kind == "power-law"
                  ? SamplingDistribution::product(power_law_marginals(gen_n, gen_m, gen_exponent))
                  : gen_dist.make(gen_n, gen_m);
          save_triplets(dir / "triplets.csv",
                        make_dataset(sample_observations(target, d, gen_samples, gen_noise, gen_sample_seed)));
          outputs.push_back("triplets.csv");
        }
        write_manifest(dir, "gen-lowrank", sub, {{"target", gen_seed}, {"sample", gen_sample_seed}}, outputs);
      };
    });
  }

  // train
  std::string train_data;
  TrainOptions train_opts{TrainConfig{}};
  {
    auto* sub = app.add_subcommand("train", "fit one model and write a checkpoint");
    add_common(sub);
    sub->add_option("--data", train_data, "triplet CSV")->required();
    train_opts.add(sub);
    sub->callback([&, sub] {
      action = [&, sub] {
        const TrainConfig cfg = train_opts.resolve();
        const RatingsDataset ds = load_triplets(train_data);
        const FactorModel model = train(ds.observations, cfg);
        const fs::path dir = out_dir;
        save_checkpoint(dir / "model", model);
        save_id_map(dir / "model" / "users.csv", ds.user_ids);
        save_id_map(dir / "model" / "items.csv", ds.item_ids);
        json report{{"train_rmse", holdout_rmse(model, ds.observations)},
                    {"objective", objective(model, ds.observations)},
                    {"epoch_objective", model.epoch_objective}};
        write_text(dir / "train.json", report.dump(2) + "\n");
        write_manifest(dir, "train", sub, {{"train", cfg.seed}}, {"model/", "train.json"});
        out << "train_rmse " << fmt(report["train_rmse"].get<double>()) << '\n';
      };
    });
  }

  // sweep and alpha-sweep share their data handling
  struct SweepData {
    std::string data;
    LongTailConfig gen;
    AlphaSweepConfig sweep;
  };
  auto add_sweep_data = [](CLI::App* sub, SweepData& d) {
    sub->add_option("--data", d.data, "triplet CSV; a long-tail dataset is generated when omitted");
    sub->add_option("--users", d.gen.users);
    sub->add_option("--items", d.gen.items);
    sub->add_option("--ratings", d.gen.ratings);
    sub->add_option("--k-true", d.gen.k_true);
    sub->add_option("--exponent", d.gen.exponent, "popularity power law; 0 = uniform");
    sub->add_option("--noise-sd", d.gen.noise_sd);
    sub->add_option("--data-seed", d.gen.seed);
    sub->add_option("--valid", d.sweep.valid_count, "validation ratings");
    sub->add_option("--test", d.sweep.test_count, "test ratings");
    sub->add_option("--split-seed", d.sweep.split_seed);
    sub->add_option("--workers", d.sweep.workers, "grid points trained concurrently");
  };
  auto sweep_dataset = [](const SweepData& d) { return d.data.empty() ? generate_long_tail(d.gen) : load_triplets(d.data); };

  SweepData sweep_in;
  TrainOptions sweep_train(alpha_sweep_train_defaults());
  GridOptions sweep_grid(0.01, 1.0, 7, "1");
  {
    auto* sub = app.add_subcommand("sweep", "validation RMSE over a (lambda, alpha) grid");
    add_common(sub);
    add_sweep_data(sub, sweep_in);
    sweep_train.add(sub);
    sweep_grid.add(sub);
    sub->callback([&, sub] {
      action = [&, sub] {
        AlphaSweepConfig cfg = sweep_in.sweep;
        cfg.train = sweep_train.resolve();
        cfg.lambdas = sweep_grid.lambda_grid();
        cfg.alphas = sweep_grid.alpha_grid();
        const AlphaSweepResult r = run_alpha_sweep(sweep_dataset(sweep_in), cfg);
        const fs::path dir = out_dir;
        write_text(dir / "sweep.csv", grid_csv(r));
        json best = json::object();
        for (const AlphaSweepPoint& p : r.points) {
          if (!p.error.empty() || !std::isfinite(p.validation_rmse)) continue;
          if (best.empty() || p.validation_rmse < best["validation_rmse"].get<double>()) {
            best = {{"lambda", p.lambda}, {"alpha", p.alpha}, {"validation_rmse", p.validation_rmse}, {"test_rmse", p.test_rmse}};
          }
        }
        write_text(dir / "summary.json", json{{"argmin", best}}.dump(2) + "\n");
        write_manifest(dir, "sweep", sub,
                       {{"data", sweep_in.gen.seed}, {"split", cfg.split_seed}, {"train_base", cfg.train.seed}},
                       {"sweep.csv", "summary.json"});
        print_json(out, best);
      };
    });
  }

  SweepData alpha_in;
  TrainOptions alpha_train(alpha_sweep_train_defaults());
  GridOptions alpha_grid(0.01, 1.0, 7, format_list(AlphaSweepConfig{}.alphas));
  {
    auto* sub = app.add_subcommand("alpha-sweep", "test RMSE per alpha with lambda chosen on validation");
    add_common(sub);
    add_sweep_data(sub, alpha_in);
    alpha_train.add(sub);
    alpha_grid.add(sub);
    sub->callback([&, sub] {
      action = [&, sub] {
        AlphaSweepConfig cfg = alpha_in.sweep;
        cfg.train = alpha_train.resolve();
        cfg.lambdas = alpha_grid.lambda_grid();
        cfg.alphas = alpha_grid.alpha_grid();
        const AlphaSweepResult r = run_alpha_sweep(sweep_dataset(alpha_in), cfg);
        const fs::path dir = out_dir;
        write_text(dir / "alpha_sweep.csv", to_csv(r));
        write_text(dir / "alpha_grid.csv", grid_csv(r));
        write_manifest(dir, "alpha-sweep", sub,
                       {{"data", alpha_in.gen.seed}, {"split", cfg.split_seed}, {"train_base", cfg.train.seed}},
                       {"alpha_sweep.csv", "alpha_grid.csv"});
        out << to_csv(r);
      };
    });
  }

  // eval
  std::string eval_model, eval_test, eval_target, eval_truth;
  DistributionOptions eval_dist;
  {
    auto* sub = app.add_subcommand("eval", "evaluate a checkpoint");
    add_common(sub);
    sub->add_option("--model", eval_model, "checkpoint directory")->required();
    sub->add_option("--test", eval_test, "held-out triplet CSV");
    sub->add_option("--target", eval_target, "matrix CSV for the weighted MSE");
    sub->add_option("--truth", eval_truth, "noise-free matrix CSV for the excess error");
    eval_dist.add(sub);
    sub->callback([&, sub] {
      action = [&, sub] {
        if (eval_test.empty() && eval_target.empty() && eval_truth.empty()) {
          throw UsageError("eval needs --test, --target or --truth");
        }
        const fs::path model_dir = eval_model;
        const FactorModel model = load_checkpoint(model_dir);
        EvalReport report;
        if (!eval_test.empty()) {
          const RatingsDataset test = load_triplets(eval_test);
          // Map the test file's ids through the training id maps; unknown ids are cold-start.
          const bool mapped = fs::exists(model_dir / "users.csv") && fs::exists(model_dir / "items.csv");
          std::unordered_map<std::string, Index> users, items;
          if (mapped) {
            users = index_of(load_id_map(model_dir / "users.csv"));
            items = index_of(load_id_map(model_dir / "items.csv"));
          }
          auto lookup = [&](const auto& map, const std::string& id) -> Index {
            if (!mapped) return static_cast<Index>(std::stoll(id));
            const auto it = map.find(id);
            return it == map.end() ? Index{-1} : it->second;
          };
          double acc = 0.0;
          for (const Triplet& t : test.observations.triplets) {
            const Index i = lookup(users, test.user_ids[static_cast<std::size_t>(t.row)]);
            const Index j = lookup(items, test.item_ids[static_cast<std::size_t>(t.col)]);
            const double r = t.value - model.predict(i, j);
            acc += r * r;
          }
          report.rmse = std::sqrt(acc / static_cast<double>(test.size()));
        }
        const MatrixXr x = reconstruct(model.with_offset());
        auto load_sized = [&](const std::string& path) {
          MatrixXr y = load_matrix_csv(path);
          if (y.rows() != x.rows() || y.cols() != x.cols()) throw InvalidInput(path + ": size does not match the model");
          return y;
        };
        if (!eval_target.empty() || !eval_truth.empty()) {
          const SamplingDistribution d = eval_dist.make(x.rows(), x.cols());
          if (!eval_target.empty()) report.weighted_mse = weighted_mse(x, load_sized(eval_target), d);
          if (!eval_truth.empty()) {
            const WeightedError e = excess_error(x, load_sized(eval_truth), d);
            report.excess_error = e.overall;
            report.error_a = e.block_a;
            report.error_b = e.block_b;
            if (eval_target.empty()) report.weighted_mse = e.overall;
          }
        }
        const fs::path dir = out_dir;
        write_text(dir / "eval.json", to_json(report) + "\n");
        write_text(dir / "eval.csv", csv_header(report) + "\n" + csv_row(report) + "\n");
        write_manifest(dir, "eval", sub, json::object(), {"eval.json", "eval.csv"});
        out << to_json(report) << '\n';
      };
    });
  }

  // norms
  std::string norms_matrix, norms_model;
  double norms_alpha = 1.0;
  DistributionOptions norms_dist;
  {
    auto* sub = app.add_subcommand("norms", "trace norm and weighted complexities of a matrix or checkpoint");
    add_common(sub);
    sub->add_option("--matrix", norms_matrix, "matrix CSV");
    sub->add_option("--model", norms_model, "checkpoint directory");
    sub->add_option("--alpha", norms_alpha, "marginal exponent for tc_pq_alpha");
    norms_dist.add(sub);
    sub->callback([&, sub] {
      action = [&, sub] {
        if (norms_matrix.empty() == norms_model.empty()) throw UsageError("norms needs exactly one of --matrix, --model");
        if (!(norms_alpha >= 0.0 && norms_alpha <= 1.0)) throw UsageError("alpha must lie in [0, 1]");
        ComplexityReport r;
        if (!norms_matrix.empty()) {
          const MatrixXr m = load_matrix_csv(norms_matrix);
          r = complexity(m, norms_dist.make(m.rows(), m.cols()).marginals(), norms_alpha);
        } else {
          const Factors f = load_checkpoint(norms_model).with_offset();
          r = complexity(f, norms_dist.make(f.rows(), f.cols()).marginals(), norms_alpha);
        }
        const json j{{"trace_norm", r.trace_norm}, {"tc", r.tc}, {"tc_pq", r.tc_pq},
                     {"tc_pq_alpha", r.tc_pq_alpha}, {"alpha", r.alpha}};
        const fs::path dir = out_dir;
        write_text(dir / "norms.json", j.dump(2) + "\n");
        write_manifest(dir, "norms", sub, json::object(), {"norms.json"});
        print_json(out, j);
      };
    });
  }

  // split
  std::string split_data;
  std::size_t split_valid = 0, split_test = 0;
  std::uint64_t split_seed = 1;
  {
    auto* sub = app.add_subcommand("split", "random train / validation / test split of a triplet file");
    add_common(sub);
    sub->add_option("--data", split_data, "triplet CSV")->required();
    sub->add_option("--valid", split_valid, "validation ratings");
    sub->add_option("--test", split_test, "test ratings");
    sub->add_option("--seed", split_seed);
    sub->callback([&, sub] {
      action = [&, sub] {
        const RatingsDataset ds = load_triplets(split_data);
        const Split parts = split(ds, split_valid, split_test, split_seed);
        const fs::path dir = out_dir;
        fs::create_directories(dir);
        save_triplets(dir / "train.csv", parts.train);
        save_triplets(dir / "validation.csv", parts.validation);
        save_triplets(dir / "test.csv", parts.test);
        save_id_map(dir / "users.csv", ds.user_ids);
        save_id_map(dir / "items.csv", ds.item_ids);
        write_manifest(dir, "split", sub, {{"split", split_seed}},
                       {"train.csv", "validation.csv", "test.csv", "users.csv", "items.csv"});
        out << "train " << parts.train.size() << " validation " << parts.validation.size() << " test "
            << parts.test.size() << '\n';
      };
    });
  }

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());  // CLI11 takes them in reverse order
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? ok : usage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return usage;
  }

  try {
    action();
    return ok;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return usage;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return divergence;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return data_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return data_error;
  }
}

}  // namespace wtn::cli
