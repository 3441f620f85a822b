// Command-line front end: key generation, local training, poisoning,
// the secure defense, diagnosis, and full experiments with CSV metrics.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fedrf/errors.hpp"
#include "fedrf/experiment.hpp"
#include "fedrf/parallel.hpp"

using namespace fedrf;

namespace {

struct CommonOpts {
  harness::ExperimentConfig config;
  std::string alpha;
  std::string beta;
  bool no_defense = false;
  std::string out;
  std::string transcript;
  std::string timing;
  std::string report;
};

void add_data_options(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--dataset", opts.config.dataset_csv, "dataset CSV path")->required();
  cmd->add_option("--schema", opts.config.schema_json, "dataset schema JSON path")->required();
  cmd->add_option("--n-dis", opts.config.n_dis, "number of data islands");
  cmd->add_option("--shard-size", opts.config.shard_size,
                  "samples per island (0 = min(100, train/n))");
  cmd->add_option("--seed", opts.config.seed, "experiment seed");
  cmd->add_option("--skew", opts.config.non_iid_skew, "island heterogeneity in [0,1]");
}

void add_model_options(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--trees", opts.config.trees, "trees per island");
  cmd->add_option("--height", opts.config.height, "maximum tree height");
}

void add_pipeline_options(CLI::App* cmd, CommonOpts& opts) {
  add_data_options(cmd, opts);
  add_model_options(cmd, opts);
  cmd->add_option("--key-bits", opts.config.key_bits, "modulus size in bits");
  cmd->add_option("--theta", opts.config.theta, "defense threshold at the validation scale");
  cmd->add_option("--val-size", opts.config.val_size, "validation set size");
  cmd->add_option("--alpha", opts.alpha, "fraction of malicious islands (e.g. 1/3)");
  cmd->add_option("--beta", opts.beta, "cloned-and-flipped shard fraction (e.g. 0.5)");
  cmd->add_flag("--no-defense", opts.no_defense, "aggregate without the trimmed-MSE defense");
  cmd->add_option("--test-cap", opts.config.test_cap, "diagnose at most this many test samples");
  cmd->add_flag("--parallel", opts.config.parallel, "run the OpenMP kernels");
  cmd->add_flag("--audit", opts.config.audit_mse,
                "decrypt per-island MSE into the metrics/report (simulator audit facility)");
  cmd->add_option("--transcript", opts.transcript, "write the protocol transcript here");
  cmd->add_option("--timing", opts.timing, "write per-phase wall clock CSV here");
  cmd->add_option("--report", opts.report, "write poison/defense reports here");
}

void finish_config(CommonOpts& opts) {
  opts.config.defense = !opts.no_defense;
  if (!opts.alpha.empty() || !opts.beta.empty()) {
    attack::AttackConfig atk;
    atk.alpha = opts.alpha.empty() ? attack::Fraction{0, 1} : attack::Fraction::parse(opts.alpha);
    atk.beta = opts.beta.empty() ? attack::Fraction{1, 2} : attack::Fraction::parse(opts.beta);
    if (!atk.alpha.is_zero()) opts.config.attack = atk;
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
}

void write_outputs(const CommonOpts& opts, const harness::ExperimentResult& result,
                   const proto::TranscriptLog& log) {
  std::string csv = harness::metrics_csv_header() + "\n" +
                    harness::metrics_csv_row(opts.config, result) + "\n";
  if (opts.out.empty()) {
    std::cout << csv;
  } else {
    write_file(opts.out, csv);
    std::cout << "metrics written to " << opts.out << "\n";
  }
  if (!opts.transcript.empty()) {
    std::ofstream out(opts.transcript);
    if (!out) throw Error("cannot write '" + opts.transcript + "'");
    log.export_lines(out);
    std::cout << "transcript (" << log.size() << " messages) written to " << opts.transcript
              << "\n";
  }
  if (!opts.timing.empty()) write_file(opts.timing, harness::timing_csv(result));
  if (!opts.report.empty()) {
    write_file(opts.report, result.poison_report + result.defense_report);
  }
}

int run_keygen(unsigned key_bits, int n_dis, uint64_t seed, const std::string& out,
               bool include_secrets) {
  crypto::KeyMaterial km = sim::generate_key_material(key_bits, n_dis, seed);
  std::string text = crypto::serialize_key_material(km, include_secrets);
  if (out.empty()) {
    std::cout << text;
  } else {
    write_file(out, text);
    std::cout << "key material (" << km.pairs.size() << " keys, " << key_bits
              << " bit modulus) written to " << out << "\n";
  }
  return 0;
}

int run_train(CommonOpts& opts, const std::string& forest_out) {
  crypto::SystemParams params = crypto::keygen_system(128, 1).public_view();
  data::DatasetSchema schema = data::DatasetSchema::from_json_file(opts.config.schema_json);
  data::Dataset ds = data::load_dataset(opts.config.dataset_csv, schema, params);
  data::SplitResult split =
      data::split_dataset(ds, opts.config.n_dis, opts.config.shard_size, opts.config.val_size,
                          Rng(opts.config.seed).split("split").next_u64(),
                          opts.config.non_iid_skew);
  forest::TrainParams tp;
  tp.max_height = opts.config.height;
  Rng train_root = Rng(opts.config.seed).split("train");
  std::cout << "dataset " << ds.name << ": " << ds.samples.size() << " rows, shard size "
            << split.shard_size << "\n";
  for (int di = 1; di <= opts.config.n_dis; di++) {
    Rng rng = train_root.split(static_cast<uint64_t>(di));
    forest::RandomForest model = forest::train_forest(
        split.shards[static_cast<size_t>(di - 1)], opts.config.trees, tp, rng);
    size_t nodes = 0;
    int max_h = 0;
    for (const auto& t : model.trees) {
      nodes += t.nodes.size();
      max_h = std::max(max_h, t.height());
    }
    std::cout << "island " << di << ": " << model.trees.size() << " trees, " << nodes
              << " nodes, max height " << max_h << "\n";
    if (!forest_out.empty()) {
      std::string path = forest_out + ".di" + std::to_string(di) + ".txt";
      write_file(path, forest::serialize_forest(model));
      std::cout << "  written to " << path << "\n";
    }
  }
  return 0;
}

int run_attack_report(CommonOpts& opts) {
  if (!opts.config.attack.has_value()) {
    throw ConfigError("the attack command needs --alpha and --beta");
  }
  crypto::SystemParams params = crypto::keygen_system(128, 1).public_view();
  data::DatasetSchema schema = data::DatasetSchema::from_json_file(opts.config.schema_json);
  data::Dataset ds = data::load_dataset(opts.config.dataset_csv, schema, params);
  data::SplitResult split =
      data::split_dataset(ds, opts.config.n_dis, opts.config.shard_size, opts.config.val_size,
                          Rng(opts.config.seed).split("split").next_u64(),
                          opts.config.non_iid_skew);
  const attack::AttackConfig& atk = *opts.config.attack;
  Rng atk_rng = Rng(atk.seed == 0 ? opts.config.seed : atk.seed).split("attack");
  std::vector<int> malicious = atk.malicious_override;
  if (malicious.empty()) {
    malicious = attack::select_malicious(opts.config.n_dis, atk.alpha, atk_rng);
  }
  attack::PoisonReport report;
  report.alpha = atk.alpha;
  report.beta = atk.beta;
  report.malicious = malicious;
  for (int di : malicious) {
    const forest::Shard& shard = split.shards[static_cast<size_t>(di - 1)];
    Rng di_rng = atk_rng.split(static_cast<uint64_t>(di));
    forest::Shard poisoned = attack::poison_shard(shard, atk.beta, di_rng);
    attack::PoisonEntry entry;
    entry.di = di;
    entry.clean_size = shard.size();
    entry.injected = poisoned.size() - shard.size();
    for (size_t i = shard.size(); i < poisoned.size(); i++) {
      (poisoned[i].label < 0 ? entry.flipped_pos_to_neg : entry.flipped_neg_to_pos)++;
    }
    report.entries.push_back(entry);
  }
  std::string text = report.to_text();
  if (opts.out.empty()) {
    std::cout << text;
  } else {
    write_file(opts.out, text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"secure federated random-forest diagnosis simulator"};
  app.require_subcommand(1);

  // keygen
  unsigned kg_bits = 512;
  int kg_dis = 3;
  uint64_t kg_seed = 1;
  std::string kg_out;
  bool kg_secrets = false;
  CLI::App* keygen = app.add_subcommand("keygen", "generate and serialize key material");
  keygen->add_option("--key-bits", kg_bits, "modulus size in bits");
  keygen->add_option("--n-dis", kg_dis, "number of data islands");
  keygen->add_option("--seed", kg_seed, "generator seed");
  keygen->add_option("--out", kg_out, "output file (stdout when omitted)");
  keygen->add_flag("--include-secrets", kg_secrets, "write trapdoors and shares too");

  // train
  CommonOpts train_opts;
  std::string forest_out;
  CLI::App* train = app.add_subcommand("train", "train the per-island forests in plaintext");
  add_data_options(train, train_opts);
  add_model_options(train, train_opts);
  train->add_option("--val-size", train_opts.config.val_size, "validation set size");
  train->add_option("--forest-out", forest_out, "file prefix for serialized forests");

  // attack
  CommonOpts attack_opts;
  CLI::App* attack_cmd = app.add_subcommand("attack", "report the label-flip injection");
  add_data_options(attack_cmd, attack_opts);
  attack_cmd->add_option("--val-size", attack_opts.config.val_size, "validation set size");
  attack_cmd->add_option("--alpha", attack_opts.alpha, "fraction of malicious islands")
      ->required();
  attack_cmd->add_option("--beta", attack_opts.beta, "cloned-and-flipped fraction")->required();
  attack_cmd->add_option("--out", attack_opts.out, "report file (stdout when omitted)");

  // defend
  CommonOpts defend_opts;
  CLI::App* defend = app.add_subcommand("defend", "run the pipeline through the secure defense");
  add_pipeline_options(defend, defend_opts);
  defend->add_option("--out", defend_opts.out, "metrics CSV file (stdout when omitted)");

  // diagnose
  CommonOpts diag_opts;
  std::string predictions_out;
  CLI::App* diagnose = app.add_subcommand("diagnose", "full pipeline plus per-request output");
  add_pipeline_options(diagnose, diag_opts);
  diagnose->add_option("--out", diag_opts.out, "metrics CSV file (stdout when omitted)");
  diagnose->add_option("--predictions", predictions_out, "per-request CSV file");

  // experiment
  CommonOpts exp_opts;
  CLI::App* experiment = app.add_subcommand("experiment", "full deterministic experiment");
  add_pipeline_options(experiment, exp_opts);
  experiment->add_option("--out", exp_opts.out, "metrics CSV file (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (keygen->parsed()) return run_keygen(kg_bits, kg_dis, kg_seed, kg_out, kg_secrets);
    if (train->parsed()) return run_train(train_opts, forest_out);
    if (attack_cmd->parsed()) {
      attack_opts.alpha = attack_opts.alpha.empty() ? "0" : attack_opts.alpha;
      finish_config(attack_opts);
      return run_attack_report(attack_opts);
    }

    CommonOpts* opts = nullptr;
    if (defend->parsed()) opts = &defend_opts;
    if (diagnose->parsed()) opts = &diag_opts;
    if (experiment->parsed()) opts = &exp_opts;
    if (opts == nullptr) return 1;
    finish_config(*opts);
    if (defend->parsed()) opts->config.run_diagnosis = false;

    proto::TranscriptLog log;
    bool want_log = !opts->transcript.empty() || !opts->report.empty() || defend->parsed();
    harness::ExperimentResult result =
        harness::run_experiment(opts->config, want_log ? &log : nullptr);
    write_outputs(*opts, result, log);
    if (defend->parsed()) {
      std::cout << result.defense_report;
    }
    if (diagnose->parsed() && !predictions_out.empty()) {
      std::ostringstream out;
      out << "request,vote_sum,predicted\n";
      for (size_t i = 0; i < result.predictions.size(); i++) {
        out << i << "," << result.vote_sums[i] << "," << result.predictions[i] << "\n";
      }
      write_file(predictions_out, out.str());
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
