// Deterministic generator for the two bundled benchmark datasets: a
// heart-disease-style table (303 rows, 13 features, graded label column) and
// a thyroid-screening-style table (3163 rows, 18 features, string labels).
// Shapes, ranges and class-conditional distributions follow the published
// column descriptions; values are synthetic.  --summary prints plaintext
// training statistics (federated accuracy, per-island validation MSE) so the
// generator can be sanity-checked without the secure pipeline.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedrf/attack.hpp"
#include "fedrf/crypto.hpp"
#include "fedrf/dataset.hpp"
#include "fedrf/forest.hpp"
#include "fedrf/rng.hpp"

using fedrf::Rng;

namespace {

struct Sampler {
  Rng rng;

  double uniform() {
    return static_cast<double>(rng.next_u64() >> 11) * 0x1.0p-53;
  }
  double normal(double mean, double sd) {
    double u1 = std::max(uniform(), 1e-12);
    double u2 = uniform();
    return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  bool bernoulli(double p) { return uniform() < p; }
  int categorical(const std::vector<double>& weights) {
    double u = uniform();
    double acc = 0.0;
    for (size_t i = 0; i < weights.size(); i++) {
      acc += weights[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }
  int clamped_int(double mean, double sd, int lo, int hi) {
    return std::clamp(static_cast<int>(std::lround(normal(mean, sd))), lo, hi);
  }
  double clamped_round1(double v, double lo, double hi) {
    return std::clamp(std::round(v * 10.0) / 10.0, lo, hi);
  }
};

// Heart table: one latent severity factor drives correlated findings, so
// the signal is redundant across columns the way clinical measurements are.
// `loading` scales how tightly each finding tracks the factor; `eta` is
// irreducible label noise (recorded diagnosis vs presentation).  Together
// they set the achievable accuracy, the margin confidence, and how fast
// label-flip poisoning degrades a shard-trained model.
struct HeartNoise {
  double eta = 0.04;
  double loading = 1.10;
  double ambiguous = 0.25;  // fraction with borderline presentations
};

void write_heart(const std::string& path, uint64_t seed, const HeartNoise& noise) {
  Sampler s{Rng(seed)};
  std::ofstream out(path);
  out << "age,sex,cp,trestbps,chol,fbs,restecg,thalach,exang,oldpeak,slope,ca,thal,num\n";
  char buf[32];
  for (int i = 0; i < 303; i++) {
    // latent severity; a slice of patients presents near the boundary
    double z = s.bernoulli(noise.ambiguous) ? 0.1 + s.normal(0.0, 0.28) : s.normal(0.0, 1.0);
    auto factor = [&](double rho) {
      double r = std::clamp(rho * noise.loading, 0.0, 0.99);
      return r * z + std::sqrt(1.0 - r * r) * s.normal(0.0, 1.0);
    };
    auto bucket = [](double v, std::initializer_list<double> cuts) {
      int idx = 0;
      for (double c : cuts) {
        if (v <= c) break;
        idx++;
      }
      return idx;
    };
    int age = std::clamp(static_cast<int>(std::lround(54.0 + 9.0 * factor(0.18))), 29, 77);
    int sex = factor(0.12) > -0.2 ? 1 : 0;
    int cp = bucket(factor(0.83), {-1.2, -0.55, 0.25}) + 1;
    int trestbps =
        std::clamp(static_cast<int>(std::lround(131.0 + 17.0 * factor(0.12))), 94, 200);
    int chol = std::clamp(static_cast<int>(std::lround(247.0 + 51.0 * factor(0.08))), 126, 564);
    int fbs = factor(0.05) > 1.03 ? 1 : 0;
    int restecg = bucket(factor(0.12), {0.0, 0.05});
    int thalach =
        std::clamp(static_cast<int>(std::lround(149.0 - 22.0 * factor(0.30))), 71, 202);
    int exang = factor(0.32) > 0.43 ? 1 : 0;
    double oldpeak = s.clamped_round1(std::max(0.0, 0.95 + 1.10 * factor(0.30)), 0.0, 6.2);
    int slope = bucket(factor(0.25), {-0.1, 1.15}) + 1;
    int ca = bucket(factor(0.87), {0.05, 0.84, 1.55});
    int thal_code = bucket(factor(0.85), {0.4, 0.9});
    int thal = thal_code == 0 ? 3 : (thal_code == 1 ? 6 : 7);
    bool disease = z > 0.1;  // ~46% prevalence
    bool recorded = s.bernoulli(noise.eta) ? !disease : disease;
    int num = recorded ? s.categorical({0.49, 0.22, 0.19, 0.10}) + 1 : 0;
    snprintf(buf, sizeof(buf), "%.1f", oldpeak);
    out << age << "," << sex << "," << cp << "," << trestbps << "," << chol << "," << fbs << ","
        << restecg << "," << thalach << "," << exang << "," << buf << "," << slope << "," << ca
        << "," << thal << "," << num << "\n";
  }
}

void write_thyroid(const std::string& path, uint64_t seed) {
  Sampler s{Rng(seed)};
  std::ofstream out(path);
  out << "age,sex,on_thyroxine,query_on_thyroxine,on_antithyroid_medication,thyroid_surgery,"
         "query_hypothyroid,query_hyperthyroid,pregnant,sick,tumor,lithium,goitre,"
         "TSH,T3,TT4,T4U,FTI,Class\n";
  char buf[96];
  for (int i = 0; i < 3163; i++) {
    bool hypo = s.bernoulli(0.048);
    int age = hypo ? s.clamped_int(57.0, 17.0, 1, 98) : s.clamped_int(51.0, 19.0, 1, 98);
    int sex = s.bernoulli(hypo ? 0.71 : 0.65);
    int on_thyroxine = s.bernoulli(hypo ? 0.05 : 0.12);
    int query_on_thyroxine = s.bernoulli(0.01);
    int on_antithyroid = s.bernoulli(0.01);
    int surgery = s.bernoulli(hypo ? 0.05 : 0.01);
    int query_hypo = s.bernoulli(hypo ? 0.17 : 0.06);
    int query_hyper = s.bernoulli(hypo ? 0.02 : 0.07);
    int pregnant = s.bernoulli(0.01);
    int sick = s.bernoulli(0.03);
    int tumor = s.bernoulli(0.01);
    int lithium = s.bernoulli(0.005);
    int goitre = s.bernoulli(hypo ? 0.04 : 0.015);
    double tsh = hypo ? s.clamped_round1(std::exp(s.normal(3.35, 0.95)), 0.1, 530.0)
                      : s.clamped_round1(std::exp(s.normal(0.55, 1.05)), 0.1, 530.0);
    double t3 = hypo ? s.clamped_round1(std::max(0.1, s.normal(1.05, 0.55)), 0.1, 10.6)
                     : s.clamped_round1(std::max(0.1, s.normal(2.00, 0.70)), 0.1, 10.6);
    double tt4 = hypo ? s.clamped_round1(std::max(2.0, s.normal(58.0, 24.0)), 2.0, 430.0)
                      : s.clamped_round1(std::max(2.0, s.normal(110.0, 26.0)), 2.0, 430.0);
    double t4u = s.clamped_round1(std::max(0.25, s.normal(hypo ? 0.95 : 0.98, 0.17)), 0.25, 2.32);
    double fti = hypo ? s.clamped_round1(std::max(2.0, s.normal(58.0, 22.0)), 2.0, 395.0)
                      : s.clamped_round1(std::max(2.0, s.normal(112.0, 24.0)), 2.0, 395.0);
    snprintf(buf, sizeof(buf), "%.1f,%.1f,%.1f,%.2f,%.1f", tsh, t3, tt4, t4u, fti);
    out << age << "," << sex << "," << on_thyroxine << "," << query_on_thyroxine << ","
        << on_antithyroid << "," << surgery << "," << query_hypo << "," << query_hyper << ","
        << pregnant << "," << sick << "," << tumor << "," << lithium << "," << goitre << ","
        << buf << "," << (hypo ? "hypothyroid" : "negative") << "\n";
  }
}

/// Plaintext training summary over a few seeds: federated accuracy with all
/// islands, single-island accuracy, per-island validation MSE at the
/// threshold scale (vote-sum scale / t^2), and a poisoning sweep on the
/// first island.
void summarize(const std::string& csv, const std::string& schema_path, int n_dis, int trees,
               int height, size_t val_size, bool sweep) {
  fedrf::crypto::SystemParams params = fedrf::crypto::keygen_system(128, 1);
  fedrf::data::DatasetSchema schema = fedrf::data::DatasetSchema::from_json_file(schema_path);
  fedrf::data::Dataset ds = fedrf::data::load_dataset(csv, schema, params);
  printf("dataset %s: %zu rows, %zu features\n", ds.name.c_str(), ds.samples.size(),
         ds.n_features());
  size_t positives = 0;
  for (const auto& smp : ds.samples) positives += smp.label > 0;
  printf("  positives: %zu (%.1f%%)\n", positives,
         100.0 * static_cast<double>(positives) / static_cast<double>(ds.samples.size()));

  double t2 = static_cast<double>(trees) * trees;
  for (uint64_t seed = 1; seed <= 5; seed++) {
    auto split = fedrf::data::split_dataset(ds, n_dis, 0, val_size, seed);
    fedrf::forest::TrainParams tp;
    tp.max_height = height;
    std::vector<fedrf::forest::RandomForest> models;
    for (int di = 1; di <= n_dis; di++) {
      Rng rng = Rng(seed).split("train").split(static_cast<uint64_t>(di));
      models.push_back(
          fedrf::forest::train_forest(split.shards[static_cast<size_t>(di - 1)], trees, tp, rng));
    }
    auto accuracy_of = [&](const std::vector<const fedrf::forest::RandomForest*>& ms) {
      size_t ok = 0;
      for (const auto& smp : split.test) {
        int64_t votes = 0;
        for (const auto* m : ms) {
          for (const auto& tr : m->trees) votes += fedrf::forest::predict_tree(tr, smp.features);
        }
        ok += ((votes >= 0 ? 1 : -1) == smp.label);
      }
      return 100.0 * static_cast<double>(ok) / static_cast<double>(split.test.size());
    };
    auto mse_of = [&](const fedrf::forest::RandomForest& m) {
      int64_t mse = 0;
      for (const auto& smp : split.validation) {
        int64_t votes = 0;
        for (const auto& tr : m.trees) votes += fedrf::forest::predict_tree(tr, smp.features);
        int64_t r = static_cast<int64_t>(m.trees.size()) * smp.label - votes;
        mse += r * r;
      }
      return static_cast<double>(mse) / t2;
    };
    std::vector<const fedrf::forest::RandomForest*> all;
    for (const auto& m : models) all.push_back(&m);
    std::vector<const fedrf::forest::RandomForest*> benign_rest(all.begin() + 1, all.end());
    printf("  seed %llu: shard=%zu fed=%.1f single=%.1f rest=%.1f mse:",
           static_cast<unsigned long long>(seed), split.shard_size, accuracy_of(all),
           accuracy_of({all[0]}), accuracy_of(benign_rest));
    for (const auto& m : models) printf(" %.0f", mse_of(m));
    if (sweep) {
      printf(" |");
      for (int b = 1; b <= 9; b += 2) {
        Rng prng = Rng(seed).split("probe").split(static_cast<uint64_t>(b));
        auto poisoned_shard =
            fedrf::attack::poison_shard(split.shards[0], fedrf::attack::Fraction{b, 10}, prng);
        Rng rng = Rng(seed).split("train-poisoned").split(static_cast<uint64_t>(b));
        auto poisoned = fedrf::forest::train_forest(poisoned_shard, trees, tp, rng);
        std::vector<const fedrf::forest::RandomForest*> tainted{&poisoned};
        for (size_t i = 1; i < models.size(); i++) tainted.push_back(&models[i]);
        printf(" b.%d:mse=%.0f,acc=%.1f", b, mse_of(poisoned), accuracy_of(tainted));
      }
    }
    printf("\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bundled benchmark dataset generator"};
  std::string out_dir = "data";
  uint64_t seed = 21;
  bool summary = false;
  bool sweep = false;
  HeartNoise noise;
  app.add_option("--out-dir", out_dir, "output directory");
  app.add_option("--seed", seed, "generator seed");
  app.add_flag("--summary", summary, "print plaintext training statistics after generating");
  app.add_flag("--sweep", sweep, "include a poisoning sweep in the summary");
  app.add_option("--eta", noise.eta, "heart label noise");
  app.add_option("--loading", noise.loading, "heart factor-loading scale");
  app.add_option("--ambiguous", noise.ambiguous, "heart borderline-presentation fraction");
  CLI11_PARSE(app, argc, argv);

  std::string heart_csv = out_dir + "/heart.csv";
  std::string thyroid_csv = out_dir + "/thyroid.csv";
  write_heart(heart_csv, Rng(seed).split("heart").next_u64(), noise);
  write_thyroid(thyroid_csv, Rng(seed).split("thyroid").next_u64());
  std::cout << "wrote " << heart_csv << " and " << thyroid_csv << "\n";

  if (summary) {
    try {
      summarize(heart_csv, out_dir + "/heart.schema.json", 3, 30, 4, 100, sweep);
      summarize(thyroid_csv, out_dir + "/thyroid.schema.json", 10, 5, 4, 100, sweep);
    } catch (const std::exception& e) {
      std::cerr << "summary failed: " << e.what() << "\n";
      return 1;
    }
  }
  return 0;
}
