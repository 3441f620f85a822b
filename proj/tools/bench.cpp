// Benchmark of the secure kernels: serial reference vs the OpenMP path.
// Runs model encryption, key-transforming aggregation, the trimmed-MSE
// defense and diagnosis on a synthetic setup and prints a CSV table with
// one row per phase, checking that both modes produce identical results.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedrf/federated.hpp"
#include "fedrf/parallel.hpp"

using namespace fedrf;

namespace {

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

forest::Shard synth_shard(Rng rng, size_t n, size_t n_features) {
  forest::Shard shard;
  for (size_t i = 0; i < n; i++) {
    forest::Sample s;
    for (size_t j = 0; j < n_features; j++) {
      s.features.push_back(static_cast<int64_t>(rng.below(2001)) - 1000);
    }
    s.label = (s.features[0] + s.features[1] / 2 > 0) != (rng.below(8) == 0) ? 1 : -1;
    shard.push_back(std::move(s));
  }
  return shard;
}

uint64_t forest_digest(const crypto::SystemParams& params, const fed::FederatedModel& fm) {
  uint64_t h = 0xcbf29ce484222325ull;
  (void)params;
  for (const auto& f : fm.forests) {
    for (const auto& t : f.trees) {
      for (const auto& n : t.nodes) {
        h ^= Rng::fnv1a64(n.weight.a.to_hex());
        h *= 0x100000001b3ull;
      }
    }
  }
  return h;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs parallel kernel benchmark"};
  unsigned key_bits = 256;
  int n_dis = 3;
  int trees = 8;
  int height = 4;
  size_t shard = 80;
  size_t val = 20;
  size_t requests = 10;
  app.add_option("--key-bits", key_bits, "modulus size in bits");
  app.add_option("--n-dis", n_dis, "data islands");
  app.add_option("--trees", trees, "trees per island");
  app.add_option("--height", height, "tree height");
  app.add_option("--shard", shard, "samples per island");
  app.add_option("--val", val, "validation samples");
  app.add_option("--requests", requests, "diagnosis requests");
  CLI11_PARSE(app, argc, argv);

  printf("# threads available: %d (OpenMP %s)\n", parallel_threads(),
         parallel_available() ? "on" : "off");
  printf("phase,mode,ms,digest\n");

  crypto::KeyMaterial keys = sim::generate_key_material(key_bits, n_dis, 11);
  forest::TrainParams tp;
  tp.max_height = height;
  std::vector<forest::RandomForest> models;
  for (int di = 1; di <= n_dis; di++) {
    Rng rng = Rng(100 + static_cast<uint64_t>(di));
    forest::Shard data = synth_shard(rng, shard, 6);
    Rng train_rng = Rng(200 + static_cast<uint64_t>(di));
    models.push_back(forest::train_forest(data, trees, tp, train_rng));
  }
  forest::Shard validation = synth_shard(Rng(300), val, 6);
  forest::Shard probes = synth_shard(Rng(400), requests, 6);

  uint64_t reference_digest = 0;
  for (int mode = 0; mode < 2; mode++) {
    bool parallel = mode == 1;
    const char* name = parallel ? "parallel" : "serial";
    if (parallel && !parallel_available()) break;

    sim::PartySet parties = sim::PartySet::distribute(keys, n_dis, "DI_1");
    proto::ProtocolStats stats;
    proto::SecureCompute engine(parties, nullptr, &stats, 77);

    // model encryption
    double t0 = now_ms();
    fed::LocalModelStore store;
    for (int di = 1; di <= n_dis; di++) {
      Rng enc_rng = Rng(500 + static_cast<uint64_t>(di));
      store.entries.push_back(
          {di, forest::encrypt_forest(keys.params, keys.pair(sim::di_key_id(di)).pk,
                                      models[static_cast<size_t>(di - 1)], enc_rng, parallel)});
    }
    printf("encrypt,%s,%.1f,-\n", name, now_ms() - t0);

    // aggregation
    t0 = now_ms();
    fed::FederatedModel fm = fed::secure_aggregation(engine, store, parallel);
    uint64_t agg_digest = forest_digest(keys.params, fm);
    printf("aggregate,%s,%.1f,%016llx\n", name, now_ms() - t0,
           static_cast<unsigned long long>(agg_digest));

    // defense
    t0 = now_ms();
    Rng val_rng(600);
    fed::ValidationSet enc_val =
        fed::encrypt_validation(keys.params, keys.pair(sim::kCommonKeyId).pk, validation, val_rng);
    fed::DefenseConfig def;
    def.trees_per_island = trees;
    def.theta = 4.0 * static_cast<double>(val);  // keep everything: timing-only run
    fed::DefenseOutcome outcome = fed::secure_defense(engine, store, enc_val, def, parallel);
    printf("defense,%s,%.1f,%zu-kept\n", name, now_ms() - t0, outcome.kept().size());

    // diagnosis
    t0 = now_ms();
    uint64_t dia_digest = 0xcbf29ce484222325ull;
    for (size_t k = 0; k < probes.size(); k++) {
      Rng req_rng = engine.rng_for("bench-request/" + std::to_string(k));
      auto request = fed::encrypt_request(keys.params, keys.pair(sim::kUserKeyId).pk,
                                          probes[k].features, req_rng);
      fed::DiagnosisResult dia =
          fed::diagnose(engine, fm, request, "bench-dia/" + std::to_string(k), parallel);
      fed::RevealedDiagnosis rev =
          fed::reveal_result(keys.params, parties.at(sim::kDuId), dia);
      dia_digest ^= static_cast<uint64_t>(rev.vote_sum + 1000) * (k + 1);
    }
    printf("diagnose,%s,%.1f,%016llx\n", name, now_ms() - t0,
           static_cast<unsigned long long>(dia_digest));

    uint64_t combined = agg_digest ^ dia_digest;
    if (mode == 0) {
      reference_digest = combined;
    } else if (combined != reference_digest) {
      fprintf(stderr, "parallel results diverge from the serial reference\n");
      return 1;
    }
  }
  if (parallel_available()) printf("# parallel results match the serial reference\n");
  return 0;
}
