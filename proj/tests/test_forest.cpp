#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fedrf/errors.hpp"
#include "fedrf/forest.hpp"

using namespace fedrf;
using namespace fedrf::forest;

namespace {

Shard single_feature_shard(std::initializer_list<std::pair<int64_t, int>> rows) {
  Shard shard;
  for (auto [x, y] : rows) shard.push_back(Sample{{x}, y});
  return shard;
}

/// Random shard with a learnable threshold rule plus noise.
Shard random_shard(Rng& rng, size_t n, size_t n_features) {
  Shard shard;
  for (size_t i = 0; i < n; i++) {
    Sample s;
    for (size_t j = 0; j < n_features; j++) {
      s.features.push_back(static_cast<int64_t>(rng.below(2001)) - 1000);
    }
    bool noisy = rng.below(10) == 0;
    s.label = (s.features[0] > 100) != noisy ? 1 : -1;
    shard.push_back(std::move(s));
  }
  return shard;
}

}  // namespace

TEST_CASE("a single-class shard trains to one leaf") {
  Rng rng(1);
  Shard shard = single_feature_shard({{0, -1}, {5, -1}, {9, -1}});
  DecisionTree tree = train_tree(shard, TrainParams{}, rng);
  REQUIRE(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].is_leaf);
  CHECK(tree.nodes[0].label == -1);
  CHECK(tree.height() == 0);
}

TEST_CASE("a separable 1d shard trains to one split with the threshold in (0, 10]") {
  Rng rng(2);
  Shard shard = single_feature_shard({{0, -1}, {10, 1}});
  DecisionTree tree = train_tree(shard, TrainParams{}, rng);
  REQUIRE(tree.nodes.size() == 3);
  const TreeNode& root = tree.nodes[0];
  CHECK_FALSE(root.is_leaf);
  CHECK(root.feature_id == 1);
  CHECK(root.split_value > 0);
  CHECK(root.split_value <= 10);
  CHECK(tree.nodes[static_cast<size_t>(root.left)].label == -1);
  CHECK(tree.nodes[static_cast<size_t>(root.right)].label == 1);
  // traversal agrees: strictly-less goes left
  CHECK(predict_tree(tree, std::vector<int64_t>{0}) == -1);
  CHECK(predict_tree(tree, std::vector<int64_t>{10}) == 1);
}

TEST_CASE("height and internal node count respect the bound") {
  Rng rng(3);
  Shard shard = random_shard(rng, 100, 5);
  for (int h : {1, 2, 4}) {
    TrainParams params;
    params.max_height = h;
    Rng train_rng(17);
    DecisionTree tree = train_tree(shard, params, train_rng);
    CHECK(tree.height() <= h);
    CHECK(tree.internal_node_count() <= (1 << h) - 1);
  }
}

TEST_CASE("training rejects degenerate inputs") {
  Rng rng(4);
  CHECK_THROWS_AS(train_tree({}, TrainParams{}, rng), ConfigError);
  Shard bad = single_feature_shard({{1, 0}});
  CHECK_THROWS_AS(train_tree(bad, TrainParams{}, rng), ConfigError);
  CHECK_THROWS_AS(train_forest(single_feature_shard({{1, 1}}), 0, TrainParams{}, rng),
                  ConfigError);
}

TEST_CASE("forest prediction follows the average-then-sign rule") {
  // constant forest of +1 leaves
  DecisionTree leaf_pos{{TreeNode{0, true, 0, 0, 1, -1, -1}}};
  DecisionTree leaf_neg{{TreeNode{0, true, 0, 0, -1, -1, -1}}};
  RandomForest constant{{leaf_pos, leaf_pos, leaf_pos}};
  ForestPrediction p = predict_forest(constant, std::vector<int64_t>{0});
  CHECK(p.vote_sum == 3);
  CHECK(p.label == 1);
  CHECK(p.score() == 1.0);

  // tie: vote sum 0 resolves to +1 (the >= 0 rule)
  RandomForest tie{{leaf_pos, leaf_neg}};
  ForestPrediction q = predict_forest(tie, std::vector<int64_t>{0});
  CHECK(q.vote_sum == 0);
  CHECK(q.label == 1);
}

TEST_CASE("forest votes match the per-tree oracle on random inputs") {
  Rng rng(5);
  Shard shard = random_shard(rng, 60, 4);
  Rng train_rng(6);
  RandomForest forest = train_forest(shard, 9, TrainParams{}, train_rng);
  CHECK(forest.trees.size() == 9);
  for (int i = 0; i < 100; i++) {
    std::vector<int64_t> x;
    for (int j = 0; j < 4; j++) x.push_back(static_cast<int64_t>(rng.below(2001)) - 1000);
    int sum = 0;
    for (const auto& tree : forest.trees) sum += predict_tree(tree, x);
    ForestPrediction p = predict_forest(forest, x);
    CHECK(p.vote_sum == sum);
    CHECK(p.label == (sum >= 0 ? 1 : -1));
    CHECK(p.vote_sum <= p.n_trees);
    CHECK(p.vote_sum >= -p.n_trees);
  }
}

TEST_CASE("training is deterministic for a fixed stream") {
  Rng data_rng(7);
  Shard shard = random_shard(data_rng, 80, 6);
  Rng a(123), b(123);
  RandomForest fa = train_forest(shard, 5, TrainParams{}, a);
  RandomForest fb = train_forest(shard, 5, TrainParams{}, b);
  CHECK(serialize_forest(fa) == serialize_forest(fb));
}

TEST_CASE("encrypt/decrypt roundtrips node-for-node and tags are audited") {
  crypto::SystemParams params = crypto::keygen_system(256, 11);
  crypto::KeyPair key = crypto::keygen_party(params, "pk_DI_1", 1);
  Rng data_rng(8);
  Shard shard = random_shard(data_rng, 50, 3);
  Rng train_rng(9);
  RandomForest forest = train_forest(shard, 4, TrainParams{}, train_rng);

  Rng enc_rng(10);
  EncryptedForest enc = encrypt_forest(params, key.pk, forest, enc_rng);
  CHECK(enc.key_id == "pk_DI_1");
  size_t expected_nodes = 0;
  for (const auto& t : forest.trees) expected_nodes += t.nodes.size();
  CHECK(enc.node_count() == expected_nodes);

  // tag audit: split values SCALED, leaves UNIT, topology preserved
  for (size_t t = 0; t < enc.trees.size(); t++) {
    REQUIRE(enc.trees[t].nodes.size() == forest.trees[t].nodes.size());
    for (size_t i = 0; i < enc.trees[t].nodes.size(); i++) {
      const EncTreeNode& en = enc.trees[t].nodes[i];
      const TreeNode& pn = forest.trees[t].nodes[i];
      CHECK(en.is_leaf == pn.is_leaf);
      CHECK(en.feature_id == pn.feature_id);
      CHECK(en.left == pn.left);
      CHECK(en.right == pn.right);
      CHECK(en.tag == (pn.is_leaf ? crypto::ScaleTag::kUnit : crypto::ScaleTag::kScaled));
    }
  }

  RandomForest back = decrypt_forest(params, key, enc);
  CHECK(serialize_forest(back) == serialize_forest(forest));
}

TEST_CASE("parallel encryption produces identical ciphertexts") {
  crypto::SystemParams params = crypto::keygen_system(128, 13);
  crypto::KeyPair key = crypto::keygen_party(params, "pk_DI_1", 2);
  Rng data_rng(14);
  Shard shard = random_shard(data_rng, 40, 3);
  Rng train_rng(15);
  RandomForest forest = train_forest(shard, 6, TrainParams{}, train_rng);
  Rng r1(77), r2(77);
  EncryptedForest serial = encrypt_forest(params, key.pk, forest, r1, false);
  EncryptedForest parallel = encrypt_forest(params, key.pk, forest, r2, true);
  REQUIRE(serial.trees.size() == parallel.trees.size());
  for (size_t t = 0; t < serial.trees.size(); t++) {
    for (size_t i = 0; i < serial.trees[t].nodes.size(); i++) {
      CHECK(serial.trees[t].nodes[i].weight.a == parallel.trees[t].nodes[i].weight.a);
      CHECK(serial.trees[t].nodes[i].weight.b == parallel.trees[t].nodes[i].weight.b);
    }
  }
}

TEST_CASE("prediction on the decrypted forest matches the original") {
  crypto::SystemParams params = crypto::keygen_system(128, 17);
  crypto::KeyPair key = crypto::keygen_party(params, "pk_DI_1", 3);
  Rng data_rng(18);
  Shard shard = random_shard(data_rng, 60, 4);
  Rng train_rng(19);
  RandomForest forest = train_forest(shard, 5, TrainParams{}, train_rng);
  Rng enc_rng(20);
  RandomForest back = decrypt_forest(params, key, encrypt_forest(params, key.pk, forest, enc_rng));
  Rng probe(21);
  for (int i = 0; i < 50; i++) {
    std::vector<int64_t> x;
    for (int j = 0; j < 4; j++) x.push_back(static_cast<int64_t>(probe.below(2001)) - 1000);
    CHECK(predict_forest(back, x).vote_sum == predict_forest(forest, x).vote_sum);
  }
}

TEST_CASE("forest text serialization roundtrips") {
  Rng data_rng(22);
  Shard shard = random_shard(data_rng, 30, 2);
  Rng train_rng(23);
  RandomForest forest = train_forest(shard, 3, TrainParams{}, train_rng);
  std::string text = serialize_forest(forest);
  RandomForest back = parse_forest(text);
  CHECK(serialize_forest(back) == text);
  CHECK_THROWS_AS(parse_forest("not a forest"), ParseError);
}

TEST_CASE("malformed trees are rejected during traversal") {
  DecisionTree broken{{TreeNode{0, false, 1, 5, 0, -1, -1}}};
  std::vector<int64_t> x{3};
  CHECK_THROWS_AS(predict_tree(broken, x), ConfigError);
}
