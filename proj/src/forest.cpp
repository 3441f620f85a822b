#include "fedrf/forest.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fedrf/errors.hpp"
#include "fedrf/parallel.hpp"

namespace fedrf::forest {

int DecisionTree::height() const {
  // longest root-to-leaf edge count
  struct Walker {
    const std::vector<TreeNode>& nodes;
    int walk(int idx) const {
      const TreeNode& n = nodes[static_cast<size_t>(idx)];
      if (n.is_leaf) return 0;
      return 1 + std::max(walk(n.left), walk(n.right));
    }
  };
  if (nodes.empty()) return 0;
  return Walker{nodes}.walk(0);
}

int DecisionTree::internal_node_count() const {
  int count = 0;
  for (const auto& n : nodes) {
    if (!n.is_leaf) count++;
  }
  return count;
}

namespace {

struct Builder {
  const Shard& shard;
  const TrainParams& params;
  Rng& rng;
  int n_features;
  std::vector<TreeNode> nodes;

  int majority_label(const std::vector<int>& idx) const {
    int pos = 0;
    for (int i : idx) {
      if (shard[static_cast<size_t>(i)].label > 0) pos++;
    }
    // ties resolve to +1, mirroring the >=0 prediction rule
    return 2 * pos >= static_cast<int>(idx.size()) ? 1 : -1;
  }

  int make_leaf(int label) {
    TreeNode node;
    node.index = static_cast<int>(nodes.size());
    node.is_leaf = true;
    node.label = label;
    nodes.push_back(node);
    return node.index;
  }

  bool pure(const std::vector<int>& idx) const {
    for (size_t i = 1; i < idx.size(); i++) {
      if (shard[static_cast<size_t>(idx[i])].label != shard[static_cast<size_t>(idx[0])].label) {
        return false;
      }
    }
    return true;
  }

  std::vector<int> sample_features() {
    int m = params.features_per_split;
    if (m <= 0) m = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_features))));
    m = std::min(m, n_features);
    std::vector<int> all(static_cast<size_t>(n_features));
    for (int i = 0; i < n_features; i++) all[static_cast<size_t>(i)] = i + 1;
    for (int i = 0; i < m; i++) {
      auto j = static_cast<int>(rng.below(static_cast<uint64_t>(n_features - i))) + i;
      std::swap(all[static_cast<size_t>(i)], all[static_cast<size_t>(j)]);
    }
    all.resize(static_cast<size_t>(m));
    return all;
  }

  struct Split {
    bool found = false;
    int feature_id = 0;
    int64_t threshold = 0;
    // gain comparison as exact fractions: sumsq_l/n_l + sumsq_r/n_r
    __int128 score_num = 0;
    int64_t score_den = 0;

    bool better_than(const Split& o) const {
      if (!o.found) return true;
      return static_cast<__int128>(score_num) * o.score_den >
             static_cast<__int128>(o.score_num) * score_den;
    }
  };

  // score of keeping the node whole, on the same fraction scale
  static Split leaf_score(int64_t pos, int64_t n) {
    Split s;
    s.found = true;
    int64_t neg = n - pos;
    s.score_num = static_cast<__int128>(pos) * pos + static_cast<__int128>(neg) * neg;
    s.score_den = n;
    return s;
  }

  Split best_split(const std::vector<int>& idx) {
    Split best;
    std::vector<std::pair<int64_t, int>> column(idx.size());
    for (int feature_id : sample_features()) {
      for (size_t i = 0; i < idx.size(); i++) {
        const Sample& s = shard[static_cast<size_t>(idx[i])];
        column[i] = {s.features[static_cast<size_t>(feature_id - 1)], s.label};
      }
      std::sort(column.begin(), column.end());
      auto n = static_cast<int64_t>(column.size());
      int64_t total_pos = 0;
      for (const auto& [v, label] : column) {
        if (label > 0) total_pos++;
      }
      int64_t left_n = 0, left_pos = 0;
      for (size_t i = 0; i + 1 < column.size(); i++) {
        left_n++;
        if (column[i].second > 0) left_pos++;
        if (column[i].first == column[i + 1].first) continue;
        int64_t right_n = n - left_n;
        int64_t right_pos = total_pos - left_pos;
        int64_t left_neg = left_n - left_pos;
        int64_t right_neg = right_n - right_pos;
        Split cand;
        cand.found = true;
        cand.feature_id = feature_id;
        // integer threshold in (a, b]: splits identically to the midpoint
        cand.threshold = (column[i].first + column[i + 1].first + 1) / 2;
        __int128 left_sq = static_cast<__int128>(left_pos) * left_pos +
                           static_cast<__int128>(left_neg) * left_neg;
        __int128 right_sq = static_cast<__int128>(right_pos) * right_pos +
                            static_cast<__int128>(right_neg) * right_neg;
        cand.score_num = left_sq * right_n + right_sq * left_n;
        cand.score_den = left_n * right_n;
        if (cand.better_than(best)) best = cand;
      }
    }
    return best;
  }

  int build(std::vector<int> idx, int depth) {
    if (pure(idx) || static_cast<int>(idx.size()) < params.min_samples_split ||
        depth >= params.max_height) {
      return make_leaf(majority_label(idx));
    }
    Split split = best_split(idx);
    int64_t pos = 0;
    for (int i : idx) {
      if (shard[static_cast<size_t>(i)].label > 0) pos++;
    }
    // no strict purity gain over the whole node: stop
    if (!split.found ||
        !split.better_than(leaf_score(pos, static_cast<int64_t>(idx.size())))) {
      return make_leaf(majority_label(idx));
    }
    TreeNode node;
    node.index = static_cast<int>(nodes.size());
    node.is_leaf = false;
    node.feature_id = split.feature_id;
    node.split_value = split.threshold;
    nodes.push_back(node);

    std::vector<int> left_idx, right_idx;
    for (int i : idx) {
      int64_t v = shard[static_cast<size_t>(i)].features[static_cast<size_t>(split.feature_id - 1)];
      (v < split.threshold ? left_idx : right_idx).push_back(i);
    }
    int left = build(std::move(left_idx), depth + 1);
    int right = build(std::move(right_idx), depth + 1);
    nodes[static_cast<size_t>(node.index)].left = left;
    nodes[static_cast<size_t>(node.index)].right = right;
    return node.index;
  }
};

}  // namespace

DecisionTree train_tree(const Shard& shard, const TrainParams& params, Rng& rng) {
  if (shard.empty()) throw ConfigError("cannot train a tree on an empty shard");
  auto n_features = static_cast<int>(shard[0].features.size());
  if (n_features == 0) throw ConfigError("samples carry no features");
  for (const auto& s : shard) {
    if (static_cast<int>(s.features.size()) != n_features) {
      throw ConfigError("inconsistent feature counts in shard");
    }
    if (s.label != 1 && s.label != -1) throw ConfigError("labels must be +1 or -1");
  }
  Builder b{shard, params, rng, n_features, {}};
  std::vector<int> idx(shard.size());
  for (size_t i = 0; i < shard.size(); i++) idx[i] = static_cast<int>(i);
  b.build(std::move(idx), 0);
  return DecisionTree{std::move(b.nodes)};
}

RandomForest train_forest(const Shard& shard, int n_trees, const TrainParams& params, Rng& rng) {
  if (n_trees < 1) throw ConfigError("a forest needs at least one tree");
  if (shard.empty()) throw ConfigError("cannot train a forest on an empty shard");
  RandomForest forest;
  forest.trees.reserve(static_cast<size_t>(n_trees));
  for (int t = 0; t < n_trees; t++) {
    Rng tree_rng = rng.split(static_cast<uint64_t>(t));
    Shard boot;
    boot.reserve(shard.size());
    for (size_t i = 0; i < shard.size(); i++) {
      boot.push_back(shard[tree_rng.below(shard.size())]);
    }
    forest.trees.push_back(train_tree(boot, params, tree_rng));
  }
  return forest;
}

int predict_tree(const DecisionTree& tree, std::span<const int64_t> features) {
  if (tree.nodes.empty()) throw ConfigError("empty tree");
  int idx = 0;
  for (;;) {
    const TreeNode& node = tree.nodes[static_cast<size_t>(idx)];
    if (node.is_leaf) return node.label;
    if (node.feature_id < 1 || node.feature_id > static_cast<int>(features.size())) {
      throw ConfigError("tree references feature id " + std::to_string(node.feature_id) +
                        " outside the sample");
    }
    int64_t v = features[static_cast<size_t>(node.feature_id - 1)];
    idx = v < node.split_value ? node.left : node.right;
    if (idx < 0 || idx >= static_cast<int>(tree.nodes.size())) {
      throw ConfigError("malformed tree: dangling child link");
    }
  }
}

ForestPrediction predict_forest(const RandomForest& forest, std::span<const int64_t> features) {
  ForestPrediction p;
  p.n_trees = static_cast<int>(forest.trees.size());
  for (const auto& tree : forest.trees) p.vote_sum += predict_tree(tree, features);
  p.label = p.vote_sum >= 0 ? 1 : -1;
  return p;
}

size_t EncryptedForest::node_count() const {
  size_t count = 0;
  for (const auto& t : trees) count += t.nodes.size();
  return count;
}

EncryptedForest encrypt_forest(const crypto::SystemParams& params, const crypto::PublicKey& pk,
                               const RandomForest& forest, Rng& rng, bool parallel) {
  EncryptedForest out;
  out.key_id = pk.id;
  out.trees.resize(forest.trees.size());
  Rng base = rng.split("encrypt_forest");
  parallel_for(forest.trees.size(), parallel, [&](size_t t) {
    const DecisionTree& tree = forest.trees[t];
    EncryptedTree enc_tree;
    enc_tree.key_id = pk.id;
    enc_tree.nodes.reserve(tree.nodes.size());
    Rng tree_rng = base.split(t);
    for (const TreeNode& node : tree.nodes) {
      Rng node_rng = tree_rng.split(static_cast<uint64_t>(node.index));
      EncTreeNode enc_node;
      enc_node.index = node.index;
      enc_node.is_leaf = node.is_leaf;
      enc_node.feature_id = node.feature_id;
      enc_node.left = node.left;
      enc_node.right = node.right;
      enc_node.tag = node.is_leaf ? crypto::ScaleTag::kUnit : crypto::ScaleTag::kScaled;
      int64_t value = node.is_leaf ? node.label : node.split_value;
      enc_node.weight =
          crypto::enc(params, pk, crypto::PlainScalar{value, enc_node.tag}, node_rng);
      enc_tree.nodes.push_back(std::move(enc_node));
    }
    out.trees[t] = std::move(enc_tree);
  });
  return out;
}

RandomForest decrypt_forest(const crypto::SystemParams& params, const crypto::KeyPair& key,
                            const EncryptedForest& enc) {
  RandomForest out;
  out.trees.reserve(enc.trees.size());
  for (const auto& enc_tree : enc.trees) {
    DecisionTree tree;
    tree.nodes.reserve(enc_tree.nodes.size());
    for (const auto& enc_node : enc_tree.nodes) {
      TreeNode node;
      node.index = enc_node.index;
      node.is_leaf = enc_node.is_leaf;
      node.feature_id = enc_node.feature_id;
      node.left = enc_node.left;
      node.right = enc_node.right;
      crypto::PlainScalar v = crypto::dec(params, key, enc_node.weight, enc_node.tag);
      if (node.is_leaf) {
        node.label = static_cast<int>(v.value);
      } else {
        node.split_value = v.value;
      }
      tree.nodes.push_back(node);
    }
    out.trees.push_back(std::move(tree));
  }
  return out;
}

std::string serialize_forest(const RandomForest& forest) {
  std::ostringstream out;
  out << "forest trees=" << forest.trees.size() << "\n";
  for (size_t t = 0; t < forest.trees.size(); t++) {
    const DecisionTree& tree = forest.trees[t];
    out << "tree " << t << " nodes=" << tree.nodes.size() << "\n";
    for (const TreeNode& n : tree.nodes) {
      if (n.is_leaf) {
        out << n.index << " leaf label=" << n.label << "\n";
      } else {
        out << n.index << " split id=" << n.feature_id << " value=" << n.split_value
            << " left=" << n.left << " right=" << n.right << "\n";
      }
    }
  }
  return out.str();
}

RandomForest parse_forest(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("forest trees=", 0) != 0) {
    throw ParseError("forest dump: missing header");
  }
  size_t n_trees = std::stoul(line.substr(13));
  RandomForest forest;
  forest.trees.resize(n_trees);
  for (size_t t = 0; t < n_trees; t++) {
    if (!std::getline(in, line) || line.rfind("tree ", 0) != 0) {
      throw ParseError("forest dump: missing tree header");
    }
    size_t eq = line.find("nodes=");
    size_t n_nodes = std::stoul(line.substr(eq + 6));
    DecisionTree& tree = forest.trees[t];
    tree.nodes.resize(n_nodes);
    for (size_t i = 0; i < n_nodes; i++) {
      if (!std::getline(in, line)) throw ParseError("forest dump: truncated tree");
      std::istringstream ls(line);
      TreeNode node;
      std::string kind;
      ls >> node.index >> kind;
      auto field = [&](const char* name) {
        std::string tok;
        ls >> tok;
        std::string prefix = std::string(name) + "=";
        if (tok.rfind(prefix, 0) != 0) throw ParseError("forest dump: expected " + prefix);
        return std::stoll(tok.substr(prefix.size()));
      };
      if (kind == "leaf") {
        node.is_leaf = true;
        node.label = static_cast<int>(field("label"));
      } else if (kind == "split") {
        node.feature_id = static_cast<int>(field("id"));
        node.split_value = field("value");
        node.left = static_cast<int>(field("left"));
        node.right = static_cast<int>(field("right"));
      } else {
        throw ParseError("forest dump: unknown node kind '" + kind + "'");
      }
      if (node.index < 0 || node.index >= static_cast<int>(n_nodes)) {
        throw ParseError("forest dump: node index out of range");
      }
      tree.nodes[static_cast<size_t>(node.index)] = node;
    }
  }
  return forest;
}

}  // namespace fedrf::forest
