#include "fedrf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fedrf/errors.hpp"

namespace fedrf::data {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_number(const std::string& token, const std::string& column, size_t row) {
  try {
    size_t pos = 0;
    double v = std::stod(token, &pos);
    if (pos != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw ParseError("row " + std::to_string(row) + ", column '" + column +
                     "': cannot parse value '" + token + "'");
  }
}

}  // namespace

DatasetSchema DatasetSchema::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("schema: invalid json: ") + e.what());
  }
  DatasetSchema schema;
  try {
    schema.name = j.at("name").get<std::string>();
    const auto& label = j.at("label");
    schema.label.column = label.at("column").get<std::string>();
    if (label.contains("greater_than")) {
      schema.label.greater_than = label.at("greater_than").get<double>();
    }
    if (label.contains("equals")) {
      schema.label.equals = label.at("equals").get<std::string>();
    }
    if (!schema.label.greater_than.has_value() && !schema.label.equals.has_value()) {
      throw ParseError("schema: label rule needs 'greater_than' or 'equals'");
    }
    for (const auto& f : j.at("features")) {
      ColumnSpec spec;
      spec.name = f.at("column").get<std::string>();
      std::string type = f.value("type", std::string("numeric"));
      if (type == "numeric") {
        spec.type = ColumnType::kNumeric;
      } else if (type == "coded") {
        spec.type = ColumnType::kCoded;
      } else {
        throw ParseError("schema: unknown column type '" + type + "'");
      }
      if (f.contains("map")) {
        for (auto it = f.at("map").begin(); it != f.at("map").end(); ++it) {
          spec.value_map[it.key()] = it.value().get<double>();
        }
      }
      schema.features.push_back(std::move(spec));
    }
    std::string missing = j.value("missing", std::string("reject"));
    if (missing == "reject") {
      schema.missing = MissingPolicy::kReject;
    } else if (missing == "impute") {
      schema.missing = MissingPolicy::kImpute;
    } else {
      throw ParseError("schema: unknown missing policy '" + missing + "'");
    }
    schema.missing_token = j.value("missing_token", std::string("?"));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("schema: ") + e.what());
  }
  if (schema.features.empty()) throw ParseError("schema: no feature columns");
  return schema;
}

DatasetSchema DatasetSchema::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open schema file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

Dataset load_dataset(const std::string& csv_path, const DatasetSchema& schema,
                     const crypto::SystemParams& params) {
  std::ifstream in(csv_path);
  if (!in) throw ParseError("cannot open dataset file '" + csv_path + "'");
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    throw ParseError("dataset '" + csv_path + "' is empty");
  }
  std::vector<std::string> header = split_csv_line(line);
  std::map<std::string, size_t> column_index;
  for (size_t i = 0; i < header.size(); i++) column_index[header[i]] = i;

  auto require_column = [&](const std::string& name) {
    auto it = column_index.find(name);
    if (it == column_index.end()) {
      throw ParseError("dataset lacks column '" + name + "' required by schema '" +
                       schema.name + "'");
    }
    return it->second;
  };
  size_t label_idx = require_column(schema.label.column);
  std::vector<size_t> feature_idx;
  for (const auto& f : schema.features) feature_idx.push_back(require_column(f.name));

  // raw pass: parse cells, record missing entries for the impute pass
  struct Row {
    std::vector<double> values;  // NaN marks missing
    int label;
  };
  std::vector<Row> rows;
  size_t row_no = 1;
  while (std::getline(in, line)) {
    row_no++;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError("row " + std::to_string(row_no) + ": expected " +
                       std::to_string(header.size()) + " cells, got " +
                       std::to_string(cells.size()));
    }
    Row row;
    const std::string& label_token = cells[label_idx];
    if (label_token == schema.missing_token || label_token.empty()) {
      throw ParseError("row " + std::to_string(row_no) + ": missing label");
    }
    if (schema.label.equals.has_value()) {
      row.label = (label_token == *schema.label.equals) ? 1 : -1;
    } else {
      double v = parse_number(label_token, schema.label.column, row_no);
      row.label = (v > *schema.label.greater_than) ? 1 : -1;
    }
    for (size_t f = 0; f < feature_idx.size(); f++) {
      const std::string& token = cells[feature_idx[f]];
      const ColumnSpec& spec = schema.features[f];
      if (token == schema.missing_token || token.empty()) {
        if (schema.missing == MissingPolicy::kReject) {
          throw ParseError("row " + std::to_string(row_no) + ", column '" + spec.name +
                           "': missing value");
        }
        row.values.push_back(std::nan(""));
        continue;
      }
      if (spec.type == ColumnType::kCoded) {
        auto it = spec.value_map.find(token);
        if (it != spec.value_map.end()) {
          row.values.push_back(it->second);
          continue;
        }
      }
      row.values.push_back(parse_number(token, spec.name, row_no));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("dataset '" + csv_path + "' has no data rows");

  // impute pass: lower median of the observed values per column
  if (schema.missing == MissingPolicy::kImpute) {
    for (size_t f = 0; f < schema.features.size(); f++) {
      std::vector<double> observed;
      for (const Row& r : rows) {
        if (!std::isnan(r.values[f])) observed.push_back(r.values[f]);
      }
      if (observed.empty()) {
        throw ParseError("column '" + schema.features[f].name + "' has no observed values");
      }
      std::sort(observed.begin(), observed.end());
      double median = observed[(observed.size() - 1) / 2];
      for (Row& r : rows) {
        if (std::isnan(r.values[f])) r.values[f] = median;
      }
    }
  }

  Dataset ds;
  ds.name = schema.name;
  for (const auto& f : schema.features) ds.feature_names.push_back(f.name);
  ds.samples.reserve(rows.size());
  for (const Row& r : rows) {
    forest::Sample s;
    s.label = r.label;
    s.features.reserve(r.values.size());
    for (double v : r.values) {
      s.features.push_back(crypto::encode_scaled(params, v).value);
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

SplitResult split_dataset(const Dataset& ds, int n_shards, size_t shard_size, size_t val_size,
                          uint64_t seed, double skew) {
  if (n_shards < 1) throw ConfigError("need at least one shard");
  if (skew < 0.0 || skew > 1.0) throw ConfigError("skew must lie in [0,1]");
  size_t total = ds.samples.size();
  if (total < 3) throw ConfigError("dataset too small to split");

  std::vector<size_t> order(total);
  for (size_t i = 0; i < total; i++) order[i] = i;
  Rng rng = Rng(seed).split("dataset_split");
  for (size_t i = total - 1; i > 0; i--) {
    size_t j = rng.below(i + 1);
    std::swap(order[i], order[j]);
  }

  size_t train_size = (2 * total) / 3;
  size_t holdout = total - train_size;
  if (shard_size == 0) shard_size = std::min<size_t>(100, train_size / n_shards);
  if (shard_size == 0 || shard_size * static_cast<size_t>(n_shards) > train_size) {
    throw ConfigError("shard layout " + std::to_string(n_shards) + " x " +
                      std::to_string(shard_size) + " exceeds the training split of " +
                      std::to_string(train_size));
  }
  if (val_size > holdout) {
    throw ConfigError("validation size " + std::to_string(val_size) +
                      " exceeds the held-out split of " + std::to_string(holdout));
  }

  // non-i.i.d. islands: rank the training pool by the first feature and mix
  // that rank with a uniform draw, then deal consecutive bands to the shards
  std::vector<size_t> train_pool(order.begin(), order.begin() + static_cast<long>(train_size));
  if (skew > 0.0 && !ds.feature_names.empty()) {
    std::vector<size_t> by_feature = train_pool;
    std::sort(by_feature.begin(), by_feature.end(), [&](size_t a, size_t b) {
      if (ds.samples[a].features[0] != ds.samples[b].features[0]) {
        return ds.samples[a].features[0] < ds.samples[b].features[0];
      }
      return a < b;
    });
    std::vector<double> rank(total, 0.0);
    for (size_t i = 0; i < by_feature.size(); i++) {
      rank[by_feature[i]] = static_cast<double>(i) / static_cast<double>(by_feature.size());
    }
    std::vector<std::pair<double, size_t>> keyed;
    keyed.reserve(train_pool.size());
    for (size_t idx : train_pool) {
      double u = static_cast<double>(rng.next_u64() >> 11) * 0x1.0p-53;
      keyed.emplace_back(skew * rank[idx] + (1.0 - skew) * u, idx);
    }
    std::sort(keyed.begin(), keyed.end());
    for (size_t i = 0; i < train_pool.size(); i++) train_pool[i] = keyed[i].second;
  }

  SplitResult out;
  out.shard_size = shard_size;
  out.shards.resize(static_cast<size_t>(n_shards));
  size_t pos = 0;
  for (int s = 0; s < n_shards; s++) {
    for (size_t i = 0; i < shard_size; i++) {
      out.shards[static_cast<size_t>(s)].push_back(ds.samples[train_pool[pos++]]);
    }
  }
  // held-out pool: the trailing third; the test set is the whole pool and the
  // validation samples are drawn from the same pool
  std::vector<size_t> pool(order.begin() + static_cast<long>(train_size), order.end());
  for (size_t idx : pool) out.test.push_back(ds.samples[idx]);
  for (size_t i = 0; i < val_size; i++) out.validation.push_back(ds.samples[pool[i]]);
  return out;
}

}  // namespace fedrf::data
