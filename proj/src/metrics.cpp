#include "fedrf/metrics.hpp"

#include "fedrf/errors.hpp"

namespace fedrf::harness {

ClassificationMetrics compute_metrics(const std::vector<int>& predicted,
                                      const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) {
    throw ConfigError("prediction and truth vectors differ in length");
  }
  if (predicted.empty()) throw ConfigError("cannot compute metrics on zero samples");
  ClassificationMetrics m;
  for (size_t i = 0; i < predicted.size(); i++) {
    if (predicted[i] != 1 && predicted[i] != -1) throw ConfigError("predictions must be +-1");
    if (truth[i] != 1 && truth[i] != -1) throw ConfigError("labels must be +-1");
    if (truth[i] == 1) {
      (predicted[i] == 1 ? m.tp : m.fn)++;
    } else {
      (predicted[i] == -1 ? m.tn : m.fp)++;
    }
  }
  auto total = static_cast<double>(predicted.size());
  m.accuracy = static_cast<double>(m.tp + m.tn) / total;
  // vacuous denominators count as perfect: nothing to misclassify
  m.recall = (m.tp + m.fn) == 0 ? 1.0 : static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  m.specificity =
      (m.tn + m.fp) == 0 ? 1.0 : static_cast<double>(m.tn) / static_cast<double>(m.tn + m.fp);
  return m;
}

}  // namespace fedrf::harness
