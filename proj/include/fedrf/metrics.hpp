#pragma once

#include <cstdint>
#include <vector>

namespace fedrf::harness {

/// Binary-classification quality on the {-1,+1} label convention:
/// recall = TP/(TP+FN) on label +1, specificity = TN/(TN+FP) on label -1.
struct ClassificationMetrics {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t tn = 0;
  int64_t fn = 0;
  double accuracy = 0.0;
  double recall = 0.0;
  double specificity = 0.0;
};

ClassificationMetrics compute_metrics(const std::vector<int>& predicted,
                                      const std::vector<int>& truth);

}  // namespace fedrf::harness
