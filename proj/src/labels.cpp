#include "longcode/labels.hpp"

#include <algorithm>
#include <string>

#include "longcode/error.hpp"

namespace longcode {

SparseLabels make_sparse_labels(std::vector<std::uint32_t> classes, std::size_t num_classes) {
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  check_sparse_labels(classes, num_classes);
  return classes;
}

void check_sparse_labels(const SparseLabels& labels, std::size_t num_classes) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) {
      throw IndexError("label " + std::to_string(labels[i]) + " out of range for K=" +
                       std::to_string(num_classes));
    }
    if (i > 0 && labels[i] <= labels[i - 1]) {
      throw FormatError("sparse labels must be sorted and unique");
    }
  }
}

}  // namespace longcode
