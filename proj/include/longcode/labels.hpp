#pragma once

#include <cstdint>
#include <vector>

namespace longcode {

// Positive class indices of one note: sorted, unique, each < K.
using SparseLabels = std::vector<std::uint32_t>;

// Sorts and deduplicates; throws IndexError for indices >= num_classes.
SparseLabels make_sparse_labels(std::vector<std::uint32_t> classes, std::size_t num_classes);

// Throws unless `labels` is sorted, unique and in range.
void check_sparse_labels(const SparseLabels& labels, std::size_t num_classes);

}  // namespace longcode
