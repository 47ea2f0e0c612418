#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace stylo {

/// Sparse feature vector with strictly increasing indices.
struct SparseVector {
    std::vector<std::uint32_t> index;
    std::vector<double> value;
    std::size_t dim = 0;

    std::size_t nnz() const { return index.size(); }
    std::vector<double> to_dense() const;
    static SparseVector from_dense(std::span<const double> dense);
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

/// Cosine similarity; 0 when either vector has zero norm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

} // namespace stylo
