#include "stylo/vector.hpp"

#include "stylo/error.hpp"

#include <cmath>

namespace stylo {

std::vector<double> SparseVector::to_dense() const
{
    std::vector<double> out(dim, 0.0);
    for (std::size_t k = 0; k < index.size(); ++k) out[index[k]] = value[k];
    return out;
}

SparseVector SparseVector::from_dense(std::span<const double> dense)
{
    SparseVector v;
    v.dim = dense.size();
    for (std::size_t i = 0; i < dense.size(); ++i) {
        if (dense[i] != 0.0) {
            v.index.push_back(static_cast<std::uint32_t>(i));
            v.value.push_back(dense[i]);
        }
    }
    return v;
}

double dot(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) throw DataError("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a)
{
    return std::sqrt(dot(a, a));
}

double cosine_similarity(std::span<const double> a, std::span<const double> b)
{
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

} // namespace stylo
