#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "iprov/core.hpp"
#include "iprov/descriptor.hpp"

namespace iprov {

struct SearchHit {
    ImageId id;
    double score;
};

/// Append-only flat descriptor store with exact top-k scan. One pass over the
/// entries per query, D multiply-adds each; no approximation.
class DescriptorIndex {
public:
    explicit DescriptorIndex(std::uint16_t dim = kGlobalDescriptorDim);

    std::uint16_t dim() const { return dim_; }
    std::size_t size() const { return ids_.size(); }

    /// Throws DuplicateId / DimMismatch.
    void insert(ImageId id, const GlobalDescriptor& d);

    /// The min(k, size) highest-cosine entries, descending score, ties broken
    /// by ascending id. `evals_out`, when set, receives the number of
    /// similarity evaluations performed (always size()).
    std::vector<SearchHit> top_k(const GlobalDescriptor& q, std::size_t k,
                                 std::uint64_t* evals_out = nullptr) const;

    void save(const std::string& path) const;
    static DescriptorIndex load(const std::string& path);

    const std::vector<ImageId>& ids() const { return ids_; }

private:
    std::uint16_t dim_;
    std::vector<ImageId> ids_;
    std::vector<float> data_; // size() * dim_, row-major
    std::unordered_set<std::uint64_t> seen_;
};

} // namespace iprov
