#include "iprov/index.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

namespace iprov {

namespace {

constexpr char kMagic[4] = {'I', 'P', 'D', 'X'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_le(std::ofstream& out, T value) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(value >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in, const std::string& path) {
    unsigned char buf[sizeof(T)];
    in.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (in.gcount() != static_cast<std::streamsize>(sizeof(T)))
        raise(Errc::Truncated, path + ": truncated at offset " + std::to_string(in.tellg()));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(buf[i]) << (8 * i);
    return value;
}

} // namespace

DescriptorIndex::DescriptorIndex(std::uint16_t dim) : dim_(dim) {}

void DescriptorIndex::insert(ImageId id, const GlobalDescriptor& d) {
    if (d.dim() != dim_) raise(Errc::DimMismatch, "descriptor dim != index dim");
    if (!seen_.insert(id.value).second)
        raise(Errc::DuplicateId, "id " + std::to_string(id.value) + " already indexed");
    ids_.push_back(id);
    data_.insert(data_.end(), d.vector.begin(), d.vector.end());
}

std::vector<SearchHit> DescriptorIndex::top_k(const GlobalDescriptor& q, std::size_t k,
                                              std::uint64_t* evals_out) const {
    if (k == 0) raise(Errc::Usage, "k must be >= 1");
    if (q.dim() != dim_) raise(Errc::DimMismatch, "query dim != index dim");

    const std::size_t n = size();
    if (evals_out) *evals_out = n;
    std::vector<SearchHit> hits;
    hits.reserve(n);
    const float* row = data_.data();
    for (std::size_t i = 0; i < n; ++i, row += dim_) {
        double dot = 0;
        for (std::uint16_t d = 0; d < dim_; ++d) dot += static_cast<double>(row[d]) * q.vector[d];
        hits.push_back({ids_[i], dot});
    }

    const auto better = [](const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    };
    const std::size_t take = std::min(k, n);
    std::partial_sort(hits.begin(), hits.begin() + take, hits.end(), better);
    hits.resize(take);
    return hits;
}

void DescriptorIndex::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Errc::Io, "cannot open for writing: " + path);
    out.write(kMagic, 4);
    write_le<std::uint32_t>(out, kVersion);
    write_le<std::uint16_t>(out, dim_);
    write_le<std::uint64_t>(out, size());
    for (std::size_t i = 0; i < size(); ++i) {
        write_le<std::uint64_t>(out, ids_[i].value);
        for (std::uint16_t d = 0; d < dim_; ++d) {
            std::uint32_t bits;
            std::memcpy(&bits, &data_[i * dim_ + d], 4);
            write_le<std::uint32_t>(out, bits);
        }
    }
    if (!out) raise(Errc::Io, "write failed: " + path);
}

DescriptorIndex DescriptorIndex::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::Io, "cannot open: " + path);
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0)
        raise(Errc::BadMagic, path + ": expected IPDX header at offset 0");
    const auto version = read_le<std::uint32_t>(in, path);
    if (version != kVersion) raise(Errc::ParseError, path + ": unsupported version");
    const auto dim = read_le<std::uint16_t>(in, path);
    const auto count = read_le<std::uint64_t>(in, path);

    DescriptorIndex idx(dim);
    GlobalDescriptor d;
    d.vector.resize(dim);
    for (std::uint64_t i = 0; i < count; ++i) {
        const ImageId id{read_le<std::uint64_t>(in, path)};
        for (std::uint16_t c = 0; c < dim; ++c) {
            const std::uint32_t bits = read_le<std::uint32_t>(in, path);
            std::memcpy(&d.vector[c], &bits, 4);
        }
        idx.insert(id, d);
    }
    return idx;
}

} // namespace iprov
