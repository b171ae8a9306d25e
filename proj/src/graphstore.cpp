#include "iprov/graphstore.hpp"

#include <cstring>
#include <deque>
#include <fstream>

namespace iprov {

namespace {

constexpr char kMagic[4] = {'I', 'P', 'M', 'R'};
constexpr std::uint32_t kVersion = 1;

const std::set<ImageId> kEmpty;

void write_u64(std::ofstream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 8);
}

void write_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 4);
}

} // namespace

void MRStore::add_edge(const MREdge& e) {
    if (e.src == e.dst) raise(Errc::SelfLoop, "store edge " + std::to_string(e.src.value) + " -> itself");
    forward_[e.src].insert(e.dst);
    backward_[e.dst].insert(e.src);
    edges_.insert(e);
}

const std::set<ImageId>& MRStore::successors(ImageId id) const {
    auto it = forward_.find(id);
    return it == forward_.end() ? kEmpty : it->second;
}

const std::set<ImageId>& MRStore::predecessors(ImageId id) const {
    auto it = backward_.find(id);
    return it == backward_.end() ? kEmpty : it->second;
}

ProvenanceGraph MRStore::trace(const std::set<ImageId>& seeds, TraceStats* stats) const {
    TraceStats local;
    const auto closure = [&](const std::map<ImageId, std::set<ImageId>>& adj) {
        std::set<ImageId> reached(seeds);
        std::deque<ImageId> frontier(seeds.begin(), seeds.end());
        while (!frontier.empty()) {
            const ImageId v = frontier.front();
            frontier.pop_front();
            ++local.nodes_touched;
            auto it = adj.find(v);
            if (it == adj.end()) continue;
            for (const ImageId& next : it->second) {
                ++local.edges_touched;
                if (reached.insert(next).second) frontier.push_back(next);
            }
        }
        return reached;
    };

    const std::set<ImageId> up = closure(backward_);   // seeds + ancestors
    const std::set<ImageId> down = closure(forward_);  // seeds + descendants

    ProvenanceGraph g;
    for (const ImageId& v : up) g.add_node(v);
    for (const ImageId& v : down) g.add_node(v);

    // Induced edges inside each per-direction closure; edges bridging an
    // ancestors-only node to a descendants-only node are not MR paths through
    // any seed and stay out.
    for (const ImageId& v : up) {
        auto it = forward_.find(v);
        if (it == forward_.end()) continue;
        for (const ImageId& succ : it->second) {
            ++local.edges_touched;
            if (up.count(succ)) g.add_edge({v, succ});
        }
    }
    for (const ImageId& v : down) {
        auto it = forward_.find(v);
        if (it == forward_.end()) continue;
        for (const ImageId& succ : it->second) {
            ++local.edges_touched;
            if (down.count(succ)) g.add_edge({v, succ});
        }
    }

    if (stats) *stats = local;
    return g;
}

void MRStore::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Errc::Io, "cannot open for writing: " + path);
    out.write(kMagic, 4);
    write_u32(out, kVersion);
    for (const MREdge& e : edges_) {
        write_u64(out, e.src.value);
        write_u64(out, e.dst.value);
    }
    if (!out) raise(Errc::Io, "write failed: " + path);
}

MRStore MRStore::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::Io, "cannot open: " + path);
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0)
        raise(Errc::BadMagic, path + ": expected IPMR header at offset 0");
    unsigned char vbuf[4];
    in.read(reinterpret_cast<char*>(vbuf), 4);
    if (in.gcount() != 4) raise(Errc::Truncated, path + ": truncated at offset 4");
    std::uint32_t version = 0;
    for (int i = 0; i < 4; ++i) version |= static_cast<std::uint32_t>(vbuf[i]) << (8 * i);
    if (version != kVersion) raise(Errc::ParseError, path + ": unsupported version");

    MRStore store;
    std::uint64_t offset = 8;
    unsigned char rec[16];
    while (true) {
        in.read(reinterpret_cast<char*>(rec), 16);
        const std::streamsize got = in.gcount();
        if (got == 0) break;
        if (got != 16)
            raise(Errc::Truncated, path + ": truncated record at offset " + std::to_string(offset));
        std::uint64_t src = 0, dst = 0;
        for (int i = 0; i < 8; ++i) {
            src |= static_cast<std::uint64_t>(rec[i]) << (8 * i);
            dst |= static_cast<std::uint64_t>(rec[8 + i]) << (8 * i);
        }
        store.add_edge({ImageId{src}, ImageId{dst}}); // duplicate log lines collapse here
        offset += 16;
    }
    return store;
}

} // namespace iprov
