#include "iprov/core.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace iprov {

const char* to_string(Errc c) {
    switch (c) {
        case Errc::SelfLoop: return "SelfLoop";
        case Errc::InconsistentJournal: return "InconsistentJournal";
        case Errc::ParseError: return "ParseError";
        case Errc::DuplicateId: return "DuplicateId";
        case Errc::BadMagic: return "BadMagic";
        case Errc::Truncated: return "Truncated";
        case Errc::TooSmall: return "TooSmall";
        case Errc::IdenticalInputs: return "IdenticalInputs";
        case Errc::UnknownImage: return "UnknownImage";
        case Errc::UnknownOp: return "UnknownOp";
        case Errc::DimMismatch: return "DimMismatch";
        case Errc::Io: return "Io";
        case Errc::Usage: return "Usage";
    }
    return "Error";
}

const char* to_string(ImageFormat f) {
    switch (f) {
        case ImageFormat::Jpeg: return "JPEG";
        case ImageFormat::Png: return "PNG";
        case ImageFormat::Other: return "OTHER";
    }
    return "OTHER";
}

ImageRecord make_image(ImageId id, int width, int height, ImageFormat format) {
    ImageRecord img;
    img.id = id;
    img.width = width;
    img.height = height;
    img.format = format;
    img.pixels.assign(static_cast<std::size_t>(width) * height * 3, 0);
    return img;
}

void ProvenanceGraph::add_edge(const MREdge& e) {
    if (e.src == e.dst) raise(Errc::SelfLoop, "edge " + std::to_string(e.src.value) + " -> itself");
    nodes.insert(e.src);
    nodes.insert(e.dst);
    edges.insert(e);
}

ProvenanceGraph graph_add_edge(ProvenanceGraph g, const MREdge& e) {
    g.add_edge(e);
    return g;
}

namespace {

// Johnson's elementary-circuit enumeration, truncated at max_cycles.
class CycleFinder {
public:
    CycleFinder(const std::vector<std::vector<int>>& adj, std::size_t max_cycles)
        : adj_(adj), max_cycles_(max_cycles), blocked_(adj.size(), false), block_lists_(adj.size()) {}

    bool run(std::vector<std::vector<int>>* cycles) {
        const int n = static_cast<int>(adj_.size());
        for (int s = 0; s < n && !done_; ++s) {
            start_ = s;
            std::fill(blocked_.begin(), blocked_.end(), false);
            for (auto& b : block_lists_) b.clear();
            circuit(s);
        }
        *cycles = std::move(cycles_);
        return done_; // true when the cap truncated the enumeration
    }

private:
    bool circuit(int v) {
        if (done_) return false;
        bool found = false;
        stack_.push_back(v);
        blocked_[v] = true;
        for (int w : adj_[v]) {
            if (w < start_ || done_) continue;
            if (w == start_) {
                cycles_.push_back(stack_);
                found = true;
                if (cycles_.size() >= max_cycles_) done_ = true;
            } else if (!blocked_[w]) {
                if (circuit(w)) found = true;
            }
        }
        if (found) {
            unblock(v);
        } else {
            for (int w : adj_[v]) {
                if (w < start_) continue;
                auto& lst = block_lists_[w];
                if (std::find(lst.begin(), lst.end(), v) == lst.end()) lst.push_back(v);
            }
        }
        stack_.pop_back();
        return found;
    }

    void unblock(int u) {
        blocked_[u] = false;
        auto pending = std::move(block_lists_[u]);
        block_lists_[u].clear();
        for (int w : pending)
            if (blocked_[w]) unblock(w);
    }

    const std::vector<std::vector<int>>& adj_;
    std::size_t max_cycles_;
    int start_ = 0;
    bool done_ = false;
    std::vector<bool> blocked_;
    std::vector<std::vector<int>> block_lists_;
    std::vector<int> stack_;
    std::vector<std::vector<int>> cycles_;
};

} // namespace

ValidationReport graph_validate(const ProvenanceGraph& g, std::size_t max_cycles) {
    ValidationReport report;

    std::vector<ImageId> ids(g.nodes.begin(), g.nodes.end());
    std::unordered_map<ImageId, int> idx;
    for (std::size_t i = 0; i < ids.size(); ++i) idx[ids[i]] = static_cast<int>(i);

    std::vector<std::vector<int>> adj(ids.size());
    std::vector<int> degree(ids.size(), 0);
    for (const auto& e : g.edges) {
        const int u = idx.at(e.src), v = idx.at(e.dst);
        adj[u].push_back(v);
        ++degree[u];
        ++degree[v];
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());

    for (std::size_t i = 0; i < ids.size(); ++i)
        if (degree[i] == 0) report.orphan_nodes.insert(ids[i]);

    std::vector<std::vector<int>> raw;
    report.cycle_cap_hit = CycleFinder(adj, max_cycles).run(&raw);
    for (const auto& c : raw) {
        std::vector<ImageId> cycle;
        cycle.reserve(c.size());
        for (int v : c) cycle.push_back(ids[static_cast<std::size_t>(v)]);
        report.cycles.push_back(std::move(cycle));
    }
    return report;
}

std::string graph_to_dot(const ProvenanceGraph& g, const std::string& name) {
    std::ostringstream out;
    out << "digraph " << name << " {\n";
    for (const auto& n : g.nodes) out << "  " << n.value << ";\n";
    for (const auto& e : g.edges) out << "  " << e.src.value << " -> " << e.dst.value << ";\n";
    out << "}\n";
    return out.str();
}

const std::vector<OpCatalogEntry>& op_catalog() {
    static const std::vector<OpCatalogEntry> catalog = {
        {"color_jitter", {"gain_b", "gain_g", "gain_r"}},
        {"contrast", {"factor"}},
        {"brightness", {"delta"}},
        {"saturation", {"factor"}},
        {"grayscale", {}},
        {"perspective_warp", {"jitter"}},
        {"aspect_ratio", {"factor"}},
        {"pad", {"b", "frac", "g", "r"}},
        {"scale", {"factor"}},
        {"hflip", {}},
        {"vflip", {}},
        {"rotate", {"degrees"}},
        {"pixelize", {"block"}},
        {"quality_encode", {"quality"}},
        {"gaussian_noise", {"sigma"}},
        {"sharpen", {"amount"}},
        {"opacity", {"alpha"}},
        {"shuffle", {"grid"}},
        {"crop", {"area", "cx", "cy"}},
        {"tamper_splice", {"area", "x", "y"}},
        {"meme_text", {"height_frac"}},
        {"unrelated", {}},
    };
    return catalog;
}

const OpCatalogEntry* op_catalog_find(const std::string& name) {
    for (const auto& e : op_catalog())
        if (e.name == name) return &e;
    return nullptr;
}

void validate_op(const ModificationOp& op) {
    const OpCatalogEntry* entry = op_catalog_find(op.name);
    if (!entry) raise(Errc::UnknownOp, "'" + op.name + "' is not in the op catalog");
    std::vector<std::string> keys;
    keys.reserve(op.params.size());
    for (const auto& [k, _] : op.params) keys.push_back(k);
    if (keys != entry->param_keys)
        raise(Errc::ParseError, "op '" + op.name + "' has unexpected parameter keys");
}

void Journal::check() const {
    for (const auto& e : graph.edges) {
        if (!graph.nodes.count(e.src) || !graph.nodes.count(e.dst))
            raise(Errc::InconsistentJournal, "edge endpoint missing from node set");
        if (!edge_ops.count(e))
            raise(Errc::InconsistentJournal, "edge without an op chain: " + std::to_string(e.src.value) +
                                                 " -> " + std::to_string(e.dst.value));
    }
    for (const auto& [e, _] : edge_ops) {
        if (!graph.edges.count(e))
            raise(Errc::InconsistentJournal, "op chain for unknown edge: " + std::to_string(e.src.value) +
                                                 " -> " + std::to_string(e.dst.value));
    }
    const ValidationReport report = graph_validate(graph, 1);
    if (!report.acyclic()) raise(Errc::InconsistentJournal, "journal graph contains a cycle");
}

namespace {

using nlohmann::json;

json op_to_json(const ModificationOp& op) {
    json params = json::object();
    for (const auto& [k, v] : op.params) params[k] = v;
    return json{{"name", op.name}, {"params", params}};
}

ModificationOp op_from_json(const json& j) {
    ModificationOp op;
    op.name = j.at("name").get<std::string>();
    for (const auto& [k, v] : j.at("params").items()) op.params[k] = v.get<double>();
    return op;
}

} // namespace

std::string journal_to_string(const Journal& j) {
    j.check();
    json root;
    root["graph_id"] = j.graph_id;
    json nodes = json::array();
    for (const auto& n : j.graph.nodes) {
        json node;
        node["id"] = n.value;
        auto file = j.node_files.find(n);
        node["file"] = file == j.node_files.end() ? "" : file->second;
        auto q = j.save_quality.find(n);
        if (q != j.save_quality.end()) node["save_quality"] = q->second;
        nodes.push_back(std::move(node));
    }
    root["nodes"] = std::move(nodes);
    json edges = json::array();
    for (const auto& e : j.graph.edges) {
        json edge;
        edge["src"] = e.src.value;
        edge["dst"] = e.dst.value;
        json ops = json::array();
        for (const auto& op : j.edge_ops.at(e)) ops.push_back(op_to_json(op));
        edge["ops"] = std::move(ops);
        edges.push_back(std::move(edge));
    }
    root["edges"] = std::move(edges);
    return root.dump(2) + "\n";
}

Journal journal_from_string(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        raise(Errc::ParseError, std::string("journal: ") + e.what());
    }
    Journal j;
    try {
        j.graph_id = root.at("graph_id").get<std::string>();
        for (const auto& node : root.at("nodes")) {
            const ImageId id{node.at("id").get<std::uint64_t>()};
            if (j.graph.nodes.count(id)) raise(Errc::InconsistentJournal, "duplicate node id");
            j.graph.add_node(id);
            j.node_files[id] = node.at("file").get<std::string>();
            if (node.contains("save_quality")) j.save_quality[id] = node.at("save_quality").get<int>();
        }
        for (const auto& edge : root.at("edges")) {
            const MREdge e{ImageId{edge.at("src").get<std::uint64_t>()},
                           ImageId{edge.at("dst").get<std::uint64_t>()}};
            if (!j.graph.nodes.count(e.src) || !j.graph.nodes.count(e.dst))
                raise(Errc::InconsistentJournal, "edge references unknown node");
            if (j.graph.edges.count(e)) raise(Errc::InconsistentJournal, "duplicate edge");
            j.graph.add_edge(e);
            std::vector<ModificationOp> ops;
            for (const auto& op : edge.at("ops")) {
                ops.push_back(op_from_json(op));
                validate_op(ops.back());
            }
            j.edge_ops[e] = std::move(ops);
        }
    } catch (const json::exception& e) {
        raise(Errc::ParseError, std::string("journal: ") + e.what());
    }
    j.check();
    return j;
}

void journal_write(const Journal& j, const std::string& path) {
    const std::string text = journal_to_string(j);
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Errc::Io, "cannot open for writing: " + path);
    out << text;
    if (!out) raise(Errc::Io, "write failed: " + path);
}

Journal journal_read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::Io, "cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return journal_from_string(buf.str());
}

} // namespace iprov
