#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "iprov/construct.hpp"
#include "iprov/core.hpp"
#include "iprov/synth.hpp"

namespace iprov {

/// F1-style graph overlap scores. Directed variants treat edges as ordered
/// pairs; the plain EO/VEO treat them as unordered pairs. Empty/empty
/// components score 1.0 and set the flag.
struct GraphScore {
    double vo = 0;
    double eo = 0;
    double veo = 0;
    double eo_directed = 0;
    double veo_directed = 0;
    bool empty_convention_used = false;
};

GraphScore graph_overlap(const ProvenanceGraph& predicted, const ProvenanceGraph& reference);

/// |first-k of returned intersected with truth| / |truth|; 1.0 when truth is
/// empty (nothing to find). Truth excludes the query by construction.
double recall_at_k(const std::vector<ImageId>& returned, const std::set<ImageId>& truth,
                   std::size_t k);

/// Reference graph for a query: the journal subgraph under the same closure
/// rule MR tracing uses (ancestors + descendants of q and their internal
/// edges). Computed directly on the journal, independent of any MRStore.
ProvenanceGraph journal_closure(const Journal& j, ImageId q);

enum class BenchMode { Oracle, Disturb, EndToEnd };
enum class ModelKind { Baseline, OracleTruth };

const char* to_string(BenchMode m);

struct BenchOptions {
    BenchMode mode = BenchMode::EndToEnd;
    ModelKind models = ModelKind::Baseline;
    std::vector<std::size_t> k_list = {10};
    std::vector<std::size_t> db_sizes = {}; // descriptor-count targets; empty = dataset size only
    int threads = 1;
    std::uint64_t seed = 42;
    ModelConfig model_config = {};
};

struct QueryReport {
    ImageId query;
    std::string graph_id;
    std::size_t k = 0;
    std::size_t db_size = 0;
    double recall_plain = 0;  // top-k only
    double recall_traced = 0; // top-k expanded by MR tracing
    GraphScore score;
    PipelineStats stats;
};

struct BenchReport {
    BenchOptions options;
    std::vector<QueryReport> rows;
    std::size_t skipped_queries = 0;
};

/// Runs the evaluation protocol over a generated dataset directory: one query
/// per journal (the node with the most associations), predicted graph per
/// mode, scores against the journal-derived reference.
BenchReport run_benchmark(const std::string& dataset_dir, const BenchOptions& options);

std::string bench_report_text(const BenchReport& report);
std::string bench_report_csv(const BenchReport& report);

} // namespace iprov
