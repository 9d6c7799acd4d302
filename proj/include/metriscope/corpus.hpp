#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "metriscope/metrics.hpp"

namespace metriscope {

enum class Split { Train, Valid, Test };

std::string_view to_string(Split s);
Split split_from_string(std::string_view s);

/// JSONL field names; defaults follow PrimeVul ("func"/"target"/"idx").
struct JsonlFieldMap {
    std::string code = "func";
    std::string label = "target";
    std::string id = "idx";
    std::string project = "project";
    std::string commit = "commit_id";
};

struct LabeledSample {
    std::string id;
    std::string code;
    int label = 0; // 0 benign, 1 vulnerable
    Split split = Split::Train;
    std::string project;
    std::string commit;
    std::string metadata; // unconsumed fields, compact JSON
    int line = 0;         // 1-based line in the source file, for diagnostics
};

struct LabeledCorpus {
    std::vector<LabeledSample> samples;
};

/// Loads one JSONL file, assigning every sample to `split`. Fails fast:
/// malformed lines and missing required fields raise Error with the line
/// number. Duplicate ids within the corpus are rejected.
LabeledCorpus load_jsonl(const std::string& path, Split split,
                         const JsonlFieldMap& fields = {});

/// Appends another file into an existing corpus (id uniqueness enforced
/// across the whole corpus).
void append_jsonl(LabeledCorpus& corpus, const std::string& path, Split split,
                  const JsonlFieldMap& fields = {});

/// Label-stratified random subsample of size n, reproducible under a fixed
/// seed; class proportions are preserved within one sample.
LabeledCorpus stratified_subsample(const LabeledCorpus& corpus, std::size_t n,
                                   std::uint64_t seed);

struct FeatureRow {
    std::string id;
    std::array<double, kFeatureCount> values{};
    int label = 0;
    bool parse_error = false;
};

struct FeatureTable {
    std::vector<FeatureRow> rows;

    Eigen::MatrixXd matrix() const;
    Eigen::VectorXi labels() const;
};

struct ExtractOptions {
    int threads = 0;             // 0: decide from METRISCOPE_THREADS / hardware
    std::size_t truncate_bytes = 0; // 0: whole function; else byte prefix
    Dialect dialect = Dialect::Auto;
};

/// Extracts the 23 features for every sample, in parallel, with rows sorted
/// by sample id. Samples whose code cannot be parsed at all yield a
/// zero-feature row with parse_error set.
FeatureTable extract_corpus_features(const LabeledCorpus& corpus, const MetricCatalog& catalog,
                                     const NodeCategoryTable& table,
                                     const ExtractOptions& options = {});

/// CSV with header "id,S1,...,T3,label,parse_error"; numbers use the
/// shortest round-trip representation, so write/read is lossless.
void write_features_csv(const FeatureTable& table, const std::string& path);
FeatureTable read_features_csv(const std::string& path);

struct RevisionPair {
    std::string id;
    std::string code_before;
    std::string code_after;
    std::optional<double> prediction_before;
    std::optional<double> prediction_after;
};

/// JSONL with fields id, code_before, code_after and optional
/// prediction_before/prediction_after in [0,1].
std::vector<RevisionPair> load_revision_pairs(const std::string& path);

struct DeltaTable {
    std::vector<std::string> ids;
    Eigen::MatrixXd delta_features; // one row per id, 23 columns
    std::vector<std::optional<double>> delta_predictions;
    std::vector<bool> parse_flagged; // either side parsed with errors
};

/// delta = features(after) - features(before); prediction deltas where both
/// scores are present. Throws when no pair is usable.
DeltaTable compute_metric_deltas(const std::vector<RevisionPair>& pairs,
                                 const MetricCatalog& catalog, const NodeCategoryTable& table,
                                 const ExtractOptions& options = {});

struct PredictionFile {
    std::vector<std::string> ids;
    std::vector<double> scores;
};

/// CSV "id,score" with header.
PredictionFile read_predictions_csv(const std::string& path);

struct EmbeddingFile {
    std::vector<std::string> ids;
    Eigen::MatrixXd rows; // n x d
};

/// CSV "id,e1,...,ed" with header; d inferred from the header.
EmbeddingFile read_embeddings_csv(const std::string& path);

/// Writes via a temp file + rename so readers never observe partial output.
void atomic_write_file(const std::string& path, const std::string& contents);

} // namespace metriscope
