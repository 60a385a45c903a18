#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "phx/corpus.hpp"

namespace phx {

struct DedupParams {
    uint32_t shingle_k = 5;
    uint32_t num_perm = 128;
    uint32_t bands_b = 16;
    uint32_t rows_r = 8;
    double jaccard_threshold = 0.8;
    uint32_t exact_min_len = 50;
    uint64_t seed = 0x5eed;

    void validate() const;  // throws when bands_b * rows_r != num_perm etc.
};

using ShingleSet = std::unordered_set<uint64_t>;
using Signature = std::vector<uint64_t>;

struct NearDupCluster {
    std::string representative;       // lexicographically smallest id
    std::vector<std::string> member_ids;  // sorted, includes representative
};

struct ExactSpan {
    std::string doc_id;
    uint64_t token_start = 0;
    uint64_t token_end = 0;  // exclusive
};

struct ExactSpanGroup {
    uint64_t fingerprint = 0;
    std::vector<ExactSpan> spans;  // >= 2 occurrences in >= 2 distinct docs
};

struct DedupReport {
    std::vector<NearDupCluster> near_dup_clusters;
    std::vector<ExactSpanGroup> exact_spans;
    DedupParams params;
};

enum class DedupMode { DropDocs, TrimSpans };

// Fingerprints of every contiguous k-token window.
ShingleSet shingle(const TokenSeq& tokens, uint32_t k);

// Empty shingle set yields the sentinel signature (all-max), which never
// matches any band of a non-empty signature.
Signature minhash_signature(const ShingleSet& shingles, const DedupParams& params);
bool is_sentinel_signature(const Signature& sig);

double estimate_jaccard(const Signature& a, const Signature& b);
double exact_jaccard(const ShingleSet& a, const ShingleSet& b);

// Per-document signatures; OpenMP-parallel over documents with a serial
// fallback. Output is index-aligned with the input and identical for any
// thread count.
std::vector<Signature> compute_signatures(const std::vector<Document>& docs,
                                          const DedupParams& params);
std::vector<Signature> compute_signatures_serial(const std::vector<Document>& docs,
                                                 const DedupParams& params);

// LSH banding for candidates, exact Jaccard verification, union-find
// closure. Clusters sorted by representative id.
std::vector<NearDupCluster> find_near_duplicates(const std::vector<Document>& docs,
                                                 const DedupParams& params);

// Maximal token-level substrings of length >= min_len shared by >= 2
// distinct documents, grouped by content fingerprint.
std::vector<ExactSpanGroup> exact_duplicate_spans(const std::vector<Document>& docs,
                                                  uint32_t min_len);

DedupReport run_dedup(const std::vector<Document>& docs, const DedupParams& params);

// DropDocs keeps cluster representatives and the first occurrence of each
// exact group; TrimSpans removes non-first span occurrences in place.
// Throws when the report references ids absent from the corpus.
std::vector<Document> dedup_apply(const std::vector<Document>& docs,
                                  const DedupReport& report, DedupMode mode);

std::string report_to_json(const DedupReport& report);
DedupReport report_from_json(const std::string& text);

}  // namespace phx
