#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phx/corpus.hpp"

namespace phx {

// Sorted n-gram fingerprint index over normalized benchmark text.
struct NgramIndex {
    uint32_t n = 13;
    std::vector<uint64_t> grams;  // sorted unique fingerprints
    std::vector<std::string> benchmark_ids;

    bool contains(uint64_t fp) const;
};

struct ContaminationVerdict {
    std::string doc_id;
    uint64_t hit_count = 0;
    std::optional<uint64_t> first_hit_offset;  // token index
    bool drop = false;
};

NgramIndex build_ngram_index(const std::vector<Document>& benchmark, uint32_t n);

ContaminationVerdict contamination_scan(const Document& doc, const NgramIndex& index,
                                        uint64_t max_hits);

// Token offsets of every hit window; used by span-excision mode.
std::vector<uint64_t> contamination_hit_offsets(const Document& doc,
                                                const NgramIndex& index);

// Parallel per-document scan against the shared immutable index.
std::vector<ContaminationVerdict> scan_corpus(const std::vector<Document>& docs,
                                              const NgramIndex& index,
                                              uint64_t max_hits);

// Binary persistence: magic "PHXN", version, n, count, sorted fingerprints.
void save_index(const NgramIndex& index, const std::string& path);
NgramIndex load_index(const std::string& path);

std::string verdict_to_json_line(const ContaminationVerdict& v);

}  // namespace phx
