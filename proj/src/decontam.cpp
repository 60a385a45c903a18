#include "phx/decontam.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "phx/hash.hpp"

namespace phx {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'P', 'H', 'X', 'N'};
constexpr uint32_t kVersion = 1;

uint64_t window_fp(const TokenSeq& toks, size_t start, uint32_t n) {
    uint64_t h = kFnvOffset;
    for (uint32_t j = 0; j < n; ++j) {
        h = fnv1a64(toks[start + j], h);
        h ^= 0x1f;
        h *= kFnvPrime;
    }
    return h;
}

}  // namespace

bool NgramIndex::contains(uint64_t fp) const {
    return std::binary_search(grams.begin(), grams.end(), fp);
}

NgramIndex build_ngram_index(const std::vector<Document>& benchmark, uint32_t n) {
    if (n < 1) throw std::runtime_error("ngram n must be >= 1");
    NgramIndex idx;
    idx.n = n;
    for (const auto& doc : benchmark) {
        idx.benchmark_ids.push_back(doc.id);
        TokenSeq toks = normalize(doc.text);
        if (toks.size() < n) continue;
        for (size_t i = 0; i + n <= toks.size(); ++i)
            idx.grams.push_back(window_fp(toks, i, n));
    }
    std::sort(idx.grams.begin(), idx.grams.end());
    idx.grams.erase(std::unique(idx.grams.begin(), idx.grams.end()), idx.grams.end());
    return idx;
}

ContaminationVerdict contamination_scan(const Document& doc, const NgramIndex& index,
                                        uint64_t max_hits) {
    if (max_hits < 1) throw std::runtime_error("max_hits must be >= 1");
    ContaminationVerdict v;
    v.doc_id = doc.id;
    TokenSeq toks = normalize(doc.text);
    if (toks.size() >= index.n) {
        for (size_t i = 0; i + index.n <= toks.size(); ++i) {
            if (index.contains(window_fp(toks, i, index.n))) {
                if (v.hit_count == 0) v.first_hit_offset = i;
                ++v.hit_count;
            }
        }
    }
    v.drop = v.hit_count >= max_hits;
    return v;
}

std::vector<uint64_t> contamination_hit_offsets(const Document& doc,
                                                const NgramIndex& index) {
    std::vector<uint64_t> out;
    TokenSeq toks = normalize(doc.text);
    if (toks.size() < index.n) return out;
    for (size_t i = 0; i + index.n <= toks.size(); ++i)
        if (index.contains(window_fp(toks, i, index.n))) out.push_back(i);
    return out;
}

std::vector<ContaminationVerdict> scan_corpus(const std::vector<Document>& docs,
                                              const NgramIndex& index,
                                              uint64_t max_hits) {
    std::vector<ContaminationVerdict> out(docs.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (long long i = 0; i < static_cast<long long>(docs.size()); ++i)
        out[i] = contamination_scan(docs[i], index, max_hits);
    return out;
}

void save_index(const NgramIndex& index, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write index file: " + path);
    out.write(kMagic, 4);
    uint32_t version = kVersion;
    uint32_t n = index.n;
    uint64_t count = index.grams.size();
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    out.write(reinterpret_cast<const char*>(index.grams.data()),
              static_cast<std::streamsize>(count * sizeof(uint64_t)));
}

NgramIndex load_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open index file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("bad index magic in " + path);
    uint32_t version = 0, n = 0;
    uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    in.read(reinterpret_cast<char*>(&count), sizeof(count));
    if (!in || version != kVersion)
        throw std::runtime_error("unsupported index version in " + path);
    NgramIndex idx;
    idx.n = n;
    idx.grams.resize(count);
    in.read(reinterpret_cast<char*>(idx.grams.data()),
            static_cast<std::streamsize>(count * sizeof(uint64_t)));
    if (!in) throw std::runtime_error("truncated index file: " + path);
    return idx;
}

std::string verdict_to_json_line(const ContaminationVerdict& v) {
    json j;
    j["doc_id"] = v.doc_id;
    j["hit_count"] = v.hit_count;
    if (v.first_hit_offset) j["first_hit_offset"] = *v.first_hit_offset;
    j["drop"] = v.drop;
    return j.dump();
}

}  // namespace phx
