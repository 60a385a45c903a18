#include "phx/dedup.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "json.hpp"
#include "phx/hash.hpp"

namespace phx {

using nlohmann::json;

void DedupParams::validate() const {
    if (shingle_k < 1) throw std::runtime_error("shingle_k must be >= 1");
    if (num_perm < 1) throw std::runtime_error("num_perm must be >= 1");
    if (static_cast<uint64_t>(bands_b) * rows_r != num_perm)
        throw std::runtime_error("bands_b * rows_r must equal num_perm");
    if (!(jaccard_threshold > 0.0 && jaccard_threshold <= 1.0))
        throw std::runtime_error("jaccard_threshold must be in (0,1]");
    if (exact_min_len < 1) throw std::runtime_error("exact_min_len must be >= 1");
}

namespace {

uint64_t token_hash(const std::string& tok) { return fnv1a64(tok); }

constexpr char kShingleSep = '\x1f';

}  // namespace

ShingleSet shingle(const TokenSeq& tokens, uint32_t k) {
    ShingleSet out;
    if (k < 1 || tokens.size() < k) return out;
    for (size_t i = 0; i + k <= tokens.size(); ++i) {
        uint64_t h = kFnvOffset;
        for (size_t j = 0; j < k; ++j) {
            h = fnv1a64(tokens[i + j], h);
            h ^= static_cast<unsigned char>(kShingleSep);
            h *= kFnvPrime;
        }
        out.insert(h);
    }
    return out;
}

Signature minhash_signature(const ShingleSet& shingles, const DedupParams& params) {
    Signature sig(params.num_perm, UINT64_MAX);
    if (shingles.empty()) return sig;  // sentinel
    std::vector<uint64_t> perm_seeds(params.num_perm);
    for (uint32_t i = 0; i < params.num_perm; ++i)
        perm_seeds[i] = splitmix64(params.seed + 0x9e3779b97f4a7c15ULL * (i + 1));
    for (uint64_t x : shingles) {
        for (uint32_t i = 0; i < params.num_perm; ++i) {
            uint64_t h = splitmix64(x ^ perm_seeds[i]);
            if (h < sig[i]) sig[i] = h;
        }
    }
    return sig;
}

bool is_sentinel_signature(const Signature& sig) {
    return std::all_of(sig.begin(), sig.end(),
                       [](uint64_t v) { return v == UINT64_MAX; });
}

double estimate_jaccard(const Signature& a, const Signature& b) {
    if (a.size() != b.size() || a.empty())
        throw std::runtime_error("signature length mismatch");
    if (is_sentinel_signature(a) || is_sentinel_signature(b)) return 0.0;
    size_t agree = 0;
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i] == b[i]) ++agree;
    return static_cast<double>(agree) / a.size();
}

double exact_jaccard(const ShingleSet& a, const ShingleSet& b) {
    if (a.empty() && b.empty()) return 0.0;
    const ShingleSet& small = a.size() <= b.size() ? a : b;
    const ShingleSet& large = a.size() <= b.size() ? b : a;
    size_t inter = 0;
    for (uint64_t x : small)
        if (large.count(x)) ++inter;
    return static_cast<double>(inter) / (a.size() + b.size() - inter);
}

std::vector<Signature> compute_signatures_serial(const std::vector<Document>& docs,
                                                 const DedupParams& params) {
    std::vector<Signature> sigs(docs.size());
    for (size_t i = 0; i < docs.size(); ++i)
        sigs[i] = minhash_signature(shingle(normalize(docs[i].text), params.shingle_k), params);
    return sigs;
}

std::vector<Signature> compute_signatures(const std::vector<Document>& docs,
                                          const DedupParams& params) {
    std::vector<Signature> sigs(docs.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (long long i = 0; i < static_cast<long long>(docs.size()); ++i)
        sigs[i] = minhash_signature(shingle(normalize(docs[i].text), params.shingle_k), params);
    return sigs;
}

namespace {

struct UnionFind {
    std::vector<size_t> parent;
    explicit UnionFind(size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), size_t{0});
    }
    size_t find(size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(size_t a, size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

uint64_t band_key(const Signature& sig, uint32_t band, uint32_t rows) {
    uint64_t h = kFnvOffset ^ splitmix64(band + 1);
    for (uint32_t r = 0; r < rows; ++r) {
        uint64_t v = sig[band * rows + r];
        h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&v), sizeof(v)), h);
    }
    return h;
}

}  // namespace

std::vector<NearDupCluster> find_near_duplicates(const std::vector<Document>& docs,
                                                 const DedupParams& params) {
    params.validate();
    const size_t n = docs.size();

    std::vector<ShingleSet> shingles(n);
#pragma omp parallel for schedule(dynamic, 16)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
        shingles[i] = shingle(normalize(docs[i].text), params.shingle_k);

    std::vector<Signature> sigs(n);
#pragma omp parallel for schedule(dynamic, 16)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
        sigs[i] = minhash_signature(shingles[i], params);

    // Band buckets; sentinel (empty-doc) signatures never enter the index.
    std::unordered_map<uint64_t, std::vector<uint32_t>> buckets;
    for (size_t i = 0; i < n; ++i) {
        if (is_sentinel_signature(sigs[i])) continue;
        for (uint32_t b = 0; b < params.bands_b; ++b)
            buckets[band_key(sigs[i], b, params.rows_r)].push_back(static_cast<uint32_t>(i));
    }

    std::unordered_set<uint64_t> candidate_pairs;
    for (const auto& [key, members] : buckets) {
        if (members.size() < 2) continue;
        for (size_t a = 0; a < members.size(); ++a)
            for (size_t b = a + 1; b < members.size(); ++b) {
                uint32_t lo = std::min(members[a], members[b]);
                uint32_t hi = std::max(members[a], members[b]);
                if (lo != hi)
                    candidate_pairs.insert((static_cast<uint64_t>(lo) << 32) | hi);
            }
    }

    // Verification decides; band collisions are only candidates.
    std::vector<uint64_t> pairs(candidate_pairs.begin(), candidate_pairs.end());
    std::sort(pairs.begin(), pairs.end());
    std::vector<char> verified(pairs.size(), 0);
#pragma omp parallel for schedule(dynamic, 64)
    for (long long p = 0; p < static_cast<long long>(pairs.size()); ++p) {
        uint32_t i = static_cast<uint32_t>(pairs[p] >> 32);
        uint32_t j = static_cast<uint32_t>(pairs[p] & 0xffffffffULL);
        if (exact_jaccard(shingles[i], shingles[j]) >= params.jaccard_threshold)
            verified[p] = 1;
    }

    UnionFind uf(n);
    for (size_t p = 0; p < pairs.size(); ++p)
        if (verified[p])
            uf.unite(static_cast<size_t>(pairs[p] >> 32),
                     static_cast<size_t>(pairs[p] & 0xffffffffULL));

    std::unordered_map<size_t, std::vector<std::string>> groups;
    for (size_t i = 0; i < n; ++i) groups[uf.find(i)].push_back(docs[i].id);

    std::vector<NearDupCluster> clusters;
    for (auto& [root, ids] : groups) {
        if (ids.size() < 2) continue;
        std::sort(ids.begin(), ids.end());
        clusters.push_back({ids.front(), std::move(ids)});
    }
    std::sort(clusters.begin(), clusters.end(),
              [](const auto& a, const auto& b) { return a.representative < b.representative; });
    return clusters;
}

namespace {

// Polynomial rolling hash over per-token hashes, mod 2^64.
constexpr uint64_t kPolyBase = 0x100000001b3ULL;

struct WindowOcc {
    uint32_t doc;
    uint32_t pos;
};

}  // namespace

std::vector<ExactSpanGroup> exact_duplicate_spans(const std::vector<Document>& docs,
                                                  uint32_t min_len) {
    if (min_len < 1) throw std::runtime_error("exact_min_len must be >= 1");
    const size_t n = docs.size();
    const uint32_t L = min_len;

    std::vector<std::vector<uint64_t>> tok_hashes(n);
    std::vector<TokenSeq> toks(n);
#pragma omp parallel for schedule(dynamic, 16)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        toks[i] = normalize(docs[i].text);
        tok_hashes[i].reserve(toks[i].size());
        for (const auto& t : toks[i]) tok_hashes[i].push_back(token_hash(t));
    }

    uint64_t top_pow = 1;
    for (uint32_t i = 0; i + 1 < L; ++i) top_pow *= kPolyBase;

    // flat (hash, doc, pos) records, sorted to group equal hashes; avoids a
    // per-window heap allocation on large corpora
    struct WindowRec {
        uint64_t hash;
        uint32_t doc;
        uint32_t pos;
    };
    std::vector<WindowRec> recs;
    {
        size_t total = 0;
        for (const auto& th : tok_hashes)
            if (th.size() >= L) total += th.size() - L + 1;
        recs.reserve(total);
    }
    for (uint32_t d = 0; d < static_cast<uint32_t>(n); ++d) {
        const auto& th = tok_hashes[d];
        if (th.size() < L) continue;
        uint64_t h = 0;
        for (uint32_t i = 0; i < L; ++i) h = h * kPolyBase + th[i];
        recs.push_back({h, d, 0});
        for (uint32_t i = L; i < th.size(); ++i) {
            h = (h - th[i - L] * top_pow) * kPolyBase + th[i];
            recs.push_back({h, d, i - L + 1});
        }
    }
    std::sort(recs.begin(), recs.end(), [](const WindowRec& a, const WindowRec& b) {
        if (a.hash != b.hash) return a.hash < b.hash;
        if (a.doc != b.doc) return a.doc < b.doc;
        return a.pos < b.pos;
    });

    // Keep windows seen in >= 2 distinct documents; confirm content equality
    // so hash collisions cannot create false groups.
    auto window_equal = [&](const WindowOcc& a, const WindowOcc& b) {
        for (uint32_t i = 0; i < L; ++i)
            if (toks[a.doc][a.pos + i] != toks[b.doc][b.pos + i]) return false;
        return true;
    };

    // content group id -> occurrences
    std::vector<std::vector<WindowOcc>> group_occs;
    // per doc: pos -> group id (only for duplicated windows)
    std::vector<std::unordered_map<uint32_t, uint32_t>> doc_groups(n);

    for (size_t lo = 0; lo < recs.size();) {
        size_t hi = lo;
        while (hi < recs.size() && recs[hi].hash == recs[lo].hash) ++hi;
        if (hi - lo < 2) {
            lo = hi;
            continue;
        }
        std::vector<WindowOcc> occs;
        for (size_t i = lo; i < hi; ++i) occs.push_back({recs[i].doc, recs[i].pos});
        lo = hi;
        // split occurrences by actual content (collision guard)
        std::vector<std::vector<WindowOcc>> parts;
        for (const auto& o : occs) {
            bool placed = false;
            for (auto& p : parts)
                if (window_equal(p.front(), o)) {
                    p.push_back(o);
                    placed = true;
                    break;
                }
            if (!placed) parts.push_back({o});
        }
        for (auto& p : parts) {
            std::unordered_set<uint32_t> distinct;
            for (const auto& o : p) distinct.insert(o.doc);
            if (distinct.size() < 2) continue;
            uint32_t gid = static_cast<uint32_t>(group_occs.size());
            std::sort(p.begin(), p.end(), [](const WindowOcc& a, const WindowOcc& b) {
                return a.doc != b.doc ? a.doc < b.doc : a.pos < b.pos;
            });
            for (const auto& o : p) doc_groups[o.doc][o.pos] = gid;
            group_occs.push_back(std::move(p));
        }
    }

    const uint32_t ngroups = static_cast<uint32_t>(group_occs.size());

    // A group extends right when every occurrence has a duplicated window one
    // position later, all in the same group, and that group has no extra
    // occurrences. Chains of such extensions form maximal spans.
    auto right_group = [&](uint32_t gid) -> int64_t {
        int64_t next = -1;
        for (const auto& o : group_occs[gid]) {
            auto it = doc_groups[o.doc].find(o.pos + 1);
            if (it == doc_groups[o.doc].end()) return -1;
            if (next == -1) next = it->second;
            else if (next != static_cast<int64_t>(it->second)) return -1;
        }
        if (next >= 0 && group_occs[next].size() != group_occs[gid].size()) return -1;
        return next;
    };
    auto left_group = [&](uint32_t gid) -> int64_t {
        int64_t prev = -1;
        for (const auto& o : group_occs[gid]) {
            if (o.pos == 0) return -1;
            auto it = doc_groups[o.doc].find(o.pos - 1);
            if (it == doc_groups[o.doc].end()) return -1;
            if (prev == -1) prev = it->second;
            else if (prev != static_cast<int64_t>(it->second)) return -1;
        }
        if (prev >= 0 && group_occs[prev].size() != group_occs[gid].size()) return -1;
        return prev;
    };

    std::vector<ExactSpanGroup> result;
    std::vector<char> consumed(ngroups, 0);
    for (uint32_t g = 0; g < ngroups; ++g) {
        if (consumed[g]) continue;
        int64_t lg = left_group(g);
        if (lg >= 0 && right_group(static_cast<uint32_t>(lg)) == g) continue;  // interior
        // walk right
        uint32_t steps = 0;
        uint32_t cur = g;
        consumed[cur] = 1;
        while (true) {
            int64_t rg = right_group(cur);
            if (rg < 0 || consumed[rg]) break;
            if (left_group(static_cast<uint32_t>(rg)) != cur) break;
            cur = static_cast<uint32_t>(rg);
            consumed[cur] = 1;
            ++steps;
        }
        ExactSpanGroup grp;
        const auto& head = group_occs[g];
        for (const auto& o : head)
            grp.spans.push_back({docs[o.doc].id, o.pos, o.pos + L + steps});
        // fingerprint over the full span content of the first occurrence
        {
            uint64_t h = 0;
            const auto& o = head.front();
            for (uint32_t i = 0; i < L + steps; ++i)
                h = h * kPolyBase + tok_hashes[o.doc][o.pos + i];
            grp.fingerprint = h;
        }
        result.push_back(std::move(grp));
    }

    std::sort(result.begin(), result.end(), [](const auto& a, const auto& b) {
        const auto& sa = a.spans.front();
        const auto& sb = b.spans.front();
        if (sa.doc_id != sb.doc_id) return sa.doc_id < sb.doc_id;
        return sa.token_start < sb.token_start;
    });
    return result;
}

DedupReport run_dedup(const std::vector<Document>& docs, const DedupParams& params) {
    params.validate();
    DedupReport r;
    r.params = params;
    r.near_dup_clusters = find_near_duplicates(docs, params);
    r.exact_spans = exact_duplicate_spans(docs, params.exact_min_len);
    return r;
}

std::vector<Document> dedup_apply(const std::vector<Document>& docs,
                                  const DedupReport& report, DedupMode mode) {
    std::unordered_map<std::string, size_t> order;
    for (size_t i = 0; i < docs.size(); ++i) order[docs[i].id] = i;

    auto check_id = [&](const std::string& id) {
        if (!order.count(id))
            throw std::runtime_error("dedup report references unknown doc id: " + id);
    };
    for (const auto& c : report.near_dup_clusters)
        for (const auto& id : c.member_ids) check_id(id);
    for (const auto& g : report.exact_spans)
        for (const auto& s : g.spans) check_id(s.doc_id);

    std::unordered_set<std::string> drop_ids;
    for (const auto& c : report.near_dup_clusters)
        for (const auto& id : c.member_ids)
            if (id != c.representative) drop_ids.insert(id);

    if (mode == DedupMode::DropDocs) {
        for (const auto& g : report.exact_spans) {
            // keep the earliest occurrence not already removed as a cluster
            // duplicate, so the two rules never drop every copy
            size_t best = SIZE_MAX;
            for (const auto& s : g.spans)
                if (!drop_ids.count(s.doc_id)) best = std::min(best, order[s.doc_id]);
            if (best == SIZE_MAX) continue;
            for (const auto& s : g.spans)
                if (order[s.doc_id] != best) drop_ids.insert(s.doc_id);
        }
        std::vector<Document> out;
        for (const auto& d : docs)
            if (!drop_ids.count(d.id)) out.push_back(d);
        return out;
    }

    // TrimSpans: remove non-first occurrences from the normalized token
    // stream; the trimmed text is the joined surviving tokens.
    std::unordered_map<std::string, std::vector<std::pair<uint64_t, uint64_t>>> cuts;
    for (const auto& g : report.exact_spans) {
        size_t best = SIZE_MAX;
        const ExactSpan* first = nullptr;
        for (const auto& s : g.spans) {
            size_t o = order[s.doc_id];
            if (o < best || (o == best && first && s.token_start < first->token_start)) {
                best = o;
                first = &s;
            }
        }
        for (const auto& s : g.spans)
            if (&s != first) cuts[s.doc_id].push_back({s.token_start, s.token_end});
    }

    std::vector<Document> out;
    for (const auto& d : docs) {
        if (drop_ids.count(d.id)) continue;
        auto it = cuts.find(d.id);
        if (it == cuts.end()) {
            out.push_back(d);
            continue;
        }
        auto ranges = it->second;
        std::sort(ranges.begin(), ranges.end());
        TokenSeq toks = normalize(d.text);
        std::string text;
        size_t ri = 0;
        for (size_t i = 0; i < toks.size(); ++i) {
            while (ri < ranges.size() && ranges[ri].second <= i) ++ri;
            bool cut = ri < ranges.size() && i >= ranges[ri].first && i < ranges[ri].second;
            if (cut) continue;
            if (!text.empty()) text.push_back(' ');
            text += toks[i];
        }
        Document nd = d;
        nd.text = std::move(text);
        nd.token_count = whitespace_token_count(nd.text);
        out.push_back(std::move(nd));
    }
    return out;
}

std::string report_to_json(const DedupReport& r) {
    json j;
    j["params"] = {
        {"shingle_k", r.params.shingle_k},   {"num_perm", r.params.num_perm},
        {"bands_b", r.params.bands_b},       {"rows_r", r.params.rows_r},
        {"jaccard_threshold", r.params.jaccard_threshold},
        {"exact_min_len", r.params.exact_min_len},
        {"seed", r.params.seed},
    };
    j["near_dup_clusters"] = json::array();
    for (const auto& c : r.near_dup_clusters)
        j["near_dup_clusters"].push_back(
            {{"representative", c.representative}, {"member_ids", c.member_ids}});
    j["exact_spans"] = json::array();
    for (const auto& g : r.exact_spans) {
        json spans = json::array();
        for (const auto& s : g.spans)
            spans.push_back({{"doc_id", s.doc_id},
                             {"token_start", s.token_start},
                             {"token_end", s.token_end}});
        j["exact_spans"].push_back({{"fingerprint", g.fingerprint}, {"spans", spans}});
    }
    return j.dump(2);
}

DedupReport report_from_json(const std::string& text) {
    json j = json::parse(text);
    DedupReport r;
    const auto& p = j.at("params");
    r.params.shingle_k = p.at("shingle_k").get<uint32_t>();
    r.params.num_perm = p.at("num_perm").get<uint32_t>();
    r.params.bands_b = p.at("bands_b").get<uint32_t>();
    r.params.rows_r = p.at("rows_r").get<uint32_t>();
    r.params.jaccard_threshold = p.at("jaccard_threshold").get<double>();
    r.params.exact_min_len = p.at("exact_min_len").get<uint32_t>();
    r.params.seed = p.at("seed").get<uint64_t>();
    for (const auto& c : j.at("near_dup_clusters")) {
        NearDupCluster nc;
        nc.representative = c.at("representative").get<std::string>();
        nc.member_ids = c.at("member_ids").get<std::vector<std::string>>();
        r.near_dup_clusters.push_back(std::move(nc));
    }
    for (const auto& g : j.at("exact_spans")) {
        ExactSpanGroup eg;
        eg.fingerprint = g.at("fingerprint").get<uint64_t>();
        for (const auto& s : g.at("spans"))
            eg.spans.push_back({s.at("doc_id").get<std::string>(),
                                s.at("token_start").get<uint64_t>(),
                                s.at("token_end").get<uint64_t>()});
        r.exact_spans.push_back(std::move(eg));
    }
    return r;
}

}  // namespace phx
