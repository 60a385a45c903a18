#include "phx/corpus.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace phx {

using nlohmann::json;

std::string to_string(DomainLabel d) {
    switch (d) {
        case DomainLabel::STEM: return "STEM";
        case DomainLabel::Code: return "Code";
        case DomainLabel::Reasoning: return "Reasoning";
        case DomainLabel::General: return "General";
        case DomainLabel::Unlabeled: return "Unlabeled";
    }
    return "Unlabeled";
}

std::string to_string(QualityTier q) {
    switch (q) {
        case QualityTier::Low: return "Low";
        case QualityTier::Medium: return "Medium";
        case QualityTier::High: return "High";
        case QualityTier::Unlabeled: return "Unlabeled";
    }
    return "Unlabeled";
}

DomainLabel domain_label_from_string(const std::string& s) {
    if (s == "STEM") return DomainLabel::STEM;
    if (s == "Code") return DomainLabel::Code;
    if (s == "Reasoning") return DomainLabel::Reasoning;
    if (s == "General") return DomainLabel::General;
    if (s == "Unlabeled") return DomainLabel::Unlabeled;
    throw std::runtime_error("unknown domain_label: " + s);
}

QualityTier quality_tier_from_string(const std::string& s) {
    if (s == "Low") return QualityTier::Low;
    if (s == "Medium") return QualityTier::Medium;
    if (s == "High") return QualityTier::High;
    if (s == "Unlabeled") return QualityTier::Unlabeled;
    throw std::runtime_error("unknown quality_tier: " + s);
}

std::string to_string(Modality m) {
    return m == Modality::Text ? "Text" : "ImageText";
}

Modality modality_from_string(const std::string& s) {
    if (s == "Text") return Modality::Text;
    if (s == "ImageText") return Modality::ImageText;
    throw std::runtime_error("unknown modality: " + s);
}

namespace {

// Minimal UTF-8 decoder. Invalid bytes decode as U+FFFD so normalization
// never throws on arbitrary input.
size_t decode_utf8(std::string_view s, size_t i, uint32_t& cp) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
        cp = c;
        return 1;
    }
    size_t len = 0;
    if ((c & 0xE0) == 0xC0) { cp = c & 0x1F; len = 2; }
    else if ((c & 0xF0) == 0xE0) { cp = c & 0x0F; len = 3; }
    else if ((c & 0xF8) == 0xF0) { cp = c & 0x07; len = 4; }
    else { cp = 0xFFFD; return 1; }
    if (i + len > s.size()) { cp = 0xFFFD; return 1; }
    for (size_t k = 1; k < len; ++k) {
        unsigned char cc = static_cast<unsigned char>(s[i + k]);
        if ((cc & 0xC0) != 0x80) { cp = 0xFFFD; return 1; }
        cp = (cp << 6) | (cc & 0x3F);
    }
    return len;
}

void append_utf8(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

uint32_t fold_case(uint32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 32;
    // Latin-1 supplement letters
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
    // Latin Extended-A: even/odd pairing, with a few exceptions we skip
    if (cp >= 0x100 && cp <= 0x177 && (cp % 2) == 0) return cp + 1;
    if (cp >= 0x179 && cp <= 0x17E && (cp % 2) == 1) return cp + 1;
    // Greek and Cyrillic basic blocks
    if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 32;
    if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
    if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
    return cp;
}

bool is_separator(uint32_t cp) {
    if (cp <= 0x7F) {
        char c = static_cast<char>(cp);
        bool alnum = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                     (c >= '0' && c <= '9');
        return !alnum;
    }
    // General punctuation, CJK punctuation, combining marks treated as-is;
    // spaces and dashes in the general punctuation block split tokens.
    if (cp >= 0x2000 && cp <= 0x206F) return true;
    if (cp >= 0x3000 && cp <= 0x303F) return true;
    if (cp == 0x00A0 || cp == 0x00B7 || cp == 0x00AB || cp == 0x00BB) return true;
    if (cp == 0xFF0C || cp == 0xFF0E || cp == 0xFF1F || cp == 0xFF01) return true;
    return false;
}

}  // namespace

TokenSeq normalize(std::string_view text) {
    TokenSeq out;
    std::string cur;
    size_t i = 0;
    while (i < text.size()) {
        uint32_t cp;
        i += decode_utf8(text, i, cp);
        if (is_separator(cp)) {
            if (!cur.empty()) {
                out.push_back(std::move(cur));
                cur.clear();
            }
        } else {
            append_utf8(cur, fold_case(cp));
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

uint64_t whitespace_token_count(std::string_view text) {
    return normalize(text).size();
}

Document document_from_json_line(const std::string& line) {
    json j = json::parse(line);
    Document d;
    d.id = j.at("id").get<std::string>();
    d.source_id = j.at("source_id").get<std::string>();
    if (j.contains("url") && !j["url"].is_null())
        d.url = j["url"].get<std::string>();
    d.text = j.at("text").get<std::string>();
    d.token_count = j.at("token_count").get<uint64_t>();
    d.domain_label = domain_label_from_string(j.at("domain_label").get<std::string>());
    d.quality_tier = quality_tier_from_string(j.at("quality_tier").get<std::string>());
    if (j.contains("meta"))
        d.meta = j["meta"].get<std::map<std::string, std::string>>();
    return d;
}

std::string document_to_json_line(const Document& doc) {
    json j;
    j["id"] = doc.id;
    j["source_id"] = doc.source_id;
    if (doc.url) j["url"] = *doc.url;
    j["text"] = doc.text;
    j["token_count"] = doc.token_count;
    j["domain_label"] = to_string(doc.domain_label);
    j["quality_tier"] = to_string(doc.quality_tier);
    j["meta"] = doc.meta;
    return j.dump();
}

std::vector<Document> read_jsonl(std::istream& in) {
    std::vector<Document> docs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        docs.push_back(document_from_json_line(line));
    }
    return docs;
}

std::vector<Document> read_jsonl_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path);
    return read_jsonl(in);
}

void write_jsonl(std::ostream& out, const std::vector<Document>& docs) {
    for (const auto& d : docs) out << document_to_json_line(d) << '\n';
}

void write_jsonl_file(const std::string& path, const std::vector<Document>& docs) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write corpus file: " + path);
    write_jsonl(out, docs);
}

SourceManifest manifest_from_json_line(const std::string& line) {
    json j = json::parse(line);
    SourceManifest m;
    m.source_id = j.at("source_id").get<std::string>();
    m.total_tokens = j.at("total_tokens").get<uint64_t>();
    if (j.contains("modality"))
        m.modality = modality_from_string(j["modality"].get<std::string>());
    if (j.contains("language_tags"))
        m.language_tags = j["language_tags"].get<std::vector<std::string>>();
    if (j.contains("essential")) m.essential = j["essential"].get<bool>();
    if (j.contains("sampling_weight"))
        m.sampling_weight = j["sampling_weight"].get<double>();
    if (m.sampling_weight <= 0)
        throw std::runtime_error("sampling_weight must be > 0 for " + m.source_id);
    return m;
}

std::string manifest_to_json_line(const SourceManifest& m) {
    json j;
    j["source_id"] = m.source_id;
    j["total_tokens"] = m.total_tokens;
    j["modality"] = to_string(m.modality);
    j["language_tags"] = m.language_tags;
    j["essential"] = m.essential;
    j["sampling_weight"] = m.sampling_weight;
    return j.dump();
}

std::vector<SourceManifest> read_manifests_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest file: " + path);
    std::vector<SourceManifest> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(manifest_from_json_line(line));
    }
    return out;
}

}  // namespace phx
