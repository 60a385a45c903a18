#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace phx {

enum class DomainLabel { STEM, Code, Reasoning, General, Unlabeled };
enum class QualityTier { Low, Medium, High, Unlabeled };

std::string to_string(DomainLabel d);
std::string to_string(QualityTier q);
DomainLabel domain_label_from_string(const std::string& s);
QualityTier quality_tier_from_string(const std::string& s);

// One corpus record. Immutable by convention after construction.
struct Document {
    std::string id;
    std::string source_id;
    std::optional<std::string> url;
    std::string text;
    uint64_t token_count = 0;
    DomainLabel domain_label = DomainLabel::Unlabeled;
    QualityTier quality_tier = QualityTier::Unlabeled;
    std::map<std::string, std::string> meta;
};

enum class Modality { Text, ImageText };

std::string to_string(Modality m);
Modality modality_from_string(const std::string& s);

// Per-source token totals and sampling weight.
struct SourceManifest {
    std::string source_id;
    uint64_t total_tokens = 0;
    Modality modality = Modality::Text;
    std::vector<std::string> language_tags;
    bool essential = false;
    double sampling_weight = 1.0;  // epochs
};

// Normalized token sequence. Produced only by normalize().
using TokenSeq = std::vector<std::string>;

// Unicode-aware normalization: case fold, punctuation to separators,
// whitespace split. Deterministic and idempotent at the token level.
TokenSeq normalize(std::string_view text);

// Default token counter: whitespace tokens of normalized text.
// Pluggable so callers can substitute a real tokenizer.
using TokenCounter = std::function<uint64_t(std::string_view)>;
uint64_t whitespace_token_count(std::string_view text);
inline constexpr const char* kDefaultCounterName = "normalized-whitespace";

// JSON-Lines corpus I/O. One Document per line, UTF-8.
Document document_from_json_line(const std::string& line);
std::string document_to_json_line(const Document& doc);
std::vector<Document> read_jsonl(std::istream& in);
std::vector<Document> read_jsonl_file(const std::string& path);
void write_jsonl(std::ostream& out, const std::vector<Document>& docs);
void write_jsonl_file(const std::string& path, const std::vector<Document>& docs);

SourceManifest manifest_from_json_line(const std::string& line);
std::string manifest_to_json_line(const SourceManifest& m);
std::vector<SourceManifest> read_manifests_file(const std::string& path);

}  // namespace phx
