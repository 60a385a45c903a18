#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "phx/corpus.hpp"

namespace phx {

enum class FilterStage { Url, Pattern, Heuristic, Label };

std::string to_string(FilterStage s);

struct FilterDecision {
    bool keep = true;
    FilterStage stage = FilterStage::Url;
    std::vector<std::string> reasons;  // empty iff keep
};

struct HeuristicThresholds {
    uint64_t min_words = 50;
    uint64_t max_words = 100000;
    double min_mean_word_len = 3.0;
    double max_mean_word_len = 10.0;
    double max_symbol_fraction = 0.25;
    double max_duplicate_line_fraction = 0.30;
    double max_top_token_fraction = 0.20;
};

struct FilterPolicy {
    std::set<std::string> blocked_domains;        // hostnames
    std::vector<std::string> blocked_patterns;    // substring patterns on the URL
    HeuristicThresholds heuristics;
    QualityTier required_tier = QualityTier::High;
    bool drop_unlabeled = true;
    std::optional<std::map<DomainLabel, double>> allowed_domains_quota;
};

FilterPolicy policy_from_json(const std::string& json_text);
std::string policy_to_json(const FilterPolicy& policy);
FilterPolicy load_policy_file(const std::string& path);

// Loads one hostname per line, '#' comments and blanks skipped.
std::set<std::string> load_blocklist_file(const std::string& path);

// Extracts the lowercased host from a URL; nullopt when unparseable.
std::optional<std::string> url_host(const std::string& url);

// Each stage is a pure per-document predicate; composition order does
// not change the kept set.
FilterDecision url_filter(const Document& doc, const FilterPolicy& policy);
FilterDecision heuristic_quality(const Document& doc, const FilterPolicy& policy);
FilterDecision label_gate(const Document& doc, const FilterPolicy& policy);

// All three stages in sequence; first failing stage reported.
FilterDecision apply_all(const Document& doc, const FilterPolicy& policy);

std::string decision_to_json_line(const std::string& doc_id, const FilterDecision& d);

}  // namespace phx
