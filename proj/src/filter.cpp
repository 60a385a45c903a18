#include "phx/filter.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

namespace phx {

using nlohmann::json;

std::string to_string(FilterStage s) {
    switch (s) {
        case FilterStage::Url: return "Url";
        case FilterStage::Pattern: return "Pattern";
        case FilterStage::Heuristic: return "Heuristic";
        case FilterStage::Label: return "Label";
    }
    return "Url";
}

FilterPolicy policy_from_json(const std::string& json_text) {
    json j = json::parse(json_text);
    FilterPolicy p;
    if (j.contains("blocked_domains"))
        for (const auto& d : j["blocked_domains"])
            p.blocked_domains.insert(d.get<std::string>());
    if (j.contains("blocked_patterns"))
        p.blocked_patterns = j["blocked_patterns"].get<std::vector<std::string>>();
    if (j.contains("heuristic_thresholds")) {
        const auto& h = j["heuristic_thresholds"];
        auto& t = p.heuristics;
        if (h.contains("min_words")) t.min_words = h["min_words"].get<uint64_t>();
        if (h.contains("max_words")) t.max_words = h["max_words"].get<uint64_t>();
        if (h.contains("min_mean_word_len")) t.min_mean_word_len = h["min_mean_word_len"].get<double>();
        if (h.contains("max_mean_word_len")) t.max_mean_word_len = h["max_mean_word_len"].get<double>();
        if (h.contains("max_symbol_fraction")) t.max_symbol_fraction = h["max_symbol_fraction"].get<double>();
        if (h.contains("max_duplicate_line_fraction")) t.max_duplicate_line_fraction = h["max_duplicate_line_fraction"].get<double>();
        if (h.contains("max_top_token_fraction")) t.max_top_token_fraction = h["max_top_token_fraction"].get<double>();
    }
    if (j.contains("required_tier"))
        p.required_tier = quality_tier_from_string(j["required_tier"].get<std::string>());
    if (j.contains("drop_unlabeled")) p.drop_unlabeled = j["drop_unlabeled"].get<bool>();
    if (j.contains("allowed_domains_quota")) {
        std::map<DomainLabel, double> q;
        for (auto& [k, v] : j["allowed_domains_quota"].items()) {
            double f = v.get<double>();
            if (f < 0.0 || f > 1.0)
                throw std::runtime_error("domain quota fraction out of [0,1]: " + k);
            q[domain_label_from_string(k)] = f;
        }
        p.allowed_domains_quota = q;
    }
    return p;
}

std::string policy_to_json(const FilterPolicy& p) {
    json j;
    j["blocked_domains"] = p.blocked_domains;
    j["blocked_patterns"] = p.blocked_patterns;
    j["heuristic_thresholds"] = {
        {"min_words", p.heuristics.min_words},
        {"max_words", p.heuristics.max_words},
        {"min_mean_word_len", p.heuristics.min_mean_word_len},
        {"max_mean_word_len", p.heuristics.max_mean_word_len},
        {"max_symbol_fraction", p.heuristics.max_symbol_fraction},
        {"max_duplicate_line_fraction", p.heuristics.max_duplicate_line_fraction},
        {"max_top_token_fraction", p.heuristics.max_top_token_fraction},
    };
    j["required_tier"] = to_string(p.required_tier);
    j["drop_unlabeled"] = p.drop_unlabeled;
    if (p.allowed_domains_quota) {
        json q = json::object();
        for (const auto& [k, v] : *p.allowed_domains_quota) q[to_string(k)] = v;
        j["allowed_domains_quota"] = q;
    }
    return j.dump(2);
}

FilterPolicy load_policy_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open policy file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return policy_from_json(ss.str());
}

std::set<std::string> load_blocklist_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open blocklist file: " + path);
    std::set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::transform(line.begin(), line.end(), line.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        out.insert(line);
    }
    return out;
}

std::optional<std::string> url_host(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos || scheme_end == 0) return std::nullopt;
    size_t host_start = scheme_end + 3;
    if (host_start >= url.size()) return std::nullopt;
    size_t host_end = url.find_first_of("/?#", host_start);
    std::string authority = url.substr(host_start, host_end == std::string::npos
                                                       ? std::string::npos
                                                       : host_end - host_start);
    auto at = authority.rfind('@');
    if (at != std::string::npos) authority = authority.substr(at + 1);
    auto colon = authority.rfind(':');
    if (colon != std::string::npos) authority = authority.substr(0, colon);
    if (authority.empty()) return std::nullopt;
    for (char c : authority)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-'))
            return std::nullopt;
    std::transform(authority.begin(), authority.end(), authority.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return authority;
}

FilterDecision url_filter(const Document& doc, const FilterPolicy& policy) {
    FilterDecision d;
    d.stage = FilterStage::Url;
    if (!doc.url) return d;  // absent URL passes this stage
    auto host = url_host(*doc.url);
    if (!host) {
        d.keep = false;
        d.reasons.push_back("unparseable-url");
        return d;
    }
    if (policy.blocked_domains.count(*host)) {
        d.keep = false;
        d.reasons.push_back("blocked-domain:" + *host);
        return d;
    }
    for (const auto& pat : policy.blocked_patterns) {
        if (doc.url->find(pat) != std::string::npos) {
            d.keep = false;
            d.stage = FilterStage::Pattern;
            d.reasons.push_back("blocked-pattern:" + pat);
            return d;
        }
    }
    return d;
}

FilterDecision heuristic_quality(const Document& doc, const FilterPolicy& policy) {
    FilterDecision d;
    d.stage = FilterStage::Heuristic;
    const auto& t = policy.heuristics;

    TokenSeq tokens = normalize(doc.text);
    if (tokens.size() < t.min_words) d.reasons.push_back("min-words");
    if (tokens.size() > t.max_words) d.reasons.push_back("max-words");

    if (!tokens.empty()) {
        size_t total_len = 0;
        std::unordered_map<std::string, size_t> counts;
        size_t top = 0;
        for (const auto& w : tokens) {
            total_len += w.size();
            top = std::max(top, ++counts[w]);
        }
        double mean_len = static_cast<double>(total_len) / tokens.size();
        if (mean_len < t.min_mean_word_len) d.reasons.push_back("mean-word-length-low");
        if (mean_len > t.max_mean_word_len) d.reasons.push_back("mean-word-length-high");
        double top_frac = static_cast<double>(top) / tokens.size();
        if (top_frac > t.max_top_token_fraction) d.reasons.push_back("repetition-ratio");
    }

    size_t symbols = 0, visible = 0;
    for (unsigned char c : doc.text) {
        if (std::isspace(c)) continue;
        ++visible;
        if (c < 0x80 && !std::isalnum(c)) ++symbols;
    }
    if (visible > 0 &&
        static_cast<double>(symbols) / visible > t.max_symbol_fraction)
        d.reasons.push_back("symbol-fraction");

    // duplicate line fraction: repeated non-empty lines over all non-empty lines
    {
        std::unordered_map<std::string, size_t> lines;
        size_t n_lines = 0;
        std::stringstream ss(doc.text);
        std::string line;
        while (std::getline(ss, line)) {
            if (line.empty()) continue;
            ++n_lines;
            ++lines[line];
        }
        if (n_lines > 1) {
            size_t dup = 0;
            for (const auto& [l, c] : lines)
                if (c > 1) dup += c - 1;
            if (static_cast<double>(dup) / n_lines > t.max_duplicate_line_fraction)
                d.reasons.push_back("duplicate-lines");
        }
    }

    d.keep = d.reasons.empty();
    return d;
}

namespace {
int tier_rank(QualityTier t) {
    switch (t) {
        case QualityTier::Low: return 1;
        case QualityTier::Medium: return 2;
        case QualityTier::High: return 3;
        case QualityTier::Unlabeled: return 0;
    }
    return 0;
}
}  // namespace

FilterDecision label_gate(const Document& doc, const FilterPolicy& policy) {
    FilterDecision d;
    d.stage = FilterStage::Label;
    if (doc.quality_tier == QualityTier::Unlabeled) {
        if (policy.drop_unlabeled) {
            d.keep = false;
            d.reasons.push_back("unlabeled-tier");
        }
        return d;
    }
    if (tier_rank(doc.quality_tier) < tier_rank(policy.required_tier)) {
        d.keep = false;
        d.reasons.push_back("tier-below-required");
    }
    return d;
}

FilterDecision apply_all(const Document& doc, const FilterPolicy& policy) {
    FilterDecision d = url_filter(doc, policy);
    if (!d.keep) return d;
    d = heuristic_quality(doc, policy);
    if (!d.keep) return d;
    return label_gate(doc, policy);
}

std::string decision_to_json_line(const std::string& doc_id, const FilterDecision& d) {
    json j;
    j["id"] = doc_id;
    j["keep"] = d.keep;
    j["stage"] = to_string(d.stage);
    j["reasons"] = d.reasons;
    return j.dump();
}

}  // namespace phx
