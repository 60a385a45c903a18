#include "phx/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <stdexcept>

namespace phx {

using nlohmann::json;

json config_defaults() {
    return json{
        {"seed", 42},
        {"counter_name", "normalized-whitespace"},
        {"workers", 0},
        {"filter",
         {{"blocked_domains", json::array()},
          {"blocked_patterns", json::array()},
          {"blocklist_file", ""},
          {"heuristic_thresholds",
           {{"min_words", 50},
            {"max_words", 100000},
            {"min_mean_word_len", 3.0},
            {"max_mean_word_len", 10.0},
            {"max_symbol_fraction", 0.25},
            {"max_duplicate_line_fraction", 0.30},
            {"max_top_token_fraction", 0.20}}},
          {"required_tier", "High"},
          {"drop_unlabeled", true},
          {"allowed_domains_quota", json::object()}}},
        {"dedup",
         {{"shingle_k", 5},
          {"num_perm", 128},
          {"bands_b", 16},
          {"rows_r", 8},
          {"jaccard_threshold", 0.8},
          {"exact_min_len", 50},
          {"mode", "DropDocs"}}},
        {"decontam", {{"n", 13}, {"max_hits", 1}, {"mode", "drop"}}},
        {"sampler",
         {{"budget_tokens", 0},
          {"weight_overrides", json::object()},
          {"weight_cap", 4.0},
          {"cap_exempt", json::array()},
          {"pin_essential", false},
          {"targets", json::array()}}},
        {"planner", {{"min_interactivity", 40.0}, {"consistency_tolerance", 0.1}}},
    };
}

namespace {

// SAX handler that rejects duplicate keys within one object.
struct DupKeyChecker : public json::json_sax_t {
    std::vector<std::set<std::string>> stack;
    std::string error;

    bool key(string_t& val) override {
        if (!stack.empty() && !stack.back().insert(val).second) {
            error = "duplicate key: " + val;
            return false;
        }
        return true;
    }
    bool start_object(std::size_t) override {
        stack.emplace_back();
        return true;
    }
    bool end_object() override {
        stack.pop_back();
        return true;
    }
    bool null() override { return true; }
    bool boolean(bool) override { return true; }
    bool number_integer(number_integer_t) override { return true; }
    bool number_unsigned(number_unsigned_t) override { return true; }
    bool number_float(number_float_t, const string_t&) override { return true; }
    bool string(string_t&) override { return true; }
    bool binary(binary_t&) override { return true; }
    bool start_array(std::size_t) override { return true; }
    bool end_array() override { return true; }
    bool parse_error(std::size_t, const std::string&,
                     const nlohmann::detail::exception& ex) override {
        if (error.empty()) error = ex.what();
        return false;
    }
};

// sections whose object values have free-form keys
bool free_form_path(const std::string& path) {
    return path == "sampler.weight_overrides" || path == "filter.allowed_domains_quota";
}

void check_unknown_keys(const json& value, const json& schema, const std::string& path,
                        std::vector<std::string>& errors) {
    if (!value.is_object() || !schema.is_object()) return;
    for (auto& [k, v] : value.items()) {
        std::string p = path.empty() ? k : path + "." + k;
        if (!schema.contains(k)) {
            errors.push_back("unknown config key: " + p);
            continue;
        }
        if (!free_form_path(p)) check_unknown_keys(v, schema.at(k), p, errors);
    }
}

void deep_merge(json& base, const json& over, const std::string& path,
                std::vector<std::string>& non_default) {
    for (auto& [k, v] : over.items()) {
        std::string p = path.empty() ? k : path + "." + k;
        if (v.is_object() && base.contains(k) && base[k].is_object() && !free_form_path(p)) {
            deep_merge(base[k], v, p, non_default);
        } else {
            if (!base.contains(k) || base[k] != v) non_default.push_back(p);
            base[k] = v;
        }
    }
}

void set_dotted(json& root, const std::string& dotted, const json& value) {
    json* cur = &root;
    size_t start = 0;
    while (true) {
        size_t dot = dotted.find('.', start);
        std::string key = dotted.substr(start, dot - start);
        if (dot == std::string::npos) {
            (*cur)[key] = value;
            return;
        }
        cur = &(*cur)[key];
        start = dot + 1;
    }
}

}  // namespace

PipelineConfig resolve_config(const std::string& file_text,
                              const std::vector<std::string>& overrides) {
    json defaults = config_defaults();
    PipelineConfig cfg;
    cfg.resolved = defaults;

    if (!file_text.empty()) {
        DupKeyChecker checker;
        if (!json::sax_parse(file_text, &checker))
            throw std::runtime_error("config parse failed: " + checker.error);
        json file = json::parse(file_text);
        std::vector<std::string> errors;
        check_unknown_keys(file, defaults, "", errors);
        if (!errors.empty()) throw std::runtime_error(errors.front());
        deep_merge(cfg.resolved, file, "", cfg.non_default_keys);
    }

    if (const char* env_seed = std::getenv("PHXF_SEED")) {
        cfg.resolved["seed"] = std::stoull(env_seed);
        cfg.non_default_keys.push_back("seed");
    }

    for (const auto& ov : overrides) {
        auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("override must be key=value: " + ov);
        std::string key = ov.substr(0, eq);
        std::string raw = ov.substr(eq + 1);
        json value;
        if (json::accept(raw)) value = json::parse(raw);
        else value = raw;
        json probe = json::object();
        set_dotted(probe, key, value);
        std::vector<std::string> errors;
        check_unknown_keys(probe, defaults, "", errors);
        if (!errors.empty()) throw std::runtime_error(errors.front());
        set_dotted(cfg.resolved, key, value);
        cfg.non_default_keys.push_back(key);
    }

    std::sort(cfg.non_default_keys.begin(), cfg.non_default_keys.end());
    cfg.non_default_keys.erase(
        std::unique(cfg.non_default_keys.begin(), cfg.non_default_keys.end()),
        cfg.non_default_keys.end());
    return cfg;
}

std::string explain_config(const PipelineConfig& cfg) {
    json j;
    j["resolved"] = cfg.resolved;
    j["non_default"] = cfg.non_default_keys;
    return j.dump(2);
}

}  // namespace phx
