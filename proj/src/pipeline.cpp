#include "phx/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "phx/decontam.hpp"
#include "phx/metrics.hpp"
#include "phx/planner.hpp"

namespace phx {

using nlohmann::json;

FilterPolicy filter_policy_from_config(const json& cfg) {
    const json& f = cfg.at("filter");
    FilterPolicy p = policy_from_json(json{
        {"blocked_domains", f.at("blocked_domains")},
        {"blocked_patterns", f.at("blocked_patterns")},
        {"heuristic_thresholds", f.at("heuristic_thresholds")},
        {"required_tier", f.at("required_tier")},
        {"drop_unlabeled", f.at("drop_unlabeled")},
    }.dump());
    if (!f.at("allowed_domains_quota").empty()) {
        std::map<DomainLabel, double> q;
        for (auto& [k, v] : f.at("allowed_domains_quota").items())
            q[domain_label_from_string(k)] = v.get<double>();
        p.allowed_domains_quota = q;
    }
    std::string blocklist = f.at("blocklist_file").get<std::string>();
    if (!blocklist.empty()) {
        auto extra = load_blocklist_file(blocklist);
        p.blocked_domains.insert(extra.begin(), extra.end());
    }
    return p;
}

DedupParams dedup_params_from_config(const json& cfg) {
    const json& d = cfg.at("dedup");
    DedupParams p;
    p.shingle_k = d.at("shingle_k").get<uint32_t>();
    p.num_perm = d.at("num_perm").get<uint32_t>();
    p.bands_b = d.at("bands_b").get<uint32_t>();
    p.rows_r = d.at("rows_r").get<uint32_t>();
    p.jaccard_threshold = d.at("jaccard_threshold").get<double>();
    p.exact_min_len = d.at("exact_min_len").get<uint32_t>();
    p.seed = cfg.at("seed").get<uint64_t>();
    return p;
}

SamplerOptions sampler_options_from_config(const json& cfg) {
    const json& s = cfg.at("sampler");
    SamplerOptions o;
    o.weight_cap = s.at("weight_cap").get<double>();
    o.cap_exempt = s.at("cap_exempt").get<std::vector<std::string>>();
    o.pin_essential = s.at("pin_essential").get<bool>();
    return o;
}

std::vector<MixtureTarget> targets_from_config(const json& cfg) {
    std::vector<MixtureTarget> out;
    for (const auto& t : cfg.at("sampler").at("targets")) {
        MixtureTarget mt;
        mt.name = t.at("name").get<std::string>();
        mt.target_fraction = t.at("target_fraction").get<double>();
        mt.tolerance = t.at("tolerance").get<double>();
        std::vector<std::string> sources, languages;
        std::string modality;
        if (t.contains("sources")) sources = t["sources"].get<std::vector<std::string>>();
        if (t.contains("languages")) languages = t["languages"].get<std::vector<std::string>>();
        if (t.contains("modality")) modality = t["modality"].get<std::string>();
        mt.member = [sources, languages, modality](const SourceManifest& m) {
            for (const auto& s : sources)
                if (s == m.source_id) return true;
            for (const auto& l : languages)
                for (const auto& tag : m.language_tags)
                    if (l == tag) return true;
            if (!modality.empty() && to_string(m.modality) == modality) return true;
            return false;
        };
        out.push_back(std::move(mt));
    }
    return out;
}

namespace {

struct OutputGuard {
    std::vector<std::string> paths;
    bool committed = false;
    void track(const std::string& p) {
        if (!p.empty()) paths.push_back(p);
    }
    ~OutputGuard() {
        if (committed) return;
        for (const auto& p : paths) std::remove(p.c_str());
    }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write: " + path);
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string utc_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

json base_report(const std::string& stage, const PipelineConfig& cfg) {
    json r;
    r["stage"] = stage;
    r["seed"] = cfg.seed();
    r["counter_name"] = cfg.resolved.at("counter_name");
    // worker count never affects results, so it is excluded to keep
    // reports byte-identical across thread counts
    json echo = cfg.resolved;
    echo.erase("workers");
    r["config"] = echo;
    return r;
}

// Removes every hit window from the normalized token stream; the excised
// text is the joined surviving tokens.
Document excise_hits(const Document& doc, const NgramIndex& index, uint64_t& removed) {
    TokenSeq toks = normalize(doc.text);
    std::vector<char> cut(toks.size(), 0);
    for (uint64_t off : contamination_hit_offsets(doc, index))
        for (uint64_t i = off; i < off + index.n && i < toks.size(); ++i) cut[i] = 1;
    Document nd = doc;
    std::string text;
    for (size_t i = 0; i < toks.size(); ++i) {
        if (cut[i]) {
            ++removed;
            continue;
        }
        if (!text.empty()) text.push_back(' ');
        text += toks[i];
    }
    nd.text = std::move(text);
    nd.token_count = whitespace_token_count(nd.text);
    return nd;
}

}  // namespace

int run_stage(const std::string& stage, const PipelineConfig& cfg, const StageIO& io,
              std::string* error_out) {
    auto t0 = std::chrono::steady_clock::now();
#ifdef _OPENMP
    if (cfg.workers() > 0) omp_set_num_threads(cfg.workers());
#endif
    OutputGuard guard;
    json report = base_report(stage, cfg);
    int status = 0;
    try {
        if (stage == "filter") {
            FilterPolicy policy;
            try {
                policy = filter_policy_from_config(cfg.resolved);
            } catch (const std::exception& e) {
                throw ValidationError(e.what());
            }
            auto docs = read_jsonl_file(io.input);
            std::vector<FilterDecision> decisions(docs.size());
#pragma omp parallel for schedule(dynamic, 16)
            for (long long i = 0; i < static_cast<long long>(docs.size()); ++i)
                decisions[i] = apply_all(docs[i], policy);
            std::vector<Document> kept;
            std::map<std::string, uint64_t> dropped_by_reason;
            for (size_t i = 0; i < docs.size(); ++i) {
                if (decisions[i].keep) kept.push_back(docs[i]);
                else
                    for (const auto& r : decisions[i].reasons) ++dropped_by_reason[r];
            }
            guard.track(io.output);
            write_jsonl_file(io.output, kept);
            if (!io.decisions.empty()) {
                guard.track(io.decisions);
                std::ofstream out(io.decisions);
                for (size_t i = 0; i < docs.size(); ++i)
                    out << decision_to_json_line(docs[i].id, decisions[i]) << '\n';
            }
            report["counts"] = {{"input", docs.size()},
                                {"kept", kept.size()},
                                {"dropped", docs.size() - kept.size()}};
            report["dropped_by_reason"] = dropped_by_reason;
        } else if (stage == "dedup") {
            DedupParams params = dedup_params_from_config(cfg.resolved);
            try {
                params.validate();
            } catch (const std::exception& e) {
                throw ValidationError(e.what());
            }
            std::string mode_s = cfg.resolved.at("dedup").at("mode").get<std::string>();
            DedupMode mode;
            if (mode_s == "DropDocs") mode = DedupMode::DropDocs;
            else if (mode_s == "TrimSpans") mode = DedupMode::TrimSpans;
            else throw ValidationError("unknown dedup mode: " + mode_s);
            auto docs = read_jsonl_file(io.input);
            DedupReport dr = run_dedup(docs, params);
            auto kept = dedup_apply(docs, dr, mode);
            guard.track(io.output);
            write_jsonl_file(io.output, kept);
            if (!io.dedup_report.empty()) {
                guard.track(io.dedup_report);
                write_text(io.dedup_report, report_to_json(dr));
            }
            report["counts"] = {{"input", docs.size()},
                                {"kept", kept.size()},
                                {"dropped", docs.size() - kept.size()},
                                {"near_dup_clusters", dr.near_dup_clusters.size()},
                                {"exact_span_groups", dr.exact_spans.size()}};
        } else if (stage == "decontam") {
            const json& dc = cfg.resolved.at("decontam");
            uint32_t n = dc.at("n").get<uint32_t>();
            uint64_t max_hits = dc.at("max_hits").get<uint64_t>();
            std::string mode = dc.at("mode").get<std::string>();
            if (n < 1 || max_hits < 1) throw ValidationError("decontam n and max_hits must be >= 1");
            if (mode != "drop" && mode != "excise")
                throw ValidationError("unknown decontam mode: " + mode);
            NgramIndex index;
            if (!io.index_in.empty()) {
                index = load_index(io.index_in);
                if (index.n != n)
                    throw ValidationError("index n does not match config n");
            } else if (!io.benchmark.empty()) {
                index = build_ngram_index(read_jsonl_file(io.benchmark), n);
            } else {
                throw ValidationError("decontam needs --benchmark or --index");
            }
            if (!io.index_out.empty()) {
                guard.track(io.index_out);
                save_index(index, io.index_out);
            }
            auto docs = read_jsonl_file(io.input);
            auto verdicts = scan_corpus(docs, index, max_hits);
            std::vector<Document> kept;
            uint64_t dropped = 0, excised_tokens = 0;
            for (size_t i = 0; i < docs.size(); ++i) {
                if (!verdicts[i].drop) {
                    kept.push_back(docs[i]);
                    continue;
                }
                if (mode == "drop") {
                    ++dropped;
                    continue;
                }
                kept.push_back(excise_hits(docs[i], index, excised_tokens));
            }
            guard.track(io.output);
            write_jsonl_file(io.output, kept);
            if (!io.verdicts.empty()) {
                guard.track(io.verdicts);
                std::ofstream out(io.verdicts);
                for (const auto& v : verdicts) out << verdict_to_json_line(v) << '\n';
            }
            report["counts"] = {{"input", docs.size()},
                                {"kept", kept.size()},
                                {"dropped", dropped},
                                {"index_ngrams", index.grams.size()},
                                {"excised_tokens", excised_tokens}};
        } else if (stage == "plan") {
            const json& s = cfg.resolved.at("sampler");
            uint64_t budget = s.at("budget_tokens").get<uint64_t>();
            if (budget == 0) throw ValidationError("sampler.budget_tokens must be > 0");
            auto manifests = read_manifests_file(io.manifests);
            std::map<std::string, double> overrides;
            for (auto& [k, v] : s.at("weight_overrides").items())
                overrides[k] = v.get<double>();
            SamplerOptions opts = sampler_options_from_config(cfg.resolved);
            SamplingPlan plan;
            try {
                plan = plan_mixture(manifests, budget, overrides, opts, cfg.seed());
            } catch (const std::exception& e) {
                throw ValidationError(e.what());
            }
            auto violations = validate_plan(plan, manifests, targets_from_config(cfg.resolved));
            guard.track(io.output);
            write_text(io.output, plan_to_json(plan));
            json viol = json::array();
            for (const auto& v : violations)
                viol.push_back({{"target", v.target_name},
                                {"actual", v.actual},
                                {"target_fraction", v.target},
                                {"signed_gap", v.signed_gap}});
            report["counts"] = {{"sources", plan.entries.size()},
                                {"violations", violations.size()}};
            report["violations"] = viol;
        } else if (stage == "schedule") {
            SamplingPlan plan = plan_from_json(read_text(io.plan));
            json ids_json = json::parse(read_text(io.ids));
            std::vector<std::vector<std::string>> ids;
            for (const auto& e : plan.entries) {
                if (!ids_json.contains(e.source_id))
                    throw std::runtime_error("ids file missing source: " + e.source_id);
                ids.push_back(ids_json[e.source_id].get<std::vector<std::string>>());
            }
            auto schedule = emit_schedule(plan, ids, cfg.seed());
            guard.track(io.output);
            write_text(io.output, schedule_to_json(schedule, plan));
            if (!io.binary_out.empty()) {
                guard.track(io.binary_out);
                save_schedule(schedule, io.binary_out);
            }
            report["counts"] = {{"draws", schedule.size()}, {"sources", plan.entries.size()}};
        } else if (stage == "score") {
            std::ifstream in(io.input);
            if (!in) throw std::runtime_error("cannot open eval file: " + io.input);
            std::vector<TurnResult> turns;
            double wer_sum = 0, acc_sum = 0, f1_sum = 0;
            uint64_t n_ref = 0;
            std::vector<bool> refused;
            std::vector<AbstentionOutcome> outcomes;
            std::string line;
            uint64_t n_records = 0;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                ++n_records;
                json j = json::parse(line);
                std::string example_id = j.value("example_id", "");
                std::string turn_id = j.value("turn_id", "");
                TokenSeq pred;
                if (j.contains("prediction"))
                    pred = normalize(j["prediction"].get<std::string>());
                if (j.contains("keyword_spec")) {
                    KeywordSpec spec;
                    for (const auto& k : j["keyword_spec"]) {
                        KeywordEntry e;
                        e.slot = k.at("slot").get<std::string>();
                        for (const auto& f : k.at("forms"))
                            e.forms.push_back(normalize(f.get<std::string>()));
                        spec.keywords.push_back(std::move(e));
                    }
                    turns.push_back(score_turn(spec, pred, example_id, turn_id));
                }
                if (j.contains("reference")) {
                    TokenSeq ref = normalize(j["reference"].get<std::string>());
                    auto wr = word_error_rate(pred, ref);
                    auto f1 = word_overlap_f1(pred, ref);
                    wer_sum += wr.wer;
                    acc_sum += wr.statutes_accuracy;
                    f1_sum += f1.f1;
                    ++n_ref;
                }
                if (j.contains("observed")) {
                    std::string obs = j["observed"].get<std::string>();
                    if (obs != "Refused" && obs != "Answered")
                        throw std::runtime_error("unknown observed value: " + obs);
                    refused.push_back(obs == "Refused");
                    if (j.contains("expected")) {
                        std::string exp = j["expected"].get<std::string>();
                        AbstentionOutcome o;
                        if (exp == "ShouldRefuse") o.expected = ExpectedBehavior::ShouldRefuse;
                        else if (exp == "ShouldAnswer") o.expected = ExpectedBehavior::ShouldAnswer;
                        else throw std::runtime_error("unknown expected value: " + exp);
                        o.observed = obs == "Refused" ? ObservedBehavior::Refused
                                                      : ObservedBehavior::Answered;
                        o.category = j.value("category", "insufficient_information");
                        outcomes.push_back(std::move(o));
                    }
                }
            }
            json scores;
            if (!turns.empty()) {
                auto cs = composite_recall(turns);
                json per = json::object();
                for (const auto& [id, v] : cs.per_example) per[id] = v;
                scores["composite"] = {{"overall", cs.overall},
                                       {"per_example", per},
                                       {"n_turns", turns.size()}};
            }
            if (n_ref > 0)
                scores["statutes"] = {{"mean_wer", wer_sum / n_ref},
                                      {"mean_accuracy", acc_sum / n_ref},
                                      {"mean_word_overlap_f1", f1_sum / n_ref},
                                      {"n", n_ref}};
            if (!refused.empty())
                scores["refusal"] = {{"rate", refusal_rate(refused)}, {"n", refused.size()}};
            if (!outcomes.empty()) {
                auto ab = abstention_scores(outcomes);
                json a;
                a["prudence"] = ab.prudence ? json(*ab.prudence) : json(nullptr);
                a["over_conservativeness"] =
                    ab.over_conservativeness ? json(*ab.over_conservativeness) : json(nullptr);
                a["honesty"] = ab.honesty ? json(*ab.honesty) : json(nullptr);
                json cats = json::array();
                for (const auto& c : ab.per_category)
                    cats.push_back({{"category", c.category},
                                    {"should_refuse", c.should_refuse},
                                    {"correct_refusals", c.correct_refusals}});
                a["per_category"] = cats;
                scores["abstention"] = a;
            }
            guard.track(io.output);
            write_text(io.output, scores.dump(2));
            report["counts"] = {{"records", n_records},
                                {"keyword_turns", turns.size()},
                                {"reference_records", n_ref},
                                {"judged_records", refused.size()},
                                {"abstention_records", outcomes.size()}};
        } else if (stage == "deploy") {
            const json& p = cfg.resolved.at("planner");
            double threshold = p.at("min_interactivity").get<double>();
            double tol = p.at("consistency_tolerance").get<double>();
            std::vector<MeasurementRecord> records;
            std::vector<std::string> warnings;
            if (io.measurements.size() >= 4 &&
                io.measurements.substr(io.measurements.size() - 4) == ".csv")
                records = records_from_csv(io.measurements, &warnings);
            else
                records = records_from_json(read_text(io.measurements));
            if (records.empty()) throw std::runtime_error("no measurement records");
            json checks = json::array();
            for (const auto& r : records)
                checks.push_back({{"label", r.label},
                                  {"consistent", consistency_check(r, tol)}});
            auto outcome = select_config(records, threshold);
            guard.track(io.output);
            write_text(io.output, plan_outcome_to_json(outcome));
            if (!io.plot.empty()) {
                guard.track(io.plot);
                write_text(io.plot, plot_data_json(records));
            }
            report["counts"] = {{"records", records.size()}};
            report["consistency"] = checks;
            report["warnings"] = warnings;
            report["feasible"] = std::holds_alternative<DeploymentPlan>(outcome);
        } else {
            throw ValidationError("unknown stage: " + stage);
        }
    } catch (const ValidationError& e) {
        if (error_out) *error_out = e.what();
        return 1;
    } catch (const std::exception& e) {
        if (error_out) *error_out = e.what();
        return 2;
    }

    auto t1 = std::chrono::steady_clock::now();
    report["timing"] = {
        {"wall_seconds", std::chrono::duration<double>(t1 - t0).count()},
        {"timestamp_utc", utc_timestamp()},
    };
    if (!io.report.empty()) {
        guard.track(io.report);
        write_text(io.report, report.dump(2));
    }
    guard.committed = true;
    return status;
}

}  // namespace phx
