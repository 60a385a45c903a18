#include "doctest.h"
#include "phx/decontam.hpp"
#include "test_util.hpp"

#include <cstdio>
#include <fstream>

using namespace phx;

TEST_CASE("build_ngram_index: single 13-token record, n=13") {
    std::mt19937_64 rng(1);
    auto words = phxtest::random_words(rng, 13);
    auto idx = build_ngram_index({phxtest::make_doc("b", phxtest::join(words))}, 13);
    CHECK(idx.grams.size() == 1);
}

TEST_CASE("build_ngram_index: short records contribute nothing") {
    std::mt19937_64 rng(2);
    auto idx = build_ngram_index({phxtest::make_doc("b", phxtest::join(phxtest::random_words(rng, 12)))}, 13);
    CHECK(idx.grams.empty());
}

TEST_CASE("build_ngram_index: size bounded by window count, naive oracle") {
    std::mt19937_64 rng(3);
    std::vector<Document> bench;
    size_t window_sum = 0;
    std::set<std::string> naive;
    for (int i = 0; i < 100; ++i) {
        auto words = phxtest::random_words(rng, rng() % 40);
        bench.push_back(phxtest::make_doc("b" + std::to_string(i), phxtest::join(words)));
        if (words.size() >= 13) {
            window_sum += words.size() - 12;
            for (size_t w = 0; w + 13 <= words.size(); ++w) {
                std::string s;
                for (size_t j = 0; j < 13; ++j) s += words[w + j] + "\x1f";
                naive.insert(s);
            }
        }
    }
    auto idx = build_ngram_index(bench, 13);
    CHECK(idx.grams.size() <= window_sum);
    CHECK(idx.grams.size() == naive.size());
}

TEST_CASE("contamination_scan: zero overlap keeps") {
    std::mt19937_64 rng(4);
    auto idx = build_ngram_index({phxtest::make_doc("b", phxtest::join(phxtest::random_words(rng, 60)))}, 13);
    auto v = contamination_scan(phxtest::make_doc("d", phxtest::join(phxtest::random_words(rng, 60))), idx, 1);
    CHECK(v.hit_count == 0);
    CHECK(!v.drop);
    CHECK(!v.first_hit_offset.has_value());
}

TEST_CASE("contamination_scan: planted benchmark sentence drops") {
    std::mt19937_64 rng(5);
    auto sentence = phxtest::random_words(rng, 15);
    auto idx = build_ngram_index({phxtest::make_doc("b", phxtest::join(sentence))}, 13);
    auto doc_words = phxtest::random_words(rng, 50);
    doc_words.insert(doc_words.begin() + 20, sentence.begin(), sentence.end());
    auto v = contamination_scan(phxtest::make_doc("d", phxtest::join(doc_words)), idx, 1);
    CHECK(v.drop);
    CHECK(v.hit_count == 3);  // 15-token sentence has 3 13-gram windows
    REQUIRE(v.first_hit_offset.has_value());
    CHECK(*v.first_hit_offset == 20);
}

TEST_CASE("contamination_scan: exactly the planted docs drop") {
    std::mt19937_64 rng(6);
    std::vector<Document> bench;
    std::vector<std::vector<std::string>> bench_words;
    for (int i = 0; i < 20; ++i) {
        bench_words.push_back(phxtest::random_words(rng, 20));
        bench.push_back(phxtest::make_doc("b" + std::to_string(i), phxtest::join(bench_words.back())));
    }
    auto idx = build_ngram_index(bench, 13);

    std::vector<Document> corpus;
    std::set<std::string> planted;
    for (int i = 0; i < 200; ++i) {
        auto words = phxtest::random_words(rng, 100);
        std::string id = "d" + std::to_string(i);
        if (i % 13 == 0) {
            const auto& src = bench_words[rng() % bench_words.size()];
            words.insert(words.begin() + rng() % 50, src.begin(), src.end());
            planted.insert(id);
        }
        corpus.push_back(phxtest::make_doc(id, phxtest::join(words)));
    }
    auto verdicts = scan_corpus(corpus, idx, 1);
    std::set<std::string> dropped;
    for (const auto& v : verdicts)
        if (v.drop) dropped.insert(v.doc_id);
    CHECK(dropped == planted);
}

TEST_CASE("soundness: survivors re-scan clean") {
    std::mt19937_64 rng(7);
    std::vector<Document> bench;
    for (int i = 0; i < 30; ++i)
        bench.push_back(phxtest::make_doc("b" + std::to_string(i),
                                          phxtest::join(phxtest::random_words(rng, 25))));
    auto idx = build_ngram_index(bench, 13);
    std::vector<Document> corpus;
    for (int i = 0; i < 100; ++i) {
        auto words = phxtest::random_words(rng, 80);
        if (i % 7 == 0) {
            auto b = normalize(bench[i % bench.size()].text);
            words.insert(words.end(), b.begin(), b.end());
        }
        corpus.push_back(phxtest::make_doc("d" + std::to_string(i), phxtest::join(words)));
    }
    auto verdicts = scan_corpus(corpus, idx, 1);
    std::vector<Document> survivors;
    for (size_t i = 0; i < corpus.size(); ++i)
        if (!verdicts[i].drop) survivors.push_back(corpus[i]);
    for (const auto& v : scan_corpus(survivors, idx, 1)) CHECK(v.hit_count == 0);
}

TEST_CASE("monotonicity: adding benchmark records never lowers hit_count") {
    std::mt19937_64 rng(8);
    std::vector<Document> bench_small, bench_large;
    for (int i = 0; i < 10; ++i) {
        auto d = phxtest::make_doc("b" + std::to_string(i),
                                   phxtest::join(phxtest::random_words(rng, 30)));
        bench_small.push_back(d);
        bench_large.push_back(d);
    }
    std::vector<Document> corpus;
    for (int i = 0; i < 40; ++i) {
        auto words = phxtest::random_words(rng, 60);
        if (i % 3 == 0) {
            auto b = normalize(bench_small[i % 10].text);
            words.insert(words.begin(), b.begin(), b.begin() + 15);
        }
        corpus.push_back(phxtest::make_doc("d" + std::to_string(i), phxtest::join(words)));
    }
    for (int i = 0; i < 10; ++i)
        bench_large.push_back(phxtest::make_doc("extra" + std::to_string(i),
                                                phxtest::join(phxtest::random_words(rng, 30))));
    auto idx_small = build_ngram_index(bench_small, 13);
    auto idx_large = build_ngram_index(bench_large, 13);
    for (const auto& d : corpus)
        CHECK(contamination_scan(d, idx_large, 1).hit_count >=
              contamination_scan(d, idx_small, 1).hit_count);
}

TEST_CASE("normalization symmetry: case and punctuation do not hide hits") {
    Document bench = phxtest::make_doc(
        "b", "the quick brown fox jumps over the lazy dog near the river bank today");
    auto idx = build_ngram_index({bench}, 13);
    Document shouty = phxtest::make_doc(
        "d", "THE QUICK, BROWN FOX JUMPS OVER THE LAZY DOG... NEAR THE RIVER BANK TODAY!");
    auto v = contamination_scan(shouty, idx, 1);
    CHECK(v.drop);
}

TEST_CASE("index persistence round trip with versioned header") {
    std::mt19937_64 rng(9);
    std::vector<Document> bench;
    for (int i = 0; i < 10; ++i)
        bench.push_back(phxtest::make_doc("b" + std::to_string(i),
                                          phxtest::join(phxtest::random_words(rng, 40))));
    auto idx = build_ngram_index(bench, 13);
    std::string path = "test_index.phxn";
    save_index(idx, path);
    auto back = load_index(path);
    CHECK(back.n == idx.n);
    CHECK(back.grams == idx.grams);
    std::remove(path.c_str());

    // corrupt magic
    std::ofstream bad("test_index_bad.phxn", std::ios::binary);
    bad << "NOPE";
    bad.close();
    CHECK_THROWS(load_index("test_index_bad.phxn"));
    std::remove("test_index_bad.phxn");
}

TEST_CASE("hit offsets cover every contaminated window") {
    std::mt19937_64 rng(10);
    auto sentence = phxtest::random_words(rng, 14);
    auto idx = build_ngram_index({phxtest::make_doc("b", phxtest::join(sentence))}, 13);
    auto words = phxtest::random_words(rng, 40);
    words.insert(words.begin() + 5, sentence.begin(), sentence.end());
    auto offsets = contamination_hit_offsets(phxtest::make_doc("d", phxtest::join(words)), idx);
    CHECK(offsets == std::vector<uint64_t>{5, 6});
}
