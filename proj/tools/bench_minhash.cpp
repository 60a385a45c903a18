// Benchmark: OpenMP signature computation vs the serial reference.
// Usage: bench_minhash [num_docs] [tokens_per_doc]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "phx/dedup.hpp"

using namespace phx;

namespace {

std::vector<Document> synth_corpus(size_t n_docs, size_t tokens_per_doc, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Document> docs(n_docs);
    for (size_t d = 0; d < n_docs; ++d) {
        std::string text;
        for (size_t t = 0; t < tokens_per_doc; ++t) {
            if (t) text.push_back(' ');
            size_t len = 3 + rng() % 6;
            for (size_t i = 0; i < len; ++i)
                text.push_back('a' + static_cast<char>(rng() % 26));
        }
        docs[d].id = "doc" + std::to_string(d);
        docs[d].text = std::move(text);
        docs[d].token_count = tokens_per_doc;
    }
    return docs;
}

template <typename F>
double time_seconds(F&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    size_t n_docs = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 2000;
    size_t tokens = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 400;

    std::printf("corpus: %zu docs x %zu tokens\n", n_docs, tokens);
    auto docs = synth_corpus(n_docs, tokens, 42);
    DedupParams params;

    std::vector<Signature> serial, parallel;
    double t_serial = time_seconds([&] { serial = compute_signatures_serial(docs, params); });
    double t_parallel = time_seconds([&] { parallel = compute_signatures(docs, params); });

    if (serial != parallel) {
        std::fprintf(stderr, "FAIL: parallel signatures differ from serial reference\n");
        return 1;
    }

    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    std::printf("serial:   %.3f s\n", t_serial);
    std::printf("parallel: %.3f s (%d threads, %.2fx speedup)\n", t_parallel, threads,
                t_parallel > 0 ? t_serial / t_parallel : 0.0);
    std::printf("signatures identical: yes\n");
    return 0;
}
