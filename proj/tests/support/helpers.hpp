#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "semmap/corpus.hpp"
#include "semmap/rng.hpp"

namespace test_support {

// unique scratch directory, removed on destruction
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("semmap_test_" + tag + "_" + std::to_string(++counter) + "_" +
                std::to_string(static_cast<unsigned>(::getpid())));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path file(const std::string& name) const { return path / name; }
};

inline std::filesystem::path write_file(const std::filesystem::path& p,
                                        const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

inline std::filesystem::path data_dir() { return SEMMAP_DATA_DIR; }

// small random corpus for property tests: words drawn from a fixed pool so
// repeats (and plural pairs) actually occur
inline semmap::Corpus random_corpus(semmap::Rng& rng, int max_docs = 6,
                                    int max_tokens = 40) {
    static const std::vector<std::string> pool = {
        "map",   "maps",   "word",   "words",  "graph", "node",  "edge",
        "edges", "topic",  "topics", "factor", "score", "text",  "texts",
        "unit",  "cosine", "matrix", "gibbs",  "louvain"};
    semmap::Corpus corpus;
    const int docs = 1 + static_cast<int>(rng.next_below(max_docs));
    for (int d = 0; d < docs; ++d) {
        semmap::Document doc;
        doc.id = "p" + std::to_string(d + 1);
        const int len = 1 + static_cast<int>(rng.next_below(max_tokens));
        for (int i = 0; i < len; ++i) {
            doc.tokens.push_back(
                pool[rng.next_below(static_cast<uint32_t>(pool.size()))]);
            doc.raw_text += doc.tokens.back() + " ";
        }
        corpus.documents.push_back(std::move(doc));
    }
    return corpus;
}

}  // namespace test_support
