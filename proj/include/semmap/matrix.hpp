#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "semmap/corpus.hpp"

namespace semmap {

// Occurrence counts, documents as rows and vocabulary words as columns.
struct WordDocumentMatrix {
    std::vector<std::string> words;
    std::vector<std::string> doc_ids;
    std::vector<std::int64_t> counts;  // row-major, docs x words

    std::size_t num_docs() const { return doc_ids.size(); }
    std::size_t num_words() const { return words.size(); }
    std::int64_t at(std::size_t doc, std::size_t word) const {
        return counts[doc * words.size() + word];
    }
    std::vector<std::int64_t> column_sums() const;

    void to_csv(const std::filesystem::path& file) const;
    static WordDocumentMatrix from_csv(const std::filesystem::path& file);
};

// Symmetric, unit diagonal (for nonzero columns), values in [0,1].
struct SimilarityMatrix {
    std::vector<std::string> words;
    std::vector<double> values;  // row-major, words x words

    std::size_t size() const { return words.size(); }
    double at(std::size_t i, std::size_t j) const {
        return values[i * words.size() + j];
    }
};

WordDocumentMatrix build_word_document_matrix(const Corpus& corpus,
                                              const Vocabulary& vocab);

// Salton cosine over equal-length non-negative count vectors; zero-norm
// input yields 0 with a warning.
double cosine_similarity(const std::vector<std::int64_t>& x,
                         const std::vector<std::int64_t>& y);

// Pairwise cosine over the word (column) vectors.
SimilarityMatrix cosine_matrix(const WordDocumentMatrix& m);

}  // namespace semmap
