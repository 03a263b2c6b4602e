#include "semmap/matrix.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "semmap/errors.hpp"

namespace semmap {

std::vector<std::int64_t> WordDocumentMatrix::column_sums() const {
    std::vector<std::int64_t> sums(words.size(), 0);
    for (std::size_t d = 0; d < doc_ids.size(); ++d)
        for (std::size_t w = 0; w < words.size(); ++w)
            sums[w] += at(d, w);
    return sums;
}

void WordDocumentMatrix::to_csv(const std::filesystem::path& file) const {
    std::ofstream out(file);
    if (!out) throw DataError("cannot write " + file.string());
    out << "doc_id";
    for (const auto& w : words) out << ',' << w;
    out << '\n';
    for (std::size_t d = 0; d < doc_ids.size(); ++d) {
        out << doc_ids[d];
        for (std::size_t w = 0; w < words.size(); ++w) out << ',' << at(d, w);
        out << '\n';
    }
}

WordDocumentMatrix WordDocumentMatrix::from_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot read " + file.string());

    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ss(line);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        return cells;
    };

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty matrix CSV " + file.string());
    auto header = split(line);
    if (header.size() < 2) throw DataError("matrix CSV needs at least one word column");

    WordDocumentMatrix m;
    m.words.assign(header.begin() + 1, header.end());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != header.size())
            throw DataError("matrix CSV row '" + cells[0] + "' has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(header.size()));
        m.doc_ids.push_back(cells[0]);
        for (std::size_t w = 1; w < cells.size(); ++w) {
            try {
                m.counts.push_back(std::stoll(cells[w]));
            } catch (const std::exception&) {
                throw DataError("non-integer cell '" + cells[w] + "' in " + file.string());
            }
        }
    }
    if (m.doc_ids.empty()) throw DataError("matrix CSV has no data rows");
    return m;
}

WordDocumentMatrix build_word_document_matrix(const Corpus& corpus,
                                              const Vocabulary& vocab) {
    if (vocab.size() == 0) throw DataError("empty vocabulary");

    WordDocumentMatrix m;
    m.words = vocab.word_list();
    m.counts.assign(corpus.documents.size() * m.words.size(), 0);
    for (const auto& doc : corpus.documents) {
        const std::size_t d = m.doc_ids.size();
        m.doc_ids.push_back(doc.id);
        for (const auto& t : doc.tokens) {
            const auto w = vocab.index_of(t);
            if (w != Vocabulary::npos) ++m.counts[d * m.words.size() + w];
        }
    }

    const auto sums = m.column_sums();
    for (std::size_t w = 0; w < m.words.size(); ++w)
        if (sums[w] == 0)
            throw DataError("word '" + m.words[w] + "' occurs in no document");
    return m;
}

double cosine_similarity(const std::vector<std::int64_t>& x,
                         const std::vector<std::int64_t>& y) {
    if (x.size() != y.size())
        throw DataError("cosine: vector lengths differ (" + std::to_string(x.size()) +
                        " vs " + std::to_string(y.size()) + ")");
    double dot = 0.0, xx = 0.0, yy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = static_cast<double>(x[i]);
        const double b = static_cast<double>(y[i]);
        dot += a * b;
        xx += a * a;
        yy += b * b;
    }
    if (xx == 0.0 || yy == 0.0) {
        warn("cosine of a zero vector, returning 0");
        return 0.0;
    }
    return dot / (std::sqrt(xx) * std::sqrt(yy));
}

SimilarityMatrix cosine_matrix(const WordDocumentMatrix& m) {
    const std::size_t n = m.num_words();
    const std::size_t docs = m.num_docs();

    // Column norms first; fixed ascending-index summation keeps results
    // bit-stable across runs.
    std::vector<double> norms(n, 0.0);
    for (std::size_t w = 0; w < n; ++w) {
        double s = 0.0;
        for (std::size_t d = 0; d < docs; ++d) {
            const double v = static_cast<double>(m.at(d, w));
            s += v * v;
        }
        norms[w] = std::sqrt(s);
        if (norms[w] == 0.0)
            warn("word '" + m.words[w] + "' has a zero count vector; its similarities are 0");
    }

    SimilarityMatrix sim;
    sim.words = m.words;
    sim.values.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        sim.values[i * n + i] = norms[i] > 0.0 ? 1.0 : 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t d = 0; d < docs; ++d)
                dot += static_cast<double>(m.at(d, i)) * static_cast<double>(m.at(d, j));
            const double denom = norms[i] * norms[j];
            const double value = denom > 0.0 ? dot / denom : 0.0;
            sim.values[i * n + j] = value;
            sim.values[j * n + i] = value;
        }
    }
    return sim;
}

}  // namespace semmap
