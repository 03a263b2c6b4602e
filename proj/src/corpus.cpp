#include "semmap/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "semmap/errors.hpp"
#include "semmap/rng.hpp"

namespace semmap {

namespace {

bool is_word_char(unsigned char c) {
    return std::isalnum(c) || c >= 0x80;
}

bool is_letter(unsigned char c) {
    return std::isalpha(c) || c >= 0x80;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool blank(const std::string& line) {
    return std::all_of(line.begin(), line.end(),
                       [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::size_t Corpus::total_tokens() const {
    std::size_t n = 0;
    for (const auto& d : documents) n += d.tokens.size();
    return n;
}

std::size_t Corpus::unique_words() const {
    std::unordered_set<std::string> seen;
    for (const auto& d : documents)
        seen.insert(d.tokens.begin(), d.tokens.end());
    return seen.size();
}

StopwordList StopwordList::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot read stopword file " + file.string());
    StopwordList list;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string word;
        for (char c : line)
            if (!std::isspace(static_cast<unsigned char>(c)))
                word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (!word.empty()) list.words.insert(word);
    }
    return list;
}

std::vector<std::string> Vocabulary::word_list() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.word);
    return out;
}

std::size_t Vocabulary::index_of(const std::string& w) const {
    if (index_.size() != entries.size()) {
        index_.clear();
        for (std::size_t i = 0; i < entries.size(); ++i) index_[entries[i].word] = i;
    }
    auto it = index_.find(w);
    return it == index_.end() ? npos : it->second;
}

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config) {
    std::vector<std::string> tokens;
    std::string current;
    bool has_letter = false;

    auto flush = [&] {
        if (!current.empty() && (has_letter || !config.drop_numeric))
            tokens.push_back(current);
        current.clear();
        has_letter = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        if (is_word_char(c)) {
            current += static_cast<char>(c < 0x80 ? std::tolower(c) : c);
            has_letter = has_letter || is_letter(c);
        } else if (c == '-' && config.keep_internal_hyphens && !current.empty() &&
                   i + 1 < text.size() &&
                   is_word_char(static_cast<unsigned char>(text[i + 1]))) {
            current += '-';
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

Corpus load_corpus(const std::filesystem::path& source, SplitMode mode,
                   const std::string& delimiter) {
    Corpus corpus;

    auto add_unit = [&](std::string text) {
        auto tokens = tokenize(text);
        if (tokens.empty()) return;  // para-textual / blank unit
        Document doc;
        doc.id = "p" + std::to_string(corpus.documents.size() + 1);
        doc.raw_text = std::move(text);
        doc.tokens = std::move(tokens);
        corpus.documents.push_back(std::move(doc));
    };

    if (mode == SplitMode::file_per_doc) {
        if (!std::filesystem::is_directory(source))
            throw DataError(source.string() + " is not a directory");
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(source))
            if (entry.is_regular_file() && entry.path().extension() == ".txt")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            auto before = corpus.documents.size();
            add_unit(read_file(f));
            if (corpus.documents.size() > before)
                corpus.documents.back().id = f.stem().string();
        }
    } else {
        const std::string text = read_file(source);
        std::istringstream in(text);
        std::string line, unit;
        auto is_break = [&](const std::string& l) {
            return mode == SplitMode::paragraphs ? blank(l) : l == delimiter;
        };
        while (std::getline(in, line)) {
            if (is_break(line)) {
                add_unit(unit);
                unit.clear();
            } else {
                unit += line;
                unit += '\n';
            }
        }
        add_unit(unit);
    }

    if (corpus.documents.empty())
        throw DataError("zero documents after splitting " + source.string());
    corpus.provenance = source.string();
    return corpus;
}

std::vector<std::string> filter_stopwords(const std::vector<std::string>& tokens,
                                          const StopwordList& stoplist) {
    std::vector<std::string> kept;
    kept.reserve(tokens.size());
    for (const auto& t : tokens)
        if (!stoplist.contains(t)) kept.push_back(t);
    return kept;
}

void filter_stopwords(Corpus& corpus, const StopwordList& stoplist) {
    for (auto& doc : corpus.documents)
        doc.tokens = filter_stopwords(doc.tokens, stoplist);
}

std::unordered_map<std::string, std::string> equate_plurals(
    const std::unordered_set<std::string>& corpus_words) {
    // A stem qualifies only if it is itself a fixed point of the rule;
    // this rules out chains and makes the map idempotent.
    auto stem_of = [&](const std::string& w) -> std::string {
        if (w.size() < 2 || w.back() != 's') return w;
        std::string stem = w.substr(0, w.size() - 1);
        return corpus_words.count(stem) ? stem : w;
    };

    std::unordered_map<std::string, std::string> map;
    map.reserve(corpus_words.size());
    for (const auto& w : corpus_words) {
        const std::string stem = stem_of(w);
        map[w] = (stem_of(stem) == stem) ? stem : w;
    }
    return map;
}

void equate_plurals(Corpus& corpus) {
    std::unordered_set<std::string> words;
    for (const auto& doc : corpus.documents)
        words.insert(doc.tokens.begin(), doc.tokens.end());
    const auto map = equate_plurals(words);
    for (auto& doc : corpus.documents)
        for (auto& t : doc.tokens) t = map.at(t);
}

Vocabulary build_vocabulary(const Corpus& corpus, std::int64_t min_frequency,
                            FilterOrder order, const StopwordList& stoplist) {
    const bool stop_first = order == FilterOrder::stopwords_then_frequency;

    std::map<std::string, VocabEntry> counts;
    for (const auto& doc : corpus.documents) {
        std::unordered_set<std::string> seen_in_doc;
        for (const auto& t : doc.tokens) {
            if (stop_first && stoplist.contains(t)) continue;
            auto& e = counts[t];
            e.word = t;
            ++e.corpus_frequency;
            if (seen_in_doc.insert(t).second) ++e.document_frequency;
        }
    }

    Vocabulary vocab;
    vocab.min_frequency = min_frequency;
    vocab.stopwords_applied = true;
    for (auto& [word, entry] : counts) {
        if (entry.corpus_frequency < min_frequency) continue;
        if (!stop_first && stoplist.contains(word)) continue;
        vocab.entries.push_back(std::move(entry));
    }
    std::sort(vocab.entries.begin(), vocab.entries.end(),
              [](const VocabEntry& a, const VocabEntry& b) {
                  if (a.corpus_frequency != b.corpus_frequency)
                      return a.corpus_frequency > b.corpus_frequency;
                  return a.word < b.word;
              });

    if (vocab.entries.empty())
        throw DataError("vocabulary empty after filtering (min_frequency=" +
                        std::to_string(min_frequency) + ")");
    return vocab;
}

namespace {

// Marsaglia & Tsang (2000); the shape<1 case is boosted through shape+1.
double sample_gamma(Rng& rng, double shape) {
    if (shape < 1.0) {
        const double u = rng.next_double();
        return sample_gamma(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        // polar method for a standard normal draw
        double x, u1, u2, s;
        do {
            u1 = 2.0 * rng.next_double() - 1.0;
            u2 = 2.0 * rng.next_double() - 1.0;
            s = u1 * u1 + u2 * u2;
        } while (s >= 1.0 || s == 0.0);
        x = u1 * std::sqrt(-2.0 * std::log(s) / s);

        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        const double u = rng.next_double();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

std::vector<double> sample_dirichlet(Rng& rng, int dim, double alpha) {
    std::vector<double> theta(dim);
    double sum = 0.0;
    for (auto& t : theta) {
        t = sample_gamma(rng, alpha);
        sum += t;
    }
    for (auto& t : theta) t /= sum;
    return theta;
}

std::size_t sample_categorical(Rng& rng, const std::vector<double>& probs) {
    double u = rng.next_double();
    for (std::size_t i = 0; i < probs.size(); ++i) {
        u -= probs[i];
        if (u < 0.0) return i;
    }
    return probs.size() - 1;
}

}  // namespace

Corpus generate_synthetic_corpus(int num_topics, int num_docs, int doc_length,
                                 int vocab_block_size, std::uint64_t seed) {
    if (num_topics < 1 || num_docs < 1 || doc_length < 1 || vocab_block_size < 1)
        throw DataError("synthetic corpus parameters must all be >= 1");

    // Within a block, word probabilities fall off as 1/(rank+1); blocks are
    // disjoint, so a word's name pins down the topic that can emit it.
    std::vector<double> word_probs(vocab_block_size);
    double norm = 0.0;
    for (int j = 0; j < vocab_block_size; ++j) norm += 1.0 / (j + 1.0);
    for (int j = 0; j < vocab_block_size; ++j) word_probs[j] = 1.0 / ((j + 1.0) * norm);

    // sparse enough that one block dominates almost every document, which
    // keeps the per-document majority label recoverable from the tokens
    constexpr double kDocTopicAlpha = 0.05;

    Rng rng(seed);
    Corpus corpus;
    corpus.provenance = "synthetic T=" + std::to_string(num_topics) +
                        " D=" + std::to_string(num_docs) +
                        " L=" + std::to_string(doc_length) +
                        " B=" + std::to_string(vocab_block_size) +
                        " seed=" + std::to_string(seed);
    for (int d = 0; d < num_docs; ++d) {
        const auto theta = sample_dirichlet(rng, num_topics, kDocTopicAlpha);
        Document doc;
        doc.id = "s" + std::to_string(d + 1);
        for (int i = 0; i < doc_length; ++i) {
            const auto t = sample_categorical(rng, theta);
            const auto j = sample_categorical(rng, word_probs);
            std::string word = "t" + std::to_string(t) + "w" + std::to_string(j);
            if (i > 0) doc.raw_text += ' ';
            doc.raw_text += word;
            doc.tokens.push_back(std::move(word));
        }
        corpus.documents.push_back(std::move(doc));
    }
    return corpus;
}

int synthetic_word_block(const std::string& word) {
    if (word.size() < 4 || word[0] != 't') return -1;
    const auto w = word.find('w', 1);
    if (w == std::string::npos) return -1;
    try {
        return std::stoi(word.substr(1, w - 1));
    } catch (const std::exception&) {
        return -1;
    }
}

}  // namespace semmap
