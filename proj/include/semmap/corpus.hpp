#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace semmap {

struct Document {
    std::string id;
    std::string raw_text;
    std::vector<std::string> tokens;
};

struct Corpus {
    std::vector<Document> documents;
    std::string provenance;

    std::size_t total_tokens() const;
    std::size_t unique_words() const;
};

struct StopwordList {
    std::unordered_set<std::string> words;

    bool contains(const std::string& w) const { return words.count(w) > 0; }

    // One lowercase word per line; '#' starts a comment, blank lines ignored.
    static StopwordList load(const std::filesystem::path& file);
};

struct VocabEntry {
    std::string word;
    std::int64_t corpus_frequency = 0;
    std::int64_t document_frequency = 0;
};

// Working word set, sorted by descending corpus frequency then ascending word.
struct Vocabulary {
    std::vector<VocabEntry> entries;
    std::int64_t min_frequency = 1;
    bool stopwords_applied = false;

    std::size_t size() const { return entries.size(); }
    std::vector<std::string> word_list() const;
    // Index of a word in entries, or npos.
    std::size_t index_of(const std::string& w) const;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    mutable std::unordered_map<std::string, std::size_t> index_;
};

enum class SplitMode { paragraphs, file_per_doc, delimiter };

enum class FilterOrder { stopwords_then_frequency, frequency_then_stopwords };

struct TokenizerConfig {
    bool keep_internal_hyphens = true;
    bool drop_numeric = true;
};

// Lowercases and splits on anything that is neither alphanumeric nor an
// internal hyphen; tokens without a single letter (years, figures) are
// dropped. Bytes >= 0x80 are treated as word characters so UTF-8 text
// passes through unharmed.
std::vector<std::string> tokenize(std::string_view text,
                                  const TokenizerConfig& config = {});

// Paragraph mode: blank lines delimit units. File mode: source is a
// directory and every .txt file becomes one document (filename order).
// Delimiter mode: a line equal to `delimiter` separates units.
Corpus load_corpus(const std::filesystem::path& source, SplitMode mode,
                   const std::string& delimiter = "");

std::vector<std::string> filter_stopwords(const std::vector<std::string>& tokens,
                                          const StopwordList& stoplist);

// Drops stoplist matches from every document in place.
void filter_stopwords(Corpus& corpus, const StopwordList& stoplist);

// Maps every word to a canonical form: a word ending in "s" maps to the
// stem obtained by stripping that one "s", provided the stem occurs in the
// corpus and is itself canonical. Everything else maps to itself, so the
// map is idempotent.
std::unordered_map<std::string, std::string> equate_plurals(
    const std::unordered_set<std::string>& corpus_words);

// Rewrites corpus tokens through the canonical-form map of its own words.
void equate_plurals(Corpus& corpus);

Vocabulary build_vocabulary(const Corpus& corpus, std::int64_t min_frequency,
                            FilterOrder order = FilterOrder::stopwords_then_frequency,
                            const StopwordList& stoplist = {});

// Dirichlet-multinomial test corpus over `num_topics` disjoint word blocks
// of `vocab_block_size` words each; deterministic given seed. Words are
// named t<i>w<j> so a token's true block is recoverable from its name.
Corpus generate_synthetic_corpus(int num_topics, int num_docs, int doc_length,
                                 int vocab_block_size, std::uint64_t seed);

// True block index of a synthetic word (parses the t<i>w<j> name), or -1.
int synthetic_word_block(const std::string& word);

}  // namespace semmap
