#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "semmap/lda.hpp"

namespace semmap {

// Words from the topic top-word lists aligned with a clustering over the
// co-word vocabulary. Words that appear in several top-word lists are
// resolved to the topic with the higher phi, ties to the lowest topic id;
// the resolution is kept for reporting.
struct WordAlignment {
    struct Entry {
        std::string word;
        int topic = 0;
        int cluster = 0;
    };
    std::vector<Entry> matched;  // sorted by word
    std::vector<std::string> unmatched_topic_words;
    std::vector<std::pair<std::string, int>> multi_topic_words;  // word, chosen topic
};

WordAlignment match_topic_words(
    const std::vector<std::vector<std::string>>& topic_top_words,
    const std::map<std::string, int>& word_clusters, const TopicModel& model);

struct ContingencyTable {
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    std::vector<std::vector<std::int64_t>> counts;  // rows x cols
    std::int64_t n = 0;

    std::size_t rows() const { return counts.size(); }
    std::size_t cols() const { return counts.empty() ? 0 : counts[0].size(); }
    bool testable() const { return rows() >= 2 && cols() >= 2; }
};

// Cross-tabulates two labelings of the same item sequence. Only observed
// labels become rows and columns, so no marginal is ever zero.
ContingencyTable contingency(const std::vector<int>& labels_a,
                             const std::vector<int>& labels_b);

// Keyed variant: items are intersected by name; an empty intersection is an
// error, a partial one is reported through the optional out-parameter.
ContingencyTable contingency(const std::map<std::string, int>& a,
                             const std::map<std::string, int>& b,
                             std::vector<std::string>* dropped = nullptr);

struct AssociationResult {
    double chi_square = 0.0;
    std::int64_t df = 0;
    double p_value = 1.0;
    double cramers_v = 0.0;
};

// Upper regularized incomplete gamma Q(a, x); absolute error below 1e-10.
double regularized_gamma_q(double a, double x);

// Pearson chi-square without continuity correction. Warns when any expected
// count falls below 5; the test still runs.
AssociationResult chi_square_test(const ContingencyTable& t);

double cramers_v(double chi_square, std::int64_t n, std::size_t rows,
                 std::size_t cols);

// chi_square_test plus Cramer's V in one result
AssociationResult associate(const ContingencyTable& t);

// Monte-Carlo check of the analytic p: shuffles labels_b `samples` times and
// counts permutations with chi-square >= observed, add-one smoothed.
double permutation_p_value(const std::vector<int>& labels_a,
                           const std::vector<int>& labels_b, int samples,
                           std::uint64_t seed);

// word,cluster rows; an optional "word,cluster" header line is skipped.
// Duplicate or malformed rows are errors.
std::map<std::string, int> import_partition_csv(const std::filesystem::path& file);

// Pajek route: labels from the .net vertex section, cluster ids from the
// matching .clu (converted back to 0-based).
std::map<std::string, int> import_partition_pajek(const std::filesystem::path& net_file,
                                                  const std::filesystem::path& clu_file);

AssociationResult document_level_association(const std::vector<int>& doc_topics,
                                             const std::vector<int>& doc_factors);

}  // namespace semmap
