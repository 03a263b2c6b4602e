#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "semmap/corpus.hpp"

namespace semmap {

struct LdaConfig {
    int num_topics = 10;
    double alpha = -1.0;  // resolved to 50.0 / num_topics when negative
    double beta = 0.1;
    int sweeps = 1000;  // at least 1
    std::uint64_t seed = 1;
};

// Fitted model plus the count tables it was estimated from. The tables are
// kept consistent at all times: doc_topic sums to the document length,
// topic_word row t sums to topic_total[t], and the grand totals agree.
struct TopicModel {
    std::vector<std::string> words;    // word id -> surface form
    std::vector<std::string> doc_ids;
    std::vector<std::vector<int>> tokens;      // word ids per document
    std::vector<std::vector<int>> assignment;  // topic per token, same shape

    std::vector<std::vector<std::int64_t>> doc_topic;   // docs x topics
    std::vector<std::vector<std::int64_t>> topic_word;  // topics x words
    std::vector<std::int64_t> topic_total;

    int num_topics = 0;
    double alpha = 0.0;
    double beta = 0.0;

    double phi(int topic, int word) const;   // P(word | topic), smoothed
    double theta(int doc, int topic) const;  // P(topic | doc), smoothed
    std::size_t total_tokens() const;

    // top k words of a topic by descending phi; ties alphabetical
    std::vector<std::pair<std::string, double>> top_words(int topic, int k) const;

    // perplexity of the training tokens under the point estimates
    double perplexity() const;
};

// argmax_t theta(doc, t), ties to the lowest topic id
int dominant_topic(const TopicModel& model, const std::string& doc_id);
std::vector<int> dominant_topics(const TopicModel& model);

// perplexity over an explicit corpus; its documents must be the model's
double perplexity(const TopicModel& model, const Corpus& corpus);

// theta table, one row per document
void write_doc_topics_csv(const TopicModel& model, const std::filesystem::path& file);

// Called after every completed sweep, including sweep 0 (the initial
// assignment pass).
using SweepCallback = std::function<void(int sweep, const TopicModel&)>;

// Collapsed Gibbs sampler. Documents and token positions are visited in
// ascending order each sweep; the final state is the point estimate.
// Tokens missing from the vocabulary are dropped; documents left empty by
// the restriction are dropped with a warning.
TopicModel fit_lda(const Corpus& corpus, const Vocabulary& vocab,
                   const LdaConfig& config, const SweepCallback& on_sweep = {});

}  // namespace semmap
