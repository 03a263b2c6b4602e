#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "semmap/compare.hpp"
#include "semmap/corpus.hpp"

namespace semmap {

struct PipelineConfig {
    std::string input;  // file (paragraph split) or directory (file split)
    SplitMode split = SplitMode::paragraphs;
    std::string stopwords;  // empty: no stopword filtering
    int min_frequency = 3;
    FilterOrder filter_order = FilterOrder::stopwords_then_frequency;
    double tau = 0.2;
    int num_factors = 5;
    int num_topics = 5;
    double alpha = -1.0;  // negative: 50.0 / num_topics
    double beta = 0.1;
    int sweeps = 1000;
    std::uint64_t seed = 1;
    int top_k = 10;
    std::string out_dir = "out";
    std::string format = "json";  // stdout rendering: json or text
};

// Flat `key = value` text format; unknown keys are errors, omitted keys keep
// their defaults. save/load round-trip exactly.
PipelineConfig load_config(const std::filesystem::path& file);
void save_config(const PipelineConfig& cfg, const std::filesystem::path& file);
std::string config_to_text(const PipelineConfig& cfg);

// FNV-1a over the canonical config text
std::string config_hash(const PipelineConfig& cfg);

struct Report {
    struct CorpusStats {
        std::size_t documents = 0;
        std::size_t total_tokens = 0;
        std::size_t unique_words = 0;
        std::size_t post_stopword_unique = 0;
        std::size_t vocabulary_size = 0;
    };
    struct NetworkStats {
        std::size_t nodes = 0;
        std::size_t edges = 0;
        std::size_t isolates = 0;
        int communities = 0;
        double modularity_q = 0.0;
        bool fully_isolated = false;
        double tau = 0.0;
    };
    struct FactorStats {
        double explained_variance = 0.0;
        std::vector<double> ss_loadings;
        // per factor: strongest words by |loading|, capped at top_k
        std::vector<std::vector<std::pair<std::string, double>>> top_loadings;
    };
    struct TopicRow {
        int topic = 0;
        std::vector<std::pair<std::string, double>> words;  // word, phi
    };
    struct Association {
        AssociationResult stats;
        std::size_t items = 0;      // unique items compared
        std::size_t instances = 0;  // with multiplicity (a word per list slot)
        std::string note;           // set when the comparison was untestable
    };
    struct Provenance {
        std::string config_hash;
        std::uint64_t seed = 0;
        std::string version;
    };

    CorpusStats corpus;
    NetworkStats network;
    FactorStats factors;
    std::vector<TopicRow> topics;
    double perplexity = 0.0;
    Association word_level;
    Association document_level;
    std::vector<std::string> files;  // artifact names inside out_dir
    Provenance provenance;
};

std::string report_to_json(const Report& r);
Report report_from_json(const std::string& text);
std::string report_to_text(const Report& r);

// ingest -> {matrix, cosine network + communities, factors} and
// ingest -> LDA, then word- and document-level comparison; writes every
// artifact named in Report::files into cfg.out_dir.
Report run_pipeline(const PipelineConfig& cfg);

// writes report.json and report.txt into dir
void emit_report(const Report& r, const std::filesystem::path& dir);

}  // namespace semmap
