#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "semmap/compare.hpp"
#include "semmap/corpus.hpp"
#include "semmap/errors.hpp"
#include "semmap/factor.hpp"
#include "semmap/lda.hpp"
#include "semmap/matrix.hpp"
#include "semmap/network.hpp"
#include "semmap/report.hpp"
#include "semmap/svg.hpp"
#include "semmap/version.hpp"

namespace {

using nlohmann::json;
using namespace semmap;

struct Flags {
    PipelineConfig cfg;
    std::string split = "paragraphs";
    std::string order = "stop-first";
    std::string config_path;
    std::string counts_path;
    std::string clusters_csv;
    std::string clusters_net;
    std::string clusters_clu;
    int synth_docs = 200;
    int synth_doc_length = 60;
    int synth_block_size = 40;
};

void add_corpus_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--input", f.cfg.input, "corpus file or directory");
    cmd->add_option("--split", f.split, "document splitting: paragraphs or files")
        ->check(CLI::IsMember({"paragraphs", "files"}));
    cmd->add_option("--stopwords", f.cfg.stopwords, "stopword list, one word per line");
    cmd->add_option("--min-freq", f.cfg.min_frequency, "vocabulary frequency threshold");
    cmd->add_option("--filter-order", f.order, "stop-first or freq-first")
        ->check(CLI::IsMember({"stop-first", "freq-first"}));
}

void add_output_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--out", f.cfg.out_dir, "output directory");
    cmd->add_option("--format", f.cfg.format, "stdout format: json or text")
        ->check(CLI::IsMember({"json", "text"}));
}

void apply_enums(Flags& f) {
    f.cfg.split =
        f.split == "paragraphs" ? SplitMode::paragraphs : SplitMode::file_per_doc;
    f.cfg.filter_order = f.order == "stop-first"
                             ? FilterOrder::stopwords_then_frequency
                             : FilterOrder::frequency_then_stopwords;
}

// the corpus every analysis consumes: stopwords removed, plurals folded
Corpus canonical_corpus(const Flags& f, Report::CorpusStats* stats = nullptr) {
    Corpus corpus = load_corpus(f.cfg.input, f.cfg.split);
    if (stats) {
        stats->documents = corpus.documents.size();
        stats->total_tokens = corpus.total_tokens();
        stats->unique_words = corpus.unique_words();
    }
    if (!f.cfg.stopwords.empty())
        filter_stopwords(corpus, StopwordList::load(f.cfg.stopwords));
    if (stats) stats->post_stopword_unique = corpus.unique_words();
    equate_plurals(corpus);
    return corpus;
}

WordDocumentMatrix counts_from_flags(const Flags& f) {
    if (!f.counts_path.empty()) return WordDocumentMatrix::from_csv(f.counts_path);
    const Corpus corpus = canonical_corpus(f);
    const StopwordList stoplist =
        f.cfg.stopwords.empty() ? StopwordList{} : StopwordList::load(f.cfg.stopwords);
    const Vocabulary vocab =
        build_vocabulary(corpus, f.cfg.min_frequency, f.cfg.filter_order, stoplist);
    return build_word_document_matrix(corpus, vocab);
}

void print_json_or_text(const Flags& f, const json& j,
                        const std::vector<std::string>& text_lines) {
    if (f.cfg.format == "json") {
        std::cout << j.dump(2) << "\n";
    } else {
        for (const auto& line : text_lines) std::cout << line << "\n";
    }
}

int cmd_ingest(const Flags& f) {
    Report::CorpusStats stats;
    const Corpus corpus = canonical_corpus(f, &stats);
    (void)corpus;
    print_json_or_text(
        f,
        json{{"documents", stats.documents},
             {"total_tokens", stats.total_tokens},
             {"unique_words", stats.unique_words},
             {"post_stopword_unique", stats.post_stopword_unique}},
        {"documents            " + std::to_string(stats.documents),
         "total tokens         " + std::to_string(stats.total_tokens),
         "unique words         " + std::to_string(stats.unique_words),
         "after stopwords      " + std::to_string(stats.post_stopword_unique)});
    return 0;
}

int cmd_matrix(const Flags& f) {
    const WordDocumentMatrix counts = counts_from_flags(f);
    std::filesystem::create_directories(f.cfg.out_dir);
    const auto path = std::filesystem::path(f.cfg.out_dir) / "counts.csv";
    counts.to_csv(path);
    print_json_or_text(f,
                       json{{"documents", counts.num_docs()},
                            {"words", counts.num_words()},
                            {"file", path.string()}},
                       {"documents " + std::to_string(counts.num_docs()),
                        "words     " + std::to_string(counts.num_words()),
                        "wrote     " + path.string()});
    return 0;
}

int cmd_network(const Flags& f) {
    if (f.cfg.input.empty() && f.counts_path.empty()) {
        std::cerr << "error: network needs --input or --counts\n";
        return 1;
    }
    const WordDocumentMatrix counts = counts_from_flags(f);
    const SimilarityMatrix cosine = cosine_matrix(counts);
    const CowordNetwork net = build_network(cosine, counts.column_sums(), f.cfg.tau);
    const Partition partition = louvain_partition(net);

    std::filesystem::create_directories(f.cfg.out_dir);
    const std::filesystem::path dir(f.cfg.out_dir);
    export_pajek(net, partition, dir / "map");
    export_graphml(net, partition, dir / "map.graphml");
    emit_svg_map(net, partition, f.cfg.seed, dir / "map.svg");

    print_json_or_text(
        f,
        json{{"nodes", net.nodes.size()},
             {"edges", net.edges.size()},
             {"isolates", isolate_count(net)},
             {"communities", partition.num_communities()},
             {"modularity_q", partition.modularity_q}},
        {"nodes " + std::to_string(net.nodes.size()) + ", edges " +
             std::to_string(net.edges.size()) + ", isolates " +
             std::to_string(isolate_count(net)),
         "communities " + std::to_string(partition.num_communities()),
         "Q " + std::to_string(partition.modularity_q)});
    return 0;
}

int cmd_factors(const Flags& f) {
    if (f.cfg.input.empty() && f.counts_path.empty()) {
        std::cerr << "error: factors needs --input or --counts\n";
        return 1;
    }
    const WordDocumentMatrix counts = counts_from_flags(f);
    FactorOptions opts;
    opts.num_factors = f.cfg.num_factors;
    const FactorModel model = pca_varimax(counts, opts);

    std::filesystem::create_directories(f.cfg.out_dir);
    const std::filesystem::path dir(f.cfg.out_dir);
    write_loadings_csv(model, dir / "loadings.csv");
    write_scores_csv(counts.doc_ids, factor_scores(counts, model), dir / "scores.csv");

    json jfactors = json::array();
    std::vector<std::string> lines;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "explained variance %.2f%%",
                  100.0 * model.explained_variance);
    lines.push_back(buf);
    for (int k = 0; k < f.cfg.num_factors; ++k) {
        std::vector<std::size_t> order(model.words.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(model.loadings[a][k]) > std::abs(model.loadings[b][k]);
        });
        json jwords = json::array();
        std::string line = std::to_string(k + 1) + " |";
        for (std::size_t i = 0;
             i < order.size() && i < static_cast<std::size_t>(f.cfg.top_k); ++i) {
            jwords.push_back({{"word", model.words[order[i]]},
                              {"loading", model.loadings[order[i]][k]}});
            std::snprintf(buf, sizeof(buf), " %s (%.3f)",
                          model.words[order[i]].c_str(), model.loadings[order[i]][k]);
            line += buf;
        }
        jfactors.push_back(jwords);
        lines.push_back(line);
    }
    print_json_or_text(f,
                       json{{"explained_variance", model.explained_variance},
                            {"factors", jfactors}},
                       lines);
    return 0;
}

int cmd_topics(const Flags& f) {
    const Corpus corpus = canonical_corpus(f);
    const Vocabulary vocab =
        build_vocabulary(corpus, 1, FilterOrder::stopwords_then_frequency, {});
    LdaConfig lda_cfg;
    lda_cfg.num_topics = f.cfg.num_topics;
    lda_cfg.alpha = f.cfg.alpha;
    lda_cfg.beta = f.cfg.beta;
    lda_cfg.sweeps = f.cfg.sweeps;
    lda_cfg.seed = f.cfg.seed;
    const TopicModel model = fit_lda(corpus, vocab, lda_cfg);

    std::filesystem::create_directories(f.cfg.out_dir);
    write_doc_topics_csv(model, std::filesystem::path(f.cfg.out_dir) / "doc_topics.csv");

    json jtopics = json::array();
    std::vector<std::string> lines = {"topic | words"};
    for (int t = 0; t < f.cfg.num_topics; ++t) {
        json jwords = json::array();
        std::string line = std::to_string(t + 1) + " |";
        for (const auto& [w, p] : model.top_words(t, f.cfg.top_k)) {
            jwords.push_back({{"word", w}, {"phi", p}});
            line += ' ' + w;
        }
        jtopics.push_back({{"topic", t}, {"words", jwords}});
        lines.push_back(line);
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "perplexity %.3f", model.perplexity());
    lines.push_back(buf);
    print_json_or_text(
        f, json{{"topics", jtopics}, {"perplexity", model.perplexity()}}, lines);
    return 0;
}

int cmd_compare(const Flags& f) {
    const Corpus corpus = canonical_corpus(f);
    const StopwordList stoplist =
        f.cfg.stopwords.empty() ? StopwordList{} : StopwordList::load(f.cfg.stopwords);
    const Vocabulary vocab =
        build_vocabulary(corpus, f.cfg.min_frequency, f.cfg.filter_order, stoplist);
    const WordDocumentMatrix counts = build_word_document_matrix(corpus, vocab);
    const CowordNetwork net =
        build_network(cosine_matrix(counts), counts.column_sums(), f.cfg.tau);
    const Partition partition = louvain_partition(net);
    std::map<std::string, int> louvain;
    for (std::size_t i = 0; i < net.nodes.size(); ++i)
        louvain[net.nodes[i].word] = partition.assignment[i];

    json j;
    std::vector<std::string> lines;
    char buf[128];

    if (!f.clusters_csv.empty() || !f.clusters_net.empty()) {
        const std::map<std::string, int> imported =
            !f.clusters_csv.empty()
                ? import_partition_csv(f.clusters_csv)
                : import_partition_pajek(f.clusters_net, f.clusters_clu);
        std::vector<std::string> dropped;
        const ContingencyTable table = contingency(louvain, imported, &dropped);
        for (const auto& w : dropped) warn("word '" + w + "' is in only one clustering");
        const AssociationResult res = associate(table);
        j = json{{"imported_vs_louvain",
                  {{"chi_square", res.chi_square},
                   {"df", res.df},
                   {"p_value", res.p_value},
                   {"cramers_v", res.cramers_v},
                   {"items", table.n}}}};
        std::snprintf(buf, sizeof(buf),
                      "imported vs louvain: items %lld, chi2 %.4f, df %lld, V %.3f, p %.4f",
                      static_cast<long long>(table.n), res.chi_square,
                      static_cast<long long>(res.df), res.cramers_v, res.p_value);
        lines.push_back(buf);
        print_json_or_text(f, j, lines);
        return 0;
    }

    // no external clustering given: topics vs communities and topics vs factors
    FactorOptions fopts;
    fopts.num_factors = f.cfg.num_factors;
    const FactorModel factors = pca_varimax(counts, fopts);
    const std::vector<std::vector<double>> scores = factor_scores(counts, factors);
    const Vocabulary lda_vocab =
        build_vocabulary(corpus, 1, FilterOrder::stopwords_then_frequency, {});
    LdaConfig lda_cfg;
    lda_cfg.num_topics = f.cfg.num_topics;
    lda_cfg.alpha = f.cfg.alpha;
    lda_cfg.beta = f.cfg.beta;
    lda_cfg.sweeps = f.cfg.sweeps;
    lda_cfg.seed = f.cfg.seed;
    const TopicModel model = fit_lda(corpus, lda_vocab, lda_cfg);

    std::vector<std::vector<std::string>> lists;
    for (int t = 0; t < f.cfg.num_topics; ++t) {
        std::vector<std::string> words;
        for (const auto& [w, p] : model.top_words(t, f.cfg.top_k)) {
            (void)p;
            words.push_back(w);
        }
        lists.push_back(std::move(words));
    }
    const WordAlignment alignment = match_topic_words(lists, louvain, model);
    std::vector<int> tl, cl;
    for (const auto& e : alignment.matched) {
        tl.push_back(e.topic);
        cl.push_back(e.cluster);
    }
    const AssociationResult word_level = associate(contingency(tl, cl));
    std::snprintf(buf, sizeof(buf),
                  "word level: items %zu, chi2 %.4f, df %lld, V %.3f, p %.4f",
                  alignment.matched.size(), word_level.chi_square,
                  static_cast<long long>(word_level.df), word_level.cramers_v,
                  word_level.p_value);
    lines.push_back(buf);

    // align by id: the topic model may have dropped emptied documents
    const std::vector<int> all_topics = dominant_topics(model);
    const std::vector<int> all_factors = dominant_factor(scores);
    std::map<std::string, int> factor_of;
    for (std::size_t d = 0; d < counts.doc_ids.size(); ++d)
        factor_of[counts.doc_ids[d]] = all_factors[d];
    std::vector<int> doc_topics, doc_factors;
    for (std::size_t d = 0; d < model.doc_ids.size(); ++d) {
        const auto it = factor_of.find(model.doc_ids[d]);
        if (it == factor_of.end()) continue;
        doc_topics.push_back(all_topics[d]);
        doc_factors.push_back(it->second);
    }
    const AssociationResult doc_level = document_level_association(doc_topics, doc_factors);
    std::snprintf(buf, sizeof(buf),
                  "document level: items %zu, chi2 %.4f, df %lld, V %.3f, p %.4f",
                  doc_topics.size(), doc_level.chi_square,
                  static_cast<long long>(doc_level.df), doc_level.cramers_v,
                  doc_level.p_value);
    lines.push_back(buf);

    j = json{{"word_level",
              {{"chi_square", word_level.chi_square},
               {"df", word_level.df},
               {"p_value", word_level.p_value},
               {"cramers_v", word_level.cramers_v},
               {"items", alignment.matched.size()}}},
             {"document_level",
              {{"chi_square", doc_level.chi_square},
               {"df", doc_level.df},
               {"p_value", doc_level.p_value},
               {"cramers_v", doc_level.cramers_v},
               {"items", doc_topics.size()}}}};
    print_json_or_text(f, j, lines);
    return 0;
}

int cmd_pipeline(Flags& f, const CLI::App* cmd) {
    PipelineConfig cfg;
    if (!f.config_path.empty()) cfg = load_config(f.config_path);
    // explicit flags override file values
    auto given = [&](const char* name) { return cmd->count(name) > 0; };
    if (given("--input")) cfg.input = f.cfg.input;
    if (given("--split")) cfg.split = f.cfg.split;
    if (given("--stopwords")) cfg.stopwords = f.cfg.stopwords;
    if (given("--min-freq")) cfg.min_frequency = f.cfg.min_frequency;
    if (given("--filter-order")) cfg.filter_order = f.cfg.filter_order;
    if (given("--tau")) cfg.tau = f.cfg.tau;
    if (given("--factors")) cfg.num_factors = f.cfg.num_factors;
    if (given("--topics")) cfg.num_topics = f.cfg.num_topics;
    if (given("--alpha")) cfg.alpha = f.cfg.alpha;
    if (given("--beta")) cfg.beta = f.cfg.beta;
    if (given("--sweeps")) cfg.sweeps = f.cfg.sweeps;
    if (given("--seed")) cfg.seed = f.cfg.seed;
    if (given("--top-k")) cfg.top_k = f.cfg.top_k;
    if (given("--out")) cfg.out_dir = f.cfg.out_dir;
    if (given("--format")) cfg.format = f.cfg.format;

    const Report report = run_pipeline(cfg);
    if (cfg.format == "json")
        std::cout << report_to_json(report);
    else
        std::cout << report_to_text(report);
    return 0;
}

int cmd_synth(const Flags& f) {
    const Corpus corpus = generate_synthetic_corpus(
        f.cfg.num_topics, f.synth_docs, f.synth_doc_length, f.synth_block_size,
        f.cfg.seed);
    std::filesystem::create_directories(f.cfg.out_dir);
    const auto path = std::filesystem::path(f.cfg.out_dir) / "synthetic.txt";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
        if (d) out << "\n";
        out << corpus.documents[d].raw_text << "\n";
    }
    print_json_or_text(f,
                       json{{"documents", corpus.documents.size()},
                            {"tokens", corpus.total_tokens()},
                            {"file", path.string()}},
                       {"documents " + std::to_string(corpus.documents.size()),
                        "tokens    " + std::to_string(corpus.total_tokens()),
                        "wrote     " + path.string()});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"co-word maps and topic models over small corpora"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    Flags f;

    CLI::App* ingest = app.add_subcommand("ingest", "tokenize and report corpus statistics");
    add_corpus_flags(ingest, f);
    add_output_flags(ingest, f);
    ingest->get_option("--input")->required();

    CLI::App* matrix = app.add_subcommand("matrix", "write the word/document count matrix");
    add_corpus_flags(matrix, f);
    add_output_flags(matrix, f);
    matrix->get_option("--input")->required();

    CLI::App* network = app.add_subcommand("network", "build the co-word map and communities");
    add_corpus_flags(network, f);
    add_output_flags(network, f);
    network->add_option("--counts", f.counts_path, "read a count matrix CSV instead of a corpus");
    network->add_option("--tau", f.cfg.tau, "cosine threshold, edges need similarity > tau");
    network->add_option("--seed", f.cfg.seed, "layout seed");

    CLI::App* factors = app.add_subcommand("factors", "factor analysis of the count matrix");
    add_corpus_flags(factors, f);
    add_output_flags(factors, f);
    factors->add_option("--counts", f.counts_path, "read a count matrix CSV instead of a corpus");
    factors->add_option("--factors", f.cfg.num_factors, "factors to retain");
    factors->add_option("--top-k", f.cfg.top_k, "words listed per factor");

    CLI::App* topics = app.add_subcommand("topics", "topic model of the corpus");
    add_corpus_flags(topics, f);
    add_output_flags(topics, f);
    topics->get_option("--input")->required();
    topics->add_option("--topics", f.cfg.num_topics, "topic count");
    topics->add_option("--alpha", f.cfg.alpha, "document prior, negative = 50/T");
    topics->add_option("--beta", f.cfg.beta, "word prior");
    topics->add_option("--sweeps", f.cfg.sweeps, "sampling sweeps");
    topics->add_option("--seed", f.cfg.seed, "sampler seed");
    topics->add_option("--top-k", f.cfg.top_k, "words listed per topic");

    CLI::App* compare = app.add_subcommand("compare", "associations between the two methods");
    add_corpus_flags(compare, f);
    add_output_flags(compare, f);
    compare->get_option("--input")->required();
    compare->add_option("--tau", f.cfg.tau, "cosine threshold");
    compare->add_option("--factors", f.cfg.num_factors, "factors to retain");
    compare->add_option("--topics", f.cfg.num_topics, "topic count");
    compare->add_option("--alpha", f.cfg.alpha, "document prior, negative = 50/T");
    compare->add_option("--beta", f.cfg.beta, "word prior");
    compare->add_option("--sweeps", f.cfg.sweeps, "sampling sweeps");
    compare->add_option("--seed", f.cfg.seed, "sampler seed");
    compare->add_option("--top-k", f.cfg.top_k, "top words per topic for matching");
    compare->add_option("--clusters-csv", f.clusters_csv,
                        "word,cluster CSV to compare against the Louvain communities");
    compare->add_option("--clusters-net", f.clusters_net, "Pajek .net with word labels");
    compare->add_option("--clusters-clu", f.clusters_clu, "Pajek .clu partition")
        ->needs(compare->get_option("--clusters-net"));

    CLI::App* pipeline = app.add_subcommand("pipeline", "full run: corpus to report and maps");
    pipeline->add_option("--config", f.config_path, "key = value config file");
    add_corpus_flags(pipeline, f);
    add_output_flags(pipeline, f);
    pipeline->add_option("--tau", f.cfg.tau, "cosine threshold");
    pipeline->add_option("--factors", f.cfg.num_factors, "factors to retain");
    pipeline->add_option("--topics", f.cfg.num_topics, "topic count");
    pipeline->add_option("--alpha", f.cfg.alpha, "document prior, negative = 50/T");
    pipeline->add_option("--beta", f.cfg.beta, "word prior");
    pipeline->add_option("--sweeps", f.cfg.sweeps, "sampling sweeps");
    pipeline->add_option("--seed", f.cfg.seed, "seed for the sampler and the layout");
    pipeline->add_option("--top-k", f.cfg.top_k, "words per topic and factor");

    CLI::App* synth = app.add_subcommand("synth", "write a synthetic block-structured corpus");
    add_output_flags(synth, f);
    synth->add_option("--topics", f.cfg.num_topics, "number of word blocks");
    synth->add_option("--docs", f.synth_docs, "documents to generate");
    synth->add_option("--doc-length", f.synth_doc_length, "tokens per document");
    synth->add_option("--block-size", f.synth_block_size, "words per block");
    synth->add_option("--seed", f.cfg.seed, "generator seed");

    try {
        app.parse(argc, argv);
        apply_enums(f);
        if (ingest->parsed()) return cmd_ingest(f);
        if (matrix->parsed()) return cmd_matrix(f);
        if (network->parsed()) return cmd_network(f);
        if (factors->parsed()) return cmd_factors(f);
        if (topics->parsed()) return cmd_topics(f);
        if (compare->parsed()) return cmd_compare(f);
        if (pipeline->parsed()) return cmd_pipeline(f, pipeline);
        if (synth->parsed()) return cmd_synth(f);
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
