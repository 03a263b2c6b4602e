#include "semmap/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "semmap/errors.hpp"
#include "semmap/factor.hpp"
#include "semmap/lda.hpp"
#include "semmap/matrix.hpp"
#include "semmap/network.hpp"
#include "semmap/svg.hpp"
#include "semmap/version.hpp"

namespace semmap {

namespace {

using nlohmann::json;

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

template <typename F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const DataError& e) {
        throw DataError(std::string(name) + ": " + e.what());
    } catch (const NumericError& e) {
        throw NumericError(std::string(name) + ": " + e.what());
    }
}

const char* split_name(SplitMode m) {
    return m == SplitMode::paragraphs ? "paragraphs" : "files";
}

const char* order_name(FilterOrder o) {
    return o == FilterOrder::stopwords_then_frequency ? "stop-first" : "freq-first";
}

}  // namespace

std::string config_to_text(const PipelineConfig& cfg) {
    std::ostringstream out;
    out << "input = " << cfg.input << "\n";
    out << "split = " << split_name(cfg.split) << "\n";
    out << "stopwords = " << cfg.stopwords << "\n";
    out << "min_freq = " << cfg.min_frequency << "\n";
    out << "filter_order = " << order_name(cfg.filter_order) << "\n";
    out << "tau = " << fmt("%.17g", cfg.tau) << "\n";
    out << "factors = " << cfg.num_factors << "\n";
    out << "topics = " << cfg.num_topics << "\n";
    out << "alpha = " << fmt("%.17g", cfg.alpha) << "\n";
    out << "beta = " << fmt("%.17g", cfg.beta) << "\n";
    out << "sweeps = " << cfg.sweeps << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "top_k = " << cfg.top_k << "\n";
    out << "out = " << cfg.out_dir << "\n";
    out << "format = " << cfg.format << "\n";
    return out.str();
}

void save_config(const PipelineConfig& cfg, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw DataError("cannot write " + file.string());
    out << config_to_text(cfg);
}

PipelineConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot read " + file.string());

    PipelineConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t") != std::string::npos)
                throw DataError("config line " + std::to_string(lineno) +
                                ": expected key = value");
            continue;
        }
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            if (a == std::string::npos) return std::string();
            const auto b = s.find_last_not_of(" \t");
            return s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        try {
            if (key == "input") cfg.input = value;
            else if (key == "split") {
                if (value == "paragraphs") cfg.split = SplitMode::paragraphs;
                else if (value == "files") cfg.split = SplitMode::file_per_doc;
                else throw DataError("split must be paragraphs or files");
            } else if (key == "stopwords") cfg.stopwords = value;
            else if (key == "min_freq") cfg.min_frequency = std::stoi(value);
            else if (key == "filter_order") {
                if (value == "stop-first")
                    cfg.filter_order = FilterOrder::stopwords_then_frequency;
                else if (value == "freq-first")
                    cfg.filter_order = FilterOrder::frequency_then_stopwords;
                else throw DataError("filter_order must be stop-first or freq-first");
            } else if (key == "tau") cfg.tau = std::stod(value);
            else if (key == "factors") cfg.num_factors = std::stoi(value);
            else if (key == "topics") cfg.num_topics = std::stoi(value);
            else if (key == "alpha") cfg.alpha = std::stod(value);
            else if (key == "beta") cfg.beta = std::stod(value);
            else if (key == "sweeps") cfg.sweeps = std::stoi(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "top_k") cfg.top_k = std::stoi(value);
            else if (key == "out") cfg.out_dir = value;
            else if (key == "format") {
                if (value != "json" && value != "text")
                    throw DataError("format must be json or text");
                cfg.format = value;
            } else
                throw DataError("unknown config key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw DataError("config line " + std::to_string(lineno) +
                            ": bad value for " + key);
        } catch (const std::out_of_range&) {
            throw DataError("config line " + std::to_string(lineno) +
                            ": value out of range for " + key);
        }
    }
    return cfg;
}

std::string config_hash(const PipelineConfig& cfg) {
    const std::string text = config_to_text(cfg);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

json association_to_json(const Report::Association& a) {
    return json{{"chi_square", a.stats.chi_square},
                {"df", a.stats.df},
                {"p_value", a.stats.p_value},
                {"cramers_v", a.stats.cramers_v},
                {"items", a.items},
                {"instances", a.instances},
                {"note", a.note}};
}

Report::Association association_from_json(const json& j) {
    Report::Association a;
    a.stats.chi_square = j.at("chi_square").get<double>();
    a.stats.df = j.at("df").get<std::int64_t>();
    a.stats.p_value = j.at("p_value").get<double>();
    a.stats.cramers_v = j.at("cramers_v").get<double>();
    a.items = j.at("items").get<std::size_t>();
    a.instances = j.at("instances").get<std::size_t>();
    a.note = j.at("note").get<std::string>();
    return a;
}

}  // namespace

std::string report_to_json(const Report& r) {
    json j;
    j["corpus"] = {{"documents", r.corpus.documents},
                   {"total_tokens", r.corpus.total_tokens},
                   {"unique_words", r.corpus.unique_words},
                   {"post_stopword_unique", r.corpus.post_stopword_unique},
                   {"vocabulary_size", r.corpus.vocabulary_size}};
    j["network"] = {{"nodes", r.network.nodes},
                    {"edges", r.network.edges},
                    {"isolates", r.network.isolates},
                    {"communities", r.network.communities},
                    {"modularity_q", r.network.modularity_q},
                    {"fully_isolated", r.network.fully_isolated},
                    {"tau", r.network.tau}};
    json loadings = json::array();
    for (const auto& factor : r.factors.top_loadings) {
        json words = json::array();
        for (const auto& [w, l] : factor) words.push_back({{"word", w}, {"loading", l}});
        loadings.push_back(words);
    }
    j["factors"] = {{"explained_variance", r.factors.explained_variance},
                    {"ss_loadings", r.factors.ss_loadings},
                    {"top_loadings", loadings}};
    json topics = json::array();
    for (const auto& row : r.topics) {
        json words = json::array();
        for (const auto& [w, p] : row.words) words.push_back({{"word", w}, {"phi", p}});
        topics.push_back({{"topic", row.topic}, {"words", words}});
    }
    j["topics"] = topics;
    j["perplexity"] = r.perplexity;
    j["word_level"] = association_to_json(r.word_level);
    j["document_level"] = association_to_json(r.document_level);
    j["files"] = r.files;
    j["provenance"] = {{"config_hash", r.provenance.config_hash},
                       {"seed", r.provenance.seed},
                       {"version", r.provenance.version}};
    return j.dump(2) + "\n";
}

Report report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("bad report JSON: ") + e.what());
    }
    try {
        Report r;
        const auto& c = j.at("corpus");
        r.corpus.documents = c.at("documents").get<std::size_t>();
        r.corpus.total_tokens = c.at("total_tokens").get<std::size_t>();
        r.corpus.unique_words = c.at("unique_words").get<std::size_t>();
        r.corpus.post_stopword_unique = c.at("post_stopword_unique").get<std::size_t>();
        r.corpus.vocabulary_size = c.at("vocabulary_size").get<std::size_t>();
        const auto& n = j.at("network");
        r.network.nodes = n.at("nodes").get<std::size_t>();
        r.network.edges = n.at("edges").get<std::size_t>();
        r.network.isolates = n.at("isolates").get<std::size_t>();
        r.network.communities = n.at("communities").get<int>();
        r.network.modularity_q = n.at("modularity_q").get<double>();
        r.network.fully_isolated = n.at("fully_isolated").get<bool>();
        r.network.tau = n.at("tau").get<double>();
        const auto& f = j.at("factors");
        r.factors.explained_variance = f.at("explained_variance").get<double>();
        r.factors.ss_loadings = f.at("ss_loadings").get<std::vector<double>>();
        for (const auto& factor : f.at("top_loadings")) {
            std::vector<std::pair<std::string, double>> row;
            for (const auto& w : factor)
                row.emplace_back(w.at("word").get<std::string>(),
                                 w.at("loading").get<double>());
            r.factors.top_loadings.push_back(std::move(row));
        }
        for (const auto& t : j.at("topics")) {
            Report::TopicRow row;
            row.topic = t.at("topic").get<int>();
            for (const auto& w : t.at("words"))
                row.words.emplace_back(w.at("word").get<std::string>(),
                                       w.at("phi").get<double>());
            r.topics.push_back(std::move(row));
        }
        r.perplexity = j.at("perplexity").get<double>();
        r.word_level = association_from_json(j.at("word_level"));
        r.document_level = association_from_json(j.at("document_level"));
        r.files = j.at("files").get<std::vector<std::string>>();
        const auto& p = j.at("provenance");
        r.provenance.config_hash = p.at("config_hash").get<std::string>();
        r.provenance.seed = p.at("seed").get<std::uint64_t>();
        r.provenance.version = p.at("version").get<std::string>();
        return r;
    } catch (const json::exception& e) {
        throw DataError(std::string("report JSON misses fields: ") + e.what());
    }
}

std::string report_to_text(const Report& r) {
    std::ostringstream out;
    out << "corpus\n";
    out << "  documents            " << r.corpus.documents << "\n";
    out << "  total tokens         " << r.corpus.total_tokens << "\n";
    out << "  unique words         " << r.corpus.unique_words << "\n";
    out << "  after stopwords      " << r.corpus.post_stopword_unique << "\n";
    out << "  vocabulary           " << r.corpus.vocabulary_size << "\n";
    out << "network (tau " << fmt("%.4g", r.network.tau) << ")\n";
    out << "  nodes " << r.network.nodes << ", edges " << r.network.edges
        << ", isolates " << r.network.isolates << "\n";
    out << "  communities " << r.network.communities << ", modularity Q "
        << fmt("%.4f", r.network.modularity_q) << "\n";
    if (r.network.fully_isolated)
        out << "  note: no edges above the threshold; community detection skipped\n";
    out << "factors\n";
    out << "  explained variance   " << fmt("%.2f", 100.0 * r.factors.explained_variance)
        << "%\n";
    for (std::size_t k = 0; k < r.factors.top_loadings.size(); ++k) {
        out << "  " << k + 1 << " |";
        for (const auto& [w, l] : r.factors.top_loadings[k])
            out << ' ' << w << " (" << fmt("%.3f", l) << ")";
        out << "\n";
    }
    out << "topics\n";
    out << "  topic | words\n";
    for (const auto& row : r.topics) {
        out << "  " << row.topic + 1 << " |";
        for (const auto& [w, p] : row.words) {
            (void)p;
            out << ' ' << w;
        }
        out << "\n";
    }
    out << "  perplexity " << fmt("%.3f", r.perplexity) << "\n";
    auto assoc_line = [&](const char* name, const Report::Association& a) {
        out << name << "\n";
        if (!a.note.empty()) {
            out << "  " << a.note << "\n";
            return;
        }
        out << "  items " << a.items << " (" << a.instances << " instances), chi2 "
            << fmt("%.4f", a.stats.chi_square) << ", df " << a.stats.df << ", V "
            << fmt("%.3f", a.stats.cramers_v) << ", p "
            << fmt("%.4f", a.stats.p_value) << "\n";
    };
    assoc_line("word-level association (topics vs communities)", r.word_level);
    assoc_line("document-level association (topics vs factors)", r.document_level);
    out << "provenance\n";
    out << "  config " << r.provenance.config_hash << ", seed " << r.provenance.seed
        << ", version " << r.provenance.version << "\n";
    return out.str();
}

void emit_report(const Report& r, const std::filesystem::path& dir) {
    {
        std::ofstream out(dir / "report.json", std::ios::binary);
        if (!out) throw DataError("cannot write report.json");
        out << report_to_json(r);
    }
    {
        std::ofstream out(dir / "report.txt", std::ios::binary);
        if (!out) throw DataError("cannot write report.txt");
        out << report_to_text(r);
    }
}

Report run_pipeline(const PipelineConfig& cfg) {
    Report report;
    report.provenance.config_hash = config_hash(cfg);
    report.provenance.seed = cfg.seed;
    report.provenance.version = kVersion;

    // ingest, shared by both branches
    Corpus corpus = stage("ingest", [&] {
        if (cfg.input.empty()) throw DataError("no input path");
        return load_corpus(cfg.input, cfg.split);
    });
    report.corpus.documents = corpus.documents.size();
    report.corpus.total_tokens = corpus.total_tokens();
    report.corpus.unique_words = corpus.unique_words();

    StopwordList stoplist;
    stage("stopwords", [&] {
        if (!cfg.stopwords.empty()) {
            stoplist = StopwordList::load(cfg.stopwords);
            filter_stopwords(corpus, stoplist);
        }
        return 0;
    });
    report.corpus.post_stopword_unique = corpus.unique_words();
    stage("ingest", [&] {
        equate_plurals(corpus);
        return 0;
    });

    // co-word branch
    const Vocabulary vocab = stage("matrix", [&] {
        return build_vocabulary(corpus, cfg.min_frequency, cfg.filter_order, stoplist);
    });
    report.corpus.vocabulary_size = vocab.size();
    const WordDocumentMatrix counts =
        stage("matrix", [&] { return build_word_document_matrix(corpus, vocab); });
    const SimilarityMatrix cosine = stage("matrix", [&] { return cosine_matrix(counts); });

    std::vector<std::int64_t> frequencies;
    for (const auto& e : vocab.entries) frequencies.push_back(e.corpus_frequency);
    const CowordNetwork net =
        stage("network", [&] { return build_network(cosine, frequencies, cfg.tau); });
    Partition partition;
    if (net.edges.empty()) {
        // degenerate map: flag it, keep singleton communities for the exports
        partition.assignment.resize(net.nodes.size());
        for (std::size_t i = 0; i < partition.assignment.size(); ++i)
            partition.assignment[i] = static_cast<int>(i);
        warn("network: no edges above the threshold; community detection skipped");
    } else {
        partition = stage("network", [&] { return louvain_partition(net); });
    }
    report.network.nodes = net.nodes.size();
    report.network.edges = net.edges.size();
    report.network.isolates = isolate_count(net);
    report.network.communities = partition.num_communities();
    report.network.modularity_q = partition.modularity_q;
    report.network.fully_isolated = net.edges.empty();
    report.network.tau = cfg.tau;

    // factor branch
    FactorOptions fopts;
    fopts.num_factors = cfg.num_factors;
    const FactorModel factors = stage("factors", [&] { return pca_varimax(counts, fopts); });
    report.factors.explained_variance = factors.explained_variance;
    report.factors.ss_loadings = factors.ss_loadings;
    for (int k = 0; k < cfg.num_factors; ++k) {
        std::vector<std::size_t> order(factors.words.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(factors.loadings[a][k]) > std::abs(factors.loadings[b][k]);
        });
        std::vector<std::pair<std::string, double>> top;
        for (std::size_t i = 0; i < order.size() && i < static_cast<std::size_t>(cfg.top_k); ++i)
            top.emplace_back(factors.words[order[i]], factors.loadings[order[i]][k]);
        report.factors.top_loadings.push_back(std::move(top));
    }
    const std::vector<std::vector<double>> scores =
        stage("factors", [&] { return factor_scores(counts, factors); });

    // topic branch, full vocabulary of the same filtered corpus
    const Vocabulary lda_vocab = stage("topics", [&] {
        return build_vocabulary(corpus, 1, FilterOrder::stopwords_then_frequency,
                                StopwordList{});
    });
    LdaConfig lda_cfg;
    lda_cfg.num_topics = cfg.num_topics;
    lda_cfg.alpha = cfg.alpha;
    lda_cfg.beta = cfg.beta;
    lda_cfg.sweeps = cfg.sweeps;
    lda_cfg.seed = cfg.seed;
    const TopicModel model =
        stage("topics", [&] { return fit_lda(corpus, lda_vocab, lda_cfg); });
    for (int t = 0; t < cfg.num_topics; ++t) {
        Report::TopicRow row;
        row.topic = t;
        row.words = model.top_words(t, cfg.top_k);
        report.topics.push_back(std::move(row));
    }
    report.perplexity = stage("topics", [&] { return model.perplexity(); });

    // word-level comparison: topic top words vs network communities
    stage("compare", [&] {
        if (report.network.fully_isolated) {
            report.word_level.note =
                "network above tau is fully isolated; no communities to compare";
            warn("word-level comparison skipped: " + report.word_level.note);
            return 0;
        }
        std::map<std::string, int> clusters;
        for (std::size_t i = 0; i < net.nodes.size(); ++i)
            clusters[net.nodes[i].word] = partition.assignment[i];
        std::vector<std::vector<std::string>> lists;
        for (const auto& row : report.topics) {
            std::vector<std::string> words;
            for (const auto& [w, p] : row.words) {
                (void)p;
                words.push_back(w);
            }
            lists.push_back(std::move(words));
        }
        std::size_t instances = 0;  // list slots with a cluster, multiplicity kept
        for (const auto& list : lists)
            for (const auto& w : list)
                if (clusters.count(w)) ++instances;
        try {
            const WordAlignment alignment = match_topic_words(lists, clusters, model);
            std::vector<int> topics_l, clusters_l;
            for (const auto& e : alignment.matched) {
                topics_l.push_back(e.topic);
                clusters_l.push_back(e.cluster);
            }
            const ContingencyTable table = contingency(topics_l, clusters_l);
            if (!table.testable())
                throw DataError("matched words give a degenerate table");
            report.word_level.stats = associate(table);
            report.word_level.items = alignment.matched.size();
            report.word_level.instances = instances;
        } catch (const DataError& e) {
            report.word_level.note = e.what();
            warn(std::string("word-level comparison skipped: ") + e.what());
        }
        return 0;
    });

    // document-level comparison: dominant topic vs dominant factor
    stage("compare", [&] {
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
        try {
            report.document_level.stats = document_level_association(doc_topics, doc_factors);
            report.document_level.items = doc_topics.size();
            report.document_level.instances = doc_topics.size();
        } catch (const DataError& e) {
            report.document_level.note = e.what();
            warn(std::string("document-level comparison skipped: ") + e.what());
        }
        return 0;
    });

    // artifacts
    stage("export", [&] {
        const std::filesystem::path dir(cfg.out_dir);
        std::filesystem::create_directories(dir);
        export_pajek(net, partition, dir / "map");
        export_graphml(net, partition, dir / "map.graphml");
        emit_svg_map(net, partition, cfg.seed, dir / "map.svg");
        counts.to_csv(dir / "counts.csv");
        write_loadings_csv(factors, dir / "loadings.csv");
        write_scores_csv(counts.doc_ids, scores, dir / "scores.csv");
        write_doc_topics_csv(model, dir / "doc_topics.csv");
        report.files = {"counts.csv", "doc_topics.csv", "loadings.csv",
                        "map.clu",    "map.graphml",    "map.net",
                        "map.svg",    "map.vec",        "report.json",
                        "report.txt", "scores.csv"};
        return 0;
    });
    stage("export", [&] {
        emit_report(report, cfg.out_dir);
        return 0;
    });
    return report;
}

}  // namespace semmap
