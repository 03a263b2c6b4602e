#include "semmap/lda.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include "semmap/errors.hpp"
#include "semmap/rng.hpp"

namespace semmap {

double TopicModel::phi(int topic, int word) const {
    const double wb = static_cast<double>(words.size()) * beta;
    return (static_cast<double>(topic_word[topic][word]) + beta) /
           (static_cast<double>(topic_total[topic]) + wb);
}

double TopicModel::theta(int doc, int topic) const {
    const double ta = static_cast<double>(num_topics) * alpha;
    return (static_cast<double>(doc_topic[doc][topic]) + alpha) /
           (static_cast<double>(tokens[doc].size()) + ta);
}

std::size_t TopicModel::total_tokens() const {
    std::size_t n = 0;
    for (const auto& doc : tokens) n += doc.size();
    return n;
}

std::vector<std::pair<std::string, double>> TopicModel::top_words(int topic,
                                                                  int k) const {
    std::vector<std::pair<std::string, double>> all;
    all.reserve(words.size());
    for (std::size_t w = 0; w < words.size(); ++w)
        all.emplace_back(words[w], phi(topic, static_cast<int>(w)));
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (static_cast<std::size_t>(k) < all.size()) all.resize(k);
    return all;
}

std::vector<int> dominant_topics(const TopicModel& model) {
    std::vector<int> out(model.doc_ids.size(), 0);
    for (std::size_t d = 0; d < model.doc_ids.size(); ++d) {
        int best = 0;
        for (int t = 1; t < model.num_topics; ++t)
            if (model.theta(static_cast<int>(d), t) >
                model.theta(static_cast<int>(d), best))
                best = t;
        out[d] = best;
    }
    return out;
}

int dominant_topic(const TopicModel& model, const std::string& doc_id) {
    for (std::size_t d = 0; d < model.doc_ids.size(); ++d)
        if (model.doc_ids[d] == doc_id) return dominant_topics(model)[d];
    throw DataError("unknown document '" + doc_id + "'");
}

double TopicModel::perplexity() const {
    double log_lik = 0.0;
    std::size_t n = 0;
    for (std::size_t d = 0; d < tokens.size(); ++d) {
        for (int w : tokens[d]) {
            double p = 0.0;
            for (int t = 0; t < num_topics; ++t)
                p += theta(static_cast<int>(d), t) * phi(t, w);
            log_lik += std::log(p);
            ++n;
        }
    }
    if (n == 0) throw DataError("perplexity undefined on an empty corpus");
    return std::exp(-log_lik / static_cast<double>(n));
}

double perplexity(const TopicModel& model, const Corpus& corpus) {
    std::unordered_map<std::string, int> word_id;
    for (std::size_t w = 0; w < model.words.size(); ++w)
        word_id[model.words[w]] = static_cast<int>(w);
    std::unordered_map<std::string, int> doc_index;
    for (std::size_t d = 0; d < model.doc_ids.size(); ++d)
        doc_index[model.doc_ids[d]] = static_cast<int>(d);

    double log_lik = 0.0;
    std::size_t n = 0;
    for (const auto& doc : corpus.documents) {
        const auto di = doc_index.find(doc.id);
        if (di == doc_index.end())
            throw DataError("unknown document '" + doc.id + "'");
        for (const auto& tok : doc.tokens) {
            const auto wi = word_id.find(tok);
            if (wi == word_id.end())
                throw DataError("word '" + tok + "' is outside the model vocabulary");
            double p = 0.0;
            for (int t = 0; t < model.num_topics; ++t)
                p += model.theta(di->second, t) * model.phi(t, wi->second);
            assert(p > 0.0);
            log_lik += std::log(p);
            ++n;
        }
    }
    if (n == 0) throw DataError("perplexity undefined on an empty corpus");
    return std::exp(-log_lik / static_cast<double>(n));
}

void write_doc_topics_csv(const TopicModel& model, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot write " + file.string());
    out << "doc_id";
    for (int t = 0; t < model.num_topics; ++t) out << ",topic" << t + 1;
    out << "\n";
    char buf[32];
    for (std::size_t d = 0; d < model.doc_ids.size(); ++d) {
        out << model.doc_ids[d];
        for (int t = 0; t < model.num_topics; ++t) {
            std::snprintf(buf, sizeof(buf), "%.10g",
                          model.theta(static_cast<int>(d), t));
            out << ',' << buf;
        }
        out << "\n";
    }
}

TopicModel fit_lda(const Corpus& corpus, const Vocabulary& vocab,
                   const LdaConfig& config, const SweepCallback& on_sweep) {
    if (config.num_topics < 1) throw DataError("topic count must be positive");
    if (config.beta <= 0.0) throw DataError("beta must be positive");
    if (config.sweeps < 1) throw DataError("need at least one sweep");
    const int T = config.num_topics;
    const double alpha =
        config.alpha < 0.0 ? 50.0 / static_cast<double>(T) : config.alpha;
    if (alpha <= 0.0) throw DataError("alpha must be positive");

    TopicModel model;
    model.words = vocab.word_list();
    model.num_topics = T;
    model.alpha = alpha;
    model.beta = config.beta;

    const std::size_t W = model.words.size();
    if (W < static_cast<std::size_t>(T))
        warn("fewer words than topics; some topics will stay empty");
    for (const auto& doc : corpus.documents) {
        std::vector<int> ids;
        ids.reserve(doc.tokens.size());
        for (const auto& tok : doc.tokens) {
            const std::size_t w = vocab.index_of(tok);
            if (w != Vocabulary::npos) ids.push_back(static_cast<int>(w));
        }
        if (ids.empty()) {
            warn("document '" + doc.id + "' has no vocabulary tokens; dropped");
            continue;
        }
        model.doc_ids.push_back(doc.id);
        model.tokens.push_back(std::move(ids));
    }
    if (model.tokens.empty()) throw DataError("no documents left to model");

    const std::size_t D = model.tokens.size();
    model.assignment.resize(D);
    model.doc_topic.assign(D, std::vector<std::int64_t>(T, 0));
    model.topic_word.assign(T, std::vector<std::int64_t>(W, 0));
    model.topic_total.assign(T, 0);

    Rng rng(config.seed);

    // initial assignment: one uniform draw per token, in corpus order
    for (std::size_t d = 0; d < D; ++d) {
        model.assignment[d].resize(model.tokens[d].size());
        for (std::size_t i = 0; i < model.tokens[d].size(); ++i) {
            const int t = static_cast<int>(rng.next_below(static_cast<uint32_t>(T)));
            model.assignment[d][i] = t;
            ++model.doc_topic[d][t];
            ++model.topic_word[t][model.tokens[d][i]];
            ++model.topic_total[t];
        }
    }
    if (on_sweep) on_sweep(0, model);

    const double wbeta = static_cast<double>(W) * config.beta;
    std::vector<double> cumulative(T);

    for (int sweep = 1; sweep <= config.sweeps; ++sweep) {
        for (std::size_t d = 0; d < D; ++d) {
            for (std::size_t i = 0; i < model.tokens[d].size(); ++i) {
                const int w = model.tokens[d][i];
                const int old_t = model.assignment[d][i];
                --model.doc_topic[d][old_t];
                --model.topic_word[old_t][w];
                --model.topic_total[old_t];

                double total = 0.0;
                for (int t = 0; t < T; ++t) {
                    const double p =
                        (static_cast<double>(model.doc_topic[d][t]) + alpha) *
                        (static_cast<double>(model.topic_word[t][w]) + config.beta) /
                        (static_cast<double>(model.topic_total[t]) + wbeta);
                    total += p;
                    cumulative[t] = total;
                }
                const double u = rng.next_double() * total;
                int new_t = 0;
                while (new_t < T - 1 && cumulative[new_t] <= u) ++new_t;

                model.assignment[d][i] = new_t;
                ++model.doc_topic[d][new_t];
                ++model.topic_word[new_t][w];
                ++model.topic_total[new_t];
            }
        }
        if (on_sweep) on_sweep(sweep, model);
    }
    return model;
}

}  // namespace semmap
