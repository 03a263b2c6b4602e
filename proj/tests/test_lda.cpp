#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "semmap/corpus.hpp"
#include "semmap/errors.hpp"
#include "semmap/lda.hpp"
#include "semmap/rng.hpp"
#include "support/helpers.hpp"

using namespace semmap;

namespace {

Corpus corpus_from(const std::vector<std::pair<std::string, std::string>>& docs) {
    Corpus corpus;
    for (const auto& [id, text] : docs) {
        Document doc;
        doc.id = id;
        doc.raw_text = text;
        doc.tokens = tokenize(text);
        corpus.documents.push_back(std::move(doc));
    }
    return corpus;
}

LdaConfig quick_config(int topics, int sweeps, std::uint64_t seed) {
    LdaConfig cfg;
    cfg.num_topics = topics;
    cfg.sweeps = sweeps;
    cfg.seed = seed;
    return cfg;
}

// capture warnings emitted through std::cerr
struct CerrCapture {
    std::ostringstream sink;
    std::streambuf* old;
    CerrCapture() : old(std::cerr.rdbuf(sink.rdbuf())) {}
    ~CerrCapture() { std::cerr.rdbuf(old); }
    std::string text() const { return sink.str(); }
};

// a model small enough to fill in by hand; theta depends only on the
// doc_topic counts, alpha and the document lengths
TopicModel hand_model(const std::vector<std::vector<std::int64_t>>& doc_topic,
                      double alpha) {
    TopicModel model;
    model.num_topics = static_cast<int>(doc_topic.front().size());
    model.alpha = alpha;
    model.beta = 0.01;
    model.words = {"x"};
    model.topic_word.assign(model.num_topics, {0});
    model.topic_total.assign(model.num_topics, 0);
    for (std::size_t d = 0; d < doc_topic.size(); ++d) {
        model.doc_ids.push_back("p" + std::to_string(d + 1));
        model.doc_topic.push_back(doc_topic[d]);
        const auto len = std::accumulate(doc_topic[d].begin(), doc_topic[d].end(),
                                         std::int64_t{0});
        model.tokens.emplace_back(static_cast<std::size_t>(len), 0);
        for (int t = 0; t < model.num_topics; ++t) {
            model.topic_word[t][0] += doc_topic[d][t];
            model.topic_total[t] += doc_topic[d][t];
        }
    }
    for (std::size_t d = 0; d < model.tokens.size(); ++d)
        model.assignment.push_back(model.tokens[d]);
    return model;
}

}  // namespace

TEST_SUITE("lda") {

TEST_CASE("one topic collapses to smoothed empirical frequencies") {
    const Corpus corpus = corpus_from({{"p1", "a a b"}, {"p2", "b c"}});
    const Vocabulary vocab = build_vocabulary(corpus, 1);
    const TopicModel model = fit_lda(corpus, vocab, quick_config(1, 3, 9));

    REQUIRE(model.num_topics == 1);
    for (std::size_t d = 0; d < model.doc_ids.size(); ++d)
        CHECK(model.theta(static_cast<int>(d), 0) == 1.0);

    // counts: a=2, b=2, c=1 over 5 tokens and 3 vocabulary words
    const double beta = model.beta;
    const double denom = 5.0 + 3.0 * beta;
    const auto word = [&](const std::string& w) {
        return static_cast<int>(vocab.index_of(w));
    };
    CHECK(model.phi(0, word("a")) == doctest::Approx((2.0 + beta) / denom));
    CHECK(model.phi(0, word("b")) == doctest::Approx((2.0 + beta) / denom));
    CHECK(model.phi(0, word("c")) == doctest::Approx((1.0 + beta) / denom));
}

TEST_CASE("same seed reproduces the model bit for bit") {
    const Corpus corpus = generate_synthetic_corpus(3, 20, 30, 6, 7);
    const Vocabulary vocab = build_vocabulary(corpus, 1);
    const LdaConfig cfg = quick_config(3, 20, 42);

    const TopicModel a = fit_lda(corpus, vocab, cfg);
    const TopicModel b = fit_lda(corpus, vocab, cfg);

    CHECK(a.assignment == b.assignment);
    CHECK(a.doc_topic == b.doc_topic);
    CHECK(a.topic_word == b.topic_word);
    CHECK(a.topic_total == b.topic_total);
    CHECK(a.perplexity() == b.perplexity());
}

TEST_CASE("different seeds give different initial assignments") {
    const Corpus corpus = generate_synthetic_corpus(3, 20, 30, 6, 7);
    const Vocabulary vocab = build_vocabulary(corpus, 1);

    std::vector<std::vector<int>> init_a, init_b;
    const auto grab = [](std::vector<std::vector<int>>& into) {
        return [&into](int sweep, const TopicModel& m) {
            if (sweep == 0) into = m.assignment;
        };
    };
    fit_lda(corpus, vocab, quick_config(3, 1, 1), grab(init_a));
    fit_lda(corpus, vocab, quick_config(3, 1, 2), grab(init_b));
    CHECK(init_a != init_b);
}

TEST_CASE("count tables stay consistent through every sweep") {
    Rng rng(2024);
    const Corpus corpus = test_support::random_corpus(rng);
    const Vocabulary vocab = build_vocabulary(corpus, 1);
    const std::size_t W = vocab.size();

    int sweeps_seen = 0;
    const auto check_tables = [&](int sweep, const TopicModel& m) {
        CHECK(sweep == sweeps_seen);
        ++sweeps_seen;
        std::int64_t grand = 0;
        for (std::size_t d = 0; d < m.tokens.size(); ++d) {
            const auto row_sum = std::accumulate(
                m.doc_topic[d].begin(), m.doc_topic[d].end(), std::int64_t{0});
            CHECK(row_sum == static_cast<std::int64_t>(m.tokens[d].size()));
            double theta_sum = 0.0;
            for (int t = 0; t < m.num_topics; ++t) {
                CHECK(m.theta(static_cast<int>(d), t) >= 0.0);
                theta_sum += m.theta(static_cast<int>(d), t);
            }
            CHECK(theta_sum == doctest::Approx(1.0).epsilon(1e-12));
        }
        for (int t = 0; t < m.num_topics; ++t) {
            const auto row_sum = std::accumulate(
                m.topic_word[t].begin(), m.topic_word[t].end(), std::int64_t{0});
            CHECK(row_sum == m.topic_total[t]);
            grand += m.topic_total[t];
            double phi_sum = 0.0;
            for (std::size_t w = 0; w < W; ++w) {
                CHECK(m.phi(t, static_cast<int>(w)) >= 0.0);
                phi_sum += m.phi(t, static_cast<int>(w));
            }
            CHECK(phi_sum == doctest::Approx(1.0).epsilon(1e-12));
        }
        CHECK(grand == static_cast<std::int64_t>(m.total_tokens()));
    };

    fit_lda(corpus, vocab, quick_config(4, 12, 5), check_tables);
    CHECK(sweeps_seen == 13);  // sweep 0 plus 12 resampling passes
}

TEST_CASE("top words break ties alphabetically") {
    const Corpus corpus = corpus_from({{"p1", "b a c"}});
    const Vocabulary vocab = build_vocabulary(corpus, 1);
    const TopicModel model = fit_lda(corpus, vocab, quick_config(1, 1, 3));

    const auto top2 = model.top_words(0, 2);
    REQUIRE(top2.size() == 2);
    CHECK(top2[0].first == "a");
    CHECK(top2[1].first == "b");
    CHECK(top2[0].second == top2[1].second);

    const auto all = model.top_words(0, 3);
    REQUIRE(all.size() == 3);
    CHECK(all[2].first == "c");
    // asking for more than W clamps to the vocabulary
    CHECK(model.top_words(0, 10).size() == 3);
}

TEST_CASE("top words rank by probability before the tie rule") {
    const Corpus corpus = corpus_from({{"p1", "a a a b"}});
    const Vocabulary vocab = build_vocabulary(corpus, 1);
    const TopicModel model = fit_lda(corpus, vocab, quick_config(1, 1, 3));

    const auto top = model.top_words(0, 2);
    CHECK(top[0].first == "a");
    CHECK(top[0].second > top[1].second);
    // the lists are non-increasing in probability
    for (std::size_t i = 1; i < top.size(); ++i)
        CHECK(top[i - 1].second >= top[i].second);
}

TEST_CASE("dominant topic follows the highest theta row") {
    const TopicModel model = hand_model({{7, 2, 1}, {1, 1, 8}, {3, 3, 0}}, 0.5);
    CHECK(dominant_topic(model, "p1") == 0);
    CHECK(dominant_topic(model, "p2") == 2);
    CHECK(dominant_topic(model, "p3") == 0);  // tie resolves to the lowest id
    CHECK(dominant_topics(model) == std::vector<int>{0, 2, 0});
    CHECK_THROWS_AS(dominant_topic(model, "nope"), DataError);
}

TEST_CASE("dominant topic agrees with an exhaustive scan") {
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::vector<std::int64_t>> rows(1 + rng.next_below(4));
        for (auto& row : rows) {
            row.resize(2 + rng.next_below(5));
            for (auto& c : row) c = rng.next_below(9);
            if (std::accumulate(row.begin(), row.end(), std::int64_t{0}) == 0)
                row[0] = 1;  // hand_model needs a non-empty document
        }
        const TopicModel model = hand_model(rows, 0.25);
        const auto dominant = dominant_topics(model);
        for (std::size_t d = 0; d < rows.size(); ++d) {
            int best = 0;
            for (int t = 0; t < model.num_topics; ++t)
                if (model.theta(static_cast<int>(d), t) >
                    model.theta(static_cast<int>(d), best))
                    best = t;
            CHECK(dominant[d] == best);
        }
    }
}

TEST_CASE("perplexity of a uniform model equals the vocabulary size") {
    // every word once, one topic: phi is exactly uniform, theta is 1
    const Corpus corpus = corpus_from({{"p1", "a b c d"}});
    const Vocabulary vocab = build_vocabulary(corpus, 1);
    const TopicModel model = fit_lda(corpus, vocab, quick_config(1, 2, 11));

    CHECK(model.perplexity() == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(perplexity(model, corpus) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("single-word corpus has perplexity one") {
    const Corpus corpus = corpus_from({{"p1", "a a a"}});
    const Vocabulary vocab = build_vocabulary(corpus, 1);
    const TopicModel model = fit_lda(corpus, vocab, quick_config(1, 1, 1));
    // W = 1 makes the smoothed phi exactly 1 whatever beta is
    CHECK(model.perplexity() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("perplexity matches a direct log-sum oracle") {
    const Corpus corpus =
        corpus_from({{"p1", "map map word graph"}, {"p2", "topic topic word"}});
    const Vocabulary vocab = build_vocabulary(corpus, 1);
    const TopicModel model = fit_lda(corpus, vocab, quick_config(2, 30, 17));

    double log_lik = 0.0;
    std::size_t n = 0;
    for (std::size_t d = 0; d < model.tokens.size(); ++d) {
        for (int w : model.tokens[d]) {
            double p = 0.0;
            for (int t = 0; t < model.num_topics; ++t)
                p += model.theta(static_cast<int>(d), t) * model.phi(t, w);
            log_lik += std::log(p);
            ++n;
        }
    }
    const double oracle = std::exp(-log_lik / static_cast<double>(n));
    CHECK(model.perplexity() == doctest::Approx(oracle).epsilon(1e-10));
    CHECK(perplexity(model, corpus) == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("fitted model beats the uniform bound on the training corpus") {
    const Corpus corpus = generate_synthetic_corpus(5, 60, 30, 8, 21);
    const Vocabulary vocab = build_vocabulary(corpus, 1);
    const TopicModel model = fit_lda(corpus, vocab, quick_config(5, 60, 4));
    CHECK(model.perplexity() <= static_cast<double>(vocab.size()) + 1e-9);
    CHECK(model.perplexity() >= 1.0);
}

TEST_CASE("scoring rejects documents and words outside the model") {
    const Corpus corpus = corpus_from({{"p1", "a b"}, {"p2", "b c"}});
    const Vocabulary vocab = build_vocabulary(corpus, 1);
    const TopicModel model = fit_lda(corpus, vocab, quick_config(2, 2, 1));

    CHECK_THROWS_AS(perplexity(model, corpus_from({{"p9", "a"}})), DataError);
    CHECK_THROWS_AS(perplexity(model, corpus_from({{"p1", "zebra"}})), DataError);
}

TEST_CASE("documents emptied by the vocabulary are dropped with a warning") {
    const Corpus corpus = corpus_from({{"p1", "a a b"}, {"p2", "q"}});
    const Vocabulary vocab = build_vocabulary(corpus, 2);  // only "a" survives
    REQUIRE(vocab.size() == 1);

    CerrCapture capture;
    const TopicModel model = fit_lda(corpus, vocab, quick_config(1, 1, 1));
    CHECK(model.doc_ids == std::vector<std::string>{"p1"});
    CHECK(model.tokens[0].size() == 2);
    CHECK(capture.text().find("p2") != std::string::npos);
}

TEST_CASE("fitting rejects degenerate configurations") {
    const Corpus corpus = corpus_from({{"p1", "a b"}});
    const Vocabulary vocab = build_vocabulary(corpus, 1);

    CHECK_THROWS_AS(fit_lda(corpus, vocab, quick_config(0, 1, 1)), DataError);
    CHECK_THROWS_AS(fit_lda(corpus, vocab, quick_config(1, 0, 1)), DataError);
    LdaConfig bad_beta = quick_config(1, 1, 1);
    bad_beta.beta = 0.0;
    CHECK_THROWS_AS(fit_lda(corpus, vocab, bad_beta), DataError);
    LdaConfig bad_alpha = quick_config(1, 1, 1);
    bad_alpha.alpha = 0.0;
    CHECK_THROWS_AS(fit_lda(corpus, vocab, bad_alpha), DataError);
    CHECK_THROWS_AS(fit_lda(Corpus{}, vocab, quick_config(1, 1, 1)), DataError);

    // a corpus whose every document dies under the restriction
    const Corpus off_vocab = corpus_from({{"p1", "zz"}, {"p2", "yy"}});
    CHECK_THROWS_AS(fit_lda(off_vocab, vocab, quick_config(1, 1, 1)), DataError);
}

TEST_CASE("negative alpha resolves to fifty over the topic count") {
    const Corpus corpus = corpus_from({{"p1", "a b c d"}});
    const Vocabulary vocab = build_vocabulary(corpus, 1);
    const TopicModel model = fit_lda(corpus, vocab, quick_config(4, 1, 1));
    CHECK(model.alpha == 12.5);
}

TEST_CASE("synthetic blocks are recovered as topics") {
    // five disjoint word blocks; under the best one-to-one topic/block
    // matching at least 90% of the top-8 slots must come from the match
    const int blocks = 5, block_words = 8;
    const Corpus corpus = generate_synthetic_corpus(blocks, 120, 40, block_words, 31);
    const Vocabulary vocab = build_vocabulary(corpus, 1);
    const TopicModel model = fit_lda(corpus, vocab, quick_config(blocks, 150, 13));

    std::vector<std::vector<int>> hits(blocks, std::vector<int>(blocks, 0));
    for (int t = 0; t < blocks; ++t)
        for (const auto& [word, prob] : model.top_words(t, block_words)) {
            const int b = synthetic_word_block(word);
            REQUIRE(b >= 0);
            ++hits[t][b];
        }

    std::vector<int> perm(blocks);
    std::iota(perm.begin(), perm.end(), 0);
    int best = 0;
    do {
        int total = 0;
        for (int t = 0; t < blocks; ++t) total += hits[t][perm[t]];
        best = std::max(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));

    CHECK(best >= static_cast<int>(0.9 * blocks * block_words));
}

TEST_CASE("doc-topic table round-trips through its CSV export") {
    test_support::TempDir tmp("lda_csv");
    const Corpus corpus = corpus_from({{"p1", "a a b"}, {"p2", "b c c"}});
    const Vocabulary vocab = build_vocabulary(corpus, 1);
    const TopicModel model = fit_lda(corpus, vocab, quick_config(2, 5, 8));

    write_doc_topics_csv(model, tmp.file("doc_topics.csv"));
    const std::string text = test_support::read_file(tmp.file("doc_topics.csv"));

    std::istringstream in(text);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "doc_id,topic1,topic2");
    int row = 0;
    while (std::getline(in, line)) {
        std::istringstream cells(line);
        std::string cell;
        std::getline(cells, cell, ',');
        CHECK(cell == model.doc_ids[row]);
        for (int t = 0; t < model.num_topics; ++t) {
            std::getline(cells, cell, ',');
            CHECK(std::stod(cell) ==
                  doctest::Approx(model.theta(row, t)).epsilon(1e-9));
        }
        ++row;
    }
    CHECK(row == 2);
}

}  // TEST_SUITE
