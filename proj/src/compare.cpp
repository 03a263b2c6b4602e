#include "semmap/compare.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "semmap/errors.hpp"
#include "semmap/network.hpp"
#include "semmap/rng.hpp"

namespace semmap {

WordAlignment match_topic_words(
    const std::vector<std::vector<std::string>>& topic_top_words,
    const std::map<std::string, int>& word_clusters, const TopicModel& model) {
    // word -> topics whose list contains it, ascending topic id
    std::map<std::string, std::vector<int>> occurrences;
    for (std::size_t t = 0; t < topic_top_words.size(); ++t)
        for (const auto& w : topic_top_words[t])
            occurrences[w].push_back(static_cast<int>(t));

    std::map<std::string, std::size_t> word_id;
    for (std::size_t w = 0; w < model.words.size(); ++w) word_id[model.words[w]] = w;

    WordAlignment out;
    for (const auto& [word, topics] : occurrences) {
        int chosen = topics.front();
        if (topics.size() > 1) {
            const auto it = word_id.find(word);
            if (it != word_id.end()) {
                double best = -1.0;
                for (int t : topics) {
                    const double p = model.phi(t, static_cast<int>(it->second));
                    if (p > best) {  // strict: ties keep the lowest topic id
                        best = p;
                        chosen = t;
                    }
                }
            }
            out.multi_topic_words.emplace_back(word, chosen);
        }
        const auto cluster = word_clusters.find(word);
        if (cluster == word_clusters.end())
            out.unmatched_topic_words.push_back(word);
        else
            out.matched.push_back({word, chosen, cluster->second});
    }
    if (out.matched.empty())
        throw DataError("no topic words overlap the co-word vocabulary");
    return out;
}

ContingencyTable contingency(const std::vector<int>& labels_a,
                             const std::vector<int>& labels_b) {
    if (labels_a.size() != labels_b.size())
        throw DataError("labelings cover different item counts");
    if (labels_a.empty()) throw DataError("cannot tabulate zero items");

    std::vector<int> rows(labels_a), cols(labels_b);
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());

    auto index_of = [](const std::vector<int>& v, int x) {
        return static_cast<std::size_t>(
            std::lower_bound(v.begin(), v.end(), x) - v.begin());
    };

    ContingencyTable t;
    for (int r : rows) t.row_labels.push_back(std::to_string(r));
    for (int c : cols) t.col_labels.push_back(std::to_string(c));
    t.counts.assign(rows.size(), std::vector<std::int64_t>(cols.size(), 0));
    for (std::size_t i = 0; i < labels_a.size(); ++i)
        ++t.counts[index_of(rows, labels_a[i])][index_of(cols, labels_b[i])];
    t.n = static_cast<std::int64_t>(labels_a.size());
    return t;
}

ContingencyTable contingency(const std::map<std::string, int>& a,
                             const std::map<std::string, int>& b,
                             std::vector<std::string>* dropped) {
    std::vector<int> la, lb;
    for (const auto& [word, label] : a) {
        const auto it = b.find(word);
        if (it == b.end()) {
            if (dropped) dropped->push_back(word);
            continue;
        }
        la.push_back(label);
        lb.push_back(it->second);
    }
    if (dropped)
        for (const auto& [word, label] : b) {
            (void)label;
            if (!a.count(word)) dropped->push_back(word);
        }
    if (la.empty()) throw DataError("the two labelings share no items");
    return contingency(la, lb);
}

namespace {

// Q(a,x) by series for x < a+1, by Lentz continued fraction otherwise.
double gamma_q_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int k = 1; k < 1000; ++k) {
        term *= x / (a + k);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int k = 1; k < 1000; ++k) {
        const double an = -static_cast<double>(k) * (static_cast<double>(k) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double regularized_gamma_q(double a, double x) {
    if (a <= 0.0) throw DataError("gamma shape must be positive");
    if (x < 0.0) throw DataError("gamma argument must be non-negative");
    if (x == 0.0) return 1.0;
    return x < a + 1.0 ? gamma_q_series(a, x) : gamma_q_cf(a, x);
}

AssociationResult chi_square_test(const ContingencyTable& t) {
    if (!t.testable()) throw DataError("table needs at least 2 rows and 2 columns");
    if (t.n < 1) throw DataError("empty table");

    const std::size_t r = t.rows(), c = t.cols();
    std::vector<double> row_sum(r, 0.0), col_sum(c, 0.0);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            row_sum[i] += static_cast<double>(t.counts[i][j]);
            col_sum[j] += static_cast<double>(t.counts[i][j]);
        }
    // zero marginals are unreachable: only observed labels become rows/columns
    for ([[maybe_unused]] double s : row_sum) assert(s > 0.0);
    for ([[maybe_unused]] double s : col_sum) assert(s > 0.0);

    AssociationResult res;
    bool sparse = false;
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            const double e = row_sum[i] * col_sum[j] / static_cast<double>(t.n);
            if (e < 5.0) sparse = true;
            const double d = static_cast<double>(t.counts[i][j]) - e;
            res.chi_square += d * d / e;
        }
    if (sparse)
        warn("expected count below 5 in some cell; chi-square approximation is weak");

    res.df = static_cast<std::int64_t>((r - 1) * (c - 1));
    res.p_value = regularized_gamma_q(static_cast<double>(res.df) / 2.0,
                                      res.chi_square / 2.0);
    return res;
}

double cramers_v(double chi_square, std::int64_t n, std::size_t rows,
                 std::size_t cols) {
    if (n <= 0) throw DataError("Cramer's V needs a positive item count");
    const std::size_t k = std::min(rows, cols);
    if (k < 2) throw DataError("Cramer's V needs at least a 2x2 table");
    const double v = std::sqrt(
        chi_square / (static_cast<double>(n) * static_cast<double>(k - 1)));
    return std::clamp(v, 0.0, 1.0);
}

AssociationResult associate(const ContingencyTable& t) {
    AssociationResult res = chi_square_test(t);
    res.cramers_v = cramers_v(res.chi_square, t.n, t.rows(), t.cols());
    return res;
}

double permutation_p_value(const std::vector<int>& labels_a,
                           const std::vector<int>& labels_b, int samples,
                           std::uint64_t seed) {
    if (samples < 1) throw DataError("need at least one permutation sample");
    const double observed = chi_square_test(contingency(labels_a, labels_b)).chi_square;

    Rng rng(seed);
    std::vector<int> shuffled(labels_b);
    int hits = 0;
    for (int s = 0; s < samples; ++s) {
        for (std::size_t i = shuffled.size() - 1; i > 0; --i) {
            const auto j = rng.next_below(static_cast<uint32_t>(i + 1));
            std::swap(shuffled[i], shuffled[j]);
        }
        const double stat =
            chi_square_test(contingency(labels_a, shuffled)).chi_square;
        if (stat >= observed - 1e-12) ++hits;
    }
    return (1.0 + hits) / (1.0 + samples);
}

std::map<std::string, int> import_partition_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot read " + file.string());

    std::map<std::string, int> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (lineno == 1 && line == "word,cluster") continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
            throw DataError("line " + std::to_string(lineno) +
                            ": expected exactly two fields");
        const std::string word = line.substr(0, comma);
        if (word.empty())
            throw DataError("line " + std::to_string(lineno) + ": empty word");
        int cluster = 0;
        try {
            std::size_t used = 0;
            cluster = std::stoi(line.substr(comma + 1), &used);
            if (used != line.size() - comma - 1) throw std::invalid_argument("trail");
        } catch (const std::exception&) {
            throw DataError("line " + std::to_string(lineno) +
                            ": cluster id is not an integer");
        }
        if (!out.emplace(word, cluster).second)
            throw DataError("duplicate word '" + word + "'");
    }
    if (out.empty()) throw DataError(file.string() + " holds no rows");
    return out;
}

std::map<std::string, int> import_partition_pajek(const std::filesystem::path& net_file,
                                                  const std::filesystem::path& clu_file) {
    const std::vector<std::string> labels = read_pajek_labels(net_file);

    std::ifstream in(clu_file);
    if (!in) throw DataError("cannot read " + clu_file.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("*Vertices", 0) != 0)
        throw DataError(clu_file.string() + " does not start with *Vertices");
    const std::size_t n = std::stoul(line.substr(10));
    if (n != labels.size())
        throw DataError(".clu and .net disagree on the vertex count");

    std::map<std::string, int> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw DataError("truncated .clu file");
        const int cluster = std::stoi(line);
        if (cluster < 1) throw DataError(".clu cluster ids must be 1-based");
        if (!out.emplace(labels[i], cluster - 1).second)
            throw DataError("duplicate word '" + labels[i] + "' in .net");
    }
    return out;
}

AssociationResult document_level_association(const std::vector<int>& doc_topics,
                                             const std::vector<int>& doc_factors) {
    const ContingencyTable t = contingency(doc_topics, doc_factors);
    if (!t.testable())
        throw DataError("document labelings are constant; association untestable");
    return associate(t);
}

}  // namespace semmap
