#include "semmap/factor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "semmap/errors.hpp"

namespace semmap {

namespace {

// column means and sample standard deviations (n-1)
void column_stats(const WordDocumentMatrix& m, std::vector<double>& mean,
                  std::vector<double>& sd) {
    const std::size_t n = m.num_docs(), p = m.num_words();
    mean.assign(p, 0.0);
    sd.assign(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        double sum = 0.0;
        for (std::size_t d = 0; d < n; ++d) sum += static_cast<double>(m.at(d, j));
        mean[j] = sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t d = 0; d < n; ++d) {
            const double c = static_cast<double>(m.at(d, j)) - mean[j];
            ss += c * c;
        }
        sd[j] = std::sqrt(ss / static_cast<double>(n - 1));
    }
}

double varimax_criterion(const std::vector<std::vector<double>>& a) {
    const std::size_t p = a.size();
    if (p == 0) return 0.0;
    const std::size_t k = a[0].size();
    double v = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        double s2 = 0.0, s4 = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            const double sq = a[i][j] * a[i][j];
            s2 += sq;
            s4 += sq * sq;
        }
        const double dp = static_cast<double>(p);
        v += s4 / dp - (s2 / dp) * (s2 / dp);
    }
    return v;
}

// In-place pairwise varimax; returns the number of full cycles used.
int varimax_rotate(std::vector<std::vector<double>>& a, int max_iterations,
                   double tol) {
    const std::size_t p = a.size();
    if (p == 0) return 0;
    const std::size_t k = a[0].size();
    if (k < 2) return 0;

    double prev = varimax_criterion(a);
    for (int iter = 1; iter <= max_iterations; ++iter) {
        for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t l = j + 1; l < k; ++l) {
                double su = 0.0, sv = 0.0, suu_vv = 0.0, suv = 0.0;
                for (std::size_t i = 0; i < p; ++i) {
                    const double u = a[i][j] * a[i][j] - a[i][l] * a[i][l];
                    const double v = 2.0 * a[i][j] * a[i][l];
                    su += u;
                    sv += v;
                    suu_vv += u * u - v * v;
                    suv += u * v;
                }
                const double dp = static_cast<double>(p);
                const double num = 2.0 * (dp * suv - su * sv);
                const double den = dp * suu_vv - (su * su - sv * sv);
                const double phi = 0.25 * std::atan2(num, den);
                if (std::abs(phi) < 1e-15) continue;
                const double c = std::cos(phi), s = std::sin(phi);
                for (std::size_t i = 0; i < p; ++i) {
                    const double x = a[i][j], y = a[i][l];
                    a[i][j] = c * x + s * y;
                    a[i][l] = -s * x + c * y;
                }
            }
        }
        const double cur = varimax_criterion(a);
        if (cur - prev <= tol * std::max(std::abs(cur), 1.0)) return iter;
        prev = cur;
    }
    warn("varimax rotation did not converge within the iteration limit");
    return max_iterations;
}

}  // namespace

SimilarityMatrix correlation_matrix(const WordDocumentMatrix& m) {
    const std::size_t n = m.num_docs(), p = m.num_words();
    if (n < 2) throw DataError("correlation needs at least two documents");

    std::vector<double> mean, sd;
    column_stats(m, mean, sd);
    for (std::size_t j = 0; j < p; ++j)
        if (sd[j] == 0.0)
            warn("word '" + m.words[j] + "' has constant counts; correlations set to 0");

    SimilarityMatrix r;
    r.words = m.words;
    r.values.assign(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        r.values[i * p + i] = sd[i] > 0.0 ? 1.0 : 0.0;
        for (std::size_t j = i + 1; j < p; ++j) {
            double cov = 0.0;
            for (std::size_t d = 0; d < n; ++d)
                cov += (static_cast<double>(m.at(d, i)) - mean[i]) *
                       (static_cast<double>(m.at(d, j)) - mean[j]);
            cov /= static_cast<double>(n - 1);
            const double denom = sd[i] * sd[j];
            const double v = denom > 0.0 ? cov / denom : 0.0;
            r.values[i * p + j] = v;
            r.values[j * p + i] = v;
        }
    }
    return r;
}

EigenDecomposition jacobi_eigen(const SimilarityMatrix& s, int max_sweeps,
                                double tol) {
    const std::size_t n = s.size();
    std::vector<double> a = s.values;
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

    auto off_diag_max = [&]() {
        double mx = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                mx = std::max(mx, std::abs(a[i * n + j]));
        return mx;
    };

    int sweep = 0;
    while (off_diag_max() > tol) {
        if (++sweep > max_sweeps)
            throw NumericError("eigensolver did not converge within the sweep limit");
        for (std::size_t pp = 0; pp < n; ++pp) {
            for (std::size_t q = pp + 1; q < n; ++q) {
                const double apq = a[pp * n + q];
                if (std::abs(apq) <= tol) continue;
                const double theta = (a[q * n + q] - a[pp * n + pp]) / (2.0 * apq);
                const double t =
                    (theta >= 0.0 ? 1.0 : -1.0) /
                    (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;

                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a[i * n + pp], aiq = a[i * n + q];
                    a[i * n + pp] = c * aip - sn * aiq;
                    a[i * n + q] = sn * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a[pp * n + i], aqi = a[q * n + i];
                    a[pp * n + i] = c * api - sn * aqi;
                    a[q * n + i] = sn * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v[i * n + pp], viq = v[i * n + q];
                    v[i * n + pp] = c * vip - sn * viq;
                    v[i * n + q] = sn * vip + c * viq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return a[x * n + x] > a[y * n + y];
    });

    EigenDecomposition out;
    out.values.reserve(n);
    out.vectors.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t col = order[k];
        out.values.push_back(a[col * n + col]);
        std::vector<double> vec(n);
        for (std::size_t i = 0; i < n; ++i) vec[i] = v[i * n + col];
        out.vectors.push_back(std::move(vec));
    }
    return out;
}

FactorModel pca_varimax(const SimilarityMatrix& correlation,
                        const FactorOptions& opts) {
    const std::size_t p = correlation.size();
    if (opts.num_factors < 1) throw DataError("factor count must be positive");
    if (static_cast<std::size_t>(opts.num_factors) > p)
        throw DataError("more factors requested than words");
    const std::size_t k = static_cast<std::size_t>(opts.num_factors);

    const EigenDecomposition eig = jacobi_eigen(correlation);

    FactorModel model;
    model.words = correlation.words;
    model.eigenvalues.assign(eig.values.begin(), eig.values.begin() + k);
    double retained = 0.0;
    for (double ev : model.eigenvalues) retained += std::max(ev, 0.0);
    model.explained_variance = retained / static_cast<double>(p);

    model.loadings.assign(p, std::vector<double>(k, 0.0));
    for (std::size_t j = 0; j < k; ++j) {
        if (eig.values[j] <= 0.0) {
            warn("retained component has non-positive eigenvalue; loadings set to 0");
            continue;
        }
        const double scale = std::sqrt(eig.values[j]);
        for (std::size_t i = 0; i < p; ++i)
            model.loadings[i][j] = eig.vectors[j][i] * scale;
    }

    std::vector<double> row_norm(p, 1.0);
    if (opts.kaiser_normalize) {
        for (std::size_t i = 0; i < p; ++i) {
            double h = 0.0;
            for (std::size_t j = 0; j < k; ++j)
                h += model.loadings[i][j] * model.loadings[i][j];
            row_norm[i] = std::sqrt(h);
            if (row_norm[i] > 0.0)
                for (std::size_t j = 0; j < k; ++j) model.loadings[i][j] /= row_norm[i];
            else
                row_norm[i] = 1.0;
        }
    }

    model.rotation_iterations = varimax_rotate(
        model.loadings, opts.max_rotation_iterations, opts.rotation_tol);

    if (opts.kaiser_normalize)
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < k; ++j) model.loadings[i][j] *= row_norm[i];

    // flip each column so its largest-magnitude loading is positive
    for (std::size_t j = 0; j < k; ++j) {
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < p; ++i) {
            if (std::abs(model.loadings[i][j]) > best) {
                best = std::abs(model.loadings[i][j]);
                arg = i;
            }
        }
        if (model.loadings[arg][j] < 0.0)
            for (std::size_t i = 0; i < p; ++i) model.loadings[i][j] = -model.loadings[i][j];
    }

    // order factors by descending sum of squared loadings
    std::vector<double> ss(k, 0.0);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < p; ++i)
            ss[j] += model.loadings[i][j] * model.loadings[i][j];
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return ss[x] > ss[y]; });

    std::vector<std::vector<double>> reordered(p, std::vector<double>(k));
    model.ss_loadings.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        model.ss_loadings[j] = ss[order[j]];
        for (std::size_t i = 0; i < p; ++i) reordered[i][j] = model.loadings[i][order[j]];
    }
    model.loadings = std::move(reordered);
    return model;
}

FactorModel pca_varimax(const WordDocumentMatrix& m, const FactorOptions& opts) {
    return pca_varimax(correlation_matrix(m), opts);
}

std::vector<std::vector<double>> factor_scores(const WordDocumentMatrix& m,
                                               const FactorModel& model) {
    const std::size_t n = m.num_docs(), p = m.num_words();
    if (model.words != m.words) throw DataError("factor model does not match matrix");
    const std::size_t k = model.loadings.empty() ? 0 : model.loadings[0].size();

    std::vector<double> mean, sd;
    column_stats(m, mean, sd);

    const SimilarityMatrix r = correlation_matrix(m);
    const EigenDecomposition eig = jacobi_eigen(r);

    // pseudo-inverse of the correlation matrix; small eigenvalues dropped
    const double cutoff = 1e-10 * std::max(eig.values.front(), 0.0);
    std::vector<std::vector<double>> rinv(p, std::vector<double>(p, 0.0));
    for (std::size_t e = 0; e < p; ++e) {
        if (eig.values[e] <= cutoff) continue;
        const double inv = 1.0 / eig.values[e];
        for (std::size_t i = 0; i < p; ++i) {
            const double vi = eig.vectors[e][i] * inv;
            for (std::size_t j = 0; j < p; ++j) rinv[i][j] += vi * eig.vectors[e][j];
        }
    }

    // weights = R+ . loadings (p x k)
    std::vector<std::vector<double>> w(p, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            double sum = 0.0;
            for (std::size_t l = 0; l < p; ++l) sum += rinv[i][l] * model.loadings[l][j];
            w[i][j] = sum;
        }

    std::vector<std::vector<double>> scores(n, std::vector<double>(k, 0.0));
    for (std::size_t d = 0; d < n; ++d)
        for (std::size_t j = 0; j < k; ++j) {
            double sum = 0.0;
            for (std::size_t i = 0; i < p; ++i) {
                if (sd[i] == 0.0) continue;
                const double z = (static_cast<double>(m.at(d, i)) - mean[i]) / sd[i];
                sum += z * w[i][j];
            }
            scores[d][j] = sum;
        }
    return scores;
}

std::vector<int> dominant_factor(const std::vector<std::vector<double>>& scores) {
    if (scores.empty()) throw DataError("no scores to scan");
    std::vector<int> out(scores.size(), 0);
    for (std::size_t d = 0; d < scores.size(); ++d) {
        const auto& row = scores[d];
        if (row.empty()) throw DataError("empty score row");
        std::size_t arg = 0;
        for (std::size_t j = 1; j < row.size(); ++j)
            if (std::abs(row[j]) > std::abs(row[arg])) arg = j;
        out[d] = static_cast<int>(arg);
    }
    return out;
}

void write_loadings_csv(const FactorModel& model, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot write " + file.string());
    const std::size_t k = model.loadings.empty() ? 0 : model.loadings[0].size();
    out << "word";
    for (std::size_t j = 0; j < k; ++j) out << ",factor" << j + 1;
    out << "\n";
    char buf[32];
    for (std::size_t i = 0; i < model.words.size(); ++i) {
        out << model.words[i];
        for (std::size_t j = 0; j < k; ++j) {
            std::snprintf(buf, sizeof(buf), "%.10g", model.loadings[i][j]);
            out << ',' << buf;
        }
        out << "\n";
    }
}

void write_scores_csv(const std::vector<std::string>& doc_ids,
                      const std::vector<std::vector<double>>& scores,
                      const std::filesystem::path& file) {
    if (doc_ids.size() != scores.size())
        throw DataError("score rows do not match document ids");
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot write " + file.string());
    const std::size_t k = scores.empty() ? 0 : scores[0].size();
    out << "doc_id";
    for (std::size_t j = 0; j < k; ++j) out << ",factor" << j + 1;
    out << "\n";
    char buf[32];
    for (std::size_t d = 0; d < doc_ids.size(); ++d) {
        out << doc_ids[d];
        for (std::size_t j = 0; j < k; ++j) {
            std::snprintf(buf, sizeof(buf), "%.10g", scores[d][j]);
            out << ',' << buf;
        }
        out << "\n";
    }
}

}  // namespace semmap
