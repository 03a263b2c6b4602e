#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "semmap/matrix.hpp"

namespace semmap {

// Dense symmetric matrix of Pearson correlations between word columns.
// Layout matches SimilarityMatrix (row-major, size x size).
SimilarityMatrix correlation_matrix(const WordDocumentMatrix& m);

struct EigenDecomposition {
    std::vector<double> values;                // descending
    std::vector<std::vector<double>> vectors;  // vectors[k] pairs with values[k]
};

// Cyclic Jacobi for symmetric matrices. Converges when every off-diagonal
// magnitude falls below tol; throws NumericError after max_sweeps.
EigenDecomposition jacobi_eigen(const SimilarityMatrix& s, int max_sweeps = 100,
                                double tol = 1e-12);

struct FactorModel {
    std::vector<std::string> words;
    std::vector<std::vector<double>> loadings;  // words x factors, rotated
    std::vector<double> eigenvalues;            // the retained ones, descending
    std::vector<double> ss_loadings;            // per rotated factor
    double explained_variance = 0.0;            // sum of retained eigenvalues / p
    int rotation_iterations = 0;
};

struct FactorOptions {
    int num_factors = 5;
    bool kaiser_normalize = false;  // row-normalize loadings during rotation
    int max_rotation_iterations = 200;
    double rotation_tol = 1e-12;
};

// PCA on a correlation matrix followed by varimax rotation. Columns are
// sign-fixed (largest-magnitude entry positive) and ordered by descending
// sum of squared loadings.
FactorModel pca_varimax(const SimilarityMatrix& correlation,
                        const FactorOptions& opts);
FactorModel pca_varimax(const WordDocumentMatrix& m, const FactorOptions& opts);

// Regression-method scores, docs x factors. Columns of m are standardized
// with the sample deviation (n-1); the correlation inverse comes from its
// eigendecomposition with small eigenvalues dropped.
std::vector<std::vector<double>> factor_scores(const WordDocumentMatrix& m,
                                               const FactorModel& model);

// Per-document index of the factor with the highest |score|; ties go to the
// lowest index.
std::vector<int> dominant_factor(const std::vector<std::vector<double>>& scores);

void write_loadings_csv(const FactorModel& model, const std::filesystem::path& file);
void write_scores_csv(const std::vector<std::string>& doc_ids,
                      const std::vector<std::vector<double>>& scores,
                      const std::filesystem::path& file);

}  // namespace semmap
