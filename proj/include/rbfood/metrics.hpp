#pragma once

#include <vector>

#include "rbfood/tensor.hpp"

namespace rbfood {

struct ScoredSample {
    double score = 0.0;  // higher = more out-of-distribution
    bool label = false;  // true = out-of-distribution (positive)
};

// Probability that a random positive outranks a random negative, ties counted
// one half (rank-sum formulation). Needs at least one of each label.
double auroc(const std::vector<ScoredSample>& samples);

// Sum over positives, in descending score order, of precision at that rank,
// divided by the positive count. Tied groups are ranked together: precision
// is computed after including the whole group. Needs at least one positive.
double average_precision(const std::vector<ScoredSample>& samples);

// FPR at the largest threshold t with TPR(score >= t) >= tpr_target.
double fpr_at_tpr(const std::vector<ScoredSample>& samples, double tpr_target = 0.95);

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels);

}  // namespace rbfood
