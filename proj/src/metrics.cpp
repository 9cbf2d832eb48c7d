#include "rbfood/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "rbfood/errors.hpp"

namespace rbfood {

namespace {

void check_scores(const std::vector<ScoredSample>& samples, bool need_negative,
                  const char* who) {
    long pos = 0, neg = 0;
    for (const auto& s : samples) {
        if (!std::isfinite(s.score))
            throw ValueError(std::string(who) + ": non-finite score");
        (s.label ? pos : neg) += 1;
    }
    if (pos == 0) throw ValueError(std::string(who) + ": no positive samples");
    if (need_negative && neg == 0) throw ValueError(std::string(who) + ": no negative samples");
}

std::vector<ScoredSample> sorted_descending(std::vector<ScoredSample> samples) {
    std::stable_sort(samples.begin(), samples.end(),
                     [](const ScoredSample& a, const ScoredSample& b) {
                         return a.score > b.score;
                     });
    return samples;
}

}  // namespace

double auroc(const std::vector<ScoredSample>& samples) {
    check_scores(samples, /*need_negative=*/true, "auroc");
    std::vector<ScoredSample> sorted = samples;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const ScoredSample& a, const ScoredSample& b) {
                         return a.score < b.score;
                     });
    const std::size_t n = sorted.size();
    double pos_rank_sum = 0.0;
    long pos = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && sorted[j].score == sorted[i].score) ++j;
        const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t t = i; t < j; ++t) {
            if (sorted[t].label) {
                pos_rank_sum += midrank;
                ++pos;
            }
        }
        i = j;
    }
    const long neg = static_cast<long>(n) - pos;
    return (pos_rank_sum - 0.5 * pos * (pos + 1.0)) / (static_cast<double>(pos) * neg);
}

double average_precision(const std::vector<ScoredSample>& samples) {
    check_scores(samples, /*need_negative=*/false, "average_precision");
    const std::vector<ScoredSample> sorted = sorted_descending(samples);
    const std::size_t n = sorted.size();
    long tp = 0, seen = 0, total_pos = 0;
    for (const auto& s : sorted) total_pos += s.label ? 1 : 0;
    double sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        long group_pos = 0;
        while (j < n && sorted[j].score == sorted[i].score) {
            group_pos += sorted[j].label ? 1 : 0;
            ++j;
        }
        tp += group_pos;
        seen += static_cast<long>(j - i);
        const double precision = static_cast<double>(tp) / static_cast<double>(seen);
        sum += precision * group_pos;
        i = j;
    }
    return sum / static_cast<double>(total_pos);
}

double fpr_at_tpr(const std::vector<ScoredSample>& samples, double tpr_target) {
    check_scores(samples, /*need_negative=*/true, "fpr_at_tpr");
    if (tpr_target <= 0.0 || tpr_target > 1.0)
        throw ValueError("fpr_at_tpr: tpr_target must be in (0,1]");
    const std::vector<ScoredSample> sorted = sorted_descending(samples);
    long total_pos = 0, total_neg = 0;
    for (const auto& s : sorted) (s.label ? total_pos : total_neg) += 1;
    // Walking thresholds from high to low, the first (largest) t reaching the
    // target TPR wins. Candidate thresholds are the distinct scores.
    long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j].score == sorted[i].score) {
            (sorted[j].label ? tp : fp) += 1;
            ++j;
        }
        const double tpr = static_cast<double>(tp) / total_pos;
        if (tpr >= tpr_target) return static_cast<double>(fp) / total_neg;
        i = j;
    }
    return 1.0;  // unreachable: tpr hits 1 at the smallest score
}

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.size() != labels.size())
        throw ShapeError("accuracy: " + std::to_string(predictions.size()) +
                         " predictions vs " + std::to_string(labels.size()) + " labels");
    if (predictions.empty()) throw ValueError("accuracy: empty input");
    long hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        hits += predictions[i] == labels[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

}  // namespace rbfood
