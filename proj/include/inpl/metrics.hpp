#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "inpl/data.hpp"
#include "inpl/policy.hpp"

namespace inpl {

/// Raw pseudo-label tallies plus derived precision/recall. OOD samples
/// never enter recall denominators; when accepted they count as false
/// positives for the predicted class.
struct PseudoLabelPR {
    std::vector<long> accepted_as;       // per predicted class
    std::vector<long> correct_as;        // accepted and truth matches
    std::vector<long> truth_count;       // in-distribution unlabeled per class
    std::vector<std::optional<double>> precision;  // absent when nothing accepted as c
    std::vector<double> recall;
    std::optional<double> micro_precision;
};

inline PseudoLabelPR pseudo_label_pr(const std::vector<PseudoLabelDecision>& decisions,
                                     const std::vector<int>& hidden_truth, int num_classes) {
    if (decisions.size() != hidden_truth.size())
        throw std::invalid_argument("pseudo_label_pr: misaligned arrays");
    std::size_t k = static_cast<std::size_t>(num_classes);
    PseudoLabelPR pr;
    pr.accepted_as.assign(k, 0);
    pr.correct_as.assign(k, 0);
    pr.truth_count.assign(k, 0);
    for (std::size_t i = 0; i < decisions.size(); ++i) {
        int truth = hidden_truth[i];
        if (truth >= 0) pr.truth_count[static_cast<std::size_t>(truth)] += 1;
        if (!decisions[i].accepted) continue;
        std::size_t pred = decisions[i].hard_label;
        if (pred >= k) throw std::invalid_argument("pseudo_label_pr: label out of range");
        pr.accepted_as[pred] += 1;
        if (truth >= 0 && static_cast<std::size_t>(truth) == pred) pr.correct_as[pred] += 1;
    }
    long total_acc = 0, total_correct = 0;
    pr.precision.resize(k);
    pr.recall.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        total_acc += pr.accepted_as[c];
        total_correct += pr.correct_as[c];
        if (pr.accepted_as[c] > 0)
            pr.precision[c] = static_cast<double>(pr.correct_as[c]) / pr.accepted_as[c];
        pr.recall[c] = pr.truth_count[c] > 0
                           ? static_cast<double>(pr.correct_as[c]) / pr.truth_count[c]
                           : 0.0;
    }
    if (total_acc > 0) pr.micro_precision = static_cast<double>(total_correct) / total_acc;
    return pr;
}

/// Head/body/tail partition by labeled-frequency rank (ties by class index).
struct GroupSpec {
    int head = 3;
    int tail = 3;
};

struct GroupPR {
    std::optional<double> head_precision, body_precision, tail_precision;
    double head_recall = 0.0, body_recall = 0.0, tail_recall = 0.0;
};

/// Classes of each group, ordered most-frequent first. Body may be empty.
inline std::vector<std::vector<std::size_t>> group_classes(const std::vector<long>& labeled_counts,
                                                           const GroupSpec& g) {
    std::size_t k = labeled_counts.size();
    if (g.head < 0 || g.tail < 0 || static_cast<std::size_t>(g.head + g.tail) > k)
        throw std::invalid_argument("group_summary: head + tail must not exceed K");
    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) order[i] = i;
    // stable by construction: counts descending, class index ascending on ties
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (labeled_counts[a] != labeled_counts[b]) return labeled_counts[a] > labeled_counts[b];
        return a < b;
    });
    std::vector<std::vector<std::size_t>> groups(3);
    for (std::size_t r = 0; r < k; ++r) {
        if (r < static_cast<std::size_t>(g.head))
            groups[0].push_back(order[r]);
        else if (r >= k - static_cast<std::size_t>(g.tail))
            groups[2].push_back(order[r]);
        else
            groups[1].push_back(order[r]);
    }
    return groups;
}

/// Pools raw counts within each group (micro within group).
inline GroupPR group_summary(const PseudoLabelPR& pr, const std::vector<long>& labeled_counts,
                             const GroupSpec& g) {
    if (labeled_counts.size() != pr.accepted_as.size())
        throw std::invalid_argument("group_summary: class count mismatch");
    auto groups = group_classes(labeled_counts, g);
    GroupPR out;
    auto pool = [&](const std::vector<std::size_t>& cls, std::optional<double>& prec, double& rec) {
        long acc = 0, correct = 0, truth = 0;
        for (std::size_t c : cls) {
            acc += pr.accepted_as[c];
            correct += pr.correct_as[c];
            truth += pr.truth_count[c];
        }
        if (acc > 0) prec = static_cast<double>(correct) / acc;
        rec = truth > 0 ? static_cast<double>(correct) / truth : 0.0;
    };
    pool(groups[0], out.head_precision, out.head_recall);
    pool(groups[1], out.body_precision, out.body_recall);
    pool(groups[2], out.tail_precision, out.tail_recall);
    return out;
}

/// Accepted decisions whose sample is OOD-flagged.
inline long ood_acceptance_count(const std::vector<PseudoLabelDecision>& decisions,
                                 const std::vector<int>& hidden_truth) {
    if (decisions.size() != hidden_truth.size())
        throw std::invalid_argument("ood_acceptance_count: misaligned arrays");
    long n = 0;
    for (std::size_t i = 0; i < decisions.size(); ++i)
        if (decisions[i].accepted && hidden_truth[i] == kOodLabel) ++n;
    return n;
}

}  // namespace inpl
