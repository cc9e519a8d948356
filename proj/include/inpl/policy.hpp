#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "inpl/scoring.hpp"

namespace inpl {

enum class PolicyKind { Confidence, Energy, Soft };

/// How the energy threshold is chosen during training. Fixed uses tau_e as
/// given; LabeledQuantile periodically resets tau_e to the q-quantile of
/// the current model's energies on the labeled set.
enum class EnergyCalibration { Fixed, LabeledQuantile };

struct PolicyConfig {
    PolicyKind kind = PolicyKind::Confidence;
    double tau_c = 0.95;        // confidence threshold; > 1 rejects everything
    double tau_e = -9.5;        // energy threshold (accept when energy < tau_e)
    double temperature = 1.0;   // energy temperature T
    double sharpen_t = 0.5;     // soft-target sharpening temperature
    EnergyCalibration calibration = EnergyCalibration::Fixed;
    double calibration_quantile = 0.9;
    long calibration_interval = 250;

    void validate() const {
        if (!(tau_c > 0.0)) throw std::invalid_argument("policy: tau_c must be positive");
        if (!(temperature > 0.0)) throw std::invalid_argument("policy: T must be positive");
        if (!(sharpen_t > 0.0)) throw std::invalid_argument("policy: sharpen_t must be positive");
        if (!(calibration_quantile >= 0.0 && calibration_quantile <= 1.0))
            throw std::invalid_argument("policy: calibration quantile must be in [0,1]");
        if (calibration_interval < 1) throw std::invalid_argument("policy: calibration interval >= 1");
    }
};

struct PseudoLabelDecision {
    bool accepted = false;
    std::size_t hard_label = 0;       // softmax argmax of the weak view
    std::vector<double> soft_target;  // populated for the soft kind only
    double confidence = 0.0;          // always recorded
    double energy = 0.0;              // always recorded
};

/// Accept/reject one unlabeled sample from its weak-view logits. Both raw
/// scores are kept regardless of kind so diagnostics can compare criteria.
inline PseudoLabelDecision decide(std::span<const double> logits, const PolicyConfig& cfg) {
    cfg.validate();
    Confidence c = softmax_confidence(logits);
    PseudoLabelDecision d;
    d.hard_label = c.label;
    d.confidence = c.max_prob;
    d.energy = energy_score(logits, cfg.temperature);
    switch (cfg.kind) {
        case PolicyKind::Confidence:
            d.accepted = c.max_prob >= cfg.tau_c;
            break;
        case PolicyKind::Energy:
            d.accepted = d.energy < cfg.tau_e;
            break;
        case PolicyKind::Soft:
            d.accepted = c.max_prob >= cfg.tau_c;
            if (d.accepted) d.soft_target = sharpen(c.probs, cfg.sharpen_t);
            break;
    }
    return d;
}

inline std::vector<PseudoLabelDecision> decide_batch(const std::vector<std::vector<double>>& logit_rows,
                                                     const PolicyConfig& cfg) {
    std::vector<PseudoLabelDecision> out;
    out.reserve(logit_rows.size());
    for (const auto& row : logit_rows) out.push_back(decide(row, cfg));
    return out;
}

}  // namespace inpl
