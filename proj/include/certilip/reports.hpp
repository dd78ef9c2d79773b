#pragma once

#include <string>
#include <vector>

#include "certilip/attack.hpp"
#include "certilip/certify.hpp"
#include "certilip/train.hpp"

namespace certilip {

// One JSON object per line. Formatting is deterministic: fixed key order and
// shortest round-trip float representation, so identical runs produce
// byte-identical reports.
std::string guarantee_to_json(const GuaranteeReport& report);
std::string guarantees_to_jsonl(const std::vector<GuaranteeReport>& reports);

std::string attack_to_json(long long instance_id, const AdversarialSample& sample);
std::string attacks_to_jsonl(const std::vector<AdversarialSample>& samples);

// Wall time is intentionally not serialized: reports from identical seeded
// runs must be byte-identical, and timing is logged separately.
std::string train_report_to_json(const TrainReport& report);

std::string resistance_summary_to_json(const ResistanceSummary& summary);
std::string ratio_summary_to_json(const RatioSummary& summary);

struct CertifySummary {
    Eigen::Index instances = 0;
    double mean_guarantee = 0.0;
    double min_guarantee = 0.0;
    double max_guarantee = 0.0;
};
CertifySummary summarize_guarantees(const std::vector<GuaranteeReport>& reports);
std::string certify_summary_to_json(const CertifySummary& summary);

} // namespace certilip
