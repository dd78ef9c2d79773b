#include "certilip/reports.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace certilip {
namespace {

using json = nlohmann::ordered_json;

// JSON has no infinity; a zero denominator bound is reported as null.
json finite_or_null(double v) {
    if (std::isfinite(v))
        return v;
    return nullptr;
}

json guarantee_json(const GuaranteeReport& r) {
    json per_target = json::array();
    for (const TargetBoundReport& t : r.per_target) {
        per_target.push_back(json{{"class", t.target},
                                  {"gap", t.gap},
                                  {"bound", t.bound},
                                  {"ratio", finite_or_null(t.ratio)}});
    }
    return json{{"id", r.instance_id},
                {"predicted", r.predicted},
                {"guarantee_radius", r.guarantee_radius},
                {"r_star", r.r_star},
                {"backend", backend_name(r.backend)},
                {"p", norm_name(r.p)},
                {"per_target", per_target}};
}

json attack_json(long long id, const AdversarialSample& s) {
    json trace = json::array();
    for (const MultiplierProbe& probe : s.gap_multiplier_trace)
        trace.push_back(probe.multiplier);
    return json{{"id", id},
                {"p", norm_name(s.p)},
                {"target_class", s.target_class},
                {"achieved_class", s.achieved_class},
                {"norm", s.norm_value},
                {"feasible", s.feasible},
                {"gap_multiplier_trace", trace}};
}

} // namespace

std::string guarantee_to_json(const GuaranteeReport& report) {
    return guarantee_json(report).dump();
}

std::string guarantees_to_jsonl(const std::vector<GuaranteeReport>& reports) {
    std::string out;
    for (const GuaranteeReport& r : reports) {
        out += guarantee_json(r).dump();
        out += '\n';
    }
    return out;
}

std::string attack_to_json(long long instance_id, const AdversarialSample& sample) {
    return attack_json(instance_id, sample).dump();
}

std::string attacks_to_jsonl(const std::vector<AdversarialSample>& samples) {
    std::string out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out += attack_json(static_cast<long long>(i), samples[i]).dump();
        out += '\n';
    }
    return out;
}

std::string train_report_to_json(const TrainReport& report) {
    json j{{"final_objective", report.final_objective},
           {"objective_per_epoch", report.objective_per_epoch},
           {"loss_per_epoch", report.loss_per_epoch},
           {"omega_per_epoch", report.omega_per_epoch},
           {"gradient_norm_at_exit", report.gradient_norm_at_exit},
           {"epochs_run", report.epochs_run},
           {"converged", report.converged},
           {"diverged", report.diverged},
           {"train_error", report.train_error},
           {"test_error", report.test_error},
           {"config", report.config_echo}};
    return j.dump(2) + "\n";
}

std::string resistance_summary_to_json(const ResistanceSummary& s) {
    json j{{"evaluated", s.evaluated},
           {"misclassified", s.misclassified},
           {"flipped", s.flipped},
           {"flip_failures", s.flip_failures},
           {"mean_norm", s.mean},
           {"median_norm", s.median},
           {"q25_norm", s.q25},
           {"q75_norm", s.q75}};
    return j.dump();
}

std::string ratio_summary_to_json(const RatioSummary& s) {
    json entries = json::array();
    for (const RatioEntry& e : s.entries)
        entries.push_back(json{{"id", e.instance},
                               {"local", e.local},
                               {"global", e.global},
                               {"ratio", e.ratio}});
    json j{{"mean_ratio", s.mean_ratio},
           {"evaluated", s.evaluated},
           {"misclassified", s.misclassified},
           {"entries", entries}};
    return j.dump();
}

CertifySummary summarize_guarantees(const std::vector<GuaranteeReport>& reports) {
    CertifySummary s;
    s.instances = static_cast<Eigen::Index>(reports.size());
    if (reports.empty())
        return s;
    double total = 0.0;
    s.min_guarantee = std::numeric_limits<double>::infinity();
    s.max_guarantee = 0.0;
    for (const GuaranteeReport& r : reports) {
        total += r.guarantee_radius;
        s.min_guarantee = std::min(s.min_guarantee, r.guarantee_radius);
        s.max_guarantee = std::max(s.max_guarantee, r.guarantee_radius);
    }
    s.mean_guarantee = total / static_cast<double>(reports.size());
    return s;
}

std::string certify_summary_to_json(const CertifySummary& s) {
    json j{{"instances", s.instances},
           {"mean_guarantee", s.mean_guarantee},
           {"min_guarantee", s.min_guarantee},
           {"max_guarantee", s.max_guarantee}};
    return j.dump();
}

} // namespace certilip
