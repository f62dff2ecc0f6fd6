#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mrtcee {

/// One decision point of one subject. `t` is 0-based in memory; files use 1-based indices.
struct DecisionRecord {
    int t = 0;
    int availability = 1;
    int treatment = 0;
    Eigen::VectorXd rand_probs;  // p_t(k | H_t), k = 0..K
    double outcome = 0.0;
    Eigen::VectorXd features;    // aligned with MrtDataset::feature_names
};

struct SubjectTrajectory {
    std::string subject_id;
    std::vector<DecisionRecord> records;
};

/// Complete longitudinal panel: every subject has T records and K + 1
/// randomization probabilities per record. Immutable after construction by
/// the loaders and the simulator.
struct MrtDataset {
    std::vector<SubjectTrajectory> subjects;
    std::vector<std::string> feature_names;
    int T = 0;
    int K = 0;

    int n() const { return static_cast<int>(subjects.size()); }
    std::optional<int> feature_index(std::string_view name) const;
};

struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
    std::string summary() const;
};

/// Checks every structural invariant and the testable part of positivity.
/// Never throws; an empty report means the dataset is analysis-ready.
ValidationReport validate(const MrtDataset& data);

enum class NumeratorKind { match_randomization, empirical_per_t, empirical_pooled, user_supplied };

struct NumeratorPolicy {
    NumeratorKind kind = NumeratorKind::match_randomization;
    Eigen::MatrixXd table;  // T x (K + 1), only for user_supplied

    static NumeratorPolicy parse(std::string_view name);
};

std::string_view to_string(NumeratorKind kind);

inline constexpr double kNumeratorClip = 1e-6;

/// Resolves the numerator probabilities p~_t(k) as a T x (K + 1) table.
/// Every row is clipped to [1e-6, 1 - 1e-6] and renormalized.
Eigen::MatrixXd fit_numerator_probs(const MrtDataset& data, const NumeratorPolicy& policy);

}  // namespace mrtcee
