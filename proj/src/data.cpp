#include "mrtcee/data.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mrtcee/errors.hpp"

namespace mrtcee {

namespace {

constexpr double kProbSumTol = 1e-8;

std::string where(const SubjectTrajectory& s, std::size_t r) {
    std::ostringstream os;
    os << "subject " << s.subject_id << ", row " << (r + 1);
    return os.str();
}

Eigen::VectorXd clip_and_normalize(Eigen::VectorXd row) {
    row = row.cwiseMax(kNumeratorClip).cwiseMin(1.0 - kNumeratorClip);
    return row / row.sum();
}

}  // namespace

std::optional<int> MrtDataset::feature_index(std::string_view name) const {
    auto it = std::find(feature_names.begin(), feature_names.end(), name);
    if (it == feature_names.end()) {
        return std::nullopt;
    }
    return static_cast<int>(it - feature_names.begin());
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i > 0) os << "; ";
        os << violations[i];
    }
    return os.str();
}

ValidationReport validate(const MrtDataset& data) {
    ValidationReport report;
    auto add = [&](std::string msg) { report.violations.push_back(std::move(msg)); };

    if (data.n() < 1) {
        add("dataset has no subjects");
    }
    if (data.K < 1) {
        add("dimension violation: K must be at least 1");
    }
    const auto n_features = static_cast<Eigen::Index>(data.feature_names.size());
    for (const auto& subject : data.subjects) {
        if (static_cast<int>(subject.records.size()) != data.T) {
            add("ragged panel: subject " + subject.subject_id + " has " +
                std::to_string(subject.records.size()) + " decision points, expected " +
                std::to_string(data.T));
        }
        for (std::size_t r = 0; r < subject.records.size(); ++r) {
            const auto& rec = subject.records[r];
            const std::string loc = where(subject, r);
            if (rec.t != static_cast<int>(r)) {
                add(loc + ": decision points must be consecutive starting at t = 1");
            }
            if (rec.availability != 0 && rec.availability != 1) {
                add(loc + ": availability must be 0 or 1");
            }
            if (rec.treatment < 0 || rec.treatment > data.K) {
                add(loc + ": dimension violation: treatment " + std::to_string(rec.treatment) +
                    " outside 0.." + std::to_string(data.K));
            }
            if (rec.availability == 0 && rec.treatment != 0) {
                add(loc + ": unavailable point carries active treatment");
            }
            if (rec.rand_probs.size() != data.K + 1) {
                add(loc + ": dimension violation: expected " + std::to_string(data.K + 1) +
                    " randomization probabilities");
            } else {
                if (!rec.rand_probs.allFinite() || (rec.rand_probs.array() < 0.0).any()) {
                    add(loc + ": probabilities must be finite and nonnegative");
                } else if (std::abs(rec.rand_probs.sum() - 1.0) > kProbSumTol) {
                    add(loc + ": probabilities do not sum to 1");
                }
                if (rec.availability == 1 && rec.treatment >= 0 && rec.treatment <= data.K &&
                    !(rec.rand_probs(rec.treatment) > 0.0)) {
                    add(loc + ": positivity violation: realized arm " +
                        std::to_string(rec.treatment) + " has zero randomization probability");
                }
            }
            if (!std::isfinite(rec.outcome)) {
                add(loc + ": outcome is missing or non-finite");
            }
            if (rec.features.size() != n_features) {
                add(loc + ": feature columns differ from the dataset header");
            } else if (!rec.features.allFinite()) {
                add(loc + ": non-finite feature value");
            }
        }
    }
    return report;
}

std::string_view to_string(NumeratorKind kind) {
    switch (kind) {
        case NumeratorKind::match_randomization: return "match_randomization";
        case NumeratorKind::empirical_per_t: return "empirical_per_t";
        case NumeratorKind::empirical_pooled: return "empirical_pooled";
        case NumeratorKind::user_supplied: return "user_supplied";
    }
    return "unknown";
}

NumeratorPolicy NumeratorPolicy::parse(std::string_view name) {
    for (auto kind : {NumeratorKind::match_randomization, NumeratorKind::empirical_per_t,
                      NumeratorKind::empirical_pooled, NumeratorKind::user_supplied}) {
        if (name == to_string(kind)) {
            return NumeratorPolicy{kind, {}};
        }
    }
    throw ValidationError("unknown numerator policy '" + std::string(name) +
                          "' (expected match_randomization, empirical_per_t, empirical_pooled or user_supplied)");
}

Eigen::MatrixXd fit_numerator_probs(const MrtDataset& data, const NumeratorPolicy& policy) {
    const int T = data.T;
    const int arms = data.K + 1;
    Eigen::MatrixXd table(T, arms);

    switch (policy.kind) {
        case NumeratorKind::user_supplied: {
            if (policy.table.rows() != T || policy.table.cols() != arms) {
                throw ValidationError("user-supplied numerator table must be T x (K + 1)");
            }
            if (!policy.table.allFinite() || (policy.table.array() <= 0.0).any()) {
                throw ValidationError("user-supplied numerator probabilities must be positive");
            }
            for (int t = 0; t < T; ++t) {
                if (std::abs(policy.table.row(t).sum() - 1.0) > kProbSumTol) {
                    throw ValidationError("user-supplied numerator row " + std::to_string(t + 1) +
                                          " does not sum to 1");
                }
            }
            table = policy.table;
            break;
        }
        case NumeratorKind::match_randomization: {
            // Only available points carry a genuine randomization; unavailable
            // points are used when a decision point is never available.
            for (int t = 0; t < T; ++t) {
                const Eigen::VectorXd* ref = nullptr;
                for (int pass = 0; pass < 2 && ref == nullptr; ++pass) {
                    for (const auto& s : data.subjects) {
                        const auto& rec = s.records[t];
                        if (pass == 1 || rec.availability == 1) {
                            ref = &rec.rand_probs;
                            break;
                        }
                    }
                }
                if (ref == nullptr) {
                    throw ValidationError("match_randomization: dataset has no records");
                }
                for (const auto& s : data.subjects) {
                    const auto& rec = s.records[t];
                    if (rec.availability == 1 && (rec.rand_probs - *ref).cwiseAbs().maxCoeff() > 1e-12) {
                        throw ValidationError(
                            "match_randomization requires randomization probabilities that are "
                            "constant across subjects; they vary at t = " + std::to_string(t + 1));
                    }
                }
                table.row(t) = ref->transpose();
            }
            break;
        }
        case NumeratorKind::empirical_per_t:
        case NumeratorKind::empirical_pooled: {
            Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(T, arms);
            for (const auto& s : data.subjects) {
                for (const auto& rec : s.records) {
                    if (rec.availability == 1) {
                        counts(rec.t, rec.treatment) += 1.0;
                    }
                }
            }
            if (policy.kind == NumeratorKind::empirical_pooled) {
                const Eigen::RowVectorXd pooled = counts.colwise().sum();
                counts.rowwise() = pooled;
            }
            for (int t = 0; t < T; ++t) {
                const double total = counts.row(t).sum();
                if (total <= 0.0) {
                    throw ValidationError("empirical numerator: no available records at t = " +
                                          std::to_string(t + 1));
                }
                for (int k = 0; k < arms; ++k) {
                    if (counts(t, k) == 0.0) {
                        throw ValidationError("degenerate arm: arm " + std::to_string(k) +
                                              " is never observed among available records at t = " +
                                              std::to_string(t + 1));
                    }
                }
                table.row(t) = counts.row(t) / total;
            }
            break;
        }
    }

    for (int t = 0; t < T; ++t) {
        table.row(t) = clip_and_normalize(table.row(t).transpose()).transpose();
    }
    return table;
}

}  // namespace mrtcee
