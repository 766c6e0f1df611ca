#pragma once

#include <optional>
#include <string>
#include <vector>

namespace regionplan {

/// t(r) and, when the region holds a result operator, t(r(d)).
struct CostEstimate {
    std::string region;
    double t_full = 0.0;
    std::optional<double> t_first;
};

struct ChoiceEvaluation {
    std::size_t index = 0;
    std::vector<std::string> cut;
    /// Estimated first-response time with this choice; empty when the policy
    /// does not estimate time or no result tuple is ever produced.
    std::optional<double> tau_c;
    /// Time spent in regions the choice does not create.
    std::optional<double> t_other;
    /// Which branch of the estimate applied: the result operator was inside
    /// the region being split.
    bool result_in_split_region = false;
    /// Tuples written by the choice's mat-writers, from cardinality propagation.
    double materialized_tuples = 0.0;
    std::vector<CostEstimate> breakdown;
};

} // namespace regionplan
