#pragma once

#include <iosfwd>
#include <vector>

#include "gebsde/ergodic.hpp"
#include "gebsde/model.hpp"

namespace gebsde {

/// Feedback map on grid nodes: one control index per node, nearest-node
/// lookup off the lattice.
struct FeedbackTable {
    std::vector<double> xs;
    std::vector<std::size_t> u_index;

    std::size_t nearest(double x) const;
    void write_csv(std::ostream& os, const ControlSpec& c) const;
    void write_csv_file(const std::string& path, const ControlSpec& c) const;
};

/// Pointwise minimizer of kappa(x, u) + R(u) . Z(x) with Z = sigma^T Dv,
/// ties broken by the lowest index in U.
FeedbackTable optimal_feedback(const ControlSpec& c, const ErgodicSolution& sol,
                               const ModelSpec& m);

struct CostEstimate {
    std::vector<double> horizons;
    std::vector<double> value;    // worst-case accumulated cost at each horizon
    std::vector<double> J;        // value / T
    double extrapolated = 0.0;    // slope over the two largest horizons
    double gap_to_lambda = 0.0;   // extrapolated - lambda_ref (0 when no reference)
};

/// Ergodic cost of a feedback via the Girsanov-shifted lattice, per horizon,
/// with the limsup estimated by the last difference quotient.
CostEstimate evaluate_J(const ModelSpec& m, const ControlSpec& c, const FeedbackTable& fb,
                        double x, const std::vector<double>& T_list, const Grid& lattice,
                        double lambda_ref = 0.0, bool have_lambda = false);

}  // namespace gebsde
