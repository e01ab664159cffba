// Numeric verification of the trajectory layer: the derivative identity
// x_j' = x_j^+ - x_j^-, the integral identity f_j = 2 int h_j + 1, and
// banded residual reports of measured series against predictions.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "clfree/params.hpp"

namespace clfree {

struct OdeIdentityReport {
    double max_rel_error_closed = 0;     // |(x+ - x-) - x'| / scale
    double max_rel_error_fd = 0;         // central difference branch
    double max_rel_error_integral = 0;   // |f_j - 2 int h_j - 1| / max(1, f_j)
};

// Checks every j in [0, ell-3] over the grid t = 0, step, 2 step, ..., t_end.
// W defaults to the simulation-friendly 1; the identities hold for any W.
OdeIdentityReport verify_ode_identities(std::uint32_t ell, double grid_step,
                                        double t_end, double W = 1.0);

enum class TrajectoryQuantity { OpenPairs, ClosedFamilySize, TupleCount, DegreeMax };

struct TrajectoryRow {
    std::int64_t i = 0;
    double t = 0;
    double measured = 0;
    double predicted = 0;
    double band_halfwidth = 0;
    std::optional<double> normalized_residual; // absent when band = 0
};

struct TrajectoryReport {
    TrajectoryQuantity quantity;
    std::uint32_t tuple_level = 0; // for TupleCount
    std::vector<TrajectoryRow> series;

    std::string to_csv() const; // schema line + i,t,measured,predicted,band,resid
};

// Measured series as (i, value) pairs; predictions/bands from params.
// use_asymptotic_n2: open-pair prediction q(t) n^2/2 instead of q(t) n(n-1)/2.
// tuple_scale: multiplier on the S_j scale for tuple counts -- the ratio of
// the tracked configuration's own tuple-space size |A||B| prod|V_j| to
// k^2 r^{ell-3} (1 for a canonical full configuration).
TrajectoryReport trajectory_report(const std::vector<std::pair<std::int64_t, double>>& measured,
                                   TrajectoryQuantity quantity,
                                   const ProcessParams& params,
                                   std::uint32_t tuple_level = 0,
                                   bool use_asymptotic_n2 = false,
                                   double tuple_scale = 1.0);

// Adaptive Simpson quadrature with per-panel relative refinement.
double adaptive_simpson(const std::function<double(double)>& fn, double a, double b,
                        double rel_tol = 1e-12);

} // namespace clfree
