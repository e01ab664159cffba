#include "clfree/dem_check.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace clfree {

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double simpson_rec(const std::function<double(double)>& fn, double a, double fa,
                   double b, double fb, double fm, double whole, double tol,
                   int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = fn(lm), frm = fn(rm);
    const double left = simpson(a, fa, m, fm, flm);
    const double right = simpson(m, fm, b, fb, frm);
    const double err = left + right - whole;
    if (depth <= 0 || std::abs(err) <= 15.0 * tol)
        return left + right + err / 15.0;
    return simpson_rec(fn, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
           simpson_rec(fn, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& fn, double a, double b,
                        double rel_tol) {
    const double fa = fn(a), fb = fn(b), fm = fn(0.5 * (a + b));
    const double whole = simpson(a, fa, b, fb, fm);
    const double tol = rel_tol * std::max(1.0, std::abs(whole));
    return simpson_rec(fn, a, fa, b, fb, fm, whole, tol, 40);
}

OdeIdentityReport verify_ode_identities(std::uint32_t ell, double grid_step,
                                        double t_end, double W) {
    if (grid_step <= 0 || t_end <= 0)
        throw std::invalid_argument("verify_ode_identities: positive grid required");
    OdeIdentityReport rep;
    // The x_j are O(1)-normalized trajectories; magnitudes below this floor
    // are numerical zeros (also keeps subnormal truncation out of the
    // relative errors deep in the q-decay tail).
    constexpr double kScaleFloor = 1e-9;

    for (std::uint32_t j = 0; j + 3 <= ell; ++j) {
        // integral identity, accumulated panel by panel along the grid
        double integral = 0.0;
        double t_prev = 0.0;
        const auto h_fn = [&](double t) { return eval_h_j(t, j, ell, W); };
        for (double t = 0.0; t <= t_end + 1e-12; t += grid_step) {
            // derivative identity, closed form
            const double gain = eval_x_plus_j(t, j, ell);
            const double loss = eval_x_minus_j(t, j, ell);
            const double deriv = eval_x_prime_j(t, j, ell);
            // residuals are relative to the local trajectory scale; where
            // x_j' degenerates (near t = 0) the size of x_j is the honest
            // yardstick a double-precision difference can meet
            const double scale = std::max({std::abs(gain) + std::abs(loss),
                                           std::abs(eval_x_j(t, j, ell)),
                                           kScaleFloor});
            rep.max_rel_error_closed =
                std::max(rep.max_rel_error_closed,
                         std::abs((gain - loss) - deriv) / scale);

            // derivative identity, central finite difference; the step
            // balances truncation (h^2) against cancellation (eps/h)
            const double h = 5e-7 * std::max(t, 1e-3);
            double fd;
            if (t >= h) {
                fd = (eval_x_j(t + h, j, ell) - eval_x_j(t - h, j, ell)) / (2.0 * h);
            } else { // one-sided second-order difference at the boundary
                fd = (-3.0 * eval_x_j(t, j, ell) + 4.0 * eval_x_j(t + h, j, ell) -
                      eval_x_j(t + 2.0 * h, j, ell)) /
                     (2.0 * h);
            }
            rep.max_rel_error_fd = std::max(
                rep.max_rel_error_fd, std::abs(fd - (gain - loss)) / scale);

            if (t > 0.0) {
                integral += adaptive_simpson(h_fn, t_prev, t, 1e-13);
                const double fj = eval_f_j(t, j, ell, W);
                const double resid = std::abs(fj - 2.0 * integral - 1.0) /
                                     std::max(1.0, std::abs(fj));
                rep.max_rel_error_integral =
                    std::max(rep.max_rel_error_integral, resid);
                t_prev = t;
            }
        }
    }
    return rep;
}

namespace {

const char* quantity_name(TrajectoryQuantity q) {
    switch (q) {
        case TrajectoryQuantity::OpenPairs: return "open_pairs";
        case TrajectoryQuantity::ClosedFamilySize: return "closed_family_size";
        case TrajectoryQuantity::TupleCount: return "tuple_count";
        case TrajectoryQuantity::DegreeMax: return "degree_max";
    }
    return "?";
}

} // namespace

TrajectoryReport trajectory_report(
    const std::vector<std::pair<std::int64_t, double>>& measured,
    TrajectoryQuantity quantity, const ProcessParams& params,
    std::uint32_t tuple_level, bool use_asymptotic_n2, double tuple_scale) {
    if (measured.empty())
        throw std::invalid_argument("trajectory_report: missing measured series");
    TrajectoryReport rep;
    rep.quantity = quantity;
    rep.tuple_level = tuple_level;
    const double n = params.n;
    for (const auto& [i, value] : measured) {
        TrajectoryRow row;
        row.i = i;
        row.t = params.time_of(i);
        row.measured = value;
        const double q = eval_q(row.t, params.ell);
        const double f = eval_f(row.t, params.ell, params.W);
        switch (quantity) {
            case TrajectoryQuantity::OpenPairs: {
                const double pairs = use_asymptotic_n2 ? n * n / 2.0 : n * (n - 1) / 2.0;
                row.predicted = q * pairs;
                row.band_halfwidth = 3.0 * f / params.s_e * q * n * n / 2.0;
                break;
            }
            case TrajectoryQuantity::ClosedFamilySize: {
                row.predicted = (params.ell - 1) *
                                std::pow(2.0 * row.t, params.ell - 2.0) * q / params.p;
                row.band_halfwidth = 7.0 * params.ell * f / params.s_e / params.p;
                break;
            }
            case TrajectoryQuantity::TupleCount: {
                const TrajectoryBundle b =
                    eval_trajectory_bundle(row.t, tuple_level, params);
                row.predicted = b.x_j * b.S_j * tuple_scale;
                row.band_halfwidth = b.f_j / params.s_o * b.S_j * tuple_scale;
                break;
            }
            case TrajectoryQuantity::DegreeMax: {
                row.predicted = 3.0 * n * params.p * params.t_max;
                row.band_halfwidth = 0.0;
                break;
            }
        }
        if (row.band_halfwidth > 0)
            row.normalized_residual =
                (row.measured - row.predicted) / row.band_halfwidth;
        rep.series.push_back(row);
    }
    return rep;
}

std::string TrajectoryReport::to_csv() const {
    std::ostringstream out;
    out.precision(12);
    out << "schema=trajectory.v1 quantity=" << quantity_name(quantity);
    if (quantity == TrajectoryQuantity::TupleCount) out << " level=" << tuple_level;
    out << "\n";
    out << "i,t,measured,predicted,band,resid\n";
    for (const TrajectoryRow& r : series) {
        out << r.i << ',' << r.t << ',' << r.measured << ',' << r.predicted << ','
            << r.band_halfwidth << ',';
        if (r.normalized_residual) out << *r.normalized_residual;
        out << '\n';
    }
    return out.str();
}

} // namespace clfree
