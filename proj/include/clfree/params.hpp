// Process constants and the scalar trajectory functions.
//
// Everything downstream is driven by a ProcessParams: the edge-density scale
// p = n^{-1+1/(ell-1)}, the time horizon t_max = mu (ln n)^{1/(ell-1)}, the
// step budget m = floor(n^2 p t_max), and the derived set sizes u, k, r used
// by the configuration machinery. Two modes:
//
//  * AnalysisMode enforces W >= ell^2 2^{ell+1}, eps <= 1/(2^15 ell^3) and
//    2 W mu^{ell-1} <= eps, with mu chosen maximal. The constants are only
//    useful for identity checks; u, k, m are astronomically large there.
//  * SimulationMode takes mu_hat, eps_hat, W_hat verbatim (positivity only)
//    so that the derived sizes are nontrivial at desk scale.
#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace clfree {

enum class Mode { Analysis, Simulation };

struct ProcessParams {
    std::uint32_t n = 0;
    std::uint32_t ell = 0;
    Mode mode = Mode::Simulation;

    double W = 0;
    double eps = 0;
    double mu = 0;
    double gamma = 0;
    double delta = 0;

    double p = 0;       // n^{-1+1/(ell-1)}
    double t_max = 0;   // mu (ln n)^{1/(ell-1)}
    double s_e = 0;     // n^{1/(2 ell) - eps}
    double s_o = 0;     // n^{2 eps}

    std::int64_t m = 0; // floor(n^2 p t_max)
    std::int64_t u = 0; // floor(gamma n p t_max)
    std::int64_t k = 0; // max(1, floor(u/60))
    std::int64_t r = 0; // floor(n/(ell-3))

    std::int64_t tau = 0;   // 40 ell
    std::int64_t theta = 0; // 20 ell tau = 800 ell^2

    // Side parameters of the concentration machinery.
    double u_sigma = 0;      // k n^{15 ell eps}
    double lambda_sigma = 0; // n^eps
    double tau_sigma = 0;    // n^eps
    double beta_sigma = 1;

    bool saturated = false; // m/u/k clamped at int64 max (AnalysisMode)

    // Step counter -> rescaled time t = i / (n^2 p).
    double time_of(std::int64_t i) const {
        return static_cast<double>(i) / (static_cast<double>(n) * n * p);
    }

    std::string to_json() const;
};

ProcessParams derive_params(std::uint32_t n, std::uint32_t ell, Mode mode,
                            std::optional<double> mu_hat = std::nullopt,
                            std::optional<double> eps_hat = std::nullopt,
                            std::optional<double> W_hat = std::nullopt);

// q(t) = exp(-(2t)^{ell-1}); strictly decreasing, q(0) = 1.
double eval_q(double t, std::uint32_t ell);

// f(t) = exp((t^{ell-1} + t) W); nondecreasing, f(0) = 1.
double eval_f(double t, std::uint32_t ell, double W);

// One trajectory row: x_j and its one-step gain/loss rates, the error
// envelope f_j with h_j = f_j'/2, and the scale S_j = k^2 r^{ell-3} p^j.
struct TrajectoryBundle {
    double x_j = 0;
    double x_plus_j = 0;
    double x_minus_j = 0;
    double x_prime_j = 0; // closed-form derivative of x_j
    double f_j = 0;
    double h_j = 0;
    double S_j = 0;
};

TrajectoryBundle eval_trajectory_bundle(double t, std::uint32_t j,
                                        const ProcessParams& params);

// The same functions with (ell, W) given directly; used by the identity
// checks, which quantify over ell without a full parameter set.
double eval_x_j(double t, std::uint32_t j, std::uint32_t ell);
double eval_x_plus_j(double t, std::uint32_t j, std::uint32_t ell);
double eval_x_minus_j(double t, std::uint32_t j, std::uint32_t ell);
double eval_x_prime_j(double t, std::uint32_t j, std::uint32_t ell);
double eval_f_j(double t, std::uint32_t j, std::uint32_t ell, double W);
double eval_h_j(double t, std::uint32_t j, std::uint32_t ell, double W);

// Log-derivative of f_j; h_j = f_j * flog_deriv / 2. Finite even where f_j
// itself overflows, which is what the monotonicity checks need.
double eval_fj_log_deriv(double t, std::uint32_t j, std::uint32_t ell, double W);

} // namespace clfree
