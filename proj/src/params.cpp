#include "clfree/params.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <json.hpp>

namespace clfree {

namespace {

constexpr std::uint32_t kMaxEll = 10; // path depth cap ell-1 <= 9

long double factorial_ld(std::uint32_t x) {
    // exact in integer arithmetic up to ell <= 20, then converted
    unsigned long long f = 1;
    for (std::uint32_t i = 2; i <= x; ++i) f *= i;
    return static_cast<long double>(f);
}

std::int64_t floor_to_i64(long double v) {
    const long double f = std::floor(v);
    if (f >= static_cast<long double>(std::numeric_limits<std::int64_t>::max()))
        return std::numeric_limits<std::int64_t>::max();
    if (f <= 0) return 0;
    return static_cast<std::int64_t>(f);
}

} // namespace

ProcessParams derive_params(std::uint32_t n, std::uint32_t ell, Mode mode,
                            std::optional<double> mu_hat,
                            std::optional<double> eps_hat,
                            std::optional<double> W_hat) {
    if (ell < 4) throw std::domain_error("derive_params: ell >= 4 required");
    if (ell > kMaxEll) throw std::domain_error("derive_params: ell <= 10 supported");
    if (n <= ell) throw std::domain_error("derive_params: n > ell required");

    ProcessParams P;
    P.n = n;
    P.ell = ell;
    P.mode = mode;

    const double elld = ell;
    P.delta = 1.0 / (3600.0 * static_cast<double>(factorial_ld(ell)) * std::pow(elld, elld));

    if (mode == Mode::Simulation) {
        if (!mu_hat || !eps_hat || !W_hat)
            throw std::invalid_argument(
                "derive_params: SimulationMode needs mu_hat, eps_hat, W_hat");
        if (*mu_hat <= 0) throw std::invalid_argument("derive_params: mu_hat > 0 required");
        if (*eps_hat <= 0) throw std::invalid_argument("derive_params: eps_hat > 0 required");
        if (*W_hat <= 0) throw std::invalid_argument("derive_params: W_hat > 0 required");
        P.mu = *mu_hat;
        P.eps = *eps_hat;
        P.W = *W_hat;
        P.gamma = 1.0; // decoupled from the union-bound constant
    } else {
        P.W = W_hat ? *W_hat : elld * elld * std::pow(2.0, elld + 1);
        P.eps = eps_hat ? *eps_hat : 1.0 / (32768.0 * elld * elld * elld);
        // mu maximal subject to 2 W mu^{ell-1} <= eps
        P.mu = mu_hat ? *mu_hat : std::pow(P.eps / (2.0 * P.W), 1.0 / (elld - 1.0));
        if (P.W < elld * elld * std::pow(2.0, elld + 1))
            throw std::invalid_argument("derive_params: W >= ell^2 2^{ell+1} violated");
        if (P.eps > 1.0 / (32768.0 * elld * elld * elld))
            throw std::invalid_argument("derive_params: eps <= 1/(2^15 ell^3) violated");
        if (2.0 * P.W * std::pow(P.mu, elld - 1.0) > P.eps * (1.0 + 1e-12))
            throw std::invalid_argument("derive_params: 2 W mu^{ell-1} <= eps violated");
        P.gamma = std::max(std::pow(3.0, elld + 1.0) / (P.delta * std::pow(P.mu, elld - 1.0)),
                           180.0);
    }

    const double nd = n;
    P.p = std::pow(nd, -1.0 + 1.0 / (elld - 1.0));
    P.t_max = P.mu * std::pow(std::log(nd), 1.0 / (elld - 1.0));
    P.s_e = std::pow(nd, 1.0 / (2.0 * elld) - P.eps);
    P.s_o = std::pow(nd, 2.0 * P.eps);

    const long double npt = static_cast<long double>(nd) * P.p * P.t_max;
    P.m = floor_to_i64(static_cast<long double>(nd) * npt);
    P.u = floor_to_i64(static_cast<long double>(P.gamma) * npt);
    P.k = std::max<std::int64_t>(1, P.u / 60);
    P.r = static_cast<std::int64_t>(n / (ell - 3));
    P.saturated = (P.m == std::numeric_limits<std::int64_t>::max() ||
                   P.u == std::numeric_limits<std::int64_t>::max());

    P.tau = 40 * static_cast<std::int64_t>(ell);
    P.theta = 20 * static_cast<std::int64_t>(ell) * P.tau;

    P.u_sigma = static_cast<double>(P.k) * std::pow(nd, 15.0 * elld * P.eps);
    P.lambda_sigma = std::pow(nd, P.eps);
    P.tau_sigma = P.lambda_sigma;
    P.beta_sigma = 1.0;

    if (!(P.p > 0 && P.p < 1))
        throw std::invalid_argument("derive_params: 0 < p < 1 violated");
    if (P.r < 1) throw std::invalid_argument("derive_params: r >= 1 violated");
    return P;
}

double eval_q(double t, std::uint32_t ell) {
    if (t < 0) throw std::domain_error("eval_q: t >= 0 required");
    return std::exp(-std::pow(2.0 * t, static_cast<double>(ell - 1)));
}

double eval_f(double t, std::uint32_t ell, double W) {
    if (t < 0) throw std::domain_error("eval_f: t >= 0 required");
    return std::exp((std::pow(t, static_cast<double>(ell - 1)) + t) * W);
}

namespace {

// Shared scheme for x_j and friends: every term carries the factor
// E = exp(-(ell-2-j)(2t)^{ell-1}) = q^{ell-2-j}. Computing E once keeps the
// derivative identity exact to rounding; exponents below -690 are flushed to
// an exact zero so that x, x', x+ and x- vanish together.
struct XParts {
    double E;       // q(t)^{ell-2-j}
    double tt;      // 2t
    double jfact;   // j!
};

XParts x_parts(double t, std::uint32_t j, std::uint32_t ell) {
    if (t < 0) throw std::domain_error("trajectory: t >= 0 required");
    if (j > ell - 3) throw std::domain_error("trajectory: j in [0, ell-3] required");
    const double tt = 2.0 * t;
    const double expo = -static_cast<double>(ell - 2 - j) *
                        std::pow(tt, static_cast<double>(ell - 1));
    XParts p;
    p.E = (expo < -690.0) ? 0.0 : std::exp(expo);
    p.tt = tt;
    p.jfact = static_cast<double>(factorial_ld(j));
    return p;
}

double ipow(double b, std::uint32_t e) {
    double r = 1.0;
    while (e) {
        if (e & 1) r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

} // namespace

double eval_x_j(double t, std::uint32_t j, std::uint32_t ell) {
    const XParts p = x_parts(t, j, ell);
    return ipow(p.tt, j) * p.E / p.jfact;
}

double eval_x_plus_j(double t, std::uint32_t j, std::uint32_t ell) {
    const XParts p = x_parts(t, j, ell);
    if (j == 0) return 0.0;
    return 2.0 * j / p.jfact * ipow(p.tt, j - 1) * p.E;
}

double eval_x_minus_j(double t, std::uint32_t j, std::uint32_t ell) {
    const XParts p = x_parts(t, j, ell);
    return 2.0 * (ell - 2 - j) * (ell - 1) * ipow(p.tt, ell - 2) *
           (ipow(p.tt, j) * p.E / p.jfact);
}

double eval_x_prime_j(double t, std::uint32_t j, std::uint32_t ell) {
    const XParts p = x_parts(t, j, ell);
    const double gain = (j == 0) ? 0.0 : 2.0 * j * ipow(p.tt, j - 1);
    const double loss =
        2.0 * (ell - 2 - j) * (ell - 1) * ipow(p.tt, ell - 2 + j);
    return (gain - loss) * p.E / p.jfact;
}

double eval_f_j(double t, std::uint32_t j, std::uint32_t ell, double W) {
    if (j > ell - 3) throw std::domain_error("trajectory: j in [0, ell-3] required");
    const double iota = static_cast<double>(ell - 3 - j);
    const double expo = (std::pow(t, static_cast<double>(ell - 1)) + t) * W -
                        iota * std::pow(2.0 * t, static_cast<double>(ell - 1));
    return std::exp(expo);
}

double eval_fj_log_deriv(double t, std::uint32_t j, std::uint32_t ell, double W) {
    if (j > ell - 3) throw std::domain_error("trajectory: j in [0, ell-3] required");
    const double iota = static_cast<double>(ell - 3 - j);
    return ((ell - 1) * std::pow(t, static_cast<double>(ell - 2)) + 1.0) * W -
           iota * 2.0 * (ell - 1) * std::pow(2.0 * t, static_cast<double>(ell - 2));
}

double eval_h_j(double t, std::uint32_t j, std::uint32_t ell, double W) {
    return 0.5 * eval_f_j(t, j, ell, W) * eval_fj_log_deriv(t, j, ell, W);
}

TrajectoryBundle eval_trajectory_bundle(double t, std::uint32_t j,
                                        const ProcessParams& params) {
    TrajectoryBundle b;
    b.x_j = eval_x_j(t, j, params.ell);
    b.x_plus_j = eval_x_plus_j(t, j, params.ell);
    b.x_minus_j = eval_x_minus_j(t, j, params.ell);
    b.x_prime_j = eval_x_prime_j(t, j, params.ell);
    b.f_j = eval_f_j(t, j, params.ell, params.W);
    b.h_j = eval_h_j(t, j, params.ell, params.W);
    b.S_j = static_cast<double>(params.k) * static_cast<double>(params.k) *
            std::pow(static_cast<double>(params.r),
                     static_cast<double>(params.ell - 3)) *
            std::pow(params.p, static_cast<double>(j));
    return b;
}

std::string ProcessParams::to_json() const {
    nlohmann::json j;
    j["n"] = n;
    j["ell"] = ell;
    j["mode"] = (mode == Mode::Analysis) ? "analysis" : "simulation";
    j["w"] = W;
    j["eps"] = eps;
    j["mu"] = mu;
    j["gamma"] = gamma;
    j["delta"] = delta;
    j["p"] = p;
    j["t_max"] = t_max;
    j["s_e"] = s_e;
    j["s_o"] = s_o;
    j["m"] = m;
    j["u"] = u;
    j["k"] = k;
    j["r"] = r;
    j["tau"] = tau;
    j["theta"] = theta;
    j["u_sigma"] = u_sigma;
    j["lambda_sigma"] = lambda_sigma;
    j["tau_sigma"] = tau_sigma;
    j["beta_sigma"] = beta_sigma;
    return j.dump();
}

} // namespace clfree
