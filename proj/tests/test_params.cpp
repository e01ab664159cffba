#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "clfree/params.hpp"

using namespace clfree;

TEST_SUITE_BEGIN("params");

TEST_CASE("derive_params desk-scale example n=512 ell=4") {
    const ProcessParams P = derive_params(512, 4, Mode::Simulation, 1.0, 0.1, 1.0);
    CHECK(P.p == doctest::Approx(1.0 / 64).epsilon(1e-12));
    CHECK(P.r == 512);

    // high-precision oracle for u = floor(n p t_max), t_max = (ln n)^{1/3}
    const long double p_ld = powl(512.0L, -2.0L / 3.0L);
    const long double t_ld = powl(logl(512.0L), 1.0L / 3.0L);
    const long double u_ld = floorl(512.0L * p_ld * t_ld);
    CHECK(P.u == static_cast<std::int64_t>(u_ld));
    CHECK(P.u == 14); // frozen from the oracle
    CHECK(P.k == 1);  // floor(14/60) = 0, clamped to the k >= 1 invariant

    const long double m_ld = floorl(512.0L * 512.0L * p_ld * t_ld);
    CHECK(P.m == static_cast<std::int64_t>(m_ld));

    CHECK(P.tau == 160);
    CHECK(P.theta == 12800);
    CHECK(P.gamma == 1.0);
}

TEST_CASE("derive_params domain and constraint errors") {
    CHECK_THROWS_AS(derive_params(100, 3, Mode::Simulation, 1, 1, 1),
                    std::domain_error);
    CHECK_THROWS_AS(derive_params(10, 11, Mode::Simulation, 1, 1, 1),
                    std::domain_error);
    CHECK_THROWS_AS(derive_params(5, 5, Mode::Simulation, 1, 1, 1),
                    std::domain_error);
    CHECK_THROWS_AS(derive_params(100, 4, Mode::Simulation), std::invalid_argument);
    CHECK_THROWS_AS(derive_params(100, 4, Mode::Simulation, -1.0, 0.1, 1.0),
                    std::invalid_argument);
    // analysis-mode constraint: W below ell^2 2^{ell+1}
    CHECK_THROWS_AS(derive_params(100, 4, Mode::Analysis, std::nullopt,
                                  std::nullopt, 100.0),
                    std::invalid_argument);
}

TEST_CASE("analysis mode picks the strict constants") {
    const ProcessParams P = derive_params(1000, 4, Mode::Analysis);
    CHECK(P.W == doctest::Approx(512.0));
    CHECK(P.eps == doctest::Approx(1.0 / (32768.0 * 64.0)));
    // mu maximal subject to 2 W mu^{ell-1} <= eps
    CHECK(2.0 * P.W * std::pow(P.mu, 3.0) == doctest::Approx(P.eps).epsilon(1e-9));
    CHECK(P.gamma >= 180.0);
    CHECK(P.u >= 1);
    CHECK(P.k >= 1);
}

TEST_CASE("eval_q examples") {
    CHECK(eval_q(0, 4) == 1.0);
    CHECK(eval_q(0.5, 4) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(eval_q(1.0, 5) == doctest::Approx(std::exp(-16.0)).epsilon(1e-12));
    CHECK(eval_q(1.0, 5) == doctest::Approx(1.12535e-7).epsilon(1e-5));
    CHECK_THROWS_AS(eval_q(-0.1, 4), std::domain_error);
}

TEST_CASE("eval_f examples") {
    CHECK(eval_f(0, 4, 50) == 1.0);
    CHECK(eval_f(0, 7, 3) == 1.0);
    CHECK(eval_f(1.0, 4, 50) == doctest::Approx(std::exp(100.0)).epsilon(1e-12));
    CHECK(eval_f(0.5, 4, 50) == doctest::Approx(std::exp(31.25)).epsilon(1e-12));
    CHECK_THROWS_AS(eval_f(-1, 4, 50), std::domain_error);
}

TEST_CASE("trajectory bundle examples") {
    const ProcessParams P = derive_params(512, 5, Mode::Simulation, 1.0, 0.1, 1.0);
    SUBCASE("x_0(0) = 1") {
        const TrajectoryBundle b = eval_trajectory_bundle(0.0, 0, P);
        CHECK(b.x_j == 1.0);
        CHECK(b.x_plus_j == 0.0);
    }
    SUBCASE("x_j(0) = 0 for j >= 1, x_plus_j(0) = 0 for j >= 2") {
        for (std::uint32_t j = 1; j + 3 <= P.ell; ++j) {
            const TrajectoryBundle b = eval_trajectory_bundle(0.0, j, P);
            CHECK(b.x_j == 0.0);
            if (j >= 2) CHECK(b.x_plus_j == 0.0);
        }
    }
    SUBCASE("x_2(0.5) = e^{-1}/2 for ell=5") {
        const TrajectoryBundle b = eval_trajectory_bundle(0.5, 2, P);
        CHECK(b.x_j == doctest::Approx(std::exp(-1.0) / 2.0).epsilon(1e-12));
    }
    SUBCASE("S_j = k^2 r^{ell-3} p^j") {
        const TrajectoryBundle b = eval_trajectory_bundle(0.3, 1, P);
        const double want = static_cast<double>(P.k) * P.k *
                            std::pow(static_cast<double>(P.r), 2.0) * P.p;
        CHECK(b.S_j == doctest::Approx(want).epsilon(1e-12));
    }
    SUBCASE("j out of range") {
        CHECK_THROWS_AS(eval_trajectory_bundle(0.1, P.ell - 2, P), std::domain_error);
    }
}

TEST_CASE("derivative recurrences on a dense grid") {
    for (std::uint32_t ell = 4; ell <= 8; ++ell) {
        for (std::uint32_t j = 0; j + 3 <= ell; ++j) {
            for (double t = 0.0; t <= 2.0; t += 0.01) {
                const double gain = eval_x_plus_j(t, j, ell);
                const double loss = eval_x_minus_j(t, j, ell);
                const double deriv = eval_x_prime_j(t, j, ell);
                const double scale =
                    std::max({std::abs(gain) + std::abs(loss),
                              std::abs(eval_x_j(t, j, ell)), 1e-9});
                REQUIRE(std::abs((gain - loss) - deriv) / scale <= 1e-9);

                // x+_j = 2 x_{j-1} / q for j > 0, away from the q-underflow
                const double q = eval_q(t, ell);
                if (j > 0 && q > 1e-280) {
                    const double rec = 2.0 * eval_x_j(t, j - 1, ell) / q;
                    REQUIRE(gain == doctest::Approx(rec).epsilon(1e-9));
                }
            }
        }
    }
}

TEST_CASE("f_j recurrence and monotonicity") {
    const double W = 1.0;
    for (std::uint32_t ell = 4; ell <= 8; ++ell) {
        double prev_q = 2.0;
        for (double t = 0.01; t <= 2.0; t += 0.01) {
            const double q = eval_q(t, ell);
            if (prev_q > 0)
                REQUIRE(q < prev_q); // strictly decreasing while representable
            else
                REQUIRE(q == 0.0);
            prev_q = q;
            for (std::uint32_t j = 1; j + 3 <= ell; ++j) {
                const double fj = eval_f_j(t, j, ell, W);
                const double fj1 = eval_f_j(t, j - 1, ell, W);
                if (fj1 > 1e-280 && fj < 1e280)
                    REQUIRE(fj == doctest::Approx(fj1 / q).epsilon(1e-9));
            }
        }
        // under the strict W, every f_j is nondecreasing: log-derivative >= 0
        const double W_strict = static_cast<double>(ell) * ell *
                               std::pow(2.0, static_cast<double>(ell) + 1);
        for (std::uint32_t j = 0; j + 3 <= ell; ++j)
            for (double t = 0.0; t <= 2.0; t += 0.01)
                REQUIRE(eval_fj_log_deriv(t, j, ell, W_strict) >= 0.0);
    }
}

TEST_CASE("strict-regime envelope inequalities at symbolic large n") {
    // Asserted in exponent space at ln n = 1e12, where 'n large enough'
    // genuinely holds for every ell in range.
    const double L = 1e16;
    for (std::uint32_t ell = 4; ell <= 8; ++ell) {
        const double W = static_cast<double>(ell) * ell *
                         std::pow(2.0, static_cast<double>(ell) + 1);
        const double eps = 1.0 / (32768.0 * ell * ell * ell);
        const double mu = std::pow(eps / (2.0 * W), 1.0 / (ell - 1.0));
        const double t_max = mu * std::pow(L, 1.0 / (ell - 1.0));
        for (int s = 0; s <= 50; ++s) {
            const double t = t_max * s / 50.0;
            const double q_expo = std::pow(2.0 * t, ell - 1.0); // -ln q
            const double f_expo = (std::pow(t, ell - 1.0) + t) * W;
            REQUIRE(q_expo >= 0.0);                    // q <= 1
            REQUIRE(q_expo <= eps / 4.0 * L);          // q >= n^{-eps/4}
            REQUIRE(f_expo >= 0.0);                    // f >= 1
            REQUIRE(f_expo <= eps * L);                // f <= n^eps
            REQUIRE(f_expo - ell * q_expo >= -1e-12);  // f q^ell >= 1
        }
    }
}

TEST_CASE("params serialize to JSON with one key per field") {
    const ProcessParams P = derive_params(100, 4, Mode::Simulation, 0.4, 0.1, 1.0);
    const std::string j = P.to_json();
    for (const char* key :
         {"\"n\"", "\"ell\"", "\"mode\"", "\"w\"", "\"eps\"", "\"mu\"", "\"p\"",
          "\"t_max\"", "\"m\"", "\"u\"", "\"k\"", "\"r\"", "\"delta\"",
          "\"gamma\"", "\"tau\"", "\"theta\"", "\"s_e\"", "\"s_o\"",
          "\"u_sigma\"", "\"lambda_sigma\"", "\"tau_sigma\"", "\"beta_sigma\""})
        CHECK(j.find(key) != std::string::npos);
}

TEST_SUITE_END();
