#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>

#include "fkdisk/analysis.hpp"
#include "fkdisk/continuation.hpp"

using namespace fkdisk;

namespace {

// Five-point finite differences, accurate enough to probe 1e-8 residuals.
template <typename F>
double second_derivative(const F& f, double x, double h) {
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) /
           (12 * h * h);
}

template <typename F>
double first_derivative(const F& f, double x, double h) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

std::shared_ptr<const SolutionField> near_critical_field(const BoundarySpec& spec,
                                                         int n) {
    auto grid = std::make_shared<const PolarGrid>(build_grid(n, spec));
    const ContinuationTrace trace = trace_branch(grid);
    REQUIRE(trace.termination == TraceTermination::FoldProximity);
    REQUIRE(trace.final_field());
    return trace.final_field();
}

}  // namespace

TEST_CASE("classical solution reference values") {
    const ClassicalSolution fold = classical_solution(1.0);
    CHECK(fold.lambda_sq == Catch::Approx(2.0).epsilon(1e-15));
    CHECK(fold.center_value() == Catch::Approx(2.0 * std::log(2.0)).epsilon(1e-14));
    CHECK(fold(1.0) == Catch::Approx(0.0).margin(1e-15));

    const ClassicalSolution small = classical_solution(1e-8);
    CHECK(small.lambda_sq == Catch::Approx(8e-8).epsilon(1e-6));
    CHECK(small.center_value() == Catch::Approx(2e-8).epsilon(1e-6));

    CHECK_THROWS_AS(classical_solution(0.0), std::invalid_argument);
    CHECK_THROWS_AS(classical_solution(-1.0), std::invalid_argument);
}

TEST_CASE("classical profile satisfies the equation to high precision") {
    for (double B : {0.3, 0.5, 1.0, 2.0}) {
        const ClassicalSolution sol = classical_solution(B);
        const auto u = [&](double rho) { return sol(rho); };
        double worst = 0.0;
        for (double rho = 0.05; rho <= 0.95; rho += 0.03) {
            const double res = second_derivative(u, rho, 1e-3) +
                               first_derivative(u, rho, 1e-3) / rho +
                               sol.lambda_sq * std::exp(u(rho));
            worst = std::max(worst, std::fabs(res));
        }
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("branch parameter inverts the lambda relation") {
    for (double lam_sq : {0.1, 0.5, 1.0, 1.7, 1.99}) {
        const double B = classical_branch_parameter(lam_sq);
        CHECK(8.0 * B / ((1.0 + B) * (1.0 + B)) == Catch::Approx(lam_sq).epsilon(1e-12));
        CHECK(B < 1.0);
    }
    CHECK_THROWS_AS(classical_branch_parameter(2.0), std::invalid_argument);
}

TEST_CASE("radial reference solver matches the closed form") {
    const ClassicalSolution sol = classical_solution(0.5);
    const RadialProfile prof = solve_radial(sol.lambda_sq, 0.0, 10000);
    double worst = 0.0;
    for (std::size_t i = 0; i < prof.radius.size(); ++i) {
        worst = std::max(worst, std::fabs(prof.v[i] - sol(prof.radius[i])));
    }
    CHECK(worst < 1e-8);

    // Interpolated evaluation stays close between nodes.
    CHECK(prof.value_at(0.0) == Catch::Approx(sol.center_value()).margin(1e-7));
    CHECK(prof.value_at(0.5) == Catch::Approx(sol(0.5)).margin(1e-7));
    CHECK(prof.value_at(1.0) == Catch::Approx(0.0).margin(1e-7));
}

TEST_CASE("radial solver edge cases") {
    const RadialProfile zero = solve_radial(0.0, 0.0, 256);
    for (double v : zero.v) CHECK(v == 0.0);

    CHECK_THROWS_AS(solve_radial(2.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(solve_radial(2.5, 0.0), std::invalid_argument);

    // Nonzero boundary value shifts the whole profile.
    const RadialProfile shifted = solve_radial(0.0, 0.25, 128);
    for (double v : shifted.v) CHECK(v == Catch::Approx(0.25).margin(1e-12));
}

TEST_CASE("rescaled core profile solves the rescaled problem") {
    // Take the closed-form solution, cut it at rho_star, shift and rescale:
    // the result must satisfy the same equation with the core parameter.
    const double B = 0.8;
    const ClassicalSolution sol = classical_solution(B);
    const double rho_star = 0.6;
    const double u_star = sol(rho_star);
    const double core_sq = core_parameter(sol.lambda_sq, rho_star, u_star);
    const auto v = [&](double R) { return sol(R * rho_star) - u_star; };
    double worst = 0.0;
    for (double R = 0.1; R <= 0.9; R += 0.05) {
        const double res = second_derivative(v, R, 1e-3) +
                           first_derivative(v, R, 1e-3) / R +
                           core_sq * std::exp(v(R));
        worst = std::max(worst, std::fabs(res));
    }
    CHECK(worst < 1e-8);
    CHECK(v(1.0) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("core analysis of an axisymmetric solution spans the disk") {
    const auto grid =
        std::make_shared<const PolarGrid>(build_grid(48, BoundarySpec::full_dirichlet()));
    const NewtonResult result = newton_solve(SolutionField(grid, 0.0), 1.0);
    REQUIRE(result.stats.converged());
    const CoreAnalysis core = analyze_core(result.field);
    REQUIRE(core.ok());
    CHECK(core.rho_index == grid->radial_count() - 1);
    CHECK(core.rho_star == grid->rho(grid->radial_count() - 1));
    CHECK(core.u_star ==
          Catch::Approx(result.field(grid->radial_count() - 1, 0)).margin(1e-12));
    CHECK(core.angular_variation_at_rho_star < 1e-12);
    CHECK(core.lambda_sq_core ==
          Catch::Approx(core_parameter(1.0, core.rho_star, core.u_star)));

    // No-layer limit: thickness is half a wall cell.
    CHECK(boundary_layer_thickness(core) ==
          Catch::Approx(0.5 * grid->cell_width(grid->radial_count() - 1)));
}

TEST_CASE("core analysis reports NoCore for fully rugged fields") {
    const auto grid =
        std::make_shared<const PolarGrid>(build_grid(16, BoundarySpec::full_dirichlet()));
    SolutionField field(grid, 1.0);
    for (int j = 0; j < grid->angular_count(); ++j) {
        for (int i = 0; i < grid->radial_count(); ++i) {
            field(i, j) = std::cos(grid->theta(j));
        }
    }
    const CoreAnalysis core = analyze_core(field);
    CHECK_FALSE(core.ok());
    CHECK_THROWS_AS(boundary_layer_thickness(core), std::invalid_argument);
}

TEST_CASE("wall layer scales with the sector period") {
    // Near-critical fields at fixed alpha: thickness comparable to 2*pi/N and
    // roughly halving as N doubles.
    double previous = 0.0;
    for (int segments : {16, 32, 64}) {
        const auto field =
            near_critical_field(BoundarySpec::periodic(segments, Fraction(1, 4)), 64);
        const CoreAnalysis core = analyze_core(*field);
        REQUIRE(core.ok());
        const double thickness = boundary_layer_thickness(core);
        const double period = two_pi / segments;
        CHECK(thickness / period > 0.1);
        CHECK(thickness / period < 10.0);
        if (previous > 0.0) {
            const double ratio = thickness / previous;
            CHECK(ratio > 0.3);
            CHECK(ratio < 0.8);
        }
        previous = thickness;
    }
}

TEST_CASE("core boundary value decreases with segment count") {
    // Fixed conducting arc per segment (alpha*N constant).
    double previous = std::numeric_limits<double>::infinity();
    for (int segments : {32, 64, 128}) {
        const auto field = near_critical_field(
            BoundarySpec::periodic(segments, Fraction(2, segments)), 64);
        const CoreAnalysis core = analyze_core(*field);
        REQUIRE(core.ok());
        CHECK(core.u_star < previous);
        previous = core.u_star;
    }
}

TEST_CASE("scaling fit recovers synthetic power laws") {
    std::vector<std::pair<double, double>> estimates;
    for (double alpha : {1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256, 1.0 / 512}) {
        estimates.emplace_back(alpha, 2.03 * std::pow(alpha, 0.10));
    }
    const ScalingFit fit = fit_scaling_law(estimates, 32);
    CHECK(fit.S == Catch::Approx(2.03).epsilon(1e-12));
    CHECK(fit.t == Catch::Approx(0.10).epsilon(1e-12));
    CHECK(fit.relative_fit_residual < 1e-13);
    CHECK(fit.alpha_low == Catch::Approx(1.0 / 512));
    CHECK(fit.alpha_high == Catch::Approx(1.0 / 32));
}

TEST_CASE("scaling fit demands a decade of alpha") {
    std::vector<std::pair<double, double>> narrow = {
        {0.25, 1.5}, {0.2, 1.4}, {0.15, 1.3}, {0.125, 1.2}};
    CHECK_THROWS_AS(fit_scaling_law(narrow, 8), std::invalid_argument);
    std::vector<std::pair<double, double>> few = {{0.5, 1.9}, {0.05, 1.2}, {0.01, 1.0}};
    CHECK_THROWS_AS(fit_scaling_law(few, 8), std::invalid_argument);
}

TEST_CASE("physical scaling algebra") {
    PhysicalScaling s;
    s.T0 = 300.0;
    s.E = 1.2e5;
    s.R_gas = 8.314;
    s.kappa = 2.0e-5;
    s.c = 1.2e3;
    s.Q = 4.0e6;
    s.sigma_T0 = 5.0e-3;

    const double l = characteristic_length(s);
    CHECK(l > 0.0);
    CHECK(lambda_from_physical(s, l) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(critical_radius(s, std::sqrt(2.0)) ==
          Catch::Approx(std::sqrt(2.0) * l).epsilon(1e-12));

    // Doubling the rate prefactor shrinks l by sqrt(2), growing lambda.
    PhysicalScaling faster = s;
    faster.sigma_T0 *= 2.0;
    CHECK(lambda_from_physical(faster, 1.0) ==
          Catch::Approx(std::sqrt(2.0) * lambda_from_physical(s, 1.0)).epsilon(1e-12));

    PhysicalScaling bad = s;
    bad.Q = 0.0;
    CHECK_THROWS_AS(characteristic_length(bad), std::invalid_argument);
    CHECK_THROWS_AS(lambda_from_physical(s, -1.0), std::invalid_argument);
}
