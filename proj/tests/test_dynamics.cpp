#include <catch2/catch_amalgamated.hpp>

#include "hyplab/dynamics.hpp"

#include <random>

using namespace hyplab;

namespace {

NormalFrame saddle_frame() { return build_normal_form(BlockSpec{{{1.0, 1}}}); }

HamiltonianSystem pure_q(double kappa = 1.0) {
    HamiltonianSystem H;
    H.frame = saddle_frame();
    H.kappa = kappa;
    H.support_radius = 1.0;
    return H;
}

HamiltonianSystem bumped_system() {
    HamiltonianSystem H;
    H.frame = saddle_frame();
    H.kappa = 1.0;
    H.support_radius = 1.0;
    Bump b;
    b.center = Vec::Zero(2);
    b.center << 0.3, 0.3;
    b.radius = 0.35;
    b.amplitude = 0.2;
    b.time_sin = 0.4;
    H.bumps.push_back(b);
    H.validate();
    return H;
}

Vec v2(double p, double q) {
    Vec z(2);
    z << p, q;
    return z;
}

}  // namespace

TEST_CASE("vector field") {
    auto H = pure_q();
    SECTION("saddle at (1,1)") {
        Vec v = vector_field(H, 0.0, v2(1.0, 1.0));
        REQUIRE(v(0) == Catch::Approx(-1.0));
        REQUIRE(v(1) == Catch::Approx(1.0));
    }
    SECTION("equals the linear field outside the support") {
        auto B = bumped_system();
        Vec z = v2(1.2, 0.4);
        REQUIRE(z.norm() > B.support_radius);
        Vec lin = vector_field_matrix(B.frame) * z;
        REQUIRE((vector_field(B, 0.37, z) - lin).norm() == 0.0);
    }
    SECTION("bump-only part at the quadratic equilibrium") {
        HamiltonianSystem B;
        B.frame = saddle_frame();
        B.support_radius = 0.5;
        Bump b;
        b.center = Vec::Zero(2);
        b.radius = 0.4;
        b.amplitude = 0.3;
        B.bumps.push_back(b);
        B.validate();
        Vec z = v2(0.1, 0.05);
        Vec quad = vector_field_matrix(B.frame) * z;
        Vec bump_field = rotate_gradient(b.grad(0.0, z));
        REQUIRE((vector_field(B, 0.0, z) - quad - bump_field).norm() < 1e-15);
        REQUIRE(vector_field(B, 0.0, Vec::Zero(2)).norm() == 0.0);
    }
}

TEST_CASE("linear flow and integrator") {
    auto f = saddle_frame();
    SECTION("exact saddle flow") {
        Mat F = exact_linear_flow(f, 1.0, 0.7);
        Vec z = F * v2(1.0, 1.0);
        REQUIRE(z(0) == Catch::Approx(std::exp(-0.7)).epsilon(1e-12));
        REQUIRE(z(1) == Catch::Approx(std::exp(0.7)).epsilon(1e-12));
    }
    SECTION("operator norm of the scaled flow") {
        for (int k : {1, 2, 5}) {
            const double eps = 0.1;
            Mat F = exact_linear_flow(f, eps * (k - 1), 1.0);
            REQUIRE(opnorm(F) == Catch::Approx(std::exp(eps * (k - 1))).epsilon(1e-12));
        }
    }
    SECTION("midpoint matches the exponential to second order") {
        auto H = pure_q();
        Vec z0 = v2(0.8, -0.3);
        Vec ref = exact_linear_flow(f, 1.0, 1.0) * z0;
        double e1 = (flow(H, 0.0, 1.0, z0, 0.02) - ref).norm();
        double e2 = (flow(H, 0.0, 1.0, z0, 0.01) - ref).norm();
        REQUIRE(e1 / e2 > 3.0);
        REQUIRE(e2 < 1e-4);
    }
    SECTION("energy conservation, quadratic Hamiltonian") {
        auto H = pure_q();
        Vec z = v2(1.0, 1e-3);
        const double q0 = H.frame.q_value(z);
        double t = 0.0;
        for (int leg = 0; leg < 10; ++leg) {
            z = flow(H, t, t + 1.0, z, 1e-2);
            t += 1.0;
            REQUIRE(std::abs(H.frame.q_value(z) - q0) <= 1e-10);
        }
    }
    SECTION("energy drift with a static bump is second order") {
        HamiltonianSystem B = bumped_system();
        B.bumps[0].time_sin = 0.0;  // autonomous
        Vec z0 = v2(0.25, 0.35);
        auto drift = [&](double h) {
            Vec z = flow(B, 0.0, 2.0, z0, h);
            return std::abs(B.value(0.0, z) - B.value(0.0, z0));
        };
        double d1 = drift(4e-3), d2 = drift(2e-3);
        REQUIRE(d1 < 1e-5);
        REQUIRE(d1 / d2 > 2.5);
    }
}

TEST_CASE("linearized flow") {
    auto H = pure_q();
    SECTION("matches the exponential for the linear system") {
        auto out = linearized_flow(H, 0.0, 1.0, v2(0.4, 0.2), 1e-3);
        for (size_t i = 0; i < out.t.size(); i += 200) {
            Mat ref = exact_linear_flow(H.frame, 1.0, out.t[i]);
            REQUIRE((out.M[i] - ref).cwiseAbs().maxCoeff() < 1e-5);
        }
        REQUIRE((out.M.front() - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("samples are symplectic with unit determinant") {
        auto B = bumped_system();
        auto out = linearized_flow(B, 0.0, 1.0, v2(0.2, 0.3), 1e-3);
        for (size_t i = 0; i < out.M.size(); i += 100) {
            REQUIRE(symplectic_defect(out.M[i]) < 1e-8);
            REQUIRE(out.M[i].determinant() == Catch::Approx(1.0).margin(1e-8));
        }
        out.path().validate(1e-8);
    }
}

TEST_CASE("composition and iteration") {
    SECTION("autonomous iterate is k times the Hamiltonian") {
        auto B = bumped_system();
        B.bumps[0].time_sin = 0.0;
        auto Hk = iterate(B.evaluator(), 3, 1e-3);
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-0.6, 0.6);
        for (int i = 0; i < 10; ++i) {
            Vec z = v2(u(rng), u(rng));
            REQUIRE(Hk.value(0.31, z) ==
                    Catch::Approx(3.0 * B.value(0.31, z)).margin(1e-6));
        }
    }
    SECTION("k = 1 is the identity on evaluators") {
        auto B = bumped_system();
        auto H1 = iterate(B.evaluator(), 1);
        Vec z = v2(0.2, -0.1);
        REQUIRE(H1.value(0.4, z) == B.value(0.4, z));
    }
    SECTION("flow of H # H is the squared time-one map") {
        auto B = bumped_system();
        B.bumps[0].amplitude = 0.1;
        auto G = compose_natural(B.evaluator(), B.evaluator(), 5e-4);
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> u(-0.4, 0.4);
        for (int i = 0; i < 2; ++i) {
            Vec z0 = v2(u(rng), u(rng));
            Vec once = flow(B, 0.0, 1.0, z0, 2e-4);
            Vec twice = flow(B, 0.0, 1.0, once, 2e-4);
            Vec composed = flow(G, 0.0, 1.0, z0, 5e-4);
            REQUIRE((composed - twice).norm() < 1e-6);
        }
    }
}

TEST_CASE("loop action") {
    SECTION("constant loop at the origin") {
        LoopSample loop;
        loop.period = 1;
        for (int i = 0; i <= 32; ++i) loop.points.push_back(Vec::Zero(2));
        REQUIRE(action(pure_q(), loop) == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("positively oriented circle under H = 0") {
        const double rho = 0.8;
        TimeHamiltonian zero;
        zero.dim = 2;
        zero.value = [](double, const Vec&) { return 0.0; };
        LoopSample loop;
        loop.period = 1;
        const int N = 4096;
        for (int i = 0; i <= N; ++i) {
            const double th = 2.0 * kPi * i / N;
            loop.points.push_back(v2(rho * std::cos(th), rho * std::sin(th)));
        }
        REQUIRE(action(zero, loop) == Catch::Approx(-kPi * rho * rho).margin(1e-6));
    }
    SECTION("open loop rejected") {
        LoopSample loop;
        loop.period = 1;
        for (int i = 0; i <= 32; ++i) loop.points.push_back(v2(i * 0.01, 0.0));
        REQUIRE_THROWS_AS(action(pure_q(), loop), std::invalid_argument);
    }
    SECTION("iteration homogeneity on a rotation orbit") {
        // H generates a rigid rotation; every circle is a 1-periodic orbit.
        const double w = 2.0 * kPi;
        TimeHamiltonian rot;
        rot.dim = 2;
        rot.value = [w](double, const Vec& z) { return -0.5 * w * z.squaredNorm(); };
        rot.grad = [w](double, const Vec& z) { return Vec(-w * z); };
        rot.hess = [w](double, const Vec& z) {
            return Mat(-w * Mat::Identity(z.size(), z.size()));
        };
        const double rho = 0.5;
        const int N = 2048;
        LoopSample g1;
        g1.period = 1;
        for (int i = 0; i <= N; ++i) {
            // clockwise circle: the flow of a maximum winds positively
            const double th = -w * static_cast<double>(i) / N;
            g1.points.push_back(v2(rho * std::cos(th), rho * std::sin(th)));
        }
        const int k = 3;
        LoopSample gk;
        gk.period = k;
        for (int i = 0; i <= k * N; ++i) {
            const double th = -w * static_cast<double>(i) / N;
            gk.points.push_back(v2(rho * std::cos(th), rho * std::sin(th)));
        }
        const double a1 = action(rot, g1);
        const double ak = action(rot, gk);
        REQUIRE(ak == Catch::Approx(k * a1).margin(1e-6));
    }
}

TEST_CASE("hofer norm") {
    SECTION("constant function") {
        auto one = [](double, const Vec&) { return 1.0; };
        REQUIRE(hofer_norm(one, 2, 1.0, 17).value == Catch::Approx(1.0));
    }
    SECTION("Q on the unit ball") {
        auto f = saddle_frame();
        auto F = [&f](double, const Vec& z) { return f.q_value(z); };
        auto r = hofer_norm(F, 2, 1.0, 33, 4);
        REQUIRE(r.value == Catch::Approx(0.5).margin(1e-8));
    }
    SECTION("autonomous iterate scales the norm by k") {
        HamiltonianSystem B;
        B.frame = saddle_frame();
        B.kappa = 0.2;
        B.support_radius = 0.8;
        Bump b;
        b.center = v2(0.2, 0.2);
        b.radius = 0.3;
        b.amplitude = 0.25;
        B.bumps.push_back(b);
        B.validate();
        auto H1 = B.evaluator();
        auto H2 = iterate(H1, 2, 1e-2);
        auto n1 = hofer_norm(H1, 0.8, 33, 6);
        auto n2 = hofer_norm(H2, 0.8, 33, 6);
        REQUIRE(n2.value == Catch::Approx(2.0 * n1.value).margin(1e-6));
    }
}

TEST_CASE("periodizing a composite generator") {
    auto K = pure_q(0.5).evaluator();
    SECTION("zero correction returns K") {
        TimeHamiltonian zero;
        zero.dim = 2;
        zero.value = [](double, const Vec&) { return 0.0; };
        zero.grad = [](double, const Vec& z) { return Vec(Vec::Zero(z.size())); };
        auto G = periodize(K, zero, TimeRamp::smoothstep());
        Vec z = v2(0.3, 0.4);
        REQUIRE(G.value(0.37, z) == Catch::Approx(K.value(0.0, z)).margin(1e-14));
    }
    SECTION("non-monotone ramp rejected") {
        TimeRamp bad;
        bad.lambda = [](double t) { return t * t * (3 - 2 * t) - 0.3 * std::sin(2 * kPi * t); };
        bad.dlambda = [](double t) {
            return 6 * t * (1 - t) - 0.6 * kPi * std::cos(2 * kPi * t);
        };
        TimeHamiltonian zero;
        zero.dim = 2;
        zero.value = [](double, const Vec&) { return 0.0; };
        REQUIRE_THROWS_AS(periodize(K, zero, bad), std::invalid_argument);
    }
    SECTION("time-one maps agree") {
        HamiltonianSystem B;
        B.frame = saddle_frame();
        B.kappa = 0.5;
        B.support_radius = 0.9;
        Bump b;
        b.center = v2(0.25, 0.25);
        b.radius = 0.3;
        b.amplitude = 0.15;
        b.time_cos = 0.3;
        B.bumps.push_back(b);
        B.validate();
        TimeHamiltonian g;
        g.dim = 2;
        g.value = [b](double t, const Vec& z) { return b.value(t, z); };
        g.grad = [b](double t, const Vec& z) { return b.grad(t, z); };
        g.hess = [b](double t, const Vec& z) { return b.hess(t, z); };
        auto G = periodize(K, g, TimeRamp::smoothstep(), 5e-4);
        TimeHamiltonian sum;
        sum.dim = 2;
        sum.value = [K, g](double t, const Vec& z) { return K.value(t, z) + g.value(t, z); };
        sum.grad = [K, g](double t, const Vec& z) { return Vec(K.grad(t, z) + g.grad(t, z)); };
        sum.hess = [K, b](double t, const Vec& z) {
            Mat h = K.hess(t, z) + b.hess(t, z);
            return h;
        };
        std::mt19937_64 rng(13);
        std::uniform_real_distribution<double> u(-0.5, 0.5);
        for (int i = 0; i < 4; ++i) {
            Vec z0 = v2(u(rng), u(rng));
            Vec a = flow(sum, 0.0, 1.0, z0, 2.5e-4);
            Vec c = flow(G, 0.0, 1.0, z0, 2.5e-4);
            REQUIRE((a - c).norm() < 1e-6);
        }
    }
}
