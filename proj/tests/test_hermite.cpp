#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "qc/hermite.hpp"

using namespace qc;
namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("hermite function values") {
    CHECK(hermite_function(0, 0) == doctest::Approx(std::pow(kPi, -0.25)).epsilon(1e-15));
    CHECK(hermite_function(1, 0) == 0.0);
    for (int k = 0; k <= 10; ++k)
        for (double u = -4; u <= 4; u += 0.37) CHECK(std::abs(hermite_function(k, u) - hermite_function_direct(k, u)) < 1e-10);
    // high index stays finite (no factorials)
    double v = hermite_function(400, 3.0);
    CHECK(std::isfinite(v));
    CHECK(std::abs(v) < 1);
    CHECK_THROWS_AS(hermite_function(-1, 0), ConfigError);
}

TEST_CASE("truncation rule and grid") {
    HermiteBasis B({.kmax = 20, .M = 512, .n3 = 16});
    double rule = HermiteBasis::truncation_rule(21, 2 * kPi, 2 * kPi * 7);
    CHECK(B.L() == doctest::Approx(rule));
    CHECK(B.x1().front() == doctest::Approx(-B.L()));
    CHECK(B.max_frequency() == 7);
}

TEST_CASE("pure level state maps to its coefficient") {
    HermiteBasis B({.kmax = 8, .M = 256, .n3 = 8});
    const int n = 2, k = 3;
    Field u(B.size4());
    for (int j = 0; j < B.M(); ++j)
        for (int i = 0; i < B.n3(); ++i)
            u[std::size_t(j) * B.n3() + i] = std::polar(1.0, 2 * kPi * n * i / B.n3()) * B.h(k, n, j);
    auto c = B.analysis(u, k);
    for (int i = 0; i < B.n3(); ++i) CHECK(std::abs(c[std::size_t(i)] - std::polar(1.0, 2 * kPi * n * i / B.n3())) < 1e-8);
    auto z = B.analysis(u, k + 1);
    for (auto& x : z) CHECK(std::abs(x) < 1e-8);
    // single-term anisotropic norm
    double xi = 2 * kPi * n;
    CHECK(B.anisotropic_norm(u, 0.5, 1.0) ==
          doctest::Approx(std::sqrt(std::pow(2 * k + 1, -1.0) * std::pow(1 + xi * xi, 1.0))).epsilon(1e-8));
    CHECK(B.anisotropic_norm(u, 0, 0) == doctest::Approx(B.norm4(u)).epsilon(1e-8));
    CHECK(B.anisotropic_norm(u, 1.0, -1.0) >= B.anisotropic_norm(u, 0.5, 0.0));
}

TEST_CASE("identity suite") {
    auto r = verify_hermite({.kmax = 20, .M = 512, .n3 = 16});
    CHECK(r.norm_defect <= 1e-8);
    CHECK(r.orthogonality <= 1e-8);
    CHECK(r.omega_identity <= 1e-6);
    CHECK(r.raising <= 1e-6);
    CHECK(r.lowering <= 1e-6);
    CHECK(r.lowering_ground <= 1e-8);
    CHECK(r.parseval <= 1e-6);
    CHECK(r.analysis_synthesis <= 1e-8);
    CHECK(r.quantize_identity <= 1e-8);
    CHECK(r.quantize_omega <= 1e-6);
    CHECK(r.quantize_symmetry <= 1e-8);
    CHECK(r.rodrigues <= 1e-10);
}

TEST_CASE("landau quantization") {
    HermiteBasis B({.kmax = 6, .M = 192, .n3 = 8, .n0 = 2, .n2 = 2});
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    Field v(B.size3(), 0.0);
    {
        Field c(B.size3(), 0.0);
        for (std::size_t b = 0; b < 4; ++b)
            for (int n = 1; n <= B.max_frequency(); ++n) c[b * B.n3() + n] = cplx(g(rng), g(rng));
        v = B.x3_backward(c, 4);
    }
    // multiplication symbol: H_k^* a^H H_l v = delta_kl m v, projected to positive frequencies
    auto m = [](double x0, double x3) { return 1.0 + 0.25 * std::cos(2 * kPi * x0) + 0.1 * std::sin(2 * kPi * x3); };
    LandauSymbol a = [&](double, double x0, double, double x3, double) { return cplx(m(x0, x3)); };
    for (int k : {0, 3})
        for (int l : {0, 3, 5}) {
            auto out = B.analysis(B.landau_quantize(a, B.synthesis(v, l)), k);
            Field mv(v.size());
            for (std::size_t i = 0; i < v.size(); ++i) {
                int i3 = int(i % B.n3()), i0 = int(i / (B.n3() * 2));
                mv[i] = k == l ? m(i0 / 2.0, double(i3) / B.n3()) * v[i] : 0.0;
            }
            // compare after removing the non-positive frequencies that synthesis cannot carry
            Field want = B.positive_part(mv);
            double d = 0;
            for (std::size_t i = 0; i < v.size(); ++i) d = std::max(d, std::abs(out[i] - want[i]));
            CHECK(d < 1e-8);
        }
    // non-separable symbol
    LandauSymbol bad = [](double om, double, double, double x3, double xi) { return cplx(om * std::cos(2 * kPi * x3) + xi); };
    CHECK_THROWS_AS(B.landau_quantize(bad, B.synthesis(v, 0)), UnsupportedSymbol);
}
