#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "qc/geometry.hpp"

using namespace qc;
namespace {
constexpr double kPi = std::numbers::pi;

Vec4<double> random_point(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return {u(rng), u(rng), u(rng), u(rng)};
}

double dist(const Vec4<double>& a, const Vec4<double>& b) {
    double r = 0;
    for (int i = 0; i < 4; ++i) r = std::max(r, std::abs(a[i] - b[i]));
    return r;
}
}  // namespace

TEST_CASE("lie bracket of constant-coefficient fields") {
    VectorFieldSpec v([](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        return Vec4<T>{T(0.0), T(1.0), T(0.0), x[2]};
    });
    VectorFieldSpec w([](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        return Vec4<T>{T(0.0), T(0.0), T(1.0), -x[1]};
    });
    std::mt19937_64 rng(1);
    for (int i = 0; i < 10; ++i) {
        auto x = random_point(rng);
        auto b = lie_bracket(v, w, x);
        CHECK(dist(b, {0, 0, 0, -2}) < 1e-14);
        CHECK(dist(lie_bracket(v, v, x), {0, 0, 0, 0}) == 0.0);
    }
}

TEST_CASE("trig torus frame bracket") {
    auto qc = models::trig_torus();
    auto b = lie_bracket(qc.frame_field(2), qc.frame_field(1), {0.3, 0.1, 0.7, 0.0});
    CHECK(dist(b, {0, -2 * kPi, 0, 0}) < 1e-13);
}

TEST_CASE("structure invariants hold for the built-in models") {
    std::mt19937_64 rng(7);
    for (const auto& name : models::names()) {
        CAPTURE(name);
        auto qc = models::by_name(name);
        auto chk = check_structure(qc, 4);
        CHECK(chk.max_a_on_frame < 1e-12);
        CHECK(chk.min_rank_gap > 1e-4);
        for (int i = 0; i < 40; ++i) {
            auto x = random_point(rng);
            auto P = popp_point<double>(qc, x);
            double aR = 0, aZ = 0;
            for (int k = 0; k < 4; ++k) {
                aR += P.a_g[k] * P.R[k];
                aZ += P.a_g[k] * P.Z[k];
            }
            CHECK(std::abs(aR - 1) < 1e-10);
            CHECK(std::abs(aZ) < 1e-10);
            CHECK(std::abs(P.form(P.R, P.b1)) < 1e-10);
            CHECK(std::abs(P.form(P.R, P.b2)) < 1e-10);
            CHECK(P.density > 0);
            auto L = local_frame_at<double>(qc, x);
            CHECK(std::abs(L.zc[0] * L.zc[0] + L.zc[1] * L.zc[1] + L.zc[2] * L.zc[2] - 1) < 1e-12);
        }
    }
}

TEST_CASE("characteristic field of the models") {
    auto heis = models::heisenberg_circle();
    CHECK(dist(characteristic_field(heis, {0.2, 0.4, 0.9, 0.1}), {1, 0, 0, 0}) < 1e-14);
    auto trig = models::trig_torus(1);
    auto trig_neg = models::trig_torus(-1);
    Vec4<double> x{0.1, 0.2, 0.3, 0.4};
    auto z = characteristic_field(trig, x);
    CHECK(std::abs(std::abs(z[0]) - 1) < 1e-14);
    CHECK(dist(characteristic_field(trig_neg, x), {-z[0], -z[1], -z[2], -z[3]}) < 1e-14);
    // at the fixed point of the return map the field is the suspension direction
    auto mt = models::mapping_torus();
    auto zm = characteristic_field(mt, {0.3, 0, 0, 0});
    CHECK(std::abs(std::abs(zm[0]) - 1) < 1e-12);
    CHECK(std::abs(zm[1]) + std::abs(zm[2]) + std::abs(zm[3]) < 1e-12);
}

TEST_CASE("characteristic field does not depend on the frame of E") {
    std::mt19937_64 rng(3);
    for (const auto& name : models::names()) {
        auto qc = models::by_name(name);
        for (double th : {0.3, 1.7, -2.2}) {
            auto rot = qc.rotated_frame(th);
            for (int i = 0; i < 10; ++i) {
                auto x = random_point(rng);
                CHECK(dist(characteristic_field(qc, x), characteristic_field(rot, x)) < 1e-10);
                auto P = popp_point<double>(qc, x), Q = popp_point<double>(rot, x);
                CHECK(std::abs(P.density - Q.density) < 1e-10);
                CHECK(dist(P.R, Q.R) < 1e-9);
                CHECK(std::abs(P.A - Q.A) < 1e-10);
            }
        }
    }
}

TEST_CASE("popp data of the trig torus") {
    auto qc = models::trig_torus();
    auto pd = popp_data(qc);
    std::mt19937_64 rng(11);
    for (int i = 0; i < 20; ++i) {
        auto x = random_point(rng);
        CHECK(std::abs(pd.f(x) - 1 / (2 * kPi)) < 1e-14);
        CHECK(std::abs(pd.popp_density(x) - 1 / (2 * kPi)) < 1e-14);
        CHECK(std::abs(pd.A(x)) < 1e-14);
    }
    CHECK(std::abs(integrate_popp(qc, 4) - 1 / (2 * kPi)) < 1e-10);
    CHECK(std::abs(integrate_popp(qc, 8) - integrate_popp(qc, 4)) < 1e-8);
}

TEST_CASE("popp data of the Heisenberg model") {
    auto qc = models::heisenberg_circle();
    auto pd = popp_data(qc);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
        auto x = random_point(rng);
        CHECK(std::abs(pd.rho_hat(x) - 1) < 1e-14);
        CHECK(std::abs(pd.popp_density(x) - 1) < 1e-13);
    }
    auto rep = invariance_report(qc, 3);
    CHECK(rep.max_lie_popp < 1e-12);
    CHECK(rep.volume_preserving);
    CHECK(std::abs(integrate_popp(qc, 4) - 1) < 1e-12);
}

TEST_CASE("popp volume is intrinsic") {
    auto qc = models::mapping_torus();
    double p = integrate_popp(qc, 8);
    CHECK(std::abs(integrate_popp(qc.rotated_frame(0.9), 8) - p) < 1e-10);
    CHECK(std::abs(integrate_popp(qc.with_orientation(-1), 8) - p) < 1e-12);
    // relabel x1 <-> x2 in the trig torus
    auto trig = models::trig_torus();
    QuasiContactStructure swapped(
        [trig](const auto& x) {
            auto y = x;
            std::swap(y[1], y[2]);
            auto fd = trig.eval(y);
            std::swap(fd.a[1], fd.a[2]);
            for (auto& e : fd.e) std::swap(e[1], e[2]);
            return fd;
        },
        StructureInfo{"swapped"});
    CHECK(std::abs(integrate_popp(swapped, 6) - integrate_popp(trig, 6)) < 1e-12);
}

TEST_CASE("invariance report") {
    auto trig = invariance_report(models::trig_torus(), 4);
    CHECK(trig.volume_preserving);
    CHECK(trig.max_da_RZ <= 1e-10);
    CHECK(trig.max_lie_a_g <= 1e-10);
    CHECK(trig.max_lie_popp <= 1e-10);
    CHECK(trig.max_hamilton_rho <= 1e-10);

    auto mt = invariance_report(models::mapping_torus(), 6);
    CHECK_FALSE(mt.volume_preserving);
    CHECK(mt.max_da_RZ >= 0.1);
    // the four conditions fail together
    CHECK(mt.max_lie_a_g > 1e-3);
    CHECK(mt.max_lie_popp > 1e-3);
    CHECK(mt.max_hamilton_rho > 1e-3);
    // identities that hold for every structure
    for (const auto& r : {trig, mt}) {
        CHECK(r.cartan_residual < 1e-9);
        CHECK(r.transport_residual < 1e-9);
        CHECK(r.max_reeb_residual < 1e-10);
        CHECK(r.max_unit_residual < 1e-12);
    }
}

TEST_CASE("x0-independent data give A = 0") {
    auto heis = popp_data(models::heisenberg_circle());
    auto trig = popp_data(models::trig_torus().rotated_frame(0.4));
    std::mt19937_64 rng(2);
    for (int i = 0; i < 10; ++i) {
        auto x = random_point(rng);
        CHECK(std::abs(heis.A(x)) < 1e-13);
        CHECK(std::abs(trig.A(x)) < 1e-13);
    }
}

TEST_CASE("degenerate structure is rejected") {
    QuasiContactStructure flat(
        [](const auto& x) {
            using T = std::decay_t<decltype(x[0])>;
            T o(0.0), one(1.0);
            FrameData<T> fd;
            fd.a = {o, o, o, one};
            fd.e[0] = {one, o, o, o};
            fd.e[1] = {o, one, o, o};
            fd.e[2] = {o, o, one, o};
            return fd;
        },
        StructureInfo{"flat"});
    CHECK_THROWS_AS(characteristic_field(flat, {0, 0, 0, 0}), DegenerateRank);
    CHECK_THROWS_AS(popp_data(flat), DegenerateRank);
}

TEST_CASE("table model reproduces the analytic trig torus") {
    auto tab = models::sample_to_table(models::trig_torus(), 4);
    CHECK(tab.info().numeric_derivatives);
    std::mt19937_64 rng(9);
    for (int i = 0; i < 5; ++i) {
        auto x = random_point(rng);
        auto P = popp_point<double>(tab, x);
        CHECK(std::abs(P.density - 1 / (2 * kPi)) < 1e-10);
        CHECK(std::abs(P.A) < 1e-10);
    }
}
