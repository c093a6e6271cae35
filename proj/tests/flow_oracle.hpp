#pragma once
// Independent reference for the flow on a closed orbit: Fehlberg 7(8) in the plain variables
// (tau, Xi0, int A) with the profile A given analytically, then the closed form in int A.

#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "qc/dynamics.hpp"

namespace oracle {

struct TrigProfile {
    double T = 1, c0 = 0;
    std::vector<double> a, b;  // A(tau) = c0 + sum a_k cos(2 pi k tau/T) + b_k sin(...)
    double operator()(double tau) const {
        double r = c0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            double u = 2 * std::numbers::pi * double(k + 1) * tau / T;
            r += a[k] * std::cos(u) + b[k] * std::sin(u);
        }
        return r;
    }
    qc::CharacteristicOrbit orbit(int n = 32) const {
        std::vector<double> A, rho(n, 1.0);
        for (int i = 0; i < n; ++i) A.push_back((*this)(T * i / n));
        return qc::make_orbit(T, A, rho);
    }
};

inline TrigProfile random_profile(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0), per(0.5, 2.0);
    TrigProfile p;
    p.T = per(rng);
    p.c0 = 0.5 * u(rng);
    int K = 1 + int(rng() % 4);
    for (int k = 0; k < K; ++k) {
        p.a.push_back(0.4 * u(rng) / (k + 1));
        p.b.push_back(0.4 * u(rng) / (k + 1));
    }
    return p;
}

struct Reference {
    double tau, xi, int_A;
};

inline Reference reference_flow(const TrigProfile& A, double tau0, double xi0, double t) {
    namespace ode = boost::numeric::odeint;
    using S = std::array<double, 3>;
    S y{tau0, xi0, 0.0};
    auto sys = [&](const S& v, S& dv, double) {
        double a = A(v[0]);
        dv[0] = v[1];
        dv[1] = -a * (1 - v[1] * v[1]);
        dv[2] = a;
    };
    ode::integrate_adaptive(ode::make_controlled(1e-14, 1e-14, ode::runge_kutta_fehlberg78<S>()), sys, y, 0.0,
                            t, t / 200);
    return {y[0], y[1], y[2]};
}

}  // namespace oracle
