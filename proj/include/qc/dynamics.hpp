#pragma once
// Boundary flow on X x [-1,1], closed characteristics and their period bands.

#include <complex>
#include <functional>
#include <limits>
#include <vector>

#include "qc/geometry.hpp"

namespace qc {

struct BlowupState {
    Vec4<double> x{};
    double Xi0 = 0;
};

struct FlowOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    double a_scale = 1.0;  // multiplies A in the fiber equation; 2 gives the negative control
    long max_steps = 5'000'000;
};

// dx/dt = Xi0 Z(x), dXi0/dt = -A(x)(1 - Xi0^2), integrated in w = log((1+Xi0)/(1-Xi0)).
class ZhatFlow {
public:
    explicit ZhatFlow(PoppData popp, FlowOptions opt = {});
    const PoppData& popp() const { return popp_; }
    const FlowOptions& options() const { return opt_; }

    BlowupState operator()(const BlowupState& s0, double t) const;
    // states at t_i = i t / n, i = 0..n
    std::vector<BlowupState> trajectory(const BlowupState& s0, double t, int n) const;
    // (1/T) int_0^T b(flow(s0,t)) dt
    double birkhoff_average(const std::function<double(const BlowupState&)>& b, const BlowupState& s0,
                            double T) const;
    // divergence of the field against p(x)(1 - Xi0^2) dx dXi0, p the Popp density
    double divergence(const BlowupState& s) const;

private:
    PoppData popp_;
    FlowOptions opt_;
};

BlowupState zhat_flow(const PoppData& popp, const BlowupState& s0, double t);

// Xi0(t) given Xi0(0) and int_0^t A along the trajectory, for dXi0/dt = -A(1 - Xi0^2)
double closed_form_xi(double xi0, double int_A);

// A closed integral curve of Z of period T, sampled at tau_i = i T / n.
struct CharacteristicOrbit {
    double T = 1;
    Vec4<double> start{};
    std::vector<double> A_samples;
    std::vector<double> rho_hat;  // sup normalized to 1
    double invariance_residual = 0;  // max |A| along the orbit
    bool volume_preserving = true;

    // trigonometric interpolation of the samples
    double A(double tau) const;
    double rho(double tau) const;
    double A_integral(double tau) const;  // int_0^tau A

    // Fourier coefficients of the samples, index k + n/2; filled by make_orbit
    std::vector<std::complex<double>> A_modes, rho_modes;
};

// Orbit from explicit samples of A and rho_hat over one period.
CharacteristicOrbit make_orbit(double T, std::vector<double> A_samples, std::vector<double> rho_samples,
                               double tol = 1e-8);
// Integrates Z from x over time T, checks that it closes up modulo the lattice and samples A, rho_hat.
CharacteristicOrbit characteristic_orbit(const PoppData& popp, const Vec4<double>& x, double T, int n = 64,
                                         double tol = 1e-8);
// Closed characteristics supplied with the built-in models.
std::vector<CharacteristicOrbit> model_orbits(const PoppData& popp);

// The flow lifted to one closed orbit: state (tau, Xi0) with tau' = Xi0, Xi0' = -A(tau)(1 - Xi0^2).
struct OrbitState {
    double tau = 0;
    double Xi0 = 0;
};
OrbitState orbit_flow(const CharacteristicOrbit& orbit, const OrbitState& s0, double t, FlowOptions opt = {});

constexpr double kInfinity = std::numeric_limits<double>::infinity();

// smallest s > 0 with int_0^s (1 - rho)/(1 + rho) = T; infinity if rho == 1, T if not volume preserving
double hat_T(const CharacteristicOrbit& orbit);

struct Band {
    double lo = 0, hi = 0;
};
struct PeriodSpectrum {
    std::vector<Band> bands;  // sorted, disjoint, symmetric under negation
    bool contains(double t, double tol = 1e-12) const;
};
struct PeriodPair {
    double T = 1, T_hat = kInfinity;
};
PeriodSpectrum period_spectrum(const std::vector<PeriodPair>& orbits, double T_max);
// smallest n with n T_hat >= (n+1) T, i.e. from which the bands of one orbit overlap; -1 if never
int first_merge_index(const PeriodPair& p, int n_max = 1'000'000);

struct MeasureCheck {
    double max_divergence = 0;
    double max_drift = 0;  // |exp(int div dt) - 1| along the sampled trajectories
    int samples = 0;
};
MeasureCheck measure_invariance_check(const PoppData& popp, int sample_count, double t, double a_scale = 1.0,
                                      unsigned seed = 7);

}  // namespace qc
