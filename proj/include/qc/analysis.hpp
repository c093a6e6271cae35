#pragma once
// Expectation and variance of multiplication observables over eigenfunctions, and the
// nilpotent heat-kernel constants.

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "qc/geometry.hpp"

namespace qc {

using Observable = std::function<double(const Vec4<double>&)>;

// <b phi_j, phi_j> for the columns of V, orthonormal in sum_i w_i conj(u_i) v_i; b sampled at the nodes
std::vector<double> matrix_elements(const Eigen::MatrixXcd& V, const std::vector<double>& weights,
                                    const std::vector<double>& b_nodes);

// Matrix elements in eigenvalue order, one entry per eigenfunction (multiplicities expanded).
struct QEElements {
    std::vector<double> lambdas;
    std::vector<double> values;
    double lambda_max = 0;  // the window is complete up to here
    std::size_t size() const { return values.size(); }
};

// Trig torus, separable eigenbasis exp(2 pi i m.x) psi(x3) with psi a rotated Hill eigenfunction.
// Only the (x0,x1,x2)-average of b enters; it is taken on a base_nodes^3 lattice.
QEElements trig_separable_elements(const Observable& b, double lambda_max, int base_nodes = 16,
                                   int x3_modes = 64);

struct RunningAverage {
    std::vector<double> lambda;
    std::vector<double> value;
    std::vector<long long> count;
};
// E_l = (1/N(l)) sum_{l_j <= l} <b phi_j, phi_j>
RunningAverage cesaro_expectation(const QEElements& e, const std::vector<double>& lambda_grid);
// V_l = (1/N(l)) sum_{l_j <= l} |<b phi_j, phi_j> - E|^2
RunningAverage variance(const QEElements& e, const std::vector<double>& lambda_grid, double E_value);
// the last eigenfunction-count window position: average over the whole window
double window_mean(const QEElements& e);

// int b d nu_Popp with nu_Popp the Popp measure normalized to mass 1, on an n^4 lattice
double popp_expectation(const QuasiContactStructure& qc, const Observable& b, int n = 16);

// (1/(4 pi^{3/2})) |2 xi| / sinh |2 xi|
double mehler_diagonal(double xi3);
// (1/2 pi) int mehler_diagonal, by double-exponential quadrature
double mehler_heat_constant();

struct LandauValue {
    double value = 0;
    double tail_bound = 0;
    int terms = 0;
};
// (|xi|/pi) sum_k f(2|xi|(2k+1)); the tail is bounded from the ratio of the last terms,
// TailDominates if it cannot be made small. xi = 0 gives the limit (1/4pi) int_0^inf f.
LandauValue landau_density(const std::function<double(double)>& f, double xi3, double rel_tol = 1e-14,
                           int max_terms = 10'000'000);

}  // namespace qc
