#pragma once
// Hermite transform and Landau-level quantization on a discretized (x0,x1,x2,x3) model.
// x0, x2, x3 are periodic on [0,1); x1 lives on [-L, L) with M nodes.

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "qc/errors.hpp"

namespace qc {

using cplx = std::complex<double>;

// L2-normalized Hermite functions through the three-term recurrence
double hermite_function(int k, double u);
std::vector<double> hermite_functions(int kmax, double u);  // h_0 .. h_kmax

// Separable symbols only: a(omega; x0,x2,x3, xi3) = m(x0,x2,x3) s(omega, xi3), omega = 2k+1 on level k.
using LandauSymbol = std::function<cplx(double omega, double x0, double x2, double x3, double xi3)>;

struct HermiteOptions {
    int kmax = 20;
    int M = 512;   // x1 nodes
    int n3 = 16;   // x3 nodes; positive frequencies 1 .. n3/2-1 carry data
    int n0 = 1;
    int n2 = 1;
    double L = 0;  // 0: choose from the truncation rule
};

// Field4 index ((i0*n2 + i2)*M + j)*n3 + i3, Field3 index (i0*n2 + i2)*n3 + i3
using Field = std::vector<cplx>;

class HermiteBasis {
public:
    explicit HermiteBasis(const HermiteOptions& opt = {});

    int kmax() const { return opt_.kmax; }
    int M() const { return opt_.M; }
    int n3() const { return opt_.n3; }
    int n0() const { return opt_.n0; }
    int n2() const { return opt_.n2; }
    double L() const { return L_; }
    double dx() const { return dx_; }
    const std::vector<double>& x1() const { return x1_; }
    int max_frequency() const { return opt_.n3 / 2 - 1; }
    static double xi3(int n);
    // h_k(x1_j, 2 pi n) = (2 pi n)^{1/4} h_k((2 pi n)^{1/2} x1_j)
    double h(int k, int n, int j) const;
    // L >= (2(2 kmax + 1)/min xi3)^{1/2} + 6 (max xi3)^{-1/2}
    static double truncation_rule(int kmax, double xi_min, double xi_max);

    std::size_t size4() const;
    std::size_t size3() const;
    double inner4_real(const Field& u, const Field& v) const { return inner4(u, v).real(); }
    cplx inner4(const Field& u, const Field& v) const;
    cplx inner3(const Field& u, const Field& v) const;
    double norm4(const Field& u) const;
    double norm3(const Field& u) const;

    Field analysis(const Field& u, int k) const;   // H_k^*
    Field synthesis(const Field& v, int k) const;  // H_k
    Field positive_part(const Field& u) const;     // keep x3 frequencies 1 .. n3/2-1
    Field apply_omega(const Field& u) const;       // xi3 x1^2 - xi3^{-1} d_x1^2 per frequency
    Field apply_raising(const Field& u) const;     // xi3 x1 - d_x1
    Field apply_lowering(const Field& u) const;    // xi3 x1 + d_x1
    Field landau_quantize(const LandauSymbol& a, const Field& u) const;
    double anisotropic_norm(const Field& u, double s1, double s2) const;

    // per-frequency x3 transform of a Field4 (coefficients of exp(2 pi i n x3), n in [-n3/2, n3/2))
    Field x3_forward(const Field& u, std::size_t rows) const;
    Field x3_backward(const Field& u, std::size_t rows) const;
    int freq_index(int n) const { return n >= 0 ? n : n + opt_.n3; }

private:
    void d_x1(const Field& in, Field& out) const;  // on the x3-transformed data
    HermiteOptions opt_;
    double L_ = 0, dx_ = 0;
    std::vector<double> x1_;
    std::vector<double> table_;  // [k][n][j]
};

struct HermiteReport {
    int kmax = 0, M = 0, n3 = 0;
    double L = 0;
    double norm_defect = 0;       // max |<h_k,h_k> - 1| over represented xi3
    double orthogonality = 0;     // max_{k != l} |<H_k v, H_l w>| / (|v||w|)
    double omega_identity = 0;    // max_k |Omega H_k v - (2k+1) H_k v| / ((2k+1)|v|)
    double raising = 0;           // max_k |R H_k v - H_{k+1} (2(k+1) xi3)^{1/2} v| / |...|
    double lowering = 0;          // same for lowering, k >= 1
    double lowering_ground = 0;   // |lowering H_0 v| / |v|
    double parseval = 0;          // |sum_k |H_k^* u|^2 - |u|^2| / |u|^2
    double analysis_synthesis = 0;
    double quantize_identity = 0; // symbol 1
    double quantize_omega = 0;    // symbol omega vs Omega
    double quantize_symmetry = 0;
    double rodrigues = 0;         // recurrence vs direct evaluation, k <= 10, |u| <= 4
};
HermiteReport verify_hermite(const HermiteOptions& opt = {}, unsigned long long seed = 7);
// direct evaluation from the explicit polynomial (high precision), for cross-checks
double hermite_function_direct(int k, double u);

}  // namespace qc
