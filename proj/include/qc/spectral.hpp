#pragma once
// sR Laplacian on spectral grids, eigen-solvers, oracle spectra and trace functionals.

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qc/geometry.hpp"

namespace qc {

using cplx = std::complex<double>;

// Hermitian operator with respect to <u,v> = sum_i w_i conj(u_i) v_i.
class LinearOperator {
public:
    virtual ~LinearOperator() = default;
    virtual std::size_t dim() const = 0;
    virtual void apply(const cplx* in, cplx* out) const = 0;
    virtual const std::vector<double>& weights() const = 0;
};

class DenseOperator : public LinearOperator {
public:
    explicit DenseOperator(Eigen::MatrixXcd m);
    std::size_t dim() const override { return std::size_t(m_.rows()); }
    void apply(const cplx* in, cplx* out) const override;
    const std::vector<double>& weights() const override { return w_; }

private:
    Eigen::MatrixXcd m_;
    std::vector<double> w_;
};

class SparseOperator : public LinearOperator {
public:
    struct Entry {
        int row, col;
        double value;
    };
    SparseOperator(int n, std::vector<Entry> entries);
    std::size_t dim() const override { return std::size_t(n_); }
    void apply(const cplx* in, cplx* out) const override;
    const std::vector<double>& weights() const override { return w_; }

private:
    int n_;
    std::vector<Entry> entries_;
    std::vector<double> w_;
};

namespace detail {
class AxisDerivative;
}

// Spectral derivative along one axis of a row-major complex grid (FFTW backed).
class GridDerivatives {
public:
    explicit GridDerivatives(std::vector<int> dims);
    ~GridDerivatives();
    GridDerivatives(const GridDerivatives&) = delete;
    GridDerivatives& operator=(const GridDerivatives&) = delete;
    std::size_t size() const { return size_; }
    const std::vector<int>& dims() const { return dims_; }
    // out = d/dx_axis in (unit period); in and out may alias
    void derivative(int axis, const cplx* in, cplx* out) const;

private:
    std::vector<int> dims_;
    std::size_t size_;
    std::vector<std::unique_ptr<detail::AxisDerivative>> axes_;
};

double wavenumber(int index, int n);  // 2 pi k with k in [-n/2, n/2)

using VolumeFn = std::function<double(const Vec4<double>&)>;

enum class LaplacianForm {
    Adjoint,   // sum_j U_j^dagger U_j with the exact discrete adjoint
    Explicit,  // sum_j [-U_j^2 f - div_mu(U_j) U_j f] with analytic divergence
};

// One Fourier sector of the grid Laplacian: axes on which the data do not depend are
// diagonalized exactly and carry a fixed mode index; the others are kept on the grid.
class GridOperator : public LinearOperator {
public:
    std::size_t dim() const override { return deriv_->size(); }
    void apply(const cplx* in, cplx* out) const override;
    const std::vector<double>& weights() const override { return w_; }

    const std::array<int, 4>& sizes() const { return N_; }
    const std::vector<int>& active_axes() const { return active_; }
    const std::array<int, 4>& mode() const { return mode_; }
    LaplacianForm form() const { return form_; }
    // coordinates of node i of the active grid (inactive coordinates are 0)
    Vec4<double> node(std::size_t i) const;

private:
    friend class GridLaplacian;
    std::array<int, 4> N_{};
    std::vector<int> active_;
    std::array<int, 4> mode_{};
    LaplacianForm form_ = LaplacianForm::Adjoint;
    std::shared_ptr<GridDerivatives> deriv_;
    // U[j][axis] sampled on the active grid; div[j]
    std::array<std::array<std::vector<double>, 4>, 3> U_;
    std::array<std::vector<double>, 3> div_;
    std::vector<double> w_;
    std::vector<double> vol_;
    mutable std::vector<cplx> g_, t_, acc_;
};

class GridLaplacian {
public:
    // volume defaults to the Popp density
    GridLaplacian(const QuasiContactStructure& qc, std::array<int, 4> N, VolumeFn volume = {},
                  bool reduce_invariant_axes = true, LaplacianForm form = LaplacianForm::Adjoint);
    const std::array<bool, 4>& invariant_axes() const { return invariant_; }
    const std::array<int, 4>& sizes() const { return N_; }
    const QuasiContactStructure& structure() const { return qc_; }
    // all sector mode tuples (entries only meaningful on invariant axes)
    std::vector<std::array<int, 4>> sector_modes() const;
    GridOperator sector(const std::array<int, 4>& mode) const;
    GridOperator full() const;  // no reduction at all

private:
    GridOperator build(const std::vector<int>& active, const std::array<int, 4>& mode) const;
    QuasiContactStructure qc_;
    std::array<int, 4> N_;
    VolumeFn volume_;
    std::array<bool, 4> invariant_{};
    LaplacianForm form_;
};

GridLaplacian assemble_grid_laplacian(const QuasiContactStructure& qc, std::array<int, 4> N,
                                      VolumeFn volume = {});

// Heisenberg nilmanifold times a circle: sector (m0, n) on the (x1,x2) grid with the twisted
// boundary condition g(x1+1,x2) = exp(2 pi i n x2) g(x1,x2).
class HeisenbergSectorOperator : public LinearOperator {
public:
    HeisenbergSectorOperator(int n1, int n2, int m0, int n);
    std::size_t dim() const override { return std::size_t(n1_) * n2_; }
    void apply(const cplx* in, cplx* out) const override;
    const std::vector<double>& weights() const override { return w_; }

private:
    void U2(const cplx* in, cplx* out) const;
    void U3(const cplx* in, cplx* out) const;
    int n1_, n2_, m0_, n_;
    std::shared_ptr<GridDerivatives> deriv_;
    std::vector<double> w_;
    std::vector<cplx> gauge_;  // exp(-i 2 pi n x2 x1) at the nodes
    mutable std::vector<cplx> a_, b_;
};

// ---- eigen-solver ----
struct EigenOptions {
    int block = 8;
    int max_basis = 600;
    int max_restarts = 60;
    int check_every = 4;
    unsigned long long seed = 12345;
};

struct EigenPairs {
    std::vector<double> values;
    Eigen::MatrixXcd vectors;  // columns, orthonormal in the operator's weighted inner product
    std::vector<double> residuals;
    int applications = 0;
    int restarts = 0;
};

EigenPairs lowest_eigenpairs(const LinearOperator& op, int count, double tol,
                             const EigenOptions& opt = {});
// dense reference: all eigenvalues of a small operator
std::vector<double> dense_eigenvalues(const LinearOperator& op);

// ---- spectra ----
struct SpectrumResult {
    std::string model;
    std::vector<double> eigenvalues;  // ascending, distinct up to 1e-12 relative
    std::vector<long long> multiplicities;
    double lambda_max = 0;
    std::string provenance;  // "oracle" | "grid"
    bool certified = false;
    long long total() const;
};

SpectrumResult oracle_spectrum(const std::string& model, double lambda_max);
// merge raw (value, multiplicity) pairs into a sorted spectrum
SpectrumResult make_spectrum(std::vector<std::pair<double, long long>> raw, double lambda_max,
                             std::string model, std::string provenance);

// Trig torus per-mode 1D problem, in the Fourier basis exp(2 pi i k x3), one parity class.
struct HillModes {
    double r2 = 0;
    int parity = 0;
    std::vector<int> k;               // Fourier indices
    std::vector<double> values;       // eigenvalues of -d^2 + 4 pi^2 r^2 sin^2(2 pi x3)
    Eigen::MatrixXd vectors;          // coefficient columns
};
HillModes hill_modes(double r2, int parity, double lambda_max);

struct GridSpectrumOptions {
    int lowest = 20;         // the spectrum is complete below the lowest-th sector ground value
    double tol = 1e-9;
    EigenOptions eig;
};
SpectrumResult grid_spectrum(const GridLaplacian& lap, const GridSpectrumOptions& opt = {});
SpectrumResult heisenberg_grid_spectrum(int n, const GridSpectrumOptions& opt = {});

// ---- trace functionals ----
long long counting_function(const SpectrumResult& s, double lambda);

struct TailedValue {
    double value = 0;
    double tail_bound = 0;
};
// Tail beyond lambda_max bounded with the envelope N(l) <= K l^{5/2}; K is the maximum of
// N(l)/l^{5/2} over the top half of the window, times 1.5.
double weyl_envelope(const SpectrumResult& s);
TailedValue heat_trace(const SpectrumResult& s, double t);

struct WeylFit {
    double cesaro_mean = 0;  // mean of N(l)/l^{5/2} over log-spaced l in the top decade
    double lsq_leading = 0;  // C from N ~ C l^{5/2} + D l^2
    double lsq_second = 0;
    std::vector<double> lambdas, ratios;
};
WeylFit weyl_fit(const SpectrumResult& s, int samples = 64);

struct HeatExtrapolation {
    double limit = 0;  // c0 in t^{5/2} tr ~ c0 + c1 t^{1/2} + c2 t
    std::vector<double> ts, scaled, tails;
};
HeatExtrapolation heat_extrapolation(const SpectrumResult& s, double t_max = 0.01, int samples = 24);

struct Window {
    enum Kind { Gaussian, Bump } kind = Bump;
    double width = 0.5;   // sigma for Gaussian, support radius for Bump
    double center = 0.0;  // translation of theta in t
    double theta(double t) const;
    cplx check(double s) const;  // (1/2pi) int e^{i s t} theta(t) dt
    double check_bound(double s) const;  // bound on |check| at |s| for tail control
};
struct WaveValue {
    cplx value;
    double tail_bound = 0;
};
WaveValue smoothed_wave_trace(const SpectrumResult& s, const Window& w, double lambda);

}  // namespace qc
