#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <random>

#include "qc/fftw_lock.hpp"
#include "qc/spectral.hpp"

namespace qc {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

double wavenumber(int index, int n) {
    int k = index < (n + 1) / 2 ? index : index - n;
    return kTwoPi * k;
}

namespace detail {

class AxisDerivative {
public:
    AxisDerivative(int n, int inner, int outer) : n_(n), inner_(inner), outer_(outer) {
        buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * std::size_t(n) * inner));
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        int dims[1] = {n};
        fwd_ = fftw_plan_many_dft(1, dims, inner, buf_, nullptr, inner, 1, buf_, nullptr, inner, 1,
                                  FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_many_dft(1, dims, inner, buf_, nullptr, inner, 1, buf_, nullptr, inner, 1,
                                  FFTW_BACKWARD, FFTW_ESTIMATE);
        k_.resize(n);
        for (int i = 0; i < n; ++i) k_[i] = wavenumber(i, n) / n;
    }
    ~AxisDerivative() {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }
    void apply(const cplx* in, cplx* out) const {
        const std::size_t block = std::size_t(n_) * inner_;
        auto* b = reinterpret_cast<cplx*>(buf_);
        for (int o = 0; o < outer_; ++o) {
            const cplx* src = in + o * block;
            std::copy(src, src + block, b);
            fftw_execute(fwd_);
            for (int i = 0; i < n_; ++i) {
                const cplx f(0.0, k_[i]);
                cplx* row = b + std::size_t(i) * inner_;
                for (int j = 0; j < inner_; ++j) row[j] *= f;
            }
            fftw_execute(bwd_);
            std::copy(b, b + block, out + o * block);
        }
    }

private:
    int n_, inner_, outer_;
    fftw_complex* buf_;
    fftw_plan fwd_, bwd_;
    std::vector<double> k_;
};

}  // namespace detail

GridDerivatives::GridDerivatives(std::vector<int> dims) : dims_(std::move(dims)) {
    size_ = 1;
    for (int d : dims_) size_ *= std::size_t(d);
    for (std::size_t a = 0; a < dims_.size(); ++a) {
        int inner = 1, outer = 1;
        for (std::size_t b = a + 1; b < dims_.size(); ++b) inner *= dims_[b];
        for (std::size_t b = 0; b < a; ++b) outer *= dims_[b];
        axes_.push_back(std::make_unique<detail::AxisDerivative>(dims_[a], inner, outer));
    }
}

GridDerivatives::~GridDerivatives() = default;

void GridDerivatives::derivative(int axis, const cplx* in, cplx* out) const {
    axes_.at(std::size_t(axis))->apply(in, out);
}

// ---------------------------------------------------------------------------

namespace {

// Compare the frame data (with first partials) and the volume at x and at x shifted along axis.
bool axis_invariant(const QuasiContactStructure& qc, const VolumeFn& vol, int axis) {
    std::mt19937_64 rng(97 + axis);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int s = 0; s < 12; ++s) {
        Vec4<double> x{u(rng), u(rng), u(rng), u(rng)};
        Vec4<double> y = x;
        y[axis] += 0.1 + 0.8 * u(rng);
        auto fx = qc.eval(seed(x)), fy = qc.eval(seed(y));
        auto close = [](const D1& p, const D1& q) {
            double tol = 1e-13 * (1.0 + std::abs(p.v));
            if (std::abs(p.v - q.v) > tol) return false;
            for (int i = 0; i < 4; ++i)
                if (std::abs(p.d[i] - q.d[i]) > 1e-13 * (1.0 + std::abs(p.d[i]))) return false;
            return true;
        };
        for (int k = 0; k < 4; ++k) {
            if (!close(fx.a[k], fy.a[k])) return false;
            for (int i = 0; i < 3; ++i)
                if (!close(fx.e[i][k], fy.e[i][k])) return false;
        }
        double vx = vol(x), vy = vol(y);
        if (std::abs(vx - vy) > 1e-13 * (1.0 + std::abs(vx))) return false;
    }
    return true;
}

}  // namespace

GridLaplacian::GridLaplacian(const QuasiContactStructure& qc, std::array<int, 4> N, VolumeFn volume,
                             bool reduce_invariant_axes, LaplacianForm form)
    : qc_(qc), N_(N), volume_(std::move(volume)), form_(form) {
    for (int n : N_)
        if (n < 8) throw ConfigError("grid sizes must be at least 8 per axis");
    if (!qc_.info().periodic)
        throw UnsupportedModel("grid Laplacian needs periodic coefficients (" + qc_.info().name + ")");
    const auto& g = qc_.info().frame_gram;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (std::abs(g[3 * i + j] - (i == j ? 1.0 : 0.0)) > 1e-14)
                throw NonOrthonormalFrame("declared metric is not the identity on the frame");
    if (!volume_) {
        QuasiContactStructure q = qc_;
        volume_ = [q](const Vec4<double>& x) { return local_frame_at<double>(q, x).density; };
    }
    for (int a = 0; a < 4; ++a) invariant_[a] = reduce_invariant_axes && axis_invariant(qc_, volume_, a);
}

std::vector<std::array<int, 4>> GridLaplacian::sector_modes() const {
    std::vector<std::array<int, 4>> out{{0, 0, 0, 0}};
    for (int a = 0; a < 4; ++a) {
        if (!invariant_[a]) continue;
        std::vector<std::array<int, 4>> next;
        for (const auto& m : out)
            for (int k = 0; k < N_[a]; ++k) {
                auto mm = m;
                mm[a] = k;
                next.push_back(mm);
            }
        out.swap(next);
    }
    return out;
}

GridOperator GridLaplacian::sector(const std::array<int, 4>& mode) const {
    std::vector<int> active;
    for (int a = 0; a < 4; ++a)
        if (!invariant_[a]) active.push_back(a);
    return build(active, mode);
}

GridOperator GridLaplacian::full() const { return build({0, 1, 2, 3}, {0, 0, 0, 0}); }

GridOperator GridLaplacian::build(const std::vector<int>& active, const std::array<int, 4>& mode) const {
    GridOperator op;
    op.N_ = N_;
    op.active_ = active;
    op.mode_ = mode;
    op.form_ = form_;
    std::vector<int> dims;
    for (int a : active) dims.push_back(N_[a]);
    if (dims.empty()) dims.push_back(1);
    op.deriv_ = std::make_shared<GridDerivatives>(dims);
    const std::size_t n = op.deriv_->size();
    double cell = 1.0;
    for (int a : active) cell /= N_[a];
    op.w_.resize(n);
    op.vol_.resize(n);
    for (int j = 0; j < 3; ++j) {
        for (int a = 0; a < 4; ++a) op.U_[j][a].resize(n);
        op.div_[j].resize(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
        Vec4<double> x = op.node(i);
        double mu = volume_(x);
        if (!(mu > 0)) throw ConfigError("volume density must be positive");
        op.vol_[i] = mu;
        op.w_[i] = mu * cell;
        auto fd = qc_.eval(seed(x));
        if (form_ == LaplacianForm::Explicit) {
            // div_mu U_j = sum_k d_k U_j^k + U_j(log mu), log mu by central differences
            std::array<double, 4> dlog{};
            const double h = 1e-5;
            for (int k = 0; k < 4; ++k) {
                auto xp = x, xm = x;
                xp[k] += h;
                xm[k] -= h;
                dlog[k] = (std::log(volume_(xp)) - std::log(volume_(xm))) / (2 * h);
            }
            for (int j = 0; j < 3; ++j) {
                double d = 0;
                for (int k = 0; k < 4; ++k) d += fd.e[j][k].d[k] + fd.e[j][k].v * dlog[k];
                op.div_[j][i] = d;
            }
        }
        for (int j = 0; j < 3; ++j)
            for (int a = 0; a < 4; ++a) op.U_[j][a][i] = fd.e[j][a].v;
    }
    op.g_.resize(n);
    op.t_.resize(n);
    op.acc_.resize(n);
    return op;
}

Vec4<double> GridOperator::node(std::size_t i) const {
    Vec4<double> x{0, 0, 0, 0};
    for (int s = int(active_.size()) - 1; s >= 0; --s) {
        int a = active_[s];
        x[a] = double(i % N_[a]) / N_[a];
        i /= N_[a];
    }
    return x;
}

void GridOperator::apply(const cplx* in, cplx* out) const {
    const std::size_t n = dim();
    std::fill(out, out + n, cplx(0.0));
    std::array<bool, 4> is_active{};
    for (int a : active_) is_active[a] = true;
    std::array<double, 4> kin{};
    for (int a = 0; a < 4; ++a)
        if (!is_active[a]) kin[a] = wavenumber(mode_[a], N_[a]);

    for (int j = 0; j < 3; ++j) {
        // g = U_j f
        std::fill(g_.begin(), g_.end(), cplx(0.0));
        for (int s = 0; s < int(active_.size()); ++s) {
            int a = active_[s];
            deriv_->derivative(s, in, t_.data());
            const auto& c = U_[j][a];
            for (std::size_t i = 0; i < n; ++i) g_[i] += c[i] * t_[i];
        }
        for (int a = 0; a < 4; ++a) {
            if (is_active[a] || kin[a] == 0.0) continue;
            const auto& c = U_[j][a];
            const cplx ik(0.0, kin[a]);
            for (std::size_t i = 0; i < n; ++i) g_[i] += c[i] * ik * in[i];
        }
        if (form_ == LaplacianForm::Adjoint) {
            // out += U_j^dagger g = -(1/w) sum_a D_a(w U^a g) - sum_inactive (i k_a) U^a g
            for (int s = 0; s < int(active_.size()); ++s) {
                int a = active_[s];
                const auto& c = U_[j][a];
                for (std::size_t i = 0; i < n; ++i) acc_[i] = vol_[i] * c[i] * g_[i];
                deriv_->derivative(s, acc_.data(), t_.data());
                for (std::size_t i = 0; i < n; ++i) out[i] -= t_[i] / vol_[i];
            }
            for (int a = 0; a < 4; ++a) {
                if (is_active[a] || kin[a] == 0.0) continue;
                const auto& c = U_[j][a];
                const cplx ik(0.0, kin[a]);
                for (std::size_t i = 0; i < n; ++i) out[i] -= ik * c[i] * g_[i];
            }
        } else {
            // out += -U_j g - div_j g
            for (int s = 0; s < int(active_.size()); ++s) {
                int a = active_[s];
                deriv_->derivative(s, g_.data(), t_.data());
                const auto& c = U_[j][a];
                for (std::size_t i = 0; i < n; ++i) out[i] -= c[i] * t_[i];
            }
            for (int a = 0; a < 4; ++a) {
                if (is_active[a] || kin[a] == 0.0) continue;
                const auto& c = U_[j][a];
                const cplx ik(0.0, kin[a]);
                for (std::size_t i = 0; i < n; ++i) out[i] -= c[i] * ik * g_[i];
            }
            const auto& dv = div_[j];
            for (std::size_t i = 0; i < n; ++i) out[i] -= dv[i] * g_[i];
        }
    }
}

GridLaplacian assemble_grid_laplacian(const QuasiContactStructure& qc, std::array<int, 4> N,
                                      VolumeFn volume) {
    return GridLaplacian(qc, N, std::move(volume));
}

// ---------------------------------------------------------------------------

HeisenbergSectorOperator::HeisenbergSectorOperator(int n1, int n2, int m0, int n)
    : n1_(n1), n2_(n2), m0_(m0), n_(n) {
    if (n1 < 8 || n2 < 8) throw ConfigError("grid sizes must be at least 8 per axis");
    deriv_ = std::make_shared<GridDerivatives>(std::vector<int>{n1, n2});
    const std::size_t sz = dim();
    w_.assign(sz, 1.0 / double(sz));
    gauge_.resize(sz);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            double x1 = double(i) / n1, x2 = double(j) / n2;
            gauge_[std::size_t(i) * n2 + j] = std::polar(1.0, -kTwoPi * n * x2 * x1);
        }
    a_.resize(sz);
    b_.resize(sz);
}

// d/dx1 with the twisted boundary condition: gauge to a periodic function, differentiate, undo
void HeisenbergSectorOperator::U2(const cplx* in, cplx* out) const {
    const std::size_t sz = dim();
    for (std::size_t i = 0; i < sz; ++i) a_[i] = gauge_[i] * in[i];
    deriv_->derivative(0, a_.data(), b_.data());
    for (int i = 0; i < n1_; ++i)
        for (int j = 0; j < n2_; ++j) {
            std::size_t q = std::size_t(i) * n2_ + j;
            double theta = kTwoPi * n_ * double(j) / n2_;
            out[q] = std::conj(gauge_[q]) * (b_[q] + cplx(0.0, theta) * a_[q]);
        }
}

// d/dx2 - i 2 pi n x1
void HeisenbergSectorOperator::U3(const cplx* in, cplx* out) const {
    deriv_->derivative(1, in, out);
    for (int i = 0; i < n1_; ++i) {
        const cplx f(0.0, -kTwoPi * n_ * double(i) / n1_);
        for (int j = 0; j < n2_; ++j) {
            std::size_t q = std::size_t(i) * n2_ + j;
            out[q] += f * in[q];
        }
    }
}

void HeisenbergSectorOperator::apply(const cplx* in, cplx* out) const {
    const std::size_t sz = dim();
    std::vector<cplx> t(sz), u(sz);
    const double k0 = kTwoPi * m0_;
    for (std::size_t i = 0; i < sz; ++i) out[i] = k0 * k0 * in[i];
    U2(in, t.data());
    U2(t.data(), u.data());
    for (std::size_t i = 0; i < sz; ++i) out[i] -= u[i];
    U3(in, t.data());
    U3(t.data(), u.data());
    for (std::size_t i = 0; i < sz; ++i) out[i] -= u[i];
}

}  // namespace qc
