#include <fftw3.h>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "qc/fftw_lock.hpp"
#include "qc/hermite.hpp"

namespace qc {

namespace {
constexpr double kPi = std::numbers::pi;

// one batch of strided 1D transforms, planned once per call site
class Batch {
public:
    Batch(int n, int howmany, int stride, int dist, int sign) : n_(n) {
        std::size_t total = std::size_t(n - 1) * stride + std::size_t(howmany - 1) * dist + 1;
        buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        int dims[1] = {n};
        plan_ = fftw_plan_many_dft(1, dims, howmany, buf_, nullptr, stride, dist, buf_, nullptr, stride, dist,
                                   sign, FFTW_ESTIMATE);
        total_ = total;
    }
    ~Batch() {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(plan_);
        fftw_free(buf_);
    }
    Batch(const Batch&) = delete;
    Batch& operator=(const Batch&) = delete;
    void run(cplx* data) const {
        auto* b = reinterpret_cast<cplx*>(buf_);
        std::copy(data, data + total_, b);
        fftw_execute(plan_);
        std::copy(b, b + total_, data);
    }
    int n() const { return n_; }

private:
    int n_;
    std::size_t total_;
    fftw_complex* buf_;
    fftw_plan plan_;
};
}  // namespace

double hermite_function(int k, double u) {
    if (k < 0) throw ConfigError("negative Hermite index");
    return hermite_functions(k, u)[std::size_t(k)];
}

std::vector<double> hermite_functions(int kmax, double u) {
    std::vector<double> h(std::size_t(kmax) + 1, 0.0);
    h[0] = std::pow(kPi, -0.25) * std::exp(-0.5 * u * u);
    if (kmax >= 1) h[1] = std::sqrt(2.0) * u * h[0];
    for (int k = 1; k < kmax; ++k)
        h[std::size_t(k) + 1] = std::sqrt(2.0 / (k + 1)) * u * h[std::size_t(k)] -
                                std::sqrt(double(k) / (k + 1)) * h[std::size_t(k) - 1];
    return h;
}

double hermite_function_direct(int k, double u) {
    using F = boost::multiprecision::cpp_bin_float_50;
    // H_k(u) = k! sum_m (-1)^m (2u)^{k-2m} / (m! (k-2m)!)
    F x = u, sum = 0, fact_k = 1;
    for (int i = 2; i <= k; ++i) fact_k *= i;
    for (int m = 0; 2 * m <= k; ++m) {
        F fm = 1, fk = 1;
        for (int i = 2; i <= m; ++i) fm *= i;
        for (int i = 2; i <= k - 2 * m; ++i) fk *= i;
        F term = boost::multiprecision::pow(2 * x, k - 2 * m) / (fm * fk);
        sum += (m % 2 ? -term : term);
    }
    F Hk = fact_k * sum;
    F norm = boost::multiprecision::sqrt(boost::multiprecision::pow(F(2), k) * fact_k *
                                         boost::multiprecision::sqrt(boost::math::constants::pi<F>()));
    return static_cast<double>(Hk * boost::multiprecision::exp(-x * x / 2) / norm);
}

double HermiteBasis::xi3(int n) { return 2 * kPi * n; }

double HermiteBasis::truncation_rule(int kmax, double xi_min, double xi_max) {
    return std::sqrt(2.0 * (2 * kmax + 1) / xi_min) + 6.0 / std::sqrt(xi_max);
}

HermiteBasis::HermiteBasis(const HermiteOptions& opt) : opt_(opt) {
    if (opt_.kmax < 0 || opt_.M < 16 || opt_.n3 < 4 || opt_.n0 < 1 || opt_.n2 < 1)
        throw ConfigError("invalid Hermite grid");
    const int nmax = max_frequency();
    L_ = opt_.L > 0 ? opt_.L : truncation_rule(opt_.kmax + 1, xi3(1), xi3(nmax));
    dx_ = 2 * L_ / opt_.M;
    x1_.resize(std::size_t(opt_.M));
    for (int j = 0; j < opt_.M; ++j) x1_[std::size_t(j)] = -L_ + j * dx_;
    // levels up to kmax+1 so that the raising identity can be checked at the top level
    const int K = opt_.kmax + 2;
    table_.assign(std::size_t(K) * (nmax + 1) * opt_.M, 0.0);
    for (int n = 1; n <= nmax; ++n) {
        double s = std::sqrt(xi3(n)), q = std::pow(xi3(n), 0.25);
        for (int j = 0; j < opt_.M; ++j) {
            auto hs = hermite_functions(K - 1, s * x1_[std::size_t(j)]);
            for (int k = 0; k < K; ++k)
                table_[(std::size_t(k) * (nmax + 1) + n) * opt_.M + j] = q * hs[std::size_t(k)];
        }
    }
}

double HermiteBasis::h(int k, int n, int j) const {
    return table_[(std::size_t(k) * (max_frequency() + 1) + n) * opt_.M + j];
}

std::size_t HermiteBasis::size3() const { return std::size_t(opt_.n0) * opt_.n2 * opt_.n3; }
std::size_t HermiteBasis::size4() const { return size3() * opt_.M; }

cplx HermiteBasis::inner4(const Field& u, const Field& v) const {
    cplx s = 0;
    for (std::size_t i = 0; i < u.size(); ++i) s += std::conj(u[i]) * v[i];
    return s * dx_ / double(size3());
}
cplx HermiteBasis::inner3(const Field& u, const Field& v) const {
    cplx s = 0;
    for (std::size_t i = 0; i < u.size(); ++i) s += std::conj(u[i]) * v[i];
    return s / double(size3());
}
double HermiteBasis::norm4(const Field& u) const { return std::sqrt(inner4(u, u).real()); }
double HermiteBasis::norm3(const Field& u) const { return std::sqrt(inner3(u, u).real()); }

Field HermiteBasis::x3_forward(const Field& u, std::size_t rows) const {
    Field t = u;
    Batch b(opt_.n3, int(rows), 1, opt_.n3, FFTW_FORWARD);
    b.run(t.data());
    for (auto& x : t) x /= double(opt_.n3);
    return t;
}

Field HermiteBasis::x3_backward(const Field& u, std::size_t rows) const {
    Field t = u;
    Batch b(opt_.n3, int(rows), 1, opt_.n3, FFTW_BACKWARD);
    b.run(t.data());
    return t;
}

Field HermiteBasis::analysis(const Field& u, int k) const {
    if (k < 0 || k > opt_.kmax + 1) throw OutOfRange("Hermite level beyond k_max");
    if (u.size() != size4()) throw ConfigError("field size mismatch");
    const std::size_t blocks = std::size_t(opt_.n0) * opt_.n2;
    const int M = opt_.M, n3 = opt_.n3;
    Field t = x3_forward(u, blocks * M);
    Field c(size3(), 0.0);
    for (std::size_t b = 0; b < blocks; ++b)
        for (int n = 1; n <= max_frequency(); ++n) {
            cplx s = 0;
            for (int j = 0; j < M; ++j) s += h(k, n, j) * t[(b * M + j) * n3 + n];
            c[b * n3 + n] = s * dx_;
        }
    return x3_backward(c, blocks);
}

Field HermiteBasis::synthesis(const Field& v, int k) const {
    if (k < 0 || k > opt_.kmax + 1) throw OutOfRange("Hermite level beyond k_max");
    if (v.size() != size3()) throw ConfigError("field size mismatch");
    const std::size_t blocks = std::size_t(opt_.n0) * opt_.n2;
    const int M = opt_.M, n3 = opt_.n3;
    Field c = x3_forward(v, blocks);
    Field t(size4(), 0.0);
    for (std::size_t b = 0; b < blocks; ++b)
        for (int n = 1; n <= max_frequency(); ++n)
            for (int j = 0; j < M; ++j) t[(b * M + j) * n3 + n] = h(k, n, j) * c[b * n3 + n];
    return x3_backward(t, blocks * M);
}

Field HermiteBasis::positive_part(const Field& u) const {
    const std::size_t rows = u.size() / opt_.n3;
    Field t = x3_forward(u, rows);
    for (std::size_t r = 0; r < rows; ++r)
        for (int i = 0; i < opt_.n3; ++i) {
            int n = i < (opt_.n3 + 1) / 2 ? i : i - opt_.n3;
            if (n < 1 || n > max_frequency()) t[r * opt_.n3 + i] = 0.0;
        }
    return x3_backward(t, rows);
}

// spectral x1 derivative of x3-transformed data (x1 stride n3 inside each block)
void HermiteBasis::d_x1(const Field& in, Field& out) const {
    const std::size_t blocks = std::size_t(opt_.n0) * opt_.n2;
    const int M = opt_.M, n3 = opt_.n3;
    out = in;
    Batch fwd(M, n3, n3, 1, FFTW_FORWARD), bwd(M, n3, n3, 1, FFTW_BACKWARD);
    for (std::size_t b = 0; b < blocks; ++b) {
        cplx* p = out.data() + b * M * n3;
        fwd.run(p);
        for (int q = 0; q < M; ++q) {
            int kq = q < (M + 1) / 2 ? q : q - M;
            if (2 * kq == -M) kq = 0;  // the Nyquist mode has no odd derivative
            cplx f(0.0, kPi * kq / L_ / M);
            for (int i = 0; i < n3; ++i) p[q * n3 + i] *= f;
        }
        bwd.run(p);
    }
}

Field HermiteBasis::apply_omega(const Field& u) const {
    const std::size_t blocks = std::size_t(opt_.n0) * opt_.n2;
    const int M = opt_.M, n3 = opt_.n3;
    Field t = x3_forward(positive_part(u), blocks * M);
    Field d, dd;
    d_x1(t, d);
    d_x1(d, dd);
    Field out(t.size(), 0.0);
    for (std::size_t b = 0; b < blocks; ++b)
        for (int j = 0; j < M; ++j)
            for (int n = 1; n <= max_frequency(); ++n) {
                std::size_t q = (b * M + j) * n3 + n;
                double xi = xi3(n), x = x1_[std::size_t(j)];
                out[q] = xi * x * x * t[q] - dd[q] / xi;
            }
    return x3_backward(out, blocks * M);
}

Field HermiteBasis::apply_raising(const Field& u) const {
    const std::size_t blocks = std::size_t(opt_.n0) * opt_.n2;
    const int M = opt_.M, n3 = opt_.n3;
    Field t = x3_forward(positive_part(u), blocks * M);
    Field d;
    d_x1(t, d);
    Field out(t.size(), 0.0);
    for (std::size_t b = 0; b < blocks; ++b)
        for (int j = 0; j < M; ++j)
            for (int n = 1; n <= max_frequency(); ++n) {
                std::size_t q = (b * M + j) * n3 + n;
                out[q] = xi3(n) * x1_[std::size_t(j)] * t[q] - d[q];
            }
    return x3_backward(out, blocks * M);
}

Field HermiteBasis::apply_lowering(const Field& u) const {
    const std::size_t blocks = std::size_t(opt_.n0) * opt_.n2;
    const int M = opt_.M, n3 = opt_.n3;
    Field t = x3_forward(positive_part(u), blocks * M);
    Field d;
    d_x1(t, d);
    Field out(t.size(), 0.0);
    for (std::size_t b = 0; b < blocks; ++b)
        for (int j = 0; j < M; ++j)
            for (int n = 1; n <= max_frequency(); ++n) {
                std::size_t q = (b * M + j) * n3 + n;
                out[q] = xi3(n) * x1_[std::size_t(j)] * t[q] + d[q];
            }
    return x3_backward(out, blocks * M);
}

Field HermiteBasis::landau_quantize(const LandauSymbol& a, const Field& u) const {
    const int n0 = opt_.n0, n2 = opt_.n2, n3 = opt_.n3, nmax = max_frequency();
    auto X = [&](std::size_t i, int axis) {
        // Field3 node coordinates
        int i3 = int(i % n3), i2 = int((i / n3) % n2), i0 = int(i / (std::size_t(n3) * n2));
        return axis == 0 ? double(i0) / n0 : axis == 2 ? double(i2) / n2 : double(i3) / n3;
    };
    // reference point: largest |a| over a coarse sample
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::size_t> pick(0, size3() - 1);
    std::uniform_int_distribution<int> lev(0, opt_.kmax), fq(1, nmax);
    double best = -1;
    std::size_t ir = 0;
    int kr = 0, nr = 1;
    for (int s = 0; s < 64; ++s) {
        std::size_t i = pick(rng);
        int k = lev(rng), n = fq(rng);
        double v = std::abs(a(2 * k + 1, X(i, 0), X(i, 2), X(i, 3), xi3(n)));
        if (v > best) best = v, ir = i, kr = k, nr = n;
    }
    if (best <= 0) return Field(u.size(), 0.0);
    auto A = [&](int k, std::size_t i, int n) { return a(2 * k + 1, X(i, 0), X(i, 2), X(i, 3), xi3(n)); };
    const cplx aref = A(kr, ir, nr);
    // rank-one test of the symbol in (omega, xi3) versus position
    for (int s = 0; s < 96; ++s) {
        std::size_t i = pick(rng);
        int k = lev(rng), n = fq(rng);
        cplx lhs = A(k, i, n) * aref, rhs = A(k, ir, n) * A(kr, i, nr);
        if (std::abs(lhs - rhs) > 1e-10 * (std::abs(lhs) + std::abs(rhs) + best * best * 1e-6))
            throw UnsupportedSymbol("symbol is not a product m(x0,x2,x3) s(omega, xi3)");
    }
    Field m(size3());
    for (std::size_t i = 0; i < size3(); ++i) m[i] = A(kr, i, nr) / aref;

    const std::size_t blocks = std::size_t(n0) * n2;
    Field out(size4(), 0.0);
    for (int k = 0; k <= opt_.kmax; ++k) {
        Field v = analysis(u, k);
        std::vector<cplx> sk(std::size_t(n3), 0.0);
        for (int n = 1; n <= nmax; ++n) sk[std::size_t(n)] = A(k, ir, n);
        auto S = [&](const Field& f) {
            Field c = x3_forward(f, blocks);
            for (std::size_t b = 0; b < blocks; ++b)
                for (int i = 0; i < n3; ++i) c[b * n3 + i] *= sk[std::size_t(i)];
            return x3_backward(c, blocks);
        };
        Field sv = S(v), mv(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) mv[i] = m[i] * v[i];
        Field smv = S(mv);
        Field w(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) w[i] = 0.5 * (m[i] * sv[i] + smv[i]);
        Field h = synthesis(w, k);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += h[i];
    }
    return out;
}

double HermiteBasis::anisotropic_norm(const Field& u, double s1, double s2) const {
    const std::size_t blocks = std::size_t(opt_.n0) * opt_.n2;
    double total = 0;
    for (int k = 0; k <= opt_.kmax; ++k) {
        Field c = x3_forward(analysis(u, k), blocks);
        for (std::size_t b = 0; b < blocks; ++b)
            for (int n = 1; n <= max_frequency(); ++n) {
                double xi = xi3(n);
                double w = std::pow(2 * k + 1, -s2) * std::pow(1 + xi * xi, s1 + s2 / 2);
                total += w * std::norm(c[b * opt_.n3 + n]);
            }
    }
    return std::sqrt(total / double(blocks));
}

// ---------------------------------------------------------------------------

HermiteReport verify_hermite(const HermiteOptions& opt, unsigned long long seed) {
    HermiteBasis B(opt);
    HermiteReport r;
    r.kmax = opt.kmax;
    r.M = opt.M;
    r.n3 = opt.n3;
    r.L = B.L();
    const int K = opt.kmax, nmax = B.max_frequency();
    for (int k = 0; k <= K + 1; ++k)
        for (int n = 1; n <= nmax; ++n) {
            double s = 0;
            for (int j = 0; j < opt.M; ++j) s += B.h(k, n, j) * B.h(k, n, j) * B.dx();
            r.norm_defect = std::max(r.norm_defect, std::abs(s - 1));
        }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    auto random3 = [&] {
        // positive frequencies only
        const std::size_t blocks = std::size_t(opt.n0) * opt.n2;
        Field c(B.size3(), 0.0);
        for (std::size_t b = 0; b < blocks; ++b)
            for (int n = 1; n <= nmax; ++n) c[b * opt.n3 + n] = cplx(g(rng), g(rng));
        return B.x3_backward(c, blocks);
    };
    auto diff_norm4 = [&](const Field& a, const Field& b) {
        Field d(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
        return B.norm4(d);
    };

    Field v = random3(), w = random3();
    std::vector<Field> Hv, Hw;
    for (int k = 0; k <= K + 1; ++k) {
        Hv.push_back(B.synthesis(v, k));
        Hw.push_back(B.synthesis(w, k));
    }
    const double nv = B.norm3(v), nw = B.norm3(w);
    for (int k = 0; k <= K; ++k)
        for (int l = 0; l <= K; ++l)
            if (k != l) r.orthogonality = std::max(r.orthogonality, std::abs(B.inner4(Hv[k], Hw[l])) / (nv * nw));

    for (int k = 0; k <= K; ++k) {
        Field o = B.apply_omega(Hv[k]), e = Hv[k];
        for (auto& x : e) x *= double(2 * k + 1);
        r.omega_identity = std::max(r.omega_identity, diff_norm4(o, e) / ((2 * k + 1) * nv));

        // raising: H_{k+1}[(2(k+1) xi3)^{1/2} v]
        const std::size_t blocks = std::size_t(opt.n0) * opt.n2;
        Field c = B.x3_forward(v, blocks);
        for (std::size_t b = 0; b < blocks; ++b)
            for (int n = 1; n <= nmax; ++n) c[b * opt.n3 + n] *= std::sqrt(2.0 * (k + 1) * B.xi3(n));
        Field target = B.synthesis(B.x3_backward(c, blocks), k + 1);
        Field up = B.apply_raising(Hv[k]);
        r.raising = std::max(r.raising, diff_norm4(up, target) / B.norm4(target));
        if (k >= 1) {
            Field c2 = B.x3_forward(v, blocks);
            for (std::size_t b = 0; b < blocks; ++b)
                for (int n = 1; n <= nmax; ++n) c2[b * opt.n3 + n] *= std::sqrt(2.0 * k * B.xi3(n));
            Field t2 = B.synthesis(B.x3_backward(c2, blocks), k - 1);
            r.lowering = std::max(r.lowering, diff_norm4(B.apply_lowering(Hv[k]), t2) / B.norm4(t2));
        }
        Field back = B.analysis(Hv[k], k);
        Field d(back.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = back[i] - v[i];
        r.analysis_synthesis = std::max(r.analysis_synthesis, B.norm3(d) / nv);
    }
    r.lowering_ground = B.norm4(B.apply_lowering(Hv[0])) / nv;

    // Parseval on squeezed, displaced Gaussians (their level content decays fast)
    std::uniform_real_distribution<double> U(-1, 1);
    Field u(B.size4(), 0.0);
    {
        const std::size_t blocks = std::size_t(opt.n0) * opt.n2;
        Field t(B.size4(), 0.0);
        for (std::size_t b = 0; b < blocks; ++b)
            for (int n = 1; n <= nmax; ++n) {
                double xi = B.xi3(n), shift = 0.3 * U(rng) / std::sqrt(xi) * 2, sq = std::exp(0.35 * U(rng));
                cplx amp(g(rng), g(rng));
                for (int j = 0; j < opt.M; ++j) {
                    double x = B.x1()[std::size_t(j)] - shift;
                    t[(b * opt.M + j) * opt.n3 + n] = amp * std::exp(-0.5 * xi * sq * x * x);
                }
            }
        u = B.x3_backward(t, blocks * opt.M);
    }
    double sum = 0;
    for (int k = 0; k <= K; ++k) {
        double a = B.norm3(B.analysis(u, k));
        sum += a * a;
    }
    double nu2 = B.inner4(u, u).real();
    r.parseval = std::abs(sum - nu2) / nu2;

    // quantization checks on a state inside the represented levels
    Field s(B.size4(), 0.0);
    for (int k = 0; k <= K; ++k) {
        Field vk = random3();
        for (auto& x : vk) x *= std::exp(-0.1 * k);
        Field hk = B.synthesis(vk, k);
        for (std::size_t i = 0; i < s.size(); ++i) s[i] += hk[i];
    }
    const double ns = B.norm4(s);
    r.quantize_identity = diff_norm4(B.landau_quantize([](double, double, double, double, double) { return cplx(1.0); }, s), s) / ns;
    Field qo = B.landau_quantize([](double om, double, double, double, double) { return cplx(om); }, s);
    r.quantize_omega = diff_norm4(qo, B.apply_omega(s)) / B.norm4(qo);
    LandauSymbol real_sym = [](double om, double x0, double, double x3, double xi) {
        return cplx((1.0 + 0.3 * std::cos(2 * kPi * x3) + 0.2 * std::sin(2 * kPi * x0)) * (om / xi + 0.05 * xi));
    };
    Field t2(B.size4(), 0.0);
    for (int k = 0; k <= K; k += 2) {
        Field hk = B.synthesis(random3(), k);
        for (std::size_t i = 0; i < t2.size(); ++i) t2[i] += hk[i];
    }
    Field As = B.landau_quantize(real_sym, s), At = B.landau_quantize(real_sym, t2);
    r.quantize_symmetry = std::abs(B.inner4(As, t2) - B.inner4(s, At)) /
                          (B.norm4(As) * B.norm4(t2) + B.norm4(s) * B.norm4(At));

    for (int k = 0; k <= 10; ++k)
        for (double x = -4; x <= 4; x += 0.125)
            r.rodrigues = std::max(r.rodrigues, std::abs(hermite_function(k, x) - hermite_function_direct(k, x)));
    return r;
}

}  // namespace qc
