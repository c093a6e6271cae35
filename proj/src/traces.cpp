#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "qc/spectral.hpp"

namespace qc {

namespace {
constexpr double kPi = std::numbers::pi;
}

long long counting_function(const SpectrumResult& s, double lambda) {
    if (lambda > s.lambda_max * (1 + 1e-14))
        throw OutOfRange("lambda beyond the completeness bound of the spectrum");
    long long n = 0;
    for (std::size_t i = 0; i < s.eigenvalues.size() && s.eigenvalues[i] <= lambda; ++i) n += s.multiplicities[i];
    return n;
}

double weyl_envelope(const SpectrumResult& s) {
    double K = 0;
    long long n = 0;
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
        n += s.multiplicities[i];
        double l = s.eigenvalues[i];
        if (l >= 0.5 * s.lambda_max) {
            // N is right-continuous, the supremum of N(l)/l^{5/2} on [l_i, l_{i+1}) sits at l_i
            K = std::max(K, double(n) / std::pow(l, 2.5));
        }
    }
    if (K == 0 && s.lambda_max > 0) K = double(n) / std::pow(s.lambda_max, 2.5);
    return 1.5 * K;
}

namespace {
double heat_tail(double K, double t, double lambda_max) {
    // sum_{l > L} e^{-t l} <= t int_L^inf N(l) e^{-t l} dl <= K t^{-5/2} Gamma(7/2, t L)
    return K * std::pow(t, -2.5) * boost::math::tgamma(3.5, t * lambda_max);
}
double heat_sum(const SpectrumResult& s, double t) {
    double v = 0;
    for (std::size_t i = s.eigenvalues.size(); i-- > 0;) v += double(s.multiplicities[i]) * std::exp(-t * s.eigenvalues[i]);
    return v;
}
}  // namespace

TailedValue heat_trace(const SpectrumResult& s, double t) {
    if (!(t > 0)) throw ConfigError("heat time must be positive");
    TailedValue r;
    r.value = heat_sum(s, t);
    r.tail_bound = heat_tail(weyl_envelope(s), t, s.lambda_max);
    if (r.tail_bound > 0.1 * r.value)
        throw TailDominates("heat tail bound " + std::to_string(r.tail_bound) + " exceeds 10% of the value at t=" +
                            std::to_string(t));
    return r;
}

WeylFit weyl_fit(const SpectrumResult& s, int samples) {
    if (samples < 4) throw ConfigError("weyl fit needs at least 4 samples");
    if (s.lambda_max <= 0) throw ConfigError("empty spectrum");
    WeylFit f;
    const double hi = s.lambda_max, lo = hi / 10;
    Eigen::MatrixXd A(samples, 2);
    Eigen::VectorXd b(samples);
    // cumulative counts, walked once
    std::size_t idx = 0;
    long long n = 0;
    double sum = 0;
    for (int i = 0; i < samples; ++i) {
        double l = lo * std::pow(hi / lo, double(i) / (samples - 1));
        while (idx < s.eigenvalues.size() && s.eigenvalues[idx] <= l) n += s.multiplicities[idx++];
        double ratio = double(n) / std::pow(l, 2.5);
        f.lambdas.push_back(l);
        f.ratios.push_back(ratio);
        sum += ratio;
        // N / l^2 = C l^{1/2} + D
        A(i, 0) = std::sqrt(l);
        A(i, 1) = 1.0;
        b[i] = double(n) / (l * l);
    }
    f.cesaro_mean = sum / samples;
    Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
    f.lsq_leading = c[0];
    f.lsq_second = c[1];
    return f;
}

HeatExtrapolation heat_extrapolation(const SpectrumResult& s, double t_max, int samples) {
    if (samples < 4) throw ConfigError("heat extrapolation needs at least 4 samples");
    const double K = weyl_envelope(s);
    // smallest t whose tail is negligible against the trace itself
    auto ok = [&](double t) { return heat_tail(K, t, s.lambda_max) <= 1e-9 * heat_sum(s, t); };
    if (!ok(t_max)) throw TailDominates("spectrum too short for heat extrapolation at t_max");
    double a = t_max * 1e-4, b = t_max;
    if (ok(a)) b = a;
    for (int it = 0; it < 80 && b - a > 1e-12 * b; ++it) {
        double m = std::sqrt(a * b);
        (ok(m) ? b : a) = m;
    }
    const double t_min = b;
    if (t_min > 0.5 * t_max) throw TailDominates("heat extrapolation window is empty");
    HeatExtrapolation h;
    Eigen::MatrixXd A(samples, 3);
    Eigen::VectorXd y(samples);
    for (int i = 0; i < samples; ++i) {
        double t = t_min * std::pow(t_max / t_min, double(i) / (samples - 1));
        double v = heat_sum(s, t);
        h.ts.push_back(t);
        h.scaled.push_back(std::pow(t, 2.5) * v);
        h.tails.push_back(std::pow(t, 2.5) * heat_tail(K, t, s.lambda_max));
        A(i, 0) = 1;
        A(i, 1) = std::sqrt(t);
        A(i, 2) = t;
        y[i] = h.scaled.back();
    }
    Eigen::Vector3d c = A.colPivHouseholderQr().solve(y);
    h.limit = c[0];
    return h;
}

// ---------------------------------------------------------------------------

namespace {

double bump_profile(double u) { return std::abs(u) < 1 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0; }

// I_m = int |phi^{(m)}|, m = 0..32, exact polynomial derivatives integrated at 120 digits (rounded up below)
constexpr double kDerivL1[] = {
    0.44399381616807944, 0.73575888234288464, 3.1937190091105413, 35.647220501923462,
    1076.1291597081229, 59546.835433544969, 5316587.3948648926, 697617902.25421612,
    126373619812.96294, 30214907404416.061, 9216908451099019.3, 3.4933024280692794e+18,
    1.6103678957900054e+21, 8.8726985202626105e+23, 5.7580817857244589e+26, 4.3471613391182209e+29,
    3.7775495123875491e+32, 3.7434614421974528e+35, 4.1963538494083358e+38, 5.2831676094461401e+41,
    7.4228632833522649e+44, 1.1572315611700353e+48, 1.9916149172856725e+51, 3.7661906263226009e+54,
    7.7923859759197854e+57, 1.7572091755188037e+61, 4.3034753597738676e+64, 1.140871155533262e+68,
    3.2641017047480388e+71, 1.0050362057572473e+75, 3.3217028196800899e+78, 1.1755773224256647e+82,
    4.4449290607734556e+85,
};

// Transform of the unit bump phi(u) = exp(-1/(1-u^2)) on (-1,1):
// F(k) = int cos(k u) phi(u) du, tabulated with its derivative for cubic Hermite interpolation.
// The trapezoid rule converges faster than any power because phi is flat at the ends.
struct BumpTable {
    static constexpr int M = 2048;
    static constexpr double dk = 0.02;
    static constexpr double kmax = 600.0;
    std::vector<double> F, dF, sup;  // sup[i] = max_{k >= k_i} |F|
    double F0 = 0;

    BumpTable() {
        const int nk = int(std::lround(kmax / dk)) + 2;
        std::vector<double> u(M + 1), p(M + 1);
        const double h = 2.0 / M;
        for (int j = 0; j <= M; ++j) {
            u[j] = -1 + j * h;
            p[j] = bump_profile(u[j]) * h;
        }
        F.resize(nk);
        dF.resize(nk);
        for (int i = 0; i < nk; ++i) {
            double k = i * dk, a = 0, b = 0;
            for (int j = 1; j < M; ++j) {
                a += std::cos(k * u[j]) * p[j];
                b -= u[j] * std::sin(k * u[j]) * p[j];
            }
            F[i] = a;
            dF[i] = b;
        }
        F0 = F[0];
        sup.resize(nk);
        double m = 0;
        for (int i = nk - 1; i >= 0; --i) sup[i] = m = std::max(m, std::abs(F[i]));
    }
    double eval(double k) const {
        k = std::abs(k);
        if (k >= kmax) return 0.0;
        int i = int(k / dk);
        double x = (k - i * dk) / dk;
        double h00 = (1 + 2 * x) * (1 - x) * (1 - x), h10 = x * (1 - x) * (1 - x);
        double h01 = x * x * (3 - 2 * x), h11 = x * x * (x - 1);
        return h00 * F[i] + h10 * dk * dF[i] + h01 * F[i + 1] + h11 * dk * dF[i + 1];
    }
    double bound(double k) const {
        k = std::abs(k);
        // |F(k)| <= I_m / k^m for every m
        double analytic = 1e300;
        if (k > 0)
            for (std::size_t m = 0; m < std::size(kDerivL1); ++m)
                analytic = std::min(analytic, 1.000001 * kDerivL1[m] / std::pow(k, double(m)));
        if (k >= kmax) return analytic;
        int i = int(k / dk);
        // the table only sees k < kmax, beyond that the analytic bound takes over
        return std::min(analytic, std::max(1.001 * sup[i] + 1e-13, bound(kmax)));
    }
};

const BumpTable& bump_table() {
    static const BumpTable t;
    return t;
}

}  // namespace

double Window::theta(double t) const {
    double u = (t - center) / width;
    if (kind == Gaussian) return std::exp(-0.5 * u * u);
    return bump_profile(u);
}

cplx Window::check(double s) const {
    const cplx phase = std::polar(1.0, s * center);
    if (kind == Gaussian) return phase * (width / std::sqrt(2 * kPi)) * std::exp(-0.5 * width * width * s * s);
    return phase * (width / (2 * kPi)) * bump_table().eval(s * width);
}

double Window::check_bound(double s) const {
    if (kind == Gaussian) return (width / std::sqrt(2 * kPi)) * std::exp(-0.5 * width * width * s * s);
    return (width / (2 * kPi)) * bump_table().bound(s * width);
}

WaveValue smoothed_wave_trace(const SpectrumResult& s, const Window& w, double lambda) {
    if (!(w.width > 0)) throw ConfigError("window width must be positive");
    WaveValue r;
    r.value = 0;
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i)
        r.value += double(s.multiplicities[i]) * w.check(std::sqrt(std::max(s.eigenvalues[i], 0.0)) - lambda);
    // summation by parts against the envelope N(sigma^2) <= K sigma^5 and the
    // nonincreasing bound B(sigma - lambda) >= |check|
    const double K = weyl_envelope(s);
    const double s0 = std::sqrt(s.lambda_max);
    if (s0 <= lambda) throw TailDominates("window centre beyond the spectral range");
    double tail = 0;
    const double ds = 0.01 / w.width;
    double sig = s0, prev = w.check_bound(s0 - lambda);
    for (int it = 0; it < 4000000; ++it) {
        double next = sig + ds * (1 + (sig - s0) / 10);
        double b = w.check_bound(next - lambda);
        tail += K * std::pow(next, 5) * (prev - b);
        sig = next;
        prev = b;
        if (K * std::pow(sig, 5) * b < 1e-16 * (1 + std::abs(r.value))) break;
    }
    r.tail_bound = tail;
    if (r.tail_bound > 0.1 * std::abs(r.value))
        throw TailDominates("wave tail bound " + std::to_string(r.tail_bound) + " exceeds 10% of |value|");
    return r;
}

}  // namespace qc
