#include "qc/dynamics.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numbers>
#include <random>

namespace qc {

namespace {

namespace ode = boost::numeric::odeint;

// Controlled dopri5 from 0 to t (either sign); throws StepFailure instead of stalling.
template <class State, class Sys>
void integrate_to(Sys&& sys, State& x, double t, const FlowOptions& o) {
    if (t == 0) return;
    auto stepper = ode::make_controlled(o.abs_tol, o.rel_tol, ode::runge_kutta_dopri5<State>());
    const double dir = t > 0 ? 1.0 : -1.0;
    double tc = 0, dt = dir * std::min(0.01, std::abs(t));
    long steps = 0;
    while (dir * (t - tc) > 1e-15 * std::abs(t)) {
        if (dir * dt > dir * (t - tc)) dt = t - tc;
        if (stepper.try_step(sys, x, tc, dt) == ode::success) {
            if (++steps > o.max_steps) throw StepFailure("step budget exhausted at t = " + std::to_string(tc));
            for (double v : x)
                if (!std::isfinite(v)) throw StepFailure("non-finite state at t = " + std::to_string(tc));
        } else if (std::abs(dt) < 1e-14 * std::max(1.0, std::abs(tc))) {
            throw StepFailure("step size underflow at t = " + std::to_string(tc));
        }
    }
}

using FlowState = std::array<double, 6>;  // x0..x3, w, quadrature slot

struct FieldEval {
    const PoppData* popp;
    double a_scale;
    int endpoint;  // 0 interior, +-1 on the invariant slices Xi0 = +-1
    const std::function<double(const BlowupState&)>* observable = nullptr;

    void operator()(const FlowState& s, FlowState& ds, double) const {
        Vec4<double> x{s[0], s[1], s[2], s[3]};
        PoppPoint<double> P = popp->at(x);
        double xi = endpoint != 0 ? double(endpoint) : std::tanh(0.5 * s[4]);
        for (int k = 0; k < 4; ++k) ds[k] = xi * P.Z[k];
        ds[4] = endpoint != 0 ? 0.0 : -2.0 * a_scale * P.A;
        ds[5] = observable ? (*observable)(BlowupState{x, xi}) : 0.0;
    }
};

int endpoint_of(double xi) {
    if (!(std::abs(xi) <= 1.0)) throw OutOfRange("Xi0 outside [-1,1]");
    if (xi == 1.0) return 1;
    if (xi == -1.0) return -1;
    return 0;
}

FlowState pack(const BlowupState& s) {
    FlowState f{s.x[0], s.x[1], s.x[2], s.x[3], 0.0, 0.0};
    if (endpoint_of(s.Xi0) == 0) f[4] = 2.0 * std::atanh(s.Xi0);
    return f;
}

BlowupState unpack(const FlowState& f, int endpoint) {
    return {{f[0], f[1], f[2], f[3]}, endpoint != 0 ? double(endpoint) : std::tanh(0.5 * f[4])};
}

// ---- trigonometric interpolation of periodic samples ----
std::vector<std::complex<double>> fourier_modes(const std::vector<double>& f) {
    const int n = int(f.size());
    const int K = n / 2;
    std::vector<std::complex<double>> c(2 * K + 1);
    for (int k = -K; k <= K; ++k) {
        std::complex<double> s = 0;
        for (int j = 0; j < n; ++j) s += f[j] * std::polar(1.0, -2 * std::numbers::pi * k * j / n);
        s /= double(n);
        if (n % 2 == 0 && std::abs(k) == K) s *= 0.5;
        c[k + K] = s;
    }
    return c;
}

double eval_modes(const std::vector<std::complex<double>>& c, double u) {
    const int K = int(c.size()) / 2;
    double r = 0;
    for (int k = -K; k <= K; ++k) r += (c[k + K] * std::polar(1.0, 2 * std::numbers::pi * k * u)).real();
    return r;
}

// int_0^u in units of the period
double integrate_modes(const std::vector<std::complex<double>>& c, double u) {
    const int K = int(c.size()) / 2;
    double r = c[K].real() * u;
    for (int k = -K; k <= K; ++k) {
        if (k == 0) continue;
        std::complex<double> ik(0, 2 * std::numbers::pi * k);
        r += (c[k + K] * (std::exp(ik * u) - 1.0) / ik).real();
    }
    return r;
}

double lattice_distance(const Vec4<double>& a, const Vec4<double>& b) {
    double d = 0;
    for (int k = 0; k < 4; ++k) {
        double u = a[k] - b[k];
        d = std::max(d, std::abs(u - std::round(u)));
    }
    return d;
}

}  // namespace

// ---- flow ----

ZhatFlow::ZhatFlow(PoppData popp, FlowOptions opt) : popp_(std::move(popp)), opt_(opt) {}

BlowupState ZhatFlow::operator()(const BlowupState& s0, double t) const {
    if (!std::isfinite(t)) throw OutOfRange("flow time must be finite");
    int e = endpoint_of(s0.Xi0);
    FlowState f = pack(s0);
    integrate_to(FieldEval{&popp_, opt_.a_scale, e}, f, t, opt_);
    return unpack(f, e);
}

std::vector<BlowupState> ZhatFlow::trajectory(const BlowupState& s0, double t, int n) const {
    if (n < 1) throw ConfigError("trajectory needs at least one interval");
    int e = endpoint_of(s0.Xi0);
    FlowState f = pack(s0);
    std::vector<BlowupState> out{s0};
    FieldEval F{&popp_, opt_.a_scale, e};
    for (int i = 1; i <= n; ++i) {
        integrate_to(F, f, t / n, opt_);
        out.push_back(unpack(f, e));
    }
    return out;
}

double ZhatFlow::birkhoff_average(const std::function<double(const BlowupState&)>& b, const BlowupState& s0,
                                  double T) const {
    if (!(T > 0)) throw OutOfRange("averaging time must be positive");
    int e = endpoint_of(s0.Xi0);
    FlowState f = pack(s0);
    integrate_to(FieldEval{&popp_, opt_.a_scale, e, &b}, f, T, opt_);
    return f[5] / T;
}

double ZhatFlow::divergence(const BlowupState& s) const {
    PoppPoint<D1> P = popp_point<D1>(popp_.structure(), seed(s.x));
    // div_p(Z) = sum_k d_k(p Z^k) / p
    double divZ = 0;
    for (int k = 0; k < 4; ++k) divZ += (P.density * P.Z[k]).d[k];
    divZ /= P.density.v;
    // the Xi0 part: (1-Xi^2)^{-1} d_Xi[-s A (1-Xi^2)^2] = 4 s A Xi
    return s.Xi0 * divZ + 4.0 * opt_.a_scale * P.A.v * s.Xi0;
}

BlowupState zhat_flow(const PoppData& popp, const BlowupState& s0, double t) { return ZhatFlow(popp)(s0, t); }

double closed_form_xi(double xi0, double int_A) {
    if (xi0 == 1.0 || xi0 == -1.0) return xi0;
    double e = std::exp(2.0 * int_A);
    // tanh(atanh(xi0) - int_A)
    return (1 + xi0 - (1 - xi0) * e) / (1 + xi0 + (1 - xi0) * e);
}

// ---- orbits ----

double CharacteristicOrbit::A(double tau) const { return eval_modes(A_modes, tau / T); }
double CharacteristicOrbit::rho(double tau) const { return eval_modes(rho_modes, tau / T); }
double CharacteristicOrbit::A_integral(double tau) const { return T * integrate_modes(A_modes, tau / T); }

CharacteristicOrbit make_orbit(double T, std::vector<double> A_samples, std::vector<double> rho_samples,
                               double tol) {
    if (!(T > 0)) throw ConfigError("orbit period must be positive");
    if (A_samples.size() < 2 || rho_samples.size() != A_samples.size())
        throw ConfigError("orbit samples must have matching length >= 2");
    CharacteristicOrbit o;
    o.T = T;
    for (double a : A_samples) o.invariance_residual = std::max(o.invariance_residual, std::abs(a));
    o.volume_preserving = o.invariance_residual <= tol;
    double sup = *std::max_element(rho_samples.begin(), rho_samples.end());
    if (!(sup > 0)) throw ConfigError("rho_hat samples must be positive");
    for (double& r : rho_samples) r /= sup;
    o.A_modes = fourier_modes(A_samples);
    o.rho_modes = fourier_modes(rho_samples);
    o.A_samples = std::move(A_samples);
    o.rho_hat = std::move(rho_samples);
    return o;
}

CharacteristicOrbit characteristic_orbit(const PoppData& popp, const Vec4<double>& x, double T, int n,
                                         double tol) {
    if (n < 4) throw ConfigError("need at least 4 orbit samples");
    using S = std::array<double, 4>;
    auto sys = [&](const S& y, S& dy, double) { dy = popp.Z(y); };
    FlowOptions o;
    S y = x;
    std::vector<double> As, rs;
    for (int i = 0; i < n; ++i) {
        As.push_back(popp.A(y));
        rs.push_back(popp.rho_hat(y));
        integrate_to(sys, y, T / n, o);
    }
    double gap = lattice_distance(y, x);
    if (gap > 1e-8) throw ConfigError("integral curve does not close: gap " + std::to_string(gap));
    CharacteristicOrbit orb = make_orbit(T, std::move(As), std::move(rs), tol);
    orb.start = x;
    return orb;
}

std::vector<CharacteristicOrbit> model_orbits(const PoppData& popp) {
    const std::string& name = popp.structure().info().name;
    std::vector<CharacteristicOrbit> out;
    if (name == "trig_torus" || name == "heisenberg_circle") {
        // every integral curve of Z is a unit circle in x0; two representatives
        out.push_back(characteristic_orbit(popp, {0.0, 0.0, 0.0, 0.0}, 1.0));
        out.push_back(characteristic_orbit(popp, {0.0, 0.3, 0.6, 0.1}, 1.0));
    } else if (name == "mapping_torus") {
        // the suspension of the fixed point
        out.push_back(characteristic_orbit(popp, {0.0, 0.0, 0.0, 0.0}, 1.0));
    } else {
        throw UnsupportedModel("no closed characteristics supplied for model '" + name + "'");
    }
    return out;
}

OrbitState orbit_flow(const CharacteristicOrbit& orbit, const OrbitState& s0, double t, FlowOptions opt) {
    int e = endpoint_of(s0.Xi0);
    using S = std::array<double, 2>;
    S y{s0.tau, e != 0 ? 0.0 : 2.0 * std::atanh(s0.Xi0)};
    auto sys = [&](const S& v, S& dv, double) {
        double xi = e != 0 ? double(e) : std::tanh(0.5 * v[1]);
        dv[0] = xi;
        dv[1] = e != 0 ? 0.0 : -2.0 * opt.a_scale * orbit.A(v[0]);
    };
    integrate_to(sys, y, t, opt);
    return {y[0], e != 0 ? double(e) : std::tanh(0.5 * y[1])};
}

double hat_T(const CharacteristicOrbit& orbit) {
    if (!orbit.volume_preserving) return orbit.T;
    double gmax = 0;
    for (double r : orbit.rho_hat) gmax = std::max(gmax, std::abs(1 - r) / (1 + r));
    if (gmax <= 1e-12) return kInfinity;

    // no clamp at 0: the interpolant may overshoot 1 by rounding, and a kink stalls the quadrature
    auto g = [&](double tau) {
        double r = orbit.rho(tau);
        return (1 - r) / (1 + r);
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    auto G = [&](double u) { return u <= 0 ? 0.0 : GK::integrate(g, 0.0, u, 8, 1e-14); };
    const double T = orbit.T;
    const double GT = G(T);
    double m = std::floor(T / GT);
    double r = T - m * GT;
    if (r <= 1e-14 * T) {  // lands on a period boundary; take the earliest hit
        m -= 1;
        r += GT;
    }
    boost::uintmax_t iters = 200;
    auto res = boost::math::tools::toms748_solve([&](double u) { return G(u) - r; }, 0.0, T, -r, GT - r,
                                                 boost::math::tools::eps_tolerance<double>(50), iters);
    double u = 0.5 * (res.first + res.second);
    return m * T + u;
}

// ---- period spectrum ----

bool PeriodSpectrum::contains(double t, double tol) const {
    for (const Band& b : bands)
        if (t >= b.lo - tol * std::max(1.0, std::abs(b.lo)) && t <= b.hi + tol * std::max(1.0, std::abs(b.hi)))
            return true;
    return false;
}

PeriodSpectrum period_spectrum(const std::vector<PeriodPair>& orbits, double T_max) {
    if (!(T_max > 0)) throw ConfigError("T_max must be positive");
    std::vector<Band> pos;
    for (const PeriodPair& p : orbits) {
        if (!(p.T > 0) || !(p.T_hat >= p.T)) throw ConfigError("need 0 < T <= T_hat");
        for (long n = 1; n * p.T <= T_max * (1 + 1e-12); ++n)
            pos.push_back({n * p.T, std::min(T_max, n * p.T_hat)});
    }
    std::sort(pos.begin(), pos.end(), [](const Band& a, const Band& b) { return a.lo < b.lo; });
    std::vector<Band> merged;
    for (const Band& b : pos) {
        if (!merged.empty() && b.lo <= merged.back().hi * (1 + 1e-12))
            merged.back().hi = std::max(merged.back().hi, b.hi);
        else
            merged.push_back(b);
    }
    PeriodSpectrum s;
    for (auto it = merged.rbegin(); it != merged.rend(); ++it) s.bands.push_back({-it->hi, -it->lo});
    for (const Band& b : merged) s.bands.push_back(b);
    return s;
}

int first_merge_index(const PeriodPair& p, int n_max) {
    for (int n = 1; n <= n_max; ++n)
        if (n * p.T_hat >= (n + 1) * p.T * (1 - 1e-12)) return n;
    return -1;
}

// ---- measure ----

MeasureCheck measure_invariance_check(const PoppData& popp, int sample_count, double t, double a_scale,
                                      unsigned seed) {
    FlowOptions opt;
    opt.a_scale = a_scale;
    ZhatFlow flow(popp, opt);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, 1.0), uxi(-0.95, 0.95);
    MeasureCheck m;
    const int n = 32;  // Simpson nodes along each trajectory
    for (int i = 0; i < sample_count; ++i) {
        BlowupState s{{ux(rng), ux(rng), ux(rng), ux(rng)}, uxi(rng)};
        // start some trajectories on the mapping-torus fixed orbit region
        if (i % 4 == 0) s.x = {s.x[0], 0.05 * s.x[1], 0.05 * s.x[2], 0.05 * s.x[3]};
        std::vector<BlowupState> tr = flow.trajectory(s, t, n);
        double integral = 0;
        for (int j = 0; j <= n; ++j) {
            double d = flow.divergence(tr[j]);
            m.max_divergence = std::max(m.max_divergence, std::abs(d));
            double w = (j == 0 || j == n) ? 1 : (j % 2 ? 4 : 2);
            integral += w * d;
        }
        integral *= t / (3.0 * n);
        m.max_drift = std::max(m.max_drift, std::abs(std::expm1(integral)));
        ++m.samples;
    }
    return m;
}

}  // namespace qc
