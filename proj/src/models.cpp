#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include "qc/fftw_lock.hpp"
#include "qc/geometry.hpp"

namespace qc::models {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class T>
T zero() {
    return T(0.0);
}
}  // namespace

QuasiContactStructure trig_torus(int orientation) {
    StructureInfo info;
    info.name = "trig_torus";
    info.orientation = orientation;
    return QuasiContactStructure(
        [](const auto& x) {
            using T = std::decay_t<decltype(x[0])>;
            T c = cos(kTwoPi * x[3]), s = sin(kTwoPi * x[3]);
            T o = zero<T>(), one(1.0);
            FrameData<T> fd;
            fd.a = {o, c, s, o};
            fd.e[0] = {one, o, o, o};
            fd.e[1] = {o, -s, c, o};
            fd.e[2] = {o, o, o, one};
            return fd;
        },
        info);
}

QuasiContactStructure heisenberg_circle(int orientation) {
    StructureInfo info;
    info.name = "heisenberg_circle";
    info.orientation = orientation;
    info.periodic = false;
    return QuasiContactStructure(
        [](const auto& x) {
            using T = std::decay_t<decltype(x[0])>;
            T o = zero<T>(), one(1.0);
            FrameData<T> fd;
            fd.a = {o, o, x[1], one};
            fd.e[0] = {one, o, o, o};
            fd.e[1] = {o, one, o, o};
            fd.e[2] = {o, o, one, -x[1]};
            return fd;
        },
        info);
}

namespace {
// Contact vector field of the Hamiltonian x3-scaled bump, pushed from Darboux coordinates
// X = (2 pi y3, v, 2u - v X1) to the torus coordinates y = (x1,x2,x3) reduced to [-1/2,1/2).
template <class T>
std::array<T, 3> expanding_field(const Vec4<T>& x, double eps) {
    std::array<T, 3> y;
    for (int i = 0; i < 3; ++i) y[i] = x[i + 1] - std::round(value_of(x[i + 1]));
    T th = kTwoPi * y[2];
    T c = cos(th), s = sin(th);
    T u = y[0] * c + y[1] * s;
    T v = -y[0] * s + y[1] * c;
    T X1 = th, X2 = v, X3 = 2.0 * u - v * X1;
    T r2 = X1 * X1 + X2 * X2 + X3 * X3;
    std::array<T, 3> h{T(0.0), T(0.0), T(0.0)};
    if (value_of(r2) >= eps * eps) return h;

    T chi(1.0), dchi_over_r(0.0);  // dchi/d|X| divided by |X|
    if (value_of(r2) > 0.25 * eps * eps) {
        T r = sqrt(r2);
        T rho = r / eps;
        chi = bump(rho);
        T t = 2.0 * rho - 1.0;
        T t3 = t * t * t, m = 1.0 - t;
        T dS = 140.0 * t3 * m * m * m;
        dchi_over_r = -2.0 * dS / (eps * r);
    }
    T phi = X3 * chi;
    T p1 = X3 * dchi_over_r * X1;
    T p2 = X3 * dchi_over_r * X2;
    T p3 = chi + X3 * dchi_over_r * X3;
    T H1 = -(p2 - X1 * p3);
    T H2 = p1 + X2 * p3;
    T H3 = 2.0 * phi - X1 * p1 - X2 * p2;

    T j11 = 0.5 * X2 * c - u * s - v * c, j12 = 0.5 * X1 * c - s, j13 = 0.5 * c;
    T j21 = 0.5 * X2 * s + u * c - v * s, j22 = 0.5 * X1 * s + c, j23 = 0.5 * s;
    h[0] = j11 * H1 + j12 * H2 + j13 * H3;
    h[1] = j21 * H1 + j22 * H2 + j23 * H3;
    h[2] = H1 / kTwoPi;
    return h;
}
}  // namespace

QuasiContactStructure mapping_torus(double eps, int orientation) {
    StructureInfo info;
    info.name = "mapping_torus";
    info.orientation = orientation;
    return QuasiContactStructure(
        [eps](const auto& x) {
            using T = std::decay_t<decltype(x[0])>;
            T c = cos(kTwoPi * x[3]), s = sin(kTwoPi * x[3]);
            T o = zero<T>(), one(1.0);
            auto H = expanding_field(x, eps);
            FrameData<T> fd;
            fd.a = {-(c * H[0] + s * H[1]), c, s, o};
            fd.e[0] = {one, H[0], H[1], H[2]};
            fd.e[1] = {o, -s, c, o};
            fd.e[2] = {o, o, o, one};
            return fd;
        },
        info);
}

namespace {

// Real trigonometric interpolant of 16 periodic coefficient tables on an n^4 grid.
struct Table {
    int n = 0;
    // Fourier coefficients per component, index ((k0*n+k1)*n+k2)*n+k3
    std::array<std::vector<std::complex<double>>, 16> hat;

    template <class T>
    FrameData<T> eval(const Vec4<T>& x) const {
        // per-axis cos/sin of 2 pi k x for k in [-n/2, n/2)
        std::array<std::vector<T>, 4> cs, sn;
        for (int ax = 0; ax < 4; ++ax) {
            cs[ax].resize(n);
            sn[ax].resize(n);
            for (int k = 0; k < n; ++k) {
                int kk = k <= n / 2 ? k : k - n;
                T th = kTwoPi * double(kk) * x[ax];
                cs[ax][k] = cos(th);
                sn[ax][k] = sin(th);
            }
        }
        std::array<T, 16> acc;
        for (auto& a : acc) a = T(0.0);
        for (int k0 = 0; k0 < n; ++k0)
            for (int k1 = 0; k1 < n; ++k1) {
                T c01 = cs[0][k0] * cs[1][k1] - sn[0][k0] * sn[1][k1];
                T s01 = sn[0][k0] * cs[1][k1] + cs[0][k0] * sn[1][k1];
                for (int k2 = 0; k2 < n; ++k2) {
                    T c012 = c01 * cs[2][k2] - s01 * sn[2][k2];
                    T s012 = s01 * cs[2][k2] + c01 * sn[2][k2];
                    for (int k3 = 0; k3 < n; ++k3) {
                        T cc = c012 * cs[3][k3] - s012 * sn[3][k3];
                        T ss = s012 * cs[3][k3] + c012 * sn[3][k3];
                        std::size_t idx = ((std::size_t(k0) * n + k1) * n + k2) * n + k3;
                        for (int q = 0; q < 16; ++q) {
                            const auto& h = hat[q][idx];
                            if (h.real() == 0.0 && h.imag() == 0.0) continue;
                            acc[q] += h.real() * cc - h.imag() * ss;
                        }
                    }
                }
            }
        FrameData<T> fd;
        for (int k = 0; k < 4; ++k) fd.a[k] = acc[k];
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 4; ++k) fd.e[i][k] = acc[4 + 4 * i + k];
        return fd;
    }
};

}  // namespace

QuasiContactStructure from_table(int n, const std::vector<FrameData<double>>& samples,
                                 std::string name, int orientation) {
    std::size_t total = std::size_t(n) * n * n * n;
    if (n < 2 || n % 2 || samples.size() != total)
        throw ConfigError("table model needs an even n >= 2 and n^4 samples");
    auto tab = std::make_shared<Table>();
    tab->n = n;
    std::vector<std::complex<double>> buf(total);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        const int dims[4] = {n, n, n, n};
        plan = fftw_plan_dft(4, dims, reinterpret_cast<fftw_complex*>(buf.data()),
                                reinterpret_cast<fftw_complex*>(buf.data()), FFTW_FORWARD,
                                FFTW_ESTIMATE);
    }
    for (int q = 0; q < 16; ++q) {
        for (std::size_t i = 0; i < total; ++i) {
            const auto& fd = samples[i];
            buf[i] = q < 4 ? fd.a[q] : fd.e[(q - 4) / 4][(q - 4) % 4];
        }
        fftw_execute(plan);
        tab->hat[q].resize(total);
        for (std::size_t i = 0; i < total; ++i) {
            // the Nyquist index is evaluated as a cosine; halving is not needed because
            // k = n/2 is mapped to +n/2 only (real part of the interpolant)
            std::complex<double> h = buf[i] / double(total);
            if (std::abs(h) < 1e-15) h = 0.0;
            tab->hat[q][i] = h;
        }
    }
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    StructureInfo info;
    info.name = std::move(name);
    info.orientation = orientation;
    info.numeric_derivatives = true;
    return QuasiContactStructure([tab](const auto& x) { return tab->eval(x); }, info);
}

QuasiContactStructure sample_to_table(const QuasiContactStructure& qc, int n) {
    std::vector<FrameData<double>> samples;
    samples.reserve(std::size_t(n) * n * n * n);
    for (int i0 = 0; i0 < n; ++i0)
        for (int i1 = 0; i1 < n; ++i1)
            for (int i2 = 0; i2 < n; ++i2)
                for (int i3 = 0; i3 < n; ++i3)
                    samples.push_back(qc.eval(
                        Vec4<double>{double(i0) / n, double(i1) / n, double(i2) / n, double(i3) / n}));
    return from_table(n, samples, qc.info().name + "_table", qc.orientation());
}

QuasiContactStructure by_name(const std::string& name, int orientation) {
    if (name == "trig_torus") return trig_torus(orientation);
    if (name == "heisenberg_circle") return heisenberg_circle(orientation);
    if (name == "mapping_torus") return mapping_torus(0.3, orientation);
    throw UnsupportedModel("unknown model '" + name + "'");
}

std::vector<std::string> names() { return {"trig_torus", "heisenberg_circle", "mapping_torus"}; }

}  // namespace qc::models
