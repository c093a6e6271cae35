#include "qc/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace qc {

namespace {

template <class T>
T dot4(const Vec4<T>& u, const Vec4<T>& v) {
    T r(0.0);
    for (int i = 0; i < 4; ++i) r += u[i] * v[i];
    return r;
}

template <class T>
T det3(const std::array<std::array<T, 3>, 3>& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

// determinant of the 4x4 matrix with the given rows
template <class T>
T det4(const Vec4<T>& r0, const Vec4<T>& r1, const Vec4<T>& r2, const Vec4<T>& r3) {
    const std::array<const Vec4<T>*, 4> rows{&r0, &r1, &r2, &r3};
    T acc(0.0);
    for (int c = 0; c < 4; ++c) {
        std::array<std::array<T, 3>, 3> m;
        for (int i = 1; i < 4; ++i) {
            int jj = 0;
            for (int j = 0; j < 4; ++j) {
                if (j == c) continue;
                m[i - 1][jj++] = (*rows[i])[j];
            }
        }
        T term = r0[c] * det3(m);
        if (c % 2) acc -= term;
        else acc += term;
    }
    return acc;
}

template <class T>
std::array<T, 3> cross(const std::array<T, 3>& u, const std::array<T, 3>& v) {
    return {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
}

template <class T>
Vec4<T> combine(const std::array<T, 3>& c, const std::array<Vec4<T>, 3>& e) {
    Vec4<T> r{T(0.0), T(0.0), T(0.0), T(0.0)};
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 4; ++k) r[k] += c[i] * e[i][k];
    return r;
}

template <class S>
Vec4<S> values(const Vec4<D<S>>& v) {
    return {v[0].v, v[1].v, v[2].v, v[3].v};
}

// bracket [u,w] from first-order jets of u and w
template <class S>
Vec4<S> bracket(const Vec4<D<S>>& u, const Vec4<D<S>>& w) {
    Vec4<S> r;
    for (int k = 0; k < 4; ++k) {
        S acc(0.0);
        for (int j = 0; j < 4; ++j) acc += u[j].v * w[k].d[j] - w[j].v * u[k].d[j];
        r[k] = acc;
    }
    return r;
}

}  // namespace

template <class S>
LocalFrame<S> local_frame(const FrameData<D<S>>& fd, int orientation) {
    LocalFrame<S> L;
    for (int k = 0; k < 4; ++k) L.a[k] = fd.a[k].v;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 4; ++k) L.e[i][k] = fd.e[i][k].v;
    for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) L.da[j][k] = fd.a[k].d[j] - fd.a[j].d[k];

    std::array<std::array<S, 3>, 3> M;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            S acc(0.0);
            for (int p = 0; p < 4; ++p)
                for (int q = 0; q < 4; ++q) acc += L.e[i][p] * L.e[j][q] * L.da[p][q];
            M[i][j] = acc;
        }
    // kernel of the antisymmetric matrix M
    std::array<S, 3> w{M[1][2], -M[0][2], M[0][1]};
    S nw = sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
    if (!(value_of(nw) > 1e-4))
        throw DegenerateRank("da restricted to E has rank < 2 (|w| = " +
                             std::to_string(value_of(nw)) + ")");
    L.f = 1.0 / nw;
    for (int i = 0; i < 3; ++i) L.zc[i] = w[i] / nw;

    int k = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(value_of(L.zc[i])) < std::abs(value_of(L.zc[k]))) k = i;
    std::array<S, 3> u{S(0.0), S(0.0), S(0.0)};
    u[k] = S(1.0);
    std::array<S, 3> c1 = cross(u, L.zc);
    S n1 = sqrt(c1[0] * c1[0] + c1[1] * c1[1] + c1[2] * c1[2]);
    for (auto& c : c1) c = c / n1;
    std::array<S, 3> c2 = cross(L.zc, c1);  // (b1, b2, w) right-handed, so da(b1,b2) = |w|

    L.Z = combine(L.zc, L.e);
    L.b1 = combine(c1, L.e);
    L.b2 = combine(c2, L.e);
    S aa = dot4(L.a, L.a);
    for (int i = 0; i < 4; ++i) L.T[i] = L.a[i] / aa;

    S det = det4(L.Z, L.b1, L.b2, L.T);
    double sgn = (value_of(det) > 0 ? 1.0 : -1.0) * orientation;
    if (sgn < 0) {
        for (auto& z : L.zc) z = -z;
        for (auto& z : L.Z) z = -z;
    }
    L.density = value_of(det) > 0 ? L.f / det : -L.f / det;
    return L;
}

template <class S>
LocalFrame<S> local_frame_at(const QuasiContactStructure& qc, const Vec4<S>& x) {
    return local_frame<S>(qc.eval(seed(x)), qc.orientation());
}

template <class S>
PoppPoint<S> popp_point(const QuasiContactStructure& qc, const Vec4<S>& x) {
    using DS = D<S>;
    Vec4<DS> xd = seed(x);
    LocalFrame<DS> L = local_frame<DS>(qc.eval(seed(xd)), qc.orientation());

    PoppPoint<S> P;
    P.f = L.f.v;
    P.density = L.density.v;
    Vec4<S> df;
    for (int j = 0; j < 4; ++j) df[j] = L.f.d[j];
    Mat4<S> da;
    for (int j = 0; j < 4; ++j) {
        P.a[j] = L.a[j].v;
        for (int k = 0; k < 4; ++k) da[j][k] = L.da[j][k].v;
    }
    for (int j = 0; j < 4; ++j) {
        P.a_g[j] = P.f * P.a[j];
        for (int k = 0; k < 4; ++k)
            P.da_g[j][k] = df[j] * P.a[k] - df[k] * P.a[j] + P.f * da[j][k];
    }
    P.Z = values<S>(L.Z);
    P.b1 = values<S>(L.b1);
    P.b2 = values<S>(L.b2);
    Vec4<S> B = bracket<S>(L.b1, L.b2);

    S agB = dot4(P.a_g, B);
    S w12 = P.form(P.b1, P.b2);
    if (!(std::abs(value_of(agB)) > 1e-12) || !(std::abs(value_of(w12)) > 1e-12))
        throw SingularSystem("Reeb system not uniquely solvable: a_g([b1,b2]) = " +
                             std::to_string(value_of(agB)));
    S c3 = 1.0 / agB;
    S c2 = -c3 * P.form(B, P.b1) / P.form(P.b2, P.b1);
    S c1 = -c3 * P.form(B, P.b2) / w12;
    for (int k = 0; k < 4; ++k) P.R[k] = c1 * P.b1[k] + c2 * P.b2[k] + c3 * B[k];
    P.A = 0.5 * P.form(P.R, P.Z);
    return P;
}

template LocalFrame<double> local_frame<double>(const FrameData<D1>&, int);
template LocalFrame<D1> local_frame<D1>(const FrameData<D2>&, int);
template LocalFrame<D2> local_frame<D2>(const FrameData<D3>&, int);
template LocalFrame<double> local_frame_at<double>(const QuasiContactStructure&, const Vec4<double>&);
template LocalFrame<D1> local_frame_at<D1>(const QuasiContactStructure&, const Vec4<D1>&);
template LocalFrame<D2> local_frame_at<D2>(const QuasiContactStructure&, const Vec4<D2>&);
template PoppPoint<double> popp_point<double>(const QuasiContactStructure&, const Vec4<double>&);
template PoppPoint<D1> popp_point<D1>(const QuasiContactStructure&, const Vec4<D1>&);

void VectorFieldSpec::eval_with_partials(const Vec4<double>& x, Vec4<double>& v,
                                         Mat4<double>& jac) const {
    Vec4<D1> r = (*this)(seed(x));
    for (int k = 0; k < 4; ++k) {
        v[k] = r[k].v;
        for (int j = 0; j < 4; ++j) jac[j][k] = r[k].d[j];
    }
}

Vec4<double> lie_bracket(const VectorFieldSpec& v, const VectorFieldSpec& w, const Vec4<double>& x) {
    Vec4<D1> xd = seed(x);
    return bracket<double>(v(xd), w(xd));
}

Vec4<double> characteristic_field(const QuasiContactStructure& qc, const Vec4<double>& x) {
    return local_frame_at<double>(qc, x).Z;
}

QuasiContactStructure QuasiContactStructure::with_orientation(int sign) const {
    QuasiContactStructure r = *this;
    r.info_.orientation = sign >= 0 ? 1 : -1;
    return r;
}

QuasiContactStructure QuasiContactStructure::rotated_frame(double theta) const {
    QuasiContactStructure inner = *this;
    double c = std::cos(theta), s = std::sin(theta);
    StructureInfo info = info_;
    info.name += "_rotated";
    return QuasiContactStructure(
        [inner, c, s](const auto& x) {
            auto fd = inner.eval(x);
            auto e2 = fd.e[1], e3 = fd.e[2];
            for (int k = 0; k < 4; ++k) {
                fd.e[1][k] = c * e2[k] + s * e3[k];
                fd.e[2][k] = -s * e2[k] + c * e3[k];
            }
            return fd;
        },
        info);
}

VectorFieldSpec QuasiContactStructure::frame_field(int i) const {
    QuasiContactStructure inner = *this;
    return VectorFieldSpec([inner, i](const auto& x) { return inner.eval(x).e[i]; });
}

VectorFieldSpec QuasiContactStructure::one_form() const {
    QuasiContactStructure inner = *this;
    return VectorFieldSpec([inner](const auto& x) { return inner.eval(x).a; });
}

double PoppData::f(const Vec4<double>& x) const { return local_frame_at<double>(qc_, x).f; }
Vec4<double> PoppData::Z(const Vec4<double>& x) const { return local_frame_at<double>(qc_, x).Z; }
Vec4<double> PoppData::R(const Vec4<double>& x) const { return at(x).R; }
double PoppData::rho_hat(const Vec4<double>& x) const { return f(x); }
double PoppData::popp_density(const Vec4<double>& x) const {
    return local_frame_at<double>(qc_, x).density;
}
double PoppData::A(const Vec4<double>& x) const { return at(x).A; }

namespace {
template <class Fn>
void for_lattice(int n, Fn&& fn) {
    for (int i0 = 0; i0 < n; ++i0)
        for (int i1 = 0; i1 < n; ++i1)
            for (int i2 = 0; i2 < n; ++i2)
                for (int i3 = 0; i3 < n; ++i3)
                    fn(Vec4<double>{double(i0) / n, double(i1) / n, double(i2) / n, double(i3) / n});
}
}  // namespace

StructureCheck check_structure(const QuasiContactStructure& qc, int n) {
    StructureCheck c;
    const auto& g = qc.info().frame_gram;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            c.max_gram_defect = std::max(c.max_gram_defect, std::abs(g[3 * i + j] - (i == j ? 1.0 : 0.0)));
    for_lattice(n, [&](const Vec4<double>& x) {
        FrameData<double> fd = qc.eval(x);
        for (int i = 0; i < 3; ++i)
            c.max_a_on_frame = std::max(c.max_a_on_frame, std::abs(dot4(fd.a, fd.e[i])));
        LocalFrame<double> L = local_frame_at<double>(qc, x);
        c.min_rank_gap = std::min(c.min_rank_gap, 1.0 / L.f);
    });
    return c;
}

PoppData popp_data(const QuasiContactStructure& qc, int n) {
    StructureCheck c = check_structure(qc, n);
    if (c.max_a_on_frame > 1e-12)
        throw DegenerateRank("frame is not contained in ker a (residual " +
                             std::to_string(c.max_a_on_frame) + ")");
    for_lattice(n, [&](const Vec4<double>& x) { (void)popp_point<double>(qc, x); });
    return PoppData(qc);
}

InvarianceReport invariance_report(const QuasiContactStructure& qc, int n, double tol) {
    InvarianceReport rep;
    for_lattice(n, [&](const Vec4<double>& x) {
        PoppPoint<D1> P = popp_point<D1>(qc, seed(x));
        ++rep.samples;
        double daRZ = 2.0 * P.A.v;
        rep.max_da_RZ = std::max(rep.max_da_RZ, std::abs(daRZ));

        // L_Z a_g by the coordinate formula
        for (int k = 0; k < 4; ++k) {
            double l = 0;
            for (int j = 0; j < 4; ++j) l += P.Z[j].v * P.a_g[k].d[j] + P.a_g[j].v * P.Z[j].d[k];
            rep.max_lie_a_g = std::max(rep.max_lie_a_g, std::abs(l));
            rep.cartan_residual = std::max(rep.cartan_residual, std::abs(l + daRZ * P.a_g[k].v));
        }
        // L_Z of the density: sum_j d_j(p Z^j)
        double lp = 0;
        for (int j = 0; j < 4; ++j) lp += P.density.d[j] * P.Z[j].v + P.density.v * P.Z[j].d[j];
        rep.max_lie_popp = std::max(rep.max_lie_popp, std::abs(lp));
        rep.transport_residual =
            std::max(rep.transport_residual, std::abs(lp + 2.0 * daRZ * P.density.v));

        Vec4<double> zr = bracket<double>(P.Z, P.R);
        double h = 0;
        for (int k = 0; k < 4; ++k) h += P.a_g[k].v * zr[k];
        rep.max_hamilton_rho = std::max(rep.max_hamilton_rho, std::abs(h));

        // pointwise defining relations
        Vec4<double> ag, R, Z, b1, b2;
        for (int k = 0; k < 4; ++k) {
            ag[k] = P.a_g[k].v;
            R[k] = P.R[k].v;
            Z[k] = P.Z[k].v;
            b1[k] = P.b1[k].v;
            b2[k] = P.b2[k].v;
        }
        auto form = [&](const Vec4<double>& u, const Vec4<double>& v) {
            double r = 0;
            for (int j = 0; j < 4; ++j)
                for (int k = 0; k < 4; ++k) r += u[j] * v[k] * P.da_g[j][k].v;
            return r;
        };
        rep.max_reeb_residual = std::max({rep.max_reeb_residual, std::abs(dot4(ag, R) - 1.0),
                                          std::abs(form(R, b1)), std::abs(form(R, b2))});
        // |Z| in the frame metric is |zc| = 1 by construction; check a_g(Z) and the frame expansion
        LocalFrame<double> L = local_frame_at<double>(qc, x);
        double zz = L.zc[0] * L.zc[0] + L.zc[1] * L.zc[1] + L.zc[2] * L.zc[2];
        rep.max_unit_residual =
            std::max({rep.max_unit_residual, std::abs(zz - 1.0), std::abs(dot4(ag, Z))});
    });
    rep.volume_preserving = rep.max_da_RZ <= tol;
    return rep;
}

double integrate_popp(const QuasiContactStructure& qc, int n) {
    double s = 0;
    for_lattice(n, [&](const Vec4<double>& x) { s += local_frame_at<double>(qc, x).density; });
    return s / (double(n) * n * n * n);
}

}  // namespace qc
