#pragma once
// Quasi-contact structures on 4-dimensional periodic domains and their Popp data.

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "qc/dual.hpp"
#include "qc/errors.hpp"

namespace qc {

template <class T>
using Vec4 = std::array<T, 4>;
template <class T>
using Mat4 = std::array<std::array<T, 4>, 4>;

// One-form a (covector components) and the frame e1,e2,e3 of E = ker a.
template <class T>
struct FrameData {
    Vec4<T> a;
    std::array<Vec4<T>, 3> e;
};

namespace detail {
template <class T>
using FrameFn = std::function<FrameData<T>(const Vec4<T>&)>;
template <class T>
using FieldFn = std::function<Vec4<T>(const Vec4<T>&)>;
}  // namespace detail

class VectorFieldSpec {
public:
    VectorFieldSpec() = default;
    // f must be a generic callable Vec4<T> -> Vec4<T>
    template <class F>
    explicit VectorFieldSpec(const F& f) : fns_(std::make_shared<Fns>(Fns{f, f, f})) {}

    template <class T>
    Vec4<T> operator()(const Vec4<T>& x) const {
        return std::get<detail::FieldFn<T>>(*fns_)(x);
    }
    // coefficients and exact first partials: jac[j][k] = d_j v^k
    void eval_with_partials(const Vec4<double>& x, Vec4<double>& v, Mat4<double>& jac) const;

private:
    using Fns = std::tuple<detail::FieldFn<double>, detail::FieldFn<D1>, detail::FieldFn<D2>>;
    std::shared_ptr<const Fns> fns_;
};

struct StructureInfo {
    std::string name;
    int orientation = 1;
    bool periodic = true;             // false for nilmanifold quotients given in a fundamental domain
    bool numeric_derivatives = false; // derivatives come from Fourier interpolation of samples
    std::array<double, 9> frame_gram{1, 0, 0, 0, 1, 0, 0, 0, 1};
};

class QuasiContactStructure {
public:
    QuasiContactStructure() = default;
    template <class F>
    QuasiContactStructure(const F& f, StructureInfo info)
        : fns_(std::make_shared<Fns>(Fns{f, f, f, f})), info_(std::move(info)) {}

    template <class T>
    FrameData<T> eval(const Vec4<T>& x) const {
        return std::get<detail::FrameFn<T>>(*fns_)(x);
    }
    const StructureInfo& info() const { return info_; }
    int orientation() const { return info_.orientation; }

    QuasiContactStructure with_orientation(int sign) const;
    // (e2,e3) -> (cos e2 + sin e3, -sin e2 + cos e3); E and the metric are unchanged
    QuasiContactStructure rotated_frame(double theta) const;
    VectorFieldSpec frame_field(int i) const;
    VectorFieldSpec one_form() const;  // components of a, as a 4-tuple

private:
    using Fns = std::tuple<detail::FrameFn<double>, detail::FrameFn<D1>, detail::FrameFn<D2>,
                           detail::FrameFn<D3>>;
    std::shared_ptr<const Fns> fns_;
    StructureInfo info_;
};

// ---- built-in models ----
namespace models {
QuasiContactStructure trig_torus(int orientation = 1);
QuasiContactStructure heisenberg_circle(int orientation = 1);
QuasiContactStructure mapping_torus(double eps = 0.3, int orientation = 1);
// periodic samples of a and the frame on an n^4 grid, evaluated by trigonometric interpolation
QuasiContactStructure from_table(int n, const std::vector<FrameData<double>>& samples,
                                 std::string name = "table", int orientation = 1);
QuasiContactStructure sample_to_table(const QuasiContactStructure& qc, int n);
QuasiContactStructure by_name(const std::string& name, int orientation = 1);
std::vector<std::string> names();

// smooth polynomial cutoff: 1 on [0,1/2], 0 on [1,inf), C^3 in between
template <class T>
T bump(const T& r) {
    double rv = value_of(r);
    if (rv <= 0.5) return T(1.0);
    if (rv >= 1.0) return T(0.0);
    T t = 2.0 * r - 1.0;
    T t2 = t * t, t4 = t2 * t2;
    return 1.0 - t4 * (35.0 - 84.0 * t + 70.0 * t2 - 20.0 * t2 * t);
}
}  // namespace models

// ---- pointwise invariants ----

// Quantities that need one derivative of the structure (evaluated from FrameData<D<S>>).
template <class S>
struct LocalFrame {
    Vec4<S> a;
    std::array<Vec4<S>, 3> e;
    Mat4<S> da;              // da[j][k] = d_j a_k - d_k a_j
    std::array<S, 3> zc;     // Z in frame coordinates
    Vec4<S> Z, b1, b2, T;    // T is transverse with a(T) = 1
    S f;                     // a_g = f a
    S density;               // Popp density against dx
};

template <class S>
struct PoppPoint {
    S f, density, A;
    Vec4<S> a, a_g, Z, R, b1, b2;
    Mat4<S> da_g;
    S form(const Vec4<S>& u, const Vec4<S>& v) const {
        S r(0.0);
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k) r += u[j] * v[k] * da_g[j][k];
        return r;
    }
};

template <class S>
LocalFrame<S> local_frame(const FrameData<D<S>>& fd, int orientation);
template <class S>
LocalFrame<S> local_frame_at(const QuasiContactStructure& qc, const Vec4<S>& x);
template <class S>
PoppPoint<S> popp_point(const QuasiContactStructure& qc, const Vec4<S>& x);

Vec4<double> lie_bracket(const VectorFieldSpec& v, const VectorFieldSpec& w, const Vec4<double>& x);
Vec4<double> characteristic_field(const QuasiContactStructure& qc, const Vec4<double>& x);

class PoppData {
public:
    explicit PoppData(QuasiContactStructure qc) : qc_(std::move(qc)) {}
    const QuasiContactStructure& structure() const { return qc_; }
    PoppPoint<double> at(const Vec4<double>& x) const { return popp_point(qc_, x); }
    double f(const Vec4<double>& x) const;
    Vec4<double> Z(const Vec4<double>& x) const;
    Vec4<double> R(const Vec4<double>& x) const;
    double rho_hat(const Vec4<double>& x) const;  // a_g / a relative to the model's a
    double popp_density(const Vec4<double>& x) const;
    double A(const Vec4<double>& x) const;        // (1/2) da_g(R, Z)

private:
    QuasiContactStructure qc_;
};

// Checks the quasi-contact conditions on an n^4 lattice and returns the Popp data.
PoppData popp_data(const QuasiContactStructure& qc, int n = 4);

struct StructureCheck {
    double max_a_on_frame = 0;   // max |a(e_i)|
    double min_rank_gap = 1e300; // min |w| (second singular value of da on E)
    double max_gram_defect = 0;
};
StructureCheck check_structure(const QuasiContactStructure& qc, int n);

struct InvarianceReport {
    double max_da_RZ = 0;         // |da_g(R,Z)|
    double max_lie_a_g = 0;       // |L_Z a_g|
    double max_lie_popp = 0;      // |L_Z popp_density| as a density
    double max_hamilton_rho = 0;  // |a_g([Z,R])|, the derivative of rho along the lift of Z on Sigma
    double cartan_residual = 0;   // |L_Z a_g + da_g(R,Z) a_g|
    double transport_residual = 0;// |L_Z popp + 2 da_g(R,Z) popp|
    double max_reeb_residual = 0; // |a_g(R)-1|, |da_g(R,b_i)|
    double max_unit_residual = 0; // ||Z|-1|, |a_g(Z)|
    bool volume_preserving = false;
    int samples = 0;
};
InvarianceReport invariance_report(const QuasiContactStructure& qc, int n, double tol = 1e-8);

double integrate_popp(const QuasiContactStructure& qc, int n);

}  // namespace qc
