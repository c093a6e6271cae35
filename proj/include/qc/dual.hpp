#pragma once
// Forward-mode dual numbers with a fixed number of seed directions.
// Nesting Dual<Dual<double,4>,4> gives exact second partials, and so on.

#include <array>
#include <cmath>
#include <type_traits>

namespace qc {

template <class T, int N>
struct Dual {
    T v{};
    std::array<T, N> d{};

    Dual() = default;
    Dual(double c) : v(c) {}  // NOLINT: implicit promotion of constants
    template <class U, std::enable_if_t<!std::is_same_v<U, T> && std::is_convertible_v<U, T> &&
                                            !std::is_arithmetic_v<U>, int> = 0>
    Dual(const U& c) : v(c) {}
    Dual(const T& value, const std::array<T, N>& grad) : v(value), d(grad) {}
    template <class U = T, std::enable_if_t<!std::is_same_v<U, double>, int> = 0>
    Dual(const T& value) : v(value) {}

    Dual& operator+=(const Dual& o) {
        v += o.v;
        for (int i = 0; i < N; ++i) d[i] += o.d[i];
        return *this;
    }
    Dual& operator-=(const Dual& o) {
        v -= o.v;
        for (int i = 0; i < N; ++i) d[i] -= o.d[i];
        return *this;
    }
    Dual& operator*=(const Dual& o) {
        for (int i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
        v *= o.v;
        return *this;
    }
    Dual& operator/=(const Dual& o) {
        T inv = T(1.0) / o.v;
        v *= inv;
        for (int i = 0; i < N; ++i) d[i] = (d[i] - v * o.d[i]) * inv;
        return *this;
    }
};

template <class T>
struct is_dual : std::false_type {};
template <class T, int N>
struct is_dual<Dual<T, N>> : std::true_type {};

inline double value_of(double x) { return x; }
template <class T, int N>
double value_of(const Dual<T, N>& x) {
    return value_of(x.v);
}

template <class T, int N>
Dual<T, N> operator-(const Dual<T, N>& a) {
    Dual<T, N> r;
    r.v = -a.v;
    for (int i = 0; i < N; ++i) r.d[i] = -a.d[i];
    return r;
}
template <class T, int N>
Dual<T, N> operator+(Dual<T, N> a, const Dual<T, N>& b) { return a += b; }
template <class T, int N>
Dual<T, N> operator-(Dual<T, N> a, const Dual<T, N>& b) { return a -= b; }
template <class T, int N>
Dual<T, N> operator*(Dual<T, N> a, const Dual<T, N>& b) { return a *= b; }
template <class T, int N>
Dual<T, N> operator/(Dual<T, N> a, const Dual<T, N>& b) { return a /= b; }

template <class T, int N>
Dual<T, N> operator+(Dual<T, N> a, double b) {
    a.v += b;
    return a;
}
template <class T, int N>
Dual<T, N> operator+(double b, Dual<T, N> a) { return a + b; }
template <class T, int N>
Dual<T, N> operator-(Dual<T, N> a, double b) {
    a.v -= b;
    return a;
}
template <class T, int N>
Dual<T, N> operator-(double b, const Dual<T, N>& a) { return -a + b; }
template <class T, int N>
Dual<T, N> operator*(Dual<T, N> a, double b) {
    a.v *= b;
    for (auto& x : a.d) x *= b;
    return a;
}
template <class T, int N>
Dual<T, N> operator*(double b, Dual<T, N> a) { return a * b; }
template <class T, int N>
Dual<T, N> operator/(Dual<T, N> a, double b) { return a * (1.0 / b); }
template <class T, int N>
Dual<T, N> operator/(double b, const Dual<T, N>& a) { return Dual<T, N>(b) / a; }

template <class T, int N>
bool operator<(const Dual<T, N>& a, const Dual<T, N>& b) { return value_of(a) < value_of(b); }
template <class T, int N>
bool operator>(const Dual<T, N>& a, const Dual<T, N>& b) { return value_of(a) > value_of(b); }
template <class T, int N>
bool operator<(const Dual<T, N>& a, double b) { return value_of(a) < b; }
template <class T, int N>
bool operator>(const Dual<T, N>& a, double b) { return value_of(a) > b; }

// chain rule helper: f(a) with f'(a) = df
template <class T, int N>
Dual<T, N> chain(const Dual<T, N>& a, const T& f, const T& df) {
    Dual<T, N> r;
    r.v = f;
    for (int i = 0; i < N; ++i) r.d[i] = df * a.d[i];
    return r;
}

using std::cos;
using std::exp;
using std::log;
using std::sin;
using std::sqrt;
using std::atan2;

template <class T, int N>
Dual<T, N> sin(const Dual<T, N>& a) { return chain(a, sin(a.v), cos(a.v)); }
template <class T, int N>
Dual<T, N> cos(const Dual<T, N>& a) { return chain(a, cos(a.v), -sin(a.v)); }
template <class T, int N>
Dual<T, N> exp(const Dual<T, N>& a) {
    T e = exp(a.v);
    return chain(a, e, e);
}
template <class T, int N>
Dual<T, N> log(const Dual<T, N>& a) { return chain(a, log(a.v), T(1.0) / a.v); }
template <class T, int N>
Dual<T, N> sqrt(const Dual<T, N>& a) {
    T s = sqrt(a.v);
    return chain(a, s, T(0.5) / s);
}
template <class T, int N>
Dual<T, N> abs(const Dual<T, N>& a) { return value_of(a) < 0 ? -a : a; }

template <class T>
T sq(const T& x) { return x * x; }

// Seed a point so that component i carries d/dx_i.
template <class T, std::size_t M>
std::array<Dual<T, int(M)>, M> seed(const std::array<T, M>& x) {
    std::array<Dual<T, int(M)>, M> r;
    for (std::size_t i = 0; i < M; ++i) {
        r[i].v = x[i];
        r[i].d[i] = T(1.0);
    }
    return r;
}

template <class T>
using D = Dual<T, 4>;
using D1 = D<double>;
using D2 = D<D1>;
using D3 = D<D2>;

}  // namespace qc
