#include "qc/analysis.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <complex>
#include <numbers>

#include "qc/spectral.hpp"

namespace qc {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kFourPi2 = 4 * kPi * kPi;

// lattice points with m1^2 + m2^2 = r2
std::vector<std::pair<int, int>> circle_points(long long r2) {
    std::vector<std::pair<int, int>> pts;
    int R = int(std::floor(std::sqrt(double(r2)))) + 1;
    for (int m1 = -R; m1 <= R; ++m1) {
        long long rest = r2 - 1LL * m1 * m1;
        if (rest < 0) continue;
        long long m2 = std::llround(std::sqrt(double(rest)));
        if (m2 * m2 != rest) continue;
        pts.emplace_back(m1, int(m2));
        if (m2 != 0) pts.emplace_back(m1, int(-m2));
    }
    return pts;
}

RunningAverage running(const QEElements& e, const std::vector<double>& grid,
                       const std::function<double(double)>& g) {
    RunningAverage r;
    std::size_t j = 0;
    double acc = 0;
    std::vector<double> sorted = grid;
    std::sort(sorted.begin(), sorted.end());
    for (double l : sorted) {
        if (l > e.lambda_max * (1 + 1e-12))
            throw OutOfRange("lambda " + std::to_string(l) + " beyond the complete window " +
                             std::to_string(e.lambda_max));
        while (j < e.size() && e.lambdas[j] <= l) acc += g(e.values[j++]);
        if (j == 0) throw OutOfRange("no eigenvalues below lambda " + std::to_string(l));
        r.lambda.push_back(l);
        r.value.push_back(acc / double(j));
        r.count.push_back((long long)j);
    }
    return r;
}
}  // namespace

std::vector<double> matrix_elements(const Eigen::MatrixXcd& V, const std::vector<double>& weights,
                                    const std::vector<double>& b_nodes) {
    if (std::size_t(V.rows()) != weights.size() || weights.size() != b_nodes.size())
        throw ConfigError("matrix_elements: size mismatch");
    std::vector<double> out(std::size_t(V.cols()));
    for (Eigen::Index c = 0; c < V.cols(); ++c) {
        double s = 0;
        for (Eigen::Index i = 0; i < V.rows(); ++i) s += weights[i] * b_nodes[i] * std::norm(V(i, c));
        out[c] = s;
    }
    return out;
}

QEElements trig_separable_elements(const Observable& b, double lambda_max, int base_nodes, int x3_modes) {
    if (!(lambda_max > 0)) throw ConfigError("lambda_max must be positive");
    if (base_nodes < 1 || x3_modes < 2) throw ConfigError("quadrature sizes must be positive");
    // Fourier coefficients of the (x0,x1,x2)-average of b in x3
    const int Nq = 2 * x3_modes, J = x3_modes - 1;
    std::vector<double> bbar(Nq, 0.0);
    for (int q = 0; q < Nq; ++q) {
        double s = 0;
        for (int i = 0; i < base_nodes; ++i)
            for (int j = 0; j < base_nodes; ++j)
                for (int k = 0; k < base_nodes; ++k)
                    s += b({double(i) / base_nodes, double(j) / base_nodes, double(k) / base_nodes,
                            double(q) / Nq});
        bbar[q] = s / std::pow(double(base_nodes), 3);
    }
    std::vector<std::complex<double>> bhat(2 * J + 1);
    for (int j = -J; j <= J; ++j) {
        std::complex<double> s = 0;
        for (int q = 0; q < Nq; ++q) s += bbar[q] * std::polar(1.0, -2 * kPi * j * q / Nq);
        bhat[j + J] = s / double(Nq);
    }

    std::vector<std::pair<double, double>> pairs;
    for (long long r2 = 0;; ++r2) {
        auto pts = circle_points(r2);
        bool any = false;
        for (int parity = 0; parity < 2; ++parity) {
            HillModes h = hill_modes(double(r2), parity, lambda_max);
            if (h.values.empty()) continue;
            any = true;
            if (pts.empty()) continue;
            const int n = int(h.k.size());
            for (std::size_t v = 0; v < h.values.size(); ++v) {
                // |psi|^2 = sum_m d_m e^{2 pi i m x3}; only even m occur within a parity class
                std::vector<double> d(2 * J + 1, 0.0);
                for (int m = -J; m <= J; m += 1) {
                    if (m % 2 != 0) continue;
                    int sh = m / 2;
                    double s = 0;
                    for (int i = std::max(0, sh); i < n && i - sh < n; ++i) s += h.vectors(i, v) * h.vectors(i - sh, v);
                    d[m + J] = s;
                }
                for (auto [m1, m2] : pts) {
                    double shift = r2 == 0 ? 0.0 : std::atan2(double(m2), double(m1)) / (2 * kPi);
                    std::complex<double> el = 0;
                    for (int j = -J; j <= J; ++j)
                        if (d[J - j] != 0) el += bhat[j + J] * std::polar(1.0, 2 * kPi * j * shift) * d[J - j];
                    for (long long m0 = 0;; ++m0) {
                        double lam = h.values[v] + kFourPi2 * double(m0 * m0);
                        if (lam > lambda_max) break;
                        pairs.emplace_back(lam, el.real());
                        if (m0 != 0) pairs.emplace_back(lam, el.real());
                    }
                }
            }
        }
        if (!any) break;
    }
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const auto& a, const auto& c) { return a.first < c.first; });
    QEElements e;
    e.lambda_max = lambda_max;
    for (auto& [l, v] : pairs) {
        e.lambdas.push_back(l);
        e.values.push_back(v);
    }
    return e;
}

RunningAverage cesaro_expectation(const QEElements& e, const std::vector<double>& lambda_grid) {
    return running(e, lambda_grid, [](double v) { return v; });
}

RunningAverage variance(const QEElements& e, const std::vector<double>& lambda_grid, double E_value) {
    return running(e, lambda_grid, [E_value](double v) { return (v - E_value) * (v - E_value); });
}

double window_mean(const QEElements& e) {
    if (e.size() == 0) throw OutOfRange("empty window");
    double s = 0;
    for (double v : e.values) s += v;
    return s / double(e.size());
}

double popp_expectation(const QuasiContactStructure& qc, const Observable& b, int n) {
    if (n < 1) throw ConfigError("lattice size must be positive");
    double num = 0, den = 0;
    for (int i0 = 0; i0 < n; ++i0)
        for (int i1 = 0; i1 < n; ++i1)
            for (int i2 = 0; i2 < n; ++i2)
                for (int i3 = 0; i3 < n; ++i3) {
                    Vec4<double> x{double(i0) / n, double(i1) / n, double(i2) / n, double(i3) / n};
                    double p = local_frame_at<double>(qc, x).density;
                    num += p * b(x);
                    den += p;
                }
    return num / den;
}

double mehler_diagonal(double xi3) {
    const double c = 1.0 / (4 * std::pow(kPi, 1.5));
    double u = std::abs(2 * xi3);
    if (u < 1e-4) return c * (1 - u * u / 6 + 7 * u * u * u * u / 360);
    if (u > 700) return 0.0;
    return c * u / std::sinh(u);
}

double mehler_heat_constant() {
    boost::math::quadrature::exp_sinh<double> q;
    double half = q.integrate([](double x) { return mehler_diagonal(x); }, 0.0, std::numeric_limits<double>::infinity());
    return 2 * half / (2 * kPi);
}

LandauValue landau_density(const std::function<double(double)>& f, double xi3, double rel_tol, int max_terms) {
    LandauValue r;
    double a = std::abs(xi3);
    if (a == 0) {
        boost::math::quadrature::exp_sinh<double> q;
        double err = 0;
        r.value = q.integrate(f, 0.0, std::numeric_limits<double>::infinity(), std::sqrt(std::numeric_limits<double>::epsilon()), &err) /
                  (4 * kPi);
        r.tail_bound = err / (4 * kPi);
        return r;
    }
    double sum = 0, prev = 0;
    int zeros = 0;
    for (int k = 0; k < max_terms; ++k) {
        double t = f(2 * a * (2 * k + 1));
        if (!std::isfinite(t)) throw TailDominates("non-finite term in the Landau sum");
        sum += t;
        r.terms = k + 1;
        zeros = t == 0 ? zeros + 1 : 0;
        if (zeros >= 4) {
            r.tail_bound = 0;
            break;
        }
        if (k >= 2 && prev != 0 && std::abs(t) <= rel_tol * std::abs(sum)) {
            double q = std::abs(t / prev);
            if (q < 1) {
                r.tail_bound = std::abs(t) * q / (1 - q);
                break;
            }
        }
        prev = t;
        if (k + 1 == max_terms) throw TailDominates("Landau sum not converged after " + std::to_string(max_terms) + " terms");
    }
    r.value = a / kPi * sum;
    r.tail_bound *= a / kPi;
    if (r.tail_bound > 0.1 * std::abs(r.value) && r.value != 0)
        throw TailDominates("tail bound exceeds 10% of the Landau sum");
    return r;
}

}  // namespace qc
