#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "qc/analysis.hpp"
#include "qc/dynamics.hpp"
#include "qc/geometry.hpp"
#include "qc/hermite.hpp"
#include "qc/normalform.hpp"
#include "qc/spectral.hpp"

#ifndef QC_VERSION
#define QC_VERSION "0.1.0"
#endif

namespace qcli {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr int kSchemaVersion = 1;

using qc::ConfigError;

std::string num(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

json common_defaults() { return {{"output", "qc_out"}, {"threads", 1}, {"seed", 7}}; }

double popp_volume(const qc::QuasiContactStructure& qc) { return qc::integrate_popp(qc, 8); }

std::array<double, 4> vec4(const json& j, const char* key) {
    if (!j.is_array() || j.size() != 4) throw ConfigError(std::string(key) + " must be an array of 4 numbers");
    std::array<double, 4> x{};
    for (int k = 0; k < 4; ++k) {
        if (!j[k].is_number()) throw ConfigError(std::string(key) + " must be an array of 4 numbers");
        x[k] = j[k].get<double>();
    }
    return x;
}

qc::SpectrumResult spectrum_for(const json& c) {
    const std::string model = c["model"];
    const std::string source = c["source"];
    const double lmax = c["lambda_max"];
    if (source == "oracle") return qc::oracle_spectrum(model, lmax);
    if (source != "grid") throw ConfigError("source must be 'oracle' or 'grid'");
    qc::GridSpectrumOptions opt;
    opt.lowest = c["lowest"];
    opt.tol = c["eig_tol"];
    const int n = c["grid_n"];
    if (model == "heisenberg_circle") return qc::heisenberg_grid_spectrum(n, opt);
    qc::GridLaplacian lap(qc::models::by_name(model, c["orientation"]), {n, n, n, n});
    return qc::grid_spectrum(lap, opt);
}

std::string spectrum_csv(const qc::SpectrumResult& s) {
    std::ostringstream o;
    o << "index,eigenvalue,multiplicity,cumulative\n";
    long long cum = 0;
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
        cum += s.multiplicities[i];
        o << i << ',' << num(s.eigenvalues[i]) << ',' << s.multiplicities[i] << ',' << cum << '\n';
    }
    return o.str();
}

// ---- jets ----
qc::GaussRational gauss_from(const json& j, const char* key) {
    if (!j.contains(key)) return qc::GaussRational(0);
    const json& v = j[key];
    if (v.is_string()) return qc::parse_gauss(v.get<std::string>());
    if (v.is_number_integer()) return qc::parse_gauss(std::to_string(v.get<long long>()));
    throw ConfigError(std::string("coefficient '") + key + "' must be an integer or a string like \"-3/7\"");
}

qc::JetSymbol jet_from_json(const json& j, int nmax, int base_order) {
    qc::JetSymbol s(nmax, base_order);
    if (!j.contains("terms") || !j["terms"].is_array()) throw ConfigError("jet needs a 'terms' array");
    for (const json& t : j["terms"]) {
        qc::Monomial m{t.value("a", 0), t.value("b", 0), t.value("c", 0)};
        if (m.a < 0 || m.b < 0 || m.c < 0) throw ConfigError("negative monomial exponent");
        qc::BaseJet coef;
        for (const json& c : t.at("coef")) {
            qc::BaseExp e{0, 0, 0, 0};
            if (c.contains("exp")) {
                auto v = c["exp"].get<std::vector<int>>();
                if (v.size() != 4) throw ConfigError("'exp' must list powers of (x0, x2, x3, xi2)");
                for (int k = 0; k < 4; ++k) e[k] = v[k];
            }
            qc::GaussRational g(gauss_from(c, "re").re, gauss_from(c, "im").re);
            coef += qc::BaseJet::monomial(e, g);
        }
        s.add(m, coef);
    }
    return s;
}

json jet_to_json(const qc::JetSymbol& s) {
    json terms = json::array();
    for (const auto& [m, c] : s.terms()) {
        json coef = json::array();
        for (const auto& [e, g] : c.terms())
            coef.push_back({{"exp", {e[0], e[1], e[2], e[3]}}, {"re", g.re.str()}, {"im", g.im.str()}});
        terms.push_back({{"a", m.a}, {"b", m.b}, {"c", m.c}, {"coef", coef}});
    }
    return {{"nmax", s.nmax()}, {"base_order", s.base_order()}, {"truncated", s.truncated()}, {"terms", terms}};
}

// xi0^2 + 2 z z̄ + (z^3 + z̄^3)/5 + (x2/7)(z^2 z̄ + z z̄^2) + (x0/3)(z z̄)^2
json default_jet() {
    auto one = [](std::string re) { return json::array({{{"re", re}}}); };
    return {{"terms",
             {{{"a", 2}, {"b", 0}, {"c", 0}, {"coef", one("1")}},
              {{"a", 0}, {"b", 1}, {"c", 1}, {"coef", one("2")}},
              {{"a", 0}, {"b", 3}, {"c", 0}, {"coef", one("1/5")}},
              {{"a", 0}, {"b", 0}, {"c", 3}, {"coef", one("1/5")}},
              {{"a", 0}, {"b", 2}, {"c", 1}, {"coef", {{{"exp", {0, 1, 0, 0}}, {"re", "1/7"}}}}},
              {{"a", 0}, {"b", 1}, {"c", 2}, {"coef", {{{"exp", {0, 1, 0, 0}}, {"re", "1/7"}}}}},
              {{"a", 0}, {"b", 2}, {"c", 2}, {"coef", {{{"exp", {1, 0, 0, 0}}, {"re", "1/3"}}}}}}}};
}

// ---- observables for qe ----
qc::Observable observable(const std::string& name) {
    if (name == "one") return [](const qc::Vec4<double>&) { return 1.0; };
    if (name == "sin_x3") return [](const qc::Vec4<double>& x) { return std::sin(2 * kPi * x[3]); };
    if (name == "cos2_x3") return [](const qc::Vec4<double>& x) { return std::cos(4 * kPi * x[3]); };
    if (name == "sin_x0") return [](const qc::Vec4<double>& x) { return std::sin(2 * kPi * x[0]); };
    if (name == "bump")
        return [](const qc::Vec4<double>& x) {
            double u = std::cos(2 * kPi * (x[3] - 0.3)) - std::cos(2 * kPi * 0.1);
            return 0.5 * (1 + std::tanh(10 * u));
        };
    throw ConfigError("unknown observable '" + name + "' (one, sin_x3, cos2_x3, sin_x0, bump)");
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---- commands ----
std::vector<Command> make_commands() {
    std::vector<Command> cs;

    cs.push_back({"geometry", "invariants of a quasi-contact structure",
                  {{"model", "trig_torus"}, {"orientation", 1}, {"n", 6}, {"tol", 1e-8}},
                  [](const json& c) {
                      auto qc = qc::models::by_name(c["model"], c["orientation"]);
                      const int n = c["n"];
                      auto r = qc::invariance_report(qc, n, c["tol"]);
                      auto s = qc::check_structure(qc, n);
                      Output o;
                      o.result = {{"model", c["model"]},
                                  {"volume_preserving", r.volume_preserving},
                                  {"max_da_RZ", r.max_da_RZ},
                                  {"max_lie_a_g", r.max_lie_a_g},
                                  {"max_lie_popp", r.max_lie_popp},
                                  {"max_hamilton_rho", r.max_hamilton_rho},
                                  {"cartan_residual", r.cartan_residual},
                                  {"transport_residual", r.transport_residual},
                                  {"max_reeb_residual", r.max_reeb_residual},
                                  {"max_unit_residual", r.max_unit_residual},
                                  {"samples", r.samples},
                                  {"max_a_on_frame", s.max_a_on_frame},
                                  {"min_rank_gap", s.min_rank_gap},
                                  {"max_gram_defect", s.max_gram_defect},
                                  {"popp_volume", qc::integrate_popp(qc, n)}};
                      return o;
                  }});

    cs.push_back({"spectrum", "eigenvalues of the sR Laplacian",
                  {{"model", "trig_torus"},
                   {"orientation", 1},
                   {"lambda_max", 500.0},
                   {"source", "oracle"},
                   {"grid_n", 16},
                   {"lowest", 20},
                   {"eig_tol", 1e-9}},
                  [](const json& c) {
                      auto s = spectrum_for(c);
                      Output o;
                      double lm = s.lambda_max;
                      json fits = json::object();
                      if (lm > 0) {
                          fits["count_at_lambda_max"] = qc::counting_function(s, lm);
                          fits["weyl_ratio_at_lambda_max"] = double(qc::counting_function(s, lm)) / std::pow(lm, 2.5);
                      }
                      o.result = {{"model", s.model},           {"lambda_max", lm},
                                  {"provenance", s.provenance}, {"certified", s.certified},
                                  {"eigenvalues", s.eigenvalues}, {"multiplicities", s.multiplicities},
                                  {"fits", fits}};
                      o.csv.emplace_back("spectrum.csv", spectrum_csv(s));
                      return o;
                  }});

    cs.push_back({"weyl", "Weyl constant fit",
                  {{"model", "trig_torus"},
                   {"orientation", 1},
                   {"lambda_max", 2000.0},
                   {"source", "oracle"},
                   {"grid_n", 16},
                   {"lowest", 20},
                   {"eig_tol", 1e-9},
                   {"samples", 64}},
                  [](const json& c) {
                      auto s = spectrum_for(c);
                      auto f = qc::weyl_fit(s, c["samples"]);
                      double P = popp_volume(qc::models::by_name(c["model"], c["orientation"]));
                      double target = P / (24 * kPi);
                      Output o;
                      o.result = {{"model", s.model},
                                  {"lambda_max", s.lambda_max},
                                  {"popp_volume", P},
                                  {"fits",
                                   {{"cesaro_mean", f.cesaro_mean},
                                    {"lsq_leading", f.lsq_leading},
                                    {"lsq_second", f.lsq_second},
                                    {"target", target},
                                    {"ratio", f.cesaro_mean / target}}},
                                  {"eigenvalues", s.eigenvalues},
                                  {"multiplicities", s.multiplicities}};
                      std::ostringstream csv;
                      csv << "lambda,ratio\n";
                      for (std::size_t i = 0; i < f.lambdas.size(); ++i) csv << num(f.lambdas[i]) << ',' << num(f.ratios[i]) << '\n';
                      o.csv.emplace_back("weyl.csv", csv.str());
                      o.csv.emplace_back("spectrum.csv", spectrum_csv(s));
                      return o;
                  }});

    cs.push_back({"heat", "small-time heat trace",
                  {{"model", "trig_torus"},
                   {"orientation", 1},
                   {"lambda_max", 6000.0},
                   {"source", "oracle"},
                   {"grid_n", 16},
                   {"lowest", 20},
                   {"eig_tol", 1e-9},
                   {"t_max", 0.01},
                   {"samples", 24}},
                  [](const json& c) {
                      auto s = spectrum_for(c);
                      auto h = qc::heat_extrapolation(s, c["t_max"], c["samples"]);
                      double P = popp_volume(qc::models::by_name(c["model"], c["orientation"]));
                      double target = P / (32 * std::sqrt(kPi));
                      Output o;
                      o.result = {{"model", s.model},
                                  {"lambda_max", s.lambda_max},
                                  {"popp_volume", P},
                                  {"fits",
                                   {{"limit", h.limit},
                                    {"target", target},
                                    {"ratio", h.limit / target},
                                    {"mehler_constant", qc::mehler_heat_constant()}}}};
                      std::ostringstream csv;
                      csv << "t,scaled_trace,tail_bound\n";
                      for (std::size_t i = 0; i < h.ts.size(); ++i)
                          csv << num(h.ts[i]) << ',' << num(h.scaled[i]) << ',' << num(h.tails[i]) << '\n';
                      o.csv.emplace_back("heat.csv", csv.str());
                      return o;
                  }});

    cs.push_back({"wave", "smoothed wave trace",
                  {{"model", "trig_torus"},
                   {"orientation", 1},
                   {"lambda_max", 12100.0},
                   {"source", "oracle"},
                   {"grid_n", 16},
                   {"lowest", 20},
                   {"eig_tol", 1e-9},
                   {"window", "gaussian"},
                   {"width", 0.1},
                   {"center", 0.0},
                   {"lambdas", {20.0, 30.0, 40.0}}},
                  [](const json& c) {
                      auto s = spectrum_for(c);
                      qc::Window w;
                      const std::string kind = c["window"];
                      if (kind == "gaussian") w.kind = qc::Window::Gaussian;
                      else if (kind == "bump") w.kind = qc::Window::Bump;
                      else throw ConfigError("window must be 'gaussian' or 'bump'");
                      w.width = c["width"];
                      w.center = c["center"];
                      if (!(w.width > 0)) throw ConfigError("width must be positive");
                      double P = popp_volume(qc::models::by_name(c["model"], c["orientation"]));
                      double lead = w.theta(0) * P / (24 * kPi);
                      Output o;
                      json rows = json::array();
                      std::ostringstream csv;
                      csv << "lambda,re,im,tail_bound,normalized\n";
                      for (const json& l : c["lambdas"]) {
                          double lam = l.get<double>();
                          auto v = qc::smoothed_wave_trace(s, w, lam);
                          double norm = lead != 0 ? v.value.real() / std::pow(lam, 4) / lead : 0.0;
                          rows.push_back({{"lambda", lam}, {"re", v.value.real()}, {"im", v.value.imag()},
                                          {"tail_bound", v.tail_bound}, {"normalized", norm}});
                          csv << num(lam) << ',' << num(v.value.real()) << ',' << num(v.value.imag()) << ','
                              << num(v.tail_bound) << ',' << num(norm) << '\n';
                      }
                      o.result = {{"model", s.model}, {"lambda_max", s.lambda_max}, {"theta0", w.theta(0)},
                                  {"leading_constant", lead}, {"values", rows}};
                      o.csv.emplace_back("wave.csv", csv.str());
                      return o;
                  }});

    cs.push_back({"hermite", "Hermite transform identities ('hermite verify')",
                  {{"kmax", 20}, {"M", 512}, {"n3", 16}},
                  [](const json& c) {
                      qc::HermiteOptions opt;
                      opt.kmax = c["kmax"];
                      opt.M = c["M"];
                      opt.n3 = c["n3"];
                      if (opt.kmax < 0 || opt.M < 8 || opt.n3 < 4) throw ConfigError("hermite sizes out of range");
                      auto r = qc::verify_hermite(opt, c["seed"].get<unsigned long long>());
                      Output o;
                      o.result = {{"kmax", r.kmax},
                                  {"M", r.M},
                                  {"n3", r.n3},
                                  {"L", r.L},
                                  {"residuals",
                                   {{"norm_defect", r.norm_defect},
                                    {"orthogonality", r.orthogonality},
                                    {"omega_identity", r.omega_identity},
                                    {"raising", r.raising},
                                    {"lowering", r.lowering},
                                    {"lowering_ground", r.lowering_ground},
                                    {"parseval", r.parseval},
                                    {"analysis_synthesis", r.analysis_synthesis},
                                    {"quantize_identity", r.quantize_identity},
                                    {"quantize_omega", r.quantize_omega},
                                    {"quantize_symmetry", r.quantize_symmetry},
                                    {"rodrigues", r.rodrigues}}}};
                      return o;
                  }});

    cs.push_back({"bnf", "formal normal form of a jet",
                  {{"input", ""}, {"nmax", 8}, {"base_order", 2}},
                  [](const json& c) {
                      json jet = default_jet();
                      const std::string path = c["input"];
                      if (!path.empty()) {
                          std::ifstream in(path);
                          if (!in) throw ConfigError("cannot read jet file '" + path + "'");
                          try {
                              jet = json::parse(in);
                          } catch (const json::exception& e) {
                              throw ConfigError(std::string("jet file: ") + e.what());
                          }
                      }
                      const int nmax = c["nmax"], bo = c["base_order"];
                      if (nmax < 3 || bo < 0) throw ConfigError("need nmax >= 3 and base_order >= 0");
                      qc::JetSymbol init = jet_from_json(jet, nmax, bo);
                      auto r = qc::birkhoff_normal_form(init, nmax);
                      std::string v = qc::verify_bnf(init, r);
                      json steps = json::array();
                      for (const auto& g : r.steps) steps.push_back(jet_to_json(g));
                      json rho = json::array();
                      for (const auto& [e, g] : r.rho.terms())
                          rho.push_back({{"exp", {e[0], e[1], e[2], e[3]}}, {"re", g.re.str()}, {"im", g.im.str()}});
                      Output o;
                      o.result = {{"nmax", nmax},
                                  {"initial", jet_to_json(init)},
                                  {"rho", rho},
                                  {"generator", jet_to_json(r.generator)},
                                  {"steps", steps},
                                  {"remainder", jet_to_json(r.remainder)},
                                  {"residual", jet_to_json(r.residual)},
                                  {"truncated", r.truncated},
                                  {"verified", v.empty()},
                                  {"verify_message", v}};
                      return o;
                  }});

    cs.push_back({"flow", "boundary flow trajectory",
                  {{"model", "mapping_torus"},
                   {"orientation", 1},
                   {"x", {0.0, 0.0, 0.0, 0.0}},
                   {"xi0", 0.5},
                   {"t", 2.0},
                   {"steps", 100},
                   {"a_scale", 1.0},
                   {"measure_samples", 0},
                   {"abs_tol", 1e-12},
                   {"rel_tol", 1e-12}},
                  [](const json& c) {
                      qc::PoppData P = qc::popp_data(qc::models::by_name(c["model"], c["orientation"]), 3);
                      qc::FlowOptions fo;
                      fo.a_scale = c["a_scale"];
                      fo.abs_tol = c["abs_tol"];
                      fo.rel_tol = c["rel_tol"];
                      qc::ZhatFlow F(P, fo);
                      const double xi0 = c["xi0"], t = c["t"];
                      const int steps = c["steps"];
                      if (std::abs(xi0) > 1) throw ConfigError("xi0 must lie in [-1, 1]");
                      if (steps < 1) throw ConfigError("steps must be positive");
                      auto tr = F.trajectory({vec4(c["x"], "x"), xi0}, t, steps);
                      std::ostringstream csv;
                      csv << "t,x0,x1,x2,x3,Xi0\n";
                      for (int i = 0; i <= steps; ++i) {
                          csv << num(t * i / steps);
                          for (double v : tr[i].x) csv << ',' << num(v);
                          csv << ',' << num(tr[i].Xi0) << '\n';
                      }
                      Output o;
                      const auto& e = tr.back();
                      o.result = {{"model", c["model"]},
                                  {"final", {{"x", e.x}, {"Xi0", e.Xi0}}},
                                  {"divergence_at_start", F.divergence(tr.front())}};
                      const int ms = c["measure_samples"];
                      if (ms > 0) {
                          auto m = qc::measure_invariance_check(P, ms, t, fo.a_scale, c["seed"].get<unsigned>());
                          o.result["measure"] = {{"max_divergence", m.max_divergence},
                                                 {"max_drift", m.max_drift},
                                                 {"samples", m.samples}};
                      }
                      o.csv.emplace_back("trajectory.csv", csv.str());
                      return o;
                  }});

    cs.push_back({"periods", "closed-characteristic periods and the period bands",
                  {{"model", "trig_torus"}, {"orientation", 1}, {"orbits", json::array()}, {"t_max", 10.0}},
                  [](const json& c) {
                      std::vector<qc::PeriodPair> pairs;
                      json orbits = json::array();
                      if (!c["orbits"].empty()) {
                          for (const json& p : c["orbits"]) {
                              if (!p.is_array() || p.size() != 2 || !p[0].is_number())
                                  throw ConfigError("orbits entries are [T, T_hat] with T_hat a number or null");
                              double T = p[0], Th = p[1].is_null() ? qc::kInfinity : p[1].get<double>();
                              if (!(T > 0) || !(Th >= T)) throw ConfigError("need 0 < T <= T_hat");
                              pairs.push_back({T, Th});
                          }
                      } else {
                          qc::PoppData P = qc::popp_data(qc::models::by_name(c["model"], c["orientation"]), 3);
                          for (const auto& orb : qc::model_orbits(P)) {
                              double Th = qc::hat_T(orb);
                              pairs.push_back({orb.T, Th});
                              orbits.push_back({{"start", orb.start}, {"T", orb.T}, {"T_hat", nullable(Th)},
                                                {"volume_preserving", orb.volume_preserving},
                                                {"invariance_residual", orb.invariance_residual}});
                          }
                      }
                      if (orbits.empty())
                          for (const auto& p : pairs) orbits.push_back({{"T", p.T}, {"T_hat", nullable(p.T_hat)}});
                      for (std::size_t i = 0; i < pairs.size(); ++i) {
                          orbits[i]["T_hat_infinite"] = !std::isfinite(pairs[i].T_hat);
                          orbits[i]["first_merge_index"] =
                              std::isfinite(pairs[i].T_hat) ? qc::first_merge_index(pairs[i]) : 1;
                      }
                      auto sp = qc::period_spectrum(pairs, c["t_max"]);
                      json bands = json::array();
                      std::ostringstream csv;
                      csv << "lo,hi\n";
                      for (const auto& b : sp.bands) {
                          bands.push_back({b.lo, b.hi});
                          csv << num(b.lo) << ',' << num(b.hi) << '\n';
                      }
                      Output o;
                      o.result = {{"t_max", c["t_max"]}, {"orbits", orbits}, {"bands", bands}};
                      o.csv.emplace_back("bands.csv", csv.str());
                      return o;
                  }});

    cs.push_back({"qe", "running expectation and variance of an observable over eigenfunctions",
                  {{"model", "trig_torus"}, {"orientation", 1}, {"observable", "sin_x3"}, {"lambda_max", 1000.0},
                   {"grid_points", 20}},
                  [](const json& c) {
                      if (c["model"] != "trig_torus")
                          throw qc::UnsupportedModel("qe uses the separable eigenbasis of trig_torus");
                      auto b = observable(c["observable"]);
                      const double lmax = c["lambda_max"];
                      const int gp = c["grid_points"];
                      if (gp < 1) throw ConfigError("grid_points must be positive");
                      auto qc = qc::models::by_name(c["model"], c["orientation"]);
                      double target = qc::popp_expectation(qc, b, 16);
                      auto e = qc::trig_separable_elements(b, lmax);
                      if (e.size() == 0) throw qc::OutOfRange("no eigenvalues below lambda_max");
                      std::vector<double> grid;
                      double l0 = std::max(e.lambdas.front(), lmax / 64);
                      for (int i = 0; i < gp; ++i) grid.push_back(gp == 1 ? lmax : l0 * std::pow(lmax / l0, double(i) / (gp - 1)));
                      grid.back() = lmax;
                      auto E = qc::cesaro_expectation(e, grid);
                      auto V = qc::variance(e, grid, qc::window_mean(e));
                      std::ostringstream csv;
                      csv << "lambda,count,E,V\n";
                      for (std::size_t i = 0; i < grid.size(); ++i)
                          csv << num(E.lambda[i]) << ',' << E.count[i] << ',' << num(E.value[i]) << ',' << num(V.value[i]) << '\n';
                      Output o;
                      o.result = {{"model", c["model"]}, {"observable", c["observable"]},
                                  {"target", target},     {"window_size", e.size()},
                                  {"lambda_grid", E.lambda}, {"counts", E.count},
                                  {"E_running", E.value}, {"V_running", V.value}};
                      o.csv.emplace_back("qe.csv", csv.str());
                      return o;
                  }});
    return cs;
}

std::string key_to_flag(const std::string& k) {
    std::string f = k;
    for (char& ch : f)
        if (ch == '_') ch = '-';
    return "--" + f;
}

bool type_matches(const json& def, const json& v) {
    if (def.is_number_integer()) return v.is_number_integer();
    if (def.is_number()) return v.is_number();
    if (def.is_string()) return v.is_string();
    if (def.is_boolean()) return v.is_boolean();
    if (def.is_array()) return v.is_array();
    return false;
}

std::string timestamp() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_atomic(const std::filesystem::path& p, const std::string& body) {
    auto tmp = p;
    tmp += ".tmp";
    {
        std::ofstream o(tmp, std::ios::binary);
        if (!o) throw ConfigError("cannot write '" + tmp.string() + "'");
        o << body;
    }
    std::filesystem::rename(tmp, p);
}
}  // namespace

const std::vector<Command>& commands() {
    static const std::vector<Command> cs = make_commands();
    return cs;
}

json resolve_config(const Command& c, const json& flags, const json& file) {
    json def = common_defaults();
    for (const auto& [k, v] : c.defaults.items()) def[k] = v;
    json cfg = def;
    auto apply = [&](const json& src, const char* where) {
        if (!src.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
        for (const auto& [k, v] : src.items()) {
            if (!def.contains(k)) throw ConfigError(std::string("unknown key '") + k + "' in " + where);
            if (!type_matches(def[k], v))
                throw ConfigError("key '" + k + "' in " + where + " has the wrong type (expected like " + def[k].dump() + ")");
            cfg[k] = v;
        }
    };
    apply(flags, "flags");
    apply(file, "config file");
    for (const auto& [k, v] : cfg.items())
        if (k.find("tol") != std::string::npos && !(v.get<double>() > 0))
            throw ConfigError("tolerance '" + k + "' must be positive");
    if (cfg["threads"].get<int>() < 1) throw ConfigError("threads must be positive");
    if (cfg.contains("model")) {
        try {
            qc::models::by_name(cfg["model"], cfg.value("orientation", 1));
        } catch (const qc::Error& e) {
            throw ConfigError(e.what());
        }
    }
    if (cfg.contains("orientation") && std::abs(cfg["orientation"].get<int>()) != 1)
        throw ConfigError("orientation must be 1 or -1");
    return cfg;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Spectral and dynamical computations on 4D quasi-contact sub-Riemannian models"};
    app.require_subcommand(1);
    app.set_version_flag("--version", QC_VERSION);

    struct Slot {
        const Command* cmd;
        CLI::App* sub;
        std::map<std::string, std::string> raw;
        std::string config_path;
        std::string action = "verify";
    };
    std::vector<Slot> slots;
    slots.reserve(commands().size());
    for (const Command& c : commands()) {
        slots.push_back({&c, nullptr, {}, {}});
        Slot& s = slots.back();
        s.sub = app.add_subcommand(c.name, c.help);
        s.sub->add_option("--config", s.config_path, "JSON file whose keys override the flags");
        json def = common_defaults();
        for (const auto& [k, v] : c.defaults.items()) def[k] = v;
        for (const auto& [k, v] : def.items()) s.sub->add_option(key_to_flag(k), s.raw[k], "default " + v.dump());
        if (c.name == "hermite") s.sub->add_option("action", s.action, "only 'verify'")->check(CLI::IsMember({"verify"}));
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    for (Slot& s : slots) {
        if (!s.sub->parsed()) continue;
        json cfg;
        try {
            json flags = json::object();
            json def = common_defaults();
            for (const auto& [k, v] : s.cmd->defaults.items()) def[k] = v;
            for (const auto& [k, text] : s.raw) {
                if (s.sub->count(key_to_flag(k)) == 0) continue;
                if (def[k].is_string()) {
                    flags[k] = text;
                } else {
                    try {
                        flags[k] = json::parse(text);
                    } catch (const json::exception&) {
                        throw ConfigError("cannot parse value '" + text + "' for " + key_to_flag(k));
                    }
                }
            }
            json file = json::object();
            if (!s.config_path.empty()) {
                std::ifstream in(s.config_path);
                if (!in) throw ConfigError("cannot read config '" + s.config_path + "'");
                try {
                    file = json::parse(in);
                } catch (const json::exception& e) {
                    throw ConfigError(std::string("config file: ") + e.what());
                }
            }
            cfg = resolve_config(*s.cmd, flags, file);
        } catch (const qc::Error& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 2;
        }

        Output out;
        try {
            out = s.cmd->run(cfg);
        } catch (const qc::ConfigError& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 2;
        } catch (const qc::Error& e) {
            std::cerr << "error in " << s.cmd->name << ": " << e.what() << '\n';
            return 3;
        } catch (const std::exception& e) {
            std::cerr << "error in " << s.cmd->name << ": " << e.what() << '\n';
            return 3;
        }

        json doc = {{"schema_version", kSchemaVersion},
                    {"subcommand", s.cmd->name},
                    {"code_version", QC_VERSION},
                    {"config", cfg},
                    {"threads", cfg["threads"]},
                    {"timestamp", timestamp()},
                    {"result", out.result}};
        try {
            std::filesystem::path dir = cfg["output"].get<std::string>();
            std::filesystem::create_directories(dir);
            for (const auto& [name, body] : out.csv) write_atomic(dir / (s.cmd->name + "_" + name), body);
            write_atomic(dir / (s.cmd->name + ".json"), doc.dump(2) + "\n");
        } catch (const std::exception& e) {
            std::cerr << "error: cannot write output: " << e.what() << '\n';
            return 3;
        }
        std::cout << (std::filesystem::path(cfg["output"].get<std::string>()) / (s.cmd->name + ".json")).string() << '\n';
        return 0;
    }
    return 2;
}

}  // namespace qcli
