#include "relaxwave/hirota.hpp"

#include "relaxwave/errors.hpp"

#include <algorithm>
#include <cmath>

namespace relaxwave {

namespace {

constexpr double kMergeTol = 1e-12; // relative exponent-merge tolerance
constexpr double kPruneTol = 1e-15; // relative coefficient prune threshold

bool exp_less(const std::array<Cplx, 3>& a, const std::array<Cplx, 3>& b) {
    for (int v = 0; v < 3; ++v) {
        if (a[v].real() != b[v].real()) return a[v].real() < b[v].real();
        if (a[v].imag() != b[v].imag()) return a[v].imag() < b[v].imag();
    }
    return false;
}

bool exp_close(const std::array<Cplx, 3>& a, const std::array<Cplx, 3>& b, double scale) {
    for (int v = 0; v < 3; ++v)
        if (std::abs(a[v] - b[v]) > kMergeTol * scale) return false;
    return true;
}

double exp_scale(const std::vector<ExpTerm>& ts) {
    double s = 1.0;
    for (const auto& t : ts)
        for (const auto& kv : t.k) s = std::max(s, std::abs(kv));
    return s;
}

} // namespace

ExpPoly::ExpPoly(std::vector<ExpTerm> terms) : terms_(std::move(terms)) { canonicalize(); }

ExpPoly ExpPoly::constant(Cplx c) { return monomial(c, {Cplx(0), Cplx(0), Cplx(0)}); }

ExpPoly ExpPoly::monomial(Cplx coef, std::array<Cplx, 3> k) {
    return ExpPoly(std::vector<ExpTerm>{{coef, k}});
}

double ExpPoly::max_coef_mag() const {
    double m = 0.0;
    for (const auto& t : terms_) m = std::max(m, std::abs(t.coef));
    return m;
}

void ExpPoly::canonicalize(const std::vector<double>& contrib_max) {
    // contrib_max, when given, parallels terms_ and carries the largest
    // |coefficient| that went into each term before summation; a merged term
    // tiny relative to its own ingredients is a cancellation, not data.
    std::vector<std::size_t> order(terms_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return exp_less(terms_[i].k, terms_[j].k); });

    const double kscale = exp_scale(terms_);
    std::vector<ExpTerm> merged;
    std::vector<double> group_max;
    for (std::size_t idx : order) {
        const ExpTerm& t = terms_[idx];
        const double cmag = contrib_max.empty() ? std::abs(t.coef) : contrib_max[idx];
        if (!merged.empty() && exp_close(merged.back().k, t.k, kscale)) {
            merged.back().coef += t.coef;
            group_max.back() = std::max(group_max.back(), cmag);
        } else {
            merged.push_back(t);
            group_max.push_back(cmag);
        }
    }

    double poly_max = 0.0;
    for (const auto& t : merged) poly_max = std::max(poly_max, std::abs(t.coef));

    terms_.clear();
    for (std::size_t i = 0; i < merged.size(); ++i) {
        const double mag = std::abs(merged[i].coef);
        if (mag <= kPruneTol * std::max(poly_max, group_max[i])) continue;
        terms_.push_back(merged[i]);
    }
}

ExpPoly ExpPoly::operator+(const ExpPoly& o) const {
    ExpPoly r;
    r.terms_ = terms_;
    r.terms_.insert(r.terms_.end(), o.terms_.begin(), o.terms_.end());
    std::vector<double> contrib(r.terms_.size());
    for (std::size_t i = 0; i < r.terms_.size(); ++i) contrib[i] = std::abs(r.terms_[i].coef);
    r.canonicalize(contrib);
    return r;
}

ExpPoly ExpPoly::operator-(const ExpPoly& o) const { return *this + o.scaled(Cplx(-1.0)); }

ExpPoly ExpPoly::scaled(Cplx s) const {
    ExpPoly r;
    r.terms_ = terms_;
    for (auto& t : r.terms_) t.coef *= s;
    r.canonicalize();
    return r;
}

ExpPoly ExpPoly::operator*(const ExpPoly& o) const {
    ExpPoly r;
    r.terms_.reserve(terms_.size() * o.terms_.size());
    for (const auto& a : terms_)
        for (const auto& b : o.terms_) {
            ExpTerm t;
            t.coef = a.coef * b.coef;
            for (int v = 0; v < 3; ++v) t.k[v] = a.k[v] + b.k[v];
            r.terms_.push_back(t);
        }
    std::vector<double> contrib(r.terms_.size());
    for (std::size_t i = 0; i < r.terms_.size(); ++i) contrib[i] = std::abs(r.terms_[i].coef);
    r.canonicalize(contrib);
    return r;
}

Cplx ExpPoly::eval(double X, double T1, double T2) const {
    Cplx s = 0.0;
    for (const auto& t : terms_)
        s += t.coef * std::exp(t.k[0] * X + t.k[1] * T1 + t.k[2] * T2);
    return s;
}

nlohmann::json ExpPoly::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : terms_) {
        arr.push_back({{"coef", {t.coef.real(), t.coef.imag()}},
                       {"k",
                        {{t.k[0].real(), t.k[0].imag()},
                         {t.k[1].real(), t.k[1].imag()},
                         {t.k[2].real(), t.k[2].imag()}}}});
    }
    return {{"terms", arr}};
}

ExpPoly ExpPoly::from_json(const nlohmann::json& j) {
    std::vector<ExpTerm> ts;
    for (const auto& e : j.at("terms")) {
        ExpTerm t;
        const auto& c = e.at("coef");
        t.coef = Cplx(c.at(0).get<double>(), c.at(1).get<double>());
        const auto& k = e.at("k");
        for (int v = 0; v < 3; ++v)
            t.k[v] = Cplx(k.at(v).at(0).get<double>(), k.at(v).at(1).get<double>());
        ts.push_back(t);
    }
    return ExpPoly(std::move(ts));
}

ExpPoly hirota_D(const ExpPoly& a, const ExpPoly& b, std::array<int, 3> orders) {
    std::vector<ExpTerm> out;
    out.reserve(a.size() * b.size());
    std::vector<double> contrib;
    contrib.reserve(out.capacity());
    for (const auto& ta : a.terms())
        for (const auto& tb : b.terms()) {
            Cplx fac = ta.coef * tb.coef;
            const double base_mag = std::abs(fac) * std::max(1.0, [&] {
                double m = 1.0;
                for (int v = 0; v < 3; ++v)
                    for (int p = 0; p < orders[v]; ++p) m *= std::abs(ta.k[v]) + std::abs(tb.k[v]);
                return m;
            }());
            for (int v = 0; v < 3; ++v)
                for (int p = 0; p < orders[v]; ++p) fac *= ta.k[v] - tb.k[v];
            ExpTerm t;
            t.coef = fac;
            for (int v = 0; v < 3; ++v) t.k[v] = ta.k[v] + tb.k[v];
            out.push_back(t);
            contrib.push_back(base_mag);
        }
    ExpPoly r;
    r.terms_ = std::move(out);
    // Pass the pre-difference magnitudes: (k-l)^m can itself be a
    // cancellation that must count toward the group scale.
    r.canonicalize(contrib);
    return r;
}

BilinearForm quad_free_first_form(double alpha_tilde) {
    BilinearForm f;
    f.c2[0][1] = 1.0; // D_X D_T1
    f.c2[0][2] = 1.0; // D_X D_T2
    f.c1[1] = alpha_tilde;
    f.c1[2] = alpha_tilde;
    f.c0 = -1.0;
    return f;
}

BilinearForm mixed_first_form(double alpha_tilde) {
    BilinearForm f = quad_free_first_form(alpha_tilde);
    f.c0 = 1.0;
    return f;
}

ExpPoly apply_form(const BilinearForm& form, const ExpPoly& G, const ExpPoly& F) {
    ExpPoly acc;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            if (form.c2[i][j] == 0.0) continue;
            std::array<int, 3> ord = {0, 0, 0};
            ord[i] += 1;
            ord[j] += 1;
            acc = acc + hirota_D(G, F, ord).scaled(form.c2[i][j]);
        }
    for (int i = 0; i < 3; ++i) {
        if (form.c1[i] == 0.0) continue;
        std::array<int, 3> ord = {0, 0, 0};
        ord[i] = 1;
        acc = acc + hirota_D(G, F, ord).scaled(form.c1[i]);
    }
    if (form.c0 != 0.0) acc = acc + (G * F).scaled(form.c0);
    return acc;
}

std::pair<ExpPoly, ExpPoly> bilinear_residual_quadratic(const ExpPoly& G, const ExpPoly& F,
                                                        double alpha_tilde) {
    ExpPoly first = apply_form(quad_free_first_form(alpha_tilde), G, F);
    ExpPoly second = hirota_D(F, F, {2, 0, 0}) - (G * G).scaled(0.5);
    return {first, second};
}

std::pair<ExpPoly, ExpPoly> bilinear_residual_cubic(const ExpPoly& G, const ExpPoly& F,
                                                    double alpha_tilde) {
    ExpPoly first = apply_form(mixed_first_form(alpha_tilde), G, F);
    ExpPoly second = hirota_D(F, F, {2, 0, 0}) - (G * G).scaled(0.5) - (G * F);
    return {first, second};
}

void Poly3::add(std::array<int, 3> mono, double v) {
    double& slot = c[mono];
    slot += v;
    if (std::abs(slot) < 1e-300) c.erase(mono);
}

Poly3 Poly3::operator*(const Poly3& o) const {
    Poly3 r;
    for (const auto& [ma, va] : c)
        for (const auto& [mb, vb] : o.c)
            r.add({ma[0] + mb[0], ma[1] + mb[1], ma[2] + mb[2]}, va * vb);
    return r;
}

Poly3 Poly3::operator+(const Poly3& o) const {
    Poly3 r = *this;
    r += o;
    return r;
}

Poly3& Poly3::operator+=(const Poly3& o) {
    for (const auto& [m, v] : o.c) add(m, v);
    return *this;
}

Poly3 Poly3::normalized() const {
    double lead = 0.0;
    double maxmag = 0.0;
    for (const auto& [m, v] : c) maxmag = std::max(maxmag, std::abs(v));
    if (maxmag == 0.0) return {};
    for (const auto& [m, v] : c) { // map iterates keys in lex order
        if (std::abs(v) > 1e-12 * maxmag) {
            lead = v;
            break;
        }
    }
    Poly3 r;
    for (const auto& [m, v] : c) {
        const double s = v / lead;
        if (std::abs(s) > 1e-12) r.add(m, s);
    }
    return r;
}

bool Poly3::almost_equal(const Poly3& o, double tol) const {
    Poly3 diff = *this;
    for (const auto& [m, v] : o.c) diff.add(m, -v);
    double scale = 0.0;
    for (const auto& [m, v] : c) scale = std::max(scale, std::abs(v));
    for (const auto& [m, v] : o.c) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return true;
    for (const auto& [m, v] : diff.c)
        if (std::abs(v) > tol * scale) return false;
    return true;
}

Poly3 Poly3::constant(double v) {
    Poly3 p;
    p.add({0, 0, 0}, v);
    return p;
}

Poly3 Poly3::symbol(int idx) {
    Poly3 p;
    std::array<int, 3> m = {0, 0, 0};
    m[idx] = 1;
    p.add(m, 1.0);
    return p;
}

std::map<int, Poly3> dispersion_from_ansatz(const BilinearForm& form,
                                            const std::vector<AnsatzTerm>& G,
                                            const std::vector<AnsatzTerm>& F) {
    if (G.empty() || F.empty())
        throw ValidationError("dispersion_from_ansatz: empty ansatz");

    // theta = K X - omega1 T1 - omega2 T2, so a term with multiplier m carries
    // the symbolic wave vector m * (K, -omega1, -omega2).
    const std::array<Poly3, 3> wave = {Poly3::symbol(0),
                                       Poly3::constant(-1.0) * Poly3::symbol(1),
                                       Poly3::constant(-1.0) * Poly3::symbol(2)};

    std::map<int, Poly3> levels;
    for (const auto& tg : G)
        for (const auto& tf : F) {
            Poly3 contrib;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    if (form.c2[i][j] == 0.0) continue;
                    // D_i D_j on monomials: (k_i - l_i)(k_j - l_j).
                    Poly3 di = wave[i] * Poly3::constant(double(tg.m - tf.m));
                    Poly3 dj = wave[j] * Poly3::constant(double(tg.m - tf.m));
                    contrib += di * dj * Poly3::constant(form.c2[i][j]);
                }
            for (int i = 0; i < 3; ++i) {
                if (form.c1[i] == 0.0) continue;
                contrib += wave[i] * Poly3::constant(form.c1[i] * double(tg.m - tf.m));
            }
            contrib += Poly3::constant(form.c0);
            levels[tg.m + tf.m] += contrib * Poly3::constant(tg.coef * tf.coef);
        }

    std::map<int, Poly3> out;
    for (const auto& [lvl, p] : levels) {
        Poly3 n = p.normalized();
        if (!n.c.empty()) out[lvl] = std::move(n);
    }
    return out;
}

} // namespace relaxwave
