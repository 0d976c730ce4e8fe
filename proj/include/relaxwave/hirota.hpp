#pragma once

#include "relaxwave/numeric.hpp"

#include <array>
#include <map>
#include <utility>
#include <vector>

#include <json.hpp>

namespace relaxwave {

// One term c * exp(k[0] X + k[1] T1 + k[2] T2) with complex c and k.
struct ExpTerm {
    Cplx coef;
    std::array<Cplx, 3> k;
};

// Finite sum of exponential terms over the frame variables (X, T1, T2), kept
// canonical: terms sorted lexicographically by exponent, exponents unique up
// to a 1e-12 relative tolerance, coefficients pruned at 1e-15 relative to the
// largest coefficient (and, at merge time, relative to the largest merged
// contribution, so structural cancellations collapse to the empty sum).
class ExpPoly {
public:
    ExpPoly() = default;
    explicit ExpPoly(std::vector<ExpTerm> terms);

    static ExpPoly constant(Cplx c);
    static ExpPoly monomial(Cplx coef, std::array<Cplx, 3> k);

    const std::vector<ExpTerm>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }
    double max_coef_mag() const;

    ExpPoly operator+(const ExpPoly& o) const;
    ExpPoly operator-(const ExpPoly& o) const;
    ExpPoly operator*(const ExpPoly& o) const; // pointwise product
    ExpPoly scaled(Cplx s) const;

    Cplx eval(double X, double T1, double T2) const;

    nlohmann::json to_json() const;
    static ExpPoly from_json(const nlohmann::json& j);

private:
    friend ExpPoly hirota_D(const ExpPoly&, const ExpPoly&, std::array<int, 3>);
    void canonicalize(const std::vector<double>& contrib_max = {});
    std::vector<ExpTerm> terms_;
};

// Bilinear derivative D_X^{o[0]} D_T1^{o[1]} D_T2^{o[2]} a . b  on exponential
// monomials: c_a c_b * prod_v (k_a[v] - k_b[v])^{o[v]} * exp((k_a + k_b) . xi),
// extended bilinearly.
ExpPoly hirota_D(const ExpPoly& a, const ExpPoly& b, std::array<int, 3> orders);

// Descriptor of (sum_ij c2[i][j] D_i D_j + sum_i c1[i] D_i + c0) G . F with
// variable indices 0 = X, 1 = T1, 2 = T2.
struct BilinearForm {
    double c2[3][3] = {};
    double c1[3] = {};
    double c0 = 0.0;
};

// First member of the quadratic-free bilinear system:
//   (D_X D_T1 + D_X D_T2 + alpha (D_T1 + D_T2) - 1) G.F
BilinearForm quad_free_first_form(double alpha_tilde);
// Mixed-case variant: same with the constant at +1.
BilinearForm mixed_first_form(double alpha_tilde);

ExpPoly apply_form(const BilinearForm& form, const ExpPoly& G, const ExpPoly& F);

// Residuals of the quadratic-free bilinear system on (G, F):
//   first  = (D_X D_T1 + D_X D_T2 + alpha (D_T1+D_T2) - 1) G.F
//   second = D_X^2 F.F - G^2 / 2
std::pair<ExpPoly, ExpPoly> bilinear_residual_quadratic(const ExpPoly& G, const ExpPoly& F,
                                                        double alpha_tilde);

// Residuals of the mixed-case bilinear system on (G, F):
//   first  = (D_X D_T1 + D_X D_T2 + alpha (D_T1+D_T2) + 1) G.F
//   second = D_X^2 F.F - (G^2 + 2 G F) / 2
std::pair<ExpPoly, ExpPoly> bilinear_residual_cubic(const ExpPoly& G, const ExpPoly& F,
                                                    double alpha_tilde);

// Sparse real polynomial in the symbols (K, omega1, omega2); key = exponents.
struct Poly3 {
    std::map<std::array<int, 3>, double> c;

    void add(std::array<int, 3> mono, double v);
    Poly3 operator*(const Poly3& o) const;
    Poly3 operator+(const Poly3& o) const;
    Poly3& operator+=(const Poly3& o);
    // Scales so the lexicographically-first nonzero monomial (the constant
    // term when present) has coefficient +1; drops near-zero entries.
    Poly3 normalized() const;
    bool almost_equal(const Poly3& o, double tol = 1e-12) const;

    static Poly3 constant(double v);
    static Poly3 symbol(int idx); // 0 = K, 1 = omega1, 2 = omega2
};

// Exponential-ansatz term coef * exp(m * theta) with theta = K X - omega1 T1 -
// omega2 T2 (+ phase); m integer.
struct AnsatzTerm {
    double coef;
    int m;
};

// Applies the form to symbolic templates G = sum coef_i e^{m_i theta},
// F = sum coef_j e^{m_j theta} and collects, per exponential level m_i + m_j,
// the normalized polynomial condition on (K, omega1, omega2) whose vanishing
// kills that level. Throws ValidationError on an empty ansatz.
std::map<int, Poly3> dispersion_from_ansatz(const BilinearForm& form,
                                            const std::vector<AnsatzTerm>& G,
                                            const std::vector<AnsatzTerm>& F);

} // namespace relaxwave
