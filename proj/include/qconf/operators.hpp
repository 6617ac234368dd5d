#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qconf/rational.hpp"
#include "qconf/series_core.hpp"

namespace qconf {

enum class op_kind { differential, q_difference };
enum class op_basis { delta, delta_q, sigma_q };

const char* to_string(op_kind k);
const char* to_string(op_basis b);

// sum_i b_i(z) D^i with D = delta, delta_q or sigma_q; inhomogeneous when rhs is set.
struct linear_operator {
    op_kind kind = op_kind::differential;
    op_basis basis = op_basis::delta;
    std::vector<polynomial> coefficients;  // b_0 ... b_m
    std::optional<double> q;
    std::optional<power_series> rhs;

    int order() const { return int(coefficients.size()) - 1; }
    double q_value() const;
    // Largest degree among the b_i.
    int max_degree() const;
    void validate() const;
};

linear_operator parse_operator(const nlohmann::json& doc);
linear_operator parse_operator_text(const std::string& text);
nlohmann::json serialize_operator(const linear_operator& op);

// Same operator written in the sigma_q basis (identity for sigma_q input).
linear_operator to_sigma_basis(const linear_operator& op);

struct polygon_vertex {
    int d;
    rational n;
};

struct polygon_slope {
    rational slope;
    int multiplicity;
};

struct newton_polygon_t {
    std::vector<polygon_vertex> vertices;
    std::vector<polygon_slope> slopes;

    std::vector<rational> positive_slopes() const;
};

newton_polygon_t newton_polygon(const linear_operator& op);

struct char_polynomial {
    rational slope;
    std::vector<cplx> coefficients;  // ascending powers of X
    std::vector<cplx> roots;
    std::vector<int> multiplicities;  // parallel to a clustered root list
    std::vector<cplx> distinct_roots;
};

char_polynomial characteristic_polynomial(const linear_operator& op, rational slope);

power_series apply_operator(const linear_operator& op, const power_series& s);

struct series_solution {
    power_series series;
    bool non_unique = false;             // some c_n = 0 with a consistent zero right side
    std::vector<int> ill_conditioned;    // indices where |c_n| was tiny but nonzero
};

series_solution solve_series(const linear_operator& op, const std::optional<power_series>& rhs, int valuation,
                             cplx leading, int order);

// Coefficient recurrence sum_j p_j(nu_n) h_{n-j} = r_n, with nu_n = n for
// differential operators and nu_n = q^n for q-difference operators.
struct recurrence {
    bool q_type = false;
    double q = 1.0;
    std::vector<polynomial> p;  // p_0 ... p_J
    std::vector<cplx> rhs;      // r_n, zero beyond the stored range

    int span() const { return int(p.size()) - 1; }
    cplx nu(double n) const;
    cplx p_at(int j, double n) const { return p[j](nu(n)); }
    cplx r(int n) const { return n >= 0 && n < int(rhs.size()) ? rhs[n] : cplx(0.0); }
};

recurrence make_recurrence(const linear_operator& op);

linear_operator borel_plane_operator(const linear_operator& op, rational k);

// Coefficient b_i(z, q) given as sum over terms c * (q-1)^power.
struct family_term {
    cplx coef;
    double power = 0.0;
};

struct operator_family {
    op_kind kind = op_kind::q_difference;
    op_basis basis = op_basis::delta_q;
    std::vector<std::vector<std::vector<family_term>>> coefficients;  // [i][j] -> terms of z^j in b_i
    std::optional<power_series> rhs;

    linear_operator at(double q) const;
    // Coefficients at q -> 1 (terms with positive power dropped).
    linear_operator limit() const;
};

operator_family parse_operator_family(const nlohmann::json& doc);

}  // namespace qconf
