#pragma once

// Nested Laplace levels evaluated on the logarithmic lattice
// zeta_i = exp(log_rho0 + i h) e^{i d}. Level j+1 at a lattice point is a
// discrete convolution of level j; the last level is evaluated at arbitrary z.

#include <functional>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

#include "qconf/continuation.hpp"

namespace qconf::detail {

struct lattice_kernel {
    double k = 1.0;                              // log r = k (log zeta_src - log z)
    std::function<cplx(cplx log_r)> log_weight;  // log of the quadrature weight
};

struct lattice_params {
    double log_rho0 = 0.0;
    double h = 0.05;
    double d = 0.0;
    std::vector<lattice_kernel> levels;  // level j maps f_j to f_{j+1}
    ray_handle base;                     // f_0 along the ray
    // asymptotic value of f_j (j >= 1) at |zeta| = exp(log_t), when it is reliable
    std::function<std::optional<cplx>(int j, double log_t)> formal;
    int max_span = 200000;  // guard on lattice indices
};

class lattice_engine {
public:
    explicit lattice_engine(lattice_params p);

    // Last level evaluated at z (argument taken on the sheet of z).
    cplx evaluate(const sector_point& z) const;
    // f_j at lattice index i.
    cplx value(int j, int i) const;

    const lattice_params& params() const { return p_; }

private:
    struct window {
        int lo = 0, hi = 0, peak = 0;
        std::vector<cplx> w;  // w[m - lo]
    };
    window make_window(const lattice_kernel& ker) const;
    cplx value_locked(int j, int i) const;
    cplx base_value(int i) const;

    lattice_params p_;
    std::vector<window> windows_;
    mutable std::mutex mu_;
    mutable std::vector<std::unordered_map<int, cplx>> memo_;
    mutable int base_lo_ = 0, base_hi_ = -1;
    mutable std::vector<cplx> base_;
};

}  // namespace qconf::detail
