#include "ladder_engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qconf::detail {

namespace {

constexpr double cut_log = -92.0;  // relative weight cutoff, about 1e-40

// Weights are unimodal in the log-ratio: climb to the peak, then widen until negligible.
std::pair<int, int> weight_range(const lattice_kernel& ker, double step, int guard) {
    auto lw = [&](int m) {
        double v = ker.log_weight(cplx(m * step)).real();
        return std::isfinite(v) ? v : -1e300;
    };
    int ipeak = 0;
    double peak = lw(0);
    while (std::abs(ipeak) < guard) {
        if (lw(ipeak + 1) > peak) {
            peak = lw(++ipeak);
        } else if (lw(ipeak - 1) > peak) {
            peak = lw(--ipeak);
        } else {
            break;
        }
    }
    int lo = ipeak, hi = ipeak;
    while (lo > ipeak - guard && lw(lo - 1) > peak + cut_log) --lo;
    while (hi < ipeak + guard && lw(hi + 1) > peak + cut_log) ++hi;
    if (lo <= ipeak - guard || hi >= ipeak + guard) fail(error_kind::growth, "kernel weight does not decay on the lattice");
    return {lo - 2, hi + 2};
}

// Sum term(m) over [lo, hi], walking outward from the peak and stopping once
// three consecutive terms are negligible against a nonzero running sum. Exact
// zeros (a summand vanishing near the origin) never count as settling.
template <class F>
cplx convolve(int lo, int hi, int peak, F term) {
    peak = std::clamp(peak, lo, hi);
    cplx acc = term(peak);
    auto walk = [&](int dir) {
        int quiet = 0;
        for (int m = peak + dir; m >= lo && m <= hi; m += dir) {
            cplx t = term(m);
            acc += t;
            quiet = acc != cplx(0.0) && std::abs(t) <= 1e-18 * std::abs(acc) ? quiet + 1 : 0;
            if (quiet >= 3) return true;
        }
        return acc == cplx(0.0);  // the whole window vanished
    };
    bool up = walk(1);
    bool down = walk(-1);
    if (!up || !down) fail(error_kind::growth, "lattice Laplace sum does not settle inside its window");
    return acc;
}

}  // namespace

lattice_engine::lattice_engine(lattice_params p) : p_(std::move(p)) {
    memo_.resize(p_.levels.size() + 1);
    for (std::size_t j = 0; j + 1 < p_.levels.size(); ++j) windows_.push_back(make_window(p_.levels[j]));
}

lattice_engine::window lattice_engine::make_window(const lattice_kernel& ker) const {
    double step = ker.k * p_.h;
    auto [lo, hi] = weight_range(ker, step, p_.max_span);
    window w;
    w.lo = lo;
    w.hi = hi;
    w.peak = 0;
    double best = -1e300;
    for (int m = lo; m <= hi; ++m) {
        // source index i+m relative to the target i: log r = k m h
        cplx lw = ker.log_weight(cplx(m * step));
        if (lw.real() > best) {
            best = lw.real();
            w.peak = m;
        }
        w.w.push_back(std::exp(lw));
    }
    return w;
}

cplx lattice_engine::base_value(int i) const {
    if (i < base_lo_ || i > base_hi_) {
        int lo = base_hi_ < base_lo_ ? i - 256 : std::min(base_lo_, i - 256);
        int hi = base_hi_ < base_lo_ ? i + 256 : std::max(base_hi_, i + 256);
        if (hi - lo > p_.max_span) fail(error_kind::growth, "continuation lattice grew beyond its guard");
        std::vector<double> ts;
        for (int n = lo; n <= hi; ++n) ts.push_back(std::exp(p_.log_rho0 + n * p_.h));
        base_ = p_.base->at_sorted(ts);
        base_lo_ = lo;
        base_hi_ = hi;
    }
    return base_[i - base_lo_];
}

cplx lattice_engine::value_locked(int j, int i) const {
    if (j == 0) return base_value(i);
    auto& memo = memo_[j];
    auto it = memo.find(i);
    if (it != memo.end()) return it->second;
    cplx v;
    std::optional<cplx> f;
    if (p_.formal) f = p_.formal(j, p_.log_rho0 + i * p_.h);
    if (f) {
        v = *f;
    } else {
        const window& w = windows_[j - 1];
        v = convolve(w.lo, w.hi, w.peak, [&](int m) { return w.w[m - w.lo] * value_locked(j - 1, i + m); });
        if (!std::isfinite(std::abs(v)))
            fail(error_kind::growth, "level " + std::to_string(j) + " Laplace sum does not converge on the ray");
    }
    memo.emplace(i, v);
    return v;
}

cplx lattice_engine::value(int j, int i) const {
    std::lock_guard<std::mutex> lock(mu_);
    return value_locked(j, i);
}

cplx lattice_engine::evaluate(const sector_point& z) const {
    std::lock_guard<std::mutex> lock(mu_);
    const int s = int(p_.levels.size()) - 1;
    const lattice_kernel& ker = p_.levels.back();
    const double step = ker.k * p_.h;
    auto [lo, hi] = weight_range(ker, step, p_.max_span);
    int span = hi - lo;
    lo -= span / 10;
    hi += span / 10;
    int center = int(std::lround((z.log_modulus - p_.log_rho0) / p_.h));
    double dphase = p_.d - z.argument;
    auto log_r = [&](int i) { return ker.k * cplx(p_.log_rho0 + i * p_.h - z.log_modulus, dphase); };
    // start from the kernel maximum; the window itself can be very lopsided
    int peak = center + lo;
    double best = -1e300;
    for (int i = center + lo; i <= center + hi; ++i) {
        double lw = ker.log_weight(log_r(i)).real();
        if (std::isfinite(lw) && lw > best) {
            best = lw;
            peak = i;
        }
    }
    auto term = [&](int i) { return std::exp(ker.log_weight(log_r(i))) * value_locked(s, i); };
    cplx acc;
    try {
        acc = convolve(center + lo, center + hi, peak, term);
    } catch (const error& e) {
        if (e.kind() != error_kind::growth) throw;
        fail(error_kind::domain, "Laplace sum does not converge at this point (|z|^k beyond 1/L)");
    }
    return acc;
}

}  // namespace qconf::detail
