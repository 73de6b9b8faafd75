#include "qkd/keyrate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qkd::keyrate {

namespace {

constexpr double kTieTolerance = 1e-12;

double entropy_arg(double e, double eps, bool* clamped) {
    double x = e + eps;
    if (x > 0.5) {
        if (clamped) *clamped = true;
        x = 0.5;
    }
    return x;
}

// eps achieving `target` for a (possibly fractional) sample count n.
double solve_epsilon_real(double n, double e, double target) {
    if (target >= 1.0) return 0.0;
    if (n < 1.0) return 0.5; // no samples: phase error unbounded
    if (e <= 0.0) return 0.0; // bound is already 0 for any eps > 0
    return std::sqrt(4.0 * e * (1.0 - e) * std::log(1.0 / target) / n);
}

struct SplitEval {
    double rate = 0.0;
    double eps_x = 0.0;
    double eps_z = 0.0;
    double p_eps_x = 0.0;
    double p_eps_z = 0.0;
};

// Rate at bias (q_a, q_b) with the failure budget split as
// p_eps_x = t * p_eps, p_eps_z = (1-t) * p_eps.
SplitEval eval_split(double n_total, double q_a, double q_b,
                     double e_bx, double e_bz, double f_x, double f_z,
                     double p_eps, double t) {
    SplitEval ev;
    ev.p_eps_x = t * p_eps;
    ev.p_eps_z = (1.0 - t) * p_eps;
    const double n_xx = n_total * (1.0 - q_a) * (1.0 - q_b);
    const double n_zz = n_total * q_a * q_b;
    ev.eps_x = solve_epsilon_real(n_zz, e_bz, ev.p_eps_x);
    ev.eps_z = solve_epsilon_real(n_xx, e_bx, ev.p_eps_z);
    KeyRateParams p;
    p.q_a = q_a; p.q_b = q_b;
    p.e_bx = e_bx; p.e_bz = e_bz;
    p.f_x = f_x; p.f_z = f_z;
    p.eps_x = ev.eps_x; p.eps_z = ev.eps_z;
    ev.rate = key_rate(p);
    return ev;
}

template <typename F>
std::pair<double, double> golden_max(double lo, double hi, int iters, F&& f) {
    const double phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + phi * (b - a); f2 = f(x2);
        } else {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - phi * (b - a); f1 = f(x1);
        }
    }
    const double xm = 0.5 * (a + b);
    return {xm, f(xm)};
}

SplitEval best_split(double n_total, double q_a, double q_b,
                     double e_bx, double e_bz, double f_x, double f_z,
                     double p_eps, const OptimizeOptions& opt) {
    if (!opt.optimize_split)
        return eval_split(n_total, q_a, q_b, e_bx, e_bz, f_x, f_z, p_eps, 0.5);
    auto [t, r] = golden_max(0.001, 0.999, 40, [&](double tt) {
        return eval_split(n_total, q_a, q_b, e_bx, e_bz, f_x, f_z, p_eps, tt).rate;
    });
    (void)r;
    return eval_split(n_total, q_a, q_b, e_bx, e_bz, f_x, f_z, p_eps, t);
}

} // namespace

double binary_entropy(double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("binary_entropy: x outside [0,1]");
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double sampling_bound(double eps, std::uint64_t n, double e) {
    if (n < 1) throw std::invalid_argument("sampling_bound: n must be >= 1");
    if (eps < 0.0) throw std::domain_error("sampling_bound: eps must be >= 0");
    if (!(e >= 0.0 && e <= 0.5)) throw std::domain_error("sampling_bound: e outside [0, 0.5]");
    if (e == 0.0) return eps > 0.0 ? 0.0 : 1.0; // degenerate: no errors observed
    return std::exp(-eps * eps * static_cast<double>(n) / (4.0 * e * (1.0 - e)));
}

double solve_epsilon(std::uint64_t n, double e, double target) {
    if (n < 1) throw std::invalid_argument("solve_epsilon: infeasible, n must be >= 1");
    if (!(e >= 0.0 && e <= 0.5)) throw std::domain_error("solve_epsilon: e outside [0, 0.5]");
    if (!(target > 0.0)) throw std::domain_error("solve_epsilon: target must be > 0");
    return solve_epsilon_real(static_cast<double>(n), e, target);
}

RateDetail key_rate_detail(const KeyRateParams& p) {
    bool clamped = false;
    const double hx = binary_entropy(p.e_bx);
    const double hz = binary_entropy(p.e_bz);
    const double phase_x = binary_entropy(entropy_arg(p.e_bz, p.eps_x, &clamped));
    const double phase_z = binary_entropy(entropy_arg(p.e_bx, p.eps_z, &clamped));
    const double wx = (1.0 - p.q_a) * (1.0 - p.q_b);
    const double wz = p.q_a * p.q_b;
    const double rate = wx * (1.0 - p.f_x * hx - phase_x)
                      + wz * (1.0 - p.f_z * hz - phase_z);
    return {rate, clamped};
}

double key_rate(const KeyRateParams& params) {
    return key_rate_detail(params).rate;
}

KeyRateResult rate_at_bias(std::uint64_t n_total, double q_a, double q_b,
                           double e_bx, double e_bz, double f_x, double f_z,
                           double p_eps_x, double p_eps_z) {
    const double n = static_cast<double>(n_total);
    SplitEval ev;
    ev.p_eps_x = p_eps_x;
    ev.p_eps_z = p_eps_z;
    ev.eps_x = solve_epsilon_real(n * q_a * q_b, e_bz, p_eps_x);
    ev.eps_z = solve_epsilon_real(n * (1.0 - q_a) * (1.0 - q_b), e_bx, p_eps_z);
    KeyRateParams p{q_a, q_b, e_bx, e_bz, f_x, f_z, ev.eps_x, ev.eps_z};
    ev.rate = key_rate(p);

    KeyRateResult res;
    res.raw_rate = ev.rate;
    res.rate = std::max(ev.rate, 0.0);
    res.positive = ev.rate > 0.0;
    res.q_a_star = q_a;
    res.q_b_star = q_b;
    res.eps_x_star = ev.eps_x;
    res.eps_z_star = ev.eps_z;
    res.p_eps_x_star = ev.p_eps_x;
    res.p_eps_z_star = ev.p_eps_z;
    return res;
}

KeyRateResult optimize_bias(std::uint64_t n_total, double e_bx, double e_bz,
                            double f_x, double f_z, double p_eps,
                            const OptimizeOptions& opt) {
    if (n_total < 1) throw std::invalid_argument("optimize_bias: n_total must be >= 1");
    if (!(p_eps > 0.0 && p_eps < 1.0)) throw std::domain_error("optimize_bias: p_eps outside (0,1)");
    const double n = static_cast<double>(n_total);

    auto rate_at = [&](double q) {
        return best_split(n, q, q, e_bx, e_bz, f_x, f_z, p_eps, opt).rate;
    };

    // Coarse grid; track the overall best and the best at q > 0.5 so a
    // symmetric-rate tie resolves toward the Z-heavy side.
    double best_q = opt.q_min, best_r = rate_at(opt.q_min);
    double best_hi_q = 0.0, best_hi_r = -1e300;
    for (double q = opt.q_min; q <= opt.q_max + 1e-12; q += opt.grid_step) {
        const double qq = std::min(q, opt.q_max);
        const double r = rate_at(qq);
        if (r > best_r) { best_r = r; best_q = qq; }
        if (qq > 0.5 && r > best_hi_r) { best_hi_r = r; best_hi_q = qq; }
    }
    if (best_hi_r >= best_r - kTieTolerance * std::max(std::abs(best_r), 1.0)) {
        best_q = best_hi_q;
        best_r = best_hi_r;
    }

    const double lo = std::max(opt.q_min, best_q - opt.grid_step);
    const double hi = std::min(opt.q_max, best_q + opt.grid_step);
    auto [q_star, r_star] = golden_max(lo, hi, opt.refine_iters, rate_at);
    if (r_star < best_r) { q_star = best_q; r_star = best_r; }

    SplitEval ev = best_split(n, q_star, q_star, e_bx, e_bz, f_x, f_z, p_eps, opt);
    KeyRateResult res;
    res.raw_rate = ev.rate;
    res.rate = std::max(ev.rate, 0.0);
    res.positive = ev.rate > 0.0;
    res.q_a_star = q_star;
    res.q_b_star = q_star;
    res.eps_x_star = ev.eps_x;
    res.eps_z_star = ev.eps_z;
    res.p_eps_x_star = ev.p_eps_x;
    res.p_eps_z_star = ev.p_eps_z;
    return res;
}

KeyRateResult optimize_bias_asymmetric(std::uint64_t n_total, double e_bx, double e_bz,
                                       double f_x, double f_z, double p_eps,
                                       const OptimizeOptions& opt) {
    if (n_total < 1) throw std::invalid_argument("optimize_bias_asymmetric: n_total must be >= 1");
    const double n = static_cast<double>(n_total);

    auto rate_at = [&](double qa, double qb) {
        return best_split(n, qa, qb, e_bx, e_bz, f_x, f_z, p_eps, opt).rate;
    };

    double step = std::max(opt.grid_step, 0.02);
    double best_qa = opt.q_min, best_qb = opt.q_min, best_r = -1e300;
    for (double qa = opt.q_min; qa <= opt.q_max + 1e-12; qa += step)
        for (double qb = opt.q_min; qb <= opt.q_max + 1e-12; qb += step) {
            const double r = rate_at(std::min(qa, opt.q_max), std::min(qb, opt.q_max));
            if (r > best_r ||
                (r >= best_r - kTieTolerance && qa > 0.5 && qb > 0.5 &&
                 !(best_qa > 0.5 && best_qb > 0.5))) {
                best_r = r; best_qa = std::min(qa, opt.q_max); best_qb = std::min(qb, opt.q_max);
            }
        }

    // Two rounds of local grid refinement around the coarse optimum.
    for (int round = 0; round < 2; ++round) {
        const double fine = step / 10.0;
        const double qa0 = best_qa, qb0 = best_qb;
        for (double qa = qa0 - step; qa <= qa0 + step + 1e-12; qa += fine)
            for (double qb = qb0 - step; qb <= qb0 + step + 1e-12; qb += fine) {
                if (qa < opt.q_min || qa > opt.q_max || qb < opt.q_min || qb > opt.q_max)
                    continue;
                const double r = rate_at(qa, qb);
                if (r > best_r) { best_r = r; best_qa = qa; best_qb = qb; }
            }
        step = fine;
    }

    SplitEval ev = best_split(n, best_qa, best_qb, e_bx, e_bz, f_x, f_z, p_eps, opt);
    KeyRateResult res;
    res.raw_rate = ev.rate;
    res.rate = std::max(ev.rate, 0.0);
    res.positive = ev.rate > 0.0;
    res.q_a_star = best_qa;
    res.q_b_star = best_qb;
    res.eps_x_star = ev.eps_x;
    res.eps_z_star = ev.eps_z;
    res.p_eps_x_star = ev.p_eps_x;
    res.p_eps_z_star = ev.p_eps_z;
    return res;
}

std::uint64_t secure_length(std::uint64_t n_xx, std::uint64_t n_zz,
                            double e_bx, double e_bz,
                            double eps_x, double eps_z,
                            std::uint64_t leak_x, std::uint64_t leak_z) {
    bool clamped = false;
    const double phase_x = binary_entropy(entropy_arg(e_bz, eps_x, &clamped));
    const double phase_z = binary_entropy(entropy_arg(e_bx, eps_z, &clamped));
    const double m = static_cast<double>(n_xx) * (1.0 - phase_x) - static_cast<double>(leak_x)
                   + static_cast<double>(n_zz) * (1.0 - phase_z) - static_cast<double>(leak_z);
    if (m <= 0.0) return 0;
    return static_cast<std::uint64_t>(std::floor(m));
}

} // namespace qkd::keyrate
