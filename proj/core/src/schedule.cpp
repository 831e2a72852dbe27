#include "sketchdesc/schedule.hpp"

#include "sketchdesc/error.hpp"

#include <cmath>
#include <string>

namespace sketchdesc {

namespace {

void require_nu(double nu) {
    if (!(nu > 0.0) || !std::isfinite(nu)) fail(ErrorCode::InvalidConfig, "nu must be a positive finite number");
}

}  // namespace

double next_gamma(double gamma, double nu) {
    const double inv = 1.0 / nu;
    return 0.5 * (inv + std::sqrt(inv * inv + 4.0 * gamma * gamma));
}

std::vector<double> gamma_schedule(double nu, std::size_t k_max) {
    require_nu(nu);
    std::vector<double> g(k_max + 1);
    g[0] = 1.0 / nu;
    for (std::size_t k = 0; k < k_max; ++k) g[k + 1] = next_gamma(g[k], nu);
    return g;
}

Schedule::Schedule(bool convex, double sigma, double nu) : convex_(convex), sigma_(sigma), nu_(nu), gamma_(0.0) {
    require_nu(nu);
    if (convex_) {
        gamma_ = 1.0 / nu;
    } else {
        if (!(sigma > 0.0) || !std::isfinite(sigma)) {
            fail(ErrorCode::InvalidConfig, "strongly convex schedule needs sigma > 0");
        }
        gamma_ = 1.0 / std::sqrt(sigma * nu);
    }
}

Schedule Schedule::convex(double nu) { return Schedule(true, 0.0, nu); }

Schedule Schedule::strongly_convex(double sigma, double nu) { return Schedule(false, sigma, nu); }

StepParams Schedule::next() {
    StepParams p;
    p.gamma = gamma_;
    if (convex_) {
        p.alpha = 1.0 / (gamma_ * nu_);
        p.beta = 1.0;
        gamma_ = next_gamma(gamma_, nu_);
    } else {
        const double gs = gamma_ * sigma_;
        p.alpha = gs / (1.0 + gs);
        p.beta = 1.0 - gs;
    }
    if (!(p.alpha > 0.0)) fail(ErrorCode::Schedule, "alpha must be positive, got " + std::to_string(p.alpha));
    if (p.alpha > 1.0) {
        p.alpha = 1.0;
        ++clamps_;
    }
    if (p.beta < 0.0 || p.beta > 1.0) {
        fail(ErrorCode::Schedule, "beta = " + std::to_string(p.beta) + " lies outside [0, 1]; need sigma <= nu");
    }
    ++k_;
    return p;
}

}  // namespace sketchdesc
