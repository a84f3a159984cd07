#include "llnlab/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace llnlab {

MeanSchedule::MeanSchedule(double mu, double mu_lo, double mu_hi)
    : mu_(mu), mu_lo_(mu_lo), mu_hi_(mu_hi) {
    if (!(mu_lo <= mu_hi) || !std::isfinite(mu_lo) || !std::isfinite(mu_hi))
        throw std::invalid_argument("schedule: need finite mu_lo <= mu_hi");
    if (!(mu >= mu_lo && mu <= mu_hi))
        throw std::invalid_argument("schedule: target mu outside [mu_lo, mu_hi]");
}

double MeanSchedule::next() {
    bool emit_hi;
    if (n() == 0) {
        emit_hi = mu_ >= (mu_hi_ + mu_lo_) / 2.0;
    } else {
        emit_hi = mu_ >= mu_n();
    }
    if (emit_hi) {
        ++k_count_;
        return mu_hi_;
    }
    ++l_count_;
    return mu_lo_;
}

double MeanSchedule::kappa_sum() const {
    // Counts are exact integers, so the sum has a single rounding per term
    // instead of an accumulated drift.
    return static_cast<double>(k_count_) * mu_hi_ + static_cast<double>(l_count_) * mu_lo_;
}

double MeanSchedule::mu_n() const {
    if (n() == 0)
        throw std::logic_error("schedule: mu_n undefined before the first step");
    return kappa_sum() / static_cast<double>(n());
}

double MeanSchedule::bound() const {
    if (n() == 0)
        throw std::logic_error("schedule: bound undefined before the first step");
    return (mu_hi_ - mu_lo_) / static_cast<double>(n());
}

std::pair<double, double> MeanSchedule::ratio_bounds() const {
    if (n() == 0)
        throw std::logic_error("schedule: ratio bounds undefined before the first step");
    if (mu_hi_ == mu_lo_) return {0.0, 0.0}; // 0/0 convention
    double r = (mu_ - mu_lo_) / (mu_hi_ - mu_lo_);
    double nn = static_cast<double>(n());
    double err_k = std::abs(static_cast<double>(k_count_) / nn - r);
    double err_l = std::abs(static_cast<double>(l_count_) / nn - (1.0 - r));
    return {err_k, err_l};
}

std::vector<double> schedule_prefix(double mu, double mu_lo, double mu_hi, std::size_t n) {
    MeanSchedule sched(mu, mu_lo, mu_hi);
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(sched.next());
    return out;
}

} // namespace llnlab
