#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace llnlab {

/// Deterministic mean-steering recursion.  Given a target mu inside the
/// envelope [mu_lo, mu_hi], each step emits kappa_{n+1} = mu_hi when the
/// running average so far sits at or below mu, and mu_lo otherwise (the first
/// step compares mu against the envelope midpoint).  The running average then
/// tracks mu with error at most (mu_hi - mu_lo) / n.
class MeanSchedule {
public:
    MeanSchedule(double mu, double mu_lo, double mu_hi);

    /// Emit the next kappa value and advance.
    double next();

    std::size_t n() const { return k_count_ + l_count_; }
    /// Steps so far that emitted mu_hi.
    std::size_t k_count() const { return k_count_; }
    /// Steps so far that emitted mu_lo.
    std::size_t l_count() const { return l_count_; }

    /// Exact partial sum, reconstructed from the counts.
    double kappa_sum() const;
    /// Running average kappa_sum / n; requires n >= 1.
    double mu_n() const;
    /// Guaranteed deviation bound (mu_hi - mu_lo) / n; requires n >= 1.
    double bound() const;

    /// Realized errors |k_n/n - r| and |l_n/n - (1 - r)| where
    /// r = (mu - mu_lo) / (mu_hi - mu_lo); each stays within 1/n.  A point
    /// envelope gives (0, 0) by the 0/0 convention.
    std::pair<double, double> ratio_bounds() const;

    double mu() const { return mu_; }
    double mu_lo() const { return mu_lo_; }
    double mu_hi() const { return mu_hi_; }

private:
    double mu_, mu_lo_, mu_hi_;
    std::size_t k_count_ = 0;
    std::size_t l_count_ = 0;
};

/// First n kappa values for the given target and envelope.
std::vector<double> schedule_prefix(double mu, double mu_lo, double mu_hi, std::size_t n);

} // namespace llnlab
