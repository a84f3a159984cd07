#include "llnlab/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace llnlab {

namespace {

// Series expansion of P(a, x), effective for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) (Lentz), effective for x >= a + 1.
double gamma_q_cf(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

} // namespace

double regularized_gamma_p(double a, double x) {
    if (!(a > 0.0)) throw std::invalid_argument("regularized_gamma_p: a must be > 0");
    if (x < 0.0) throw std::invalid_argument("regularized_gamma_p: x must be >= 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double chi_square_sf(double stat, double dof) {
    if (!(dof > 0.0)) throw std::invalid_argument("chi_square_sf: dof must be > 0");
    if (stat <= 0.0) return 1.0;
    if (stat / 2.0 < dof / 2.0 + 1.0)
        return 1.0 - gamma_p_series(dof / 2.0, stat / 2.0);
    return gamma_q_cf(dof / 2.0, stat / 2.0);
}

ChiSquareResult chi_square_gof(std::span<const std::size_t> observed,
                               std::span<const double> expected_probs) {
    if (observed.size() != expected_probs.size())
        throw std::invalid_argument("chi_square_gof: size mismatch");
    if (observed.empty())
        throw std::invalid_argument("chi_square_gof: no cells");
    std::size_t total = 0;
    for (std::size_t c : observed) total += c;
    if (total == 0)
        throw std::invalid_argument("chi_square_gof: empty sample");

    ChiSquareResult res;
    std::size_t cells = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        double e = expected_probs[i] * static_cast<double>(total);
        if (expected_probs[i] <= 0.0) {
            if (observed[i] != 0)
                res.statistic = std::numeric_limits<double>::infinity();
            continue;
        }
        double diff = static_cast<double>(observed[i]) - e;
        res.statistic += diff * diff / e;
        ++cells;
    }
    if (cells < 2) {
        res.dof = 0.0;
        res.p_value = 1.0;
        return res;
    }
    res.dof = static_cast<double>(cells - 1);
    res.p_value = std::isinf(res.statistic) ? 0.0 : chi_square_sf(res.statistic, res.dof);
    return res;
}

ChiSquareResult chi_square_two_sample(std::span<const std::size_t> a,
                                      std::span<const std::size_t> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("chi_square_two_sample: size mismatch");
    if (a.empty())
        throw std::invalid_argument("chi_square_two_sample: no cells");
    double na = 0.0, nb = 0.0;
    for (std::size_t c : a) na += static_cast<double>(c);
    for (std::size_t c : b) nb += static_cast<double>(c);
    if (na == 0.0 || nb == 0.0)
        throw std::invalid_argument("chi_square_two_sample: a sample is empty");

    // Pearson statistic on the 2 x K contingency table.
    ChiSquareResult res;
    std::size_t used = 0;
    double total = na + nb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double row = static_cast<double>(a[i] + b[i]);
        if (row == 0.0) continue;
        double ea = row * na / total;
        double eb = row * nb / total;
        double da = static_cast<double>(a[i]) - ea;
        double db = static_cast<double>(b[i]) - eb;
        res.statistic += da * da / ea + db * db / eb;
        ++used;
    }
    if (used < 2) {
        res.dof = 0.0;
        res.p_value = 1.0;
        return res;
    }
    res.dof = static_cast<double>(used - 1);
    res.p_value = chi_square_sf(res.statistic, res.dof);
    return res;
}

} // namespace llnlab
