// End-to-end acceptance checks: each one renders a guaranteed property of the
// library as a pass/fail assertion with explicit tolerances and a time budget.
// Prints one line per check; exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "llnlab/csv.hpp"
#include "llnlab/distributions.hpp"
#include "llnlab/experiments.hpp"
#include "llnlab/nested_eval.hpp"
#include "llnlab/numeric.hpp"
#include "llnlab/policies.hpp"
#include "llnlab/rng.hpp"
#include "llnlab/sampler.hpp"
#include "llnlab/schedule.hpp"
#include "llnlab/test_function.hpp"

using namespace llnlab;

namespace {

using Clock = std::chrono::steady_clock;

AmbiguityFamily dirac_pair() { return AmbiguityFamily({dirac(0.0), dirac(1.0)}); }
AmbiguityFamily bern_pair() { return AmbiguityFamily({bernoulli(0.2), bernoulli(0.8)}); }

std::string fmt(double v) { return format_double(v); }

// Random piecewise-linear function with 2..5 knots over [lo, hi].
TestFunction random_phi(RngStream& gen, double lo, double hi) {
    std::vector<double> xs{lo, hi};
    std::size_t inner = static_cast<std::size_t>(gen.next() * 4);
    for (std::size_t i = 0; i < inner; ++i)
        xs.push_back(lo + (hi - lo) * (0.05 + 0.9 * gen.next()));
    std::sort(xs.begin(), xs.end());
    std::vector<std::pair<double, double>> knots;
    for (double x : xs) {
        if (!knots.empty() && x <= knots.back().first + 1e-6 * (hi - lo)) continue;
        knots.push_back({x, 2.0 * gen.next() - 1.0});
    }
    if (knots.size() < 2) knots = {{lo, 0.0}, {hi, 1.0}};
    return TestFunction(std::move(knots));
}

// Random member on the given support values with strictly positive weights.
DiscreteDist random_member(RngStream& gen, const std::vector<double>& values) {
    std::vector<double> probs(values.size());
    double total = 0.0;
    for (double& p : probs) {
        p = 0.05 + gen.next();
        total += p;
    }
    for (double& p : probs) p /= total;
    return DiscreteDist("m", values, probs);
}

// ---------------------------------------------------------------------------

bool check_schedule_invariants(std::string& detail) {
    RngStream gen{2026, 1, 0, 0};
    double worst_dev_slack = 0.0, worst_ratio_slack = 0.0;
    std::size_t total_steps = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        double mu_lo = -2.0 + 4.0 * gen.next();
        double width = rep % 50 == 0 ? 0.0 : 3.0 * gen.next() * gen.next();
        double mu_hi = mu_lo + width;
        double mu = width == 0.0 ? mu_lo : mu_lo + width * gen.next();
        std::size_t n = static_cast<std::size_t>(std::pow(10.0, 4.0 * gen.next()));
        n = std::max<std::size_t>(1, std::min<std::size_t>(n, 10000));

        MeanSchedule sched(mu, mu_lo, mu_hi);
        for (std::size_t k = 1; k <= n; ++k) {
            sched.next();
            double dev = std::abs(sched.mu_n() - mu);
            double bound = width / static_cast<double>(k);
            worst_dev_slack = std::max(worst_dev_slack, dev - bound);
            if (dev > bound + 1e-12) {
                detail = "running-average deviation " + fmt(dev) + " exceeds " + fmt(bound) +
                         " at step " + std::to_string(k) + " (target " + fmt(mu) + " on [" +
                         fmt(mu_lo) + ", " + fmt(mu_hi) + "])";
                return false;
            }
        }
        total_steps += n;
        if (sched.k_count() + sched.l_count() != n) {
            detail = "emission counts do not add up to n";
            return false;
        }
        auto [err_k, err_l] = sched.ratio_bounds();
        double cap = width == 0.0 ? 0.0 : 1.0 / static_cast<double>(n);
        worst_ratio_slack = std::max({worst_ratio_slack, err_k - cap, err_l - cap});
        if (err_k > cap + 1e-12 || err_l > cap + 1e-12) {
            detail = "emission ratio errors (" + fmt(err_k) + ", " + fmt(err_l) +
                     ") exceed 1/n = " + fmt(cap);
            return false;
        }
    }
    detail = "1000 random targets, " + std::to_string(total_steps) +
             " steps; worst deviation slack " + fmt(worst_dev_slack) + ", worst ratio slack " +
             fmt(worst_ratio_slack);
    return true;
}

bool check_dp_vs_bruteforce(std::string& detail) {
    RngStream gen{2027, 1, 0, 0};
    double worst = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<DiscreteDist> members;
        std::size_t n;
        if (rep < 100) {
            // Shared three-point support, up to eight draws.
            std::vector<double> support{0.0, 0.5, 1.0};
            std::size_t count = 1 + static_cast<std::size_t>(gen.next() * 3);
            for (std::size_t m = 0; m < count; ++m) members.push_back(random_member(gen, support));
            n = 1 + static_cast<std::size_t>(gen.next() * 8);
            n = std::min<std::size_t>(n, 8);
        } else {
            // Distinct supports on the quarter lattice, up to four draws.
            const std::vector<double> lattice{0.0, 0.25, 0.5, 0.75, 1.0};
            std::size_t count = 1 + static_cast<std::size_t>(gen.next() * 3);
            for (std::size_t m = 0; m < count; ++m) {
                std::vector<double> vals;
                for (double v : lattice)
                    if (gen.next() < 0.55) vals.push_back(v);
                if (vals.size() < 2) vals = {lattice[0], lattice[4]};
                members.push_back(random_member(gen, vals));
            }
            n = 1 + static_cast<std::size_t>(gen.next() * 4);
            n = std::min<std::size_t>(n, 4);
        }
        AmbiguityFamily fam(std::move(members));
        TestFunction phi = random_phi(gen, 0.0, 1.0);
        double dp = sublinear_expectation_mean(fam, phi, n);
        double bf = sublinear_expectation_general(fam, phi_of_mean(phi), n);
        worst = std::max(worst, std::abs(dp - bf));
        if (std::abs(dp - bf) > 1e-10) {
            detail = "instance " + std::to_string(rep) + ": lattice recursion " + fmt(dp) +
                     " vs full-history recursion " + fmt(bf);
            return false;
        }
    }
    detail = "200 random families; max |lattice - full-history| = " + fmt(worst);
    return true;
}

bool check_value_gap_decay(std::string& detail) {
    AmbiguityFamily fam = bern_pair();
    TestFunction phi = TestFunction::tent(0.0, 0.5, 1.0);
    double limit = wlln_limit(phi, fam.mu_lo(), fam.mu_hi());
    std::vector<std::size_t> ns;
    std::vector<double> errs;
    for (std::size_t n = 4; n <= 1024; n *= 2) {
        double err = limit - sublinear_expectation_mean(fam, phi, n);
        if (err < -1e-12) {
            detail = "value exceeded its limit at n = " + std::to_string(n) + " by " + fmt(-err);
            return false;
        }
        if (!errs.empty() && err > errs.back() + 1e-9) {
            detail = "gap grew from " + fmt(errs.back()) + " to " + fmt(err) + " at n = " +
                     std::to_string(n);
            return false;
        }
        ns.push_back(n);
        errs.push_back(err);
    }
    RateFit fit = fit_rate(ns, errs);
    if (fit.slope > -0.4) {
        detail = "log-log slope " + fmt(fit.slope) + " is above -0.4";
        return false;
    }
    detail = "gap " + fmt(errs.front()) + " -> " + fmt(errs.back()) +
             " over n = 4..1024, slope " + fmt(fit.slope);
    return true;
}

bool check_target_attainment(std::string& detail) {
    AmbiguityFamily fam = dirac_pair();
    const std::size_t trials = 100, horizon = 100000;
    double worst_frac = 1.0, worst_err = 0.0;
    for (int i = 1; i <= 9; ++i) {
        double mu = 0.1 * i;
        std::size_t ok = 0;
        for (std::size_t t = 0; t < trials; ++t) {
            PathSample p = sample_path(fam, KappaTargetPolicy{mu}, horizon, 404, t);
            double err = std::abs(p.running_avgs.back() - mu);
            worst_err = std::max(worst_err, err);
            ok += err <= 0.02 ? 1u : 0u;
        }
        double frac = static_cast<double>(ok) / static_cast<double>(trials);
        worst_frac = std::min(worst_frac, frac);
        if (frac < 0.95) {
            detail = "target " + fmt(mu) + ": only " + fmt(frac) +
                     " of trials ended within 0.02";
            return false;
        }
    }
    detail = "9 targets x 100 trials at horizon 100000; worst fraction " + fmt(worst_frac) +
             ", worst final error " + fmt(worst_err);
    return true;
}

bool check_tail_containment(std::string& detail) {
    ExperimentConfig cfg;
    cfg.family = bern_pair();
    cfg.trials = 100;
    cfg.horizon = 100000;
    cfg.seed = 501;
    cfg.eps_abs = 0.02;
    cfg.coverage_frac = 0.99;
    cfg.burn_in = 1000;
    cfg.policy = RandomMixturePolicy{};
    ExperimentReport rep = exp_slln_bounds(cfg);
    std::ostringstream ss;
    for (const auto& v : rep.verdicts) {
        if (!v.pass) {
            detail = v.name + ": " + v.detail;
            return false;
        }
        ss << v.name << " ok; ";
    }
    detail = ss.str() + "tails of 100 trials stayed in [" +
             fmt(rep.aggregates["lo_bound"].get<double>()) + ", " +
             fmt(rep.aggregates["hi_bound"].get<double>()) + "]";
    return rep.pass();
}

bool check_prefix_targeting(std::string& detail) {
    ExperimentConfig cfg;
    cfg.family = dirac_pair();
    cfg.trials = 200;
    cfg.horizon = 20000;
    cfg.seed = 601;
    cfg.eps_abs = 0.02;
    cfg.coverage_frac = 0.95;
    cfg.d = 2;
    PiFunction pi;
    pi.d = 2;
    pi.table = {{{0.0, 0.0}, 0.25}, {{0.0, 1.0}, 0.75}, {{1.0, 0.0}, 0.75}, {{1.0, 1.0}, 0.25}};
    cfg.pi = pi;
    cfg.base = RandomMixturePolicy{};
    cfg.significance = 1e-4;
    ExperimentReport rep = exp_pi_limit(cfg);
    for (const auto& v : rep.verdicts)
        if (!v.pass) {
            detail = v.name + ": " + v.detail;
            return false;
        }
    detail = "per-prefix attainment and prefix-law homogeneity both ok (" +
             std::to_string(cfg.trials) + " trials, horizon " + std::to_string(cfg.horizon) +
             ")";
    return rep.pass();
}

bool check_covariance_factorization(std::string& detail) {
    RngStream gen{2028, 1, 0, 0};
    std::size_t maximizers_seen = 0;
    for (int rep = 0; rep < 50; ++rep) {
        auto make_family = [&] {
            std::size_t count = 2 + static_cast<std::size_t>(gen.next() * 2);
            std::vector<DiscreteDist> members;
            for (std::size_t m = 0; m < count; ++m) {
                std::size_t k = 2 + static_cast<std::size_t>(gen.next() * 2);
                std::vector<double> vals;
                for (std::size_t i = 0; i < k; ++i)
                    vals.push_back(-1.0 + 2.0 * gen.next());
                std::sort(vals.begin(), vals.end());
                bool close = false;
                for (std::size_t i = 1; i < vals.size(); ++i)
                    if (vals[i] - vals[i - 1] < 1e-6) close = true;
                if (close) { vals = {-1.0, 0.0, 1.0}; }
                members.push_back(random_member(gen, vals));
            }
            return AmbiguityFamily(std::move(members));
        };
        CovarianceCheck chk = covariance_check(make_family(), make_family());
        if (chk.truncated) {
            detail = "policy enumeration truncated on instance " + std::to_string(rep);
            return false;
        }
        bool seen[2][2] = {{false, false}, {false, false}};
        for (const auto& m : chk.maximizers) {
            seen[m.s1 > 0][m.s2 > 0] = true;
            double tol = 1e-12;
            bool same_sign = m.s1 * m.s2 > 0;
            if ((same_sign && m.gap > tol) || (!same_sign && m.gap < -tol)) {
                detail = "instance " + std::to_string(rep) + ": maximizer of (" +
                         std::to_string(m.s1) + ", " + std::to_string(m.s2) +
                         ") has product gap " + fmt(m.gap) + " on the forbidden side";
                return false;
            }
        }
        if (!(seen[0][0] && seen[0][1] && seen[1][0] && seen[1][1])) {
            detail = "instance " + std::to_string(rep) + ": some sign pair had no maximizer";
            return false;
        }
        if (!chk.pass(1e-12)) {
            detail = "instance " + std::to_string(rep) + ": worst violation " +
                     fmt(chk.worst_violation);
            return false;
        }
        maximizers_seen += chk.maximizers.size();
    }
    detail = "50 two-family instances, " + std::to_string(maximizers_seen) +
             " maximizers, every product moment factored to 1e-12";
    return true;
}

bool check_iid_collapse(std::string& detail) {
    RngStream gen{2029, 1, 0, 0};
    double worst = 0.0;
    std::size_t checks = 0;
    for (const AmbiguityFamily& fam : {dirac_pair(), bern_pair()}) {
        for (std::size_t m : {2, 3, 4}) {
            for (int rep = 0; rep < 20; ++rep) {
                TestFunction phi = random_phi(gen, 0.0, 1.0);
                double gap = verify_iid_identity(fam, phi_of_mean(phi), m);
                worst = std::max(worst, gap);
                ++checks;
                if (gap > 1e-10) {
                    detail = "collapse gap " + fmt(gap) + " for m = " + std::to_string(m);
                    return false;
                }
            }
        }
    }
    detail = std::to_string(checks) + " functional/length combinations; max collapse gap " +
             fmt(worst);
    return true;
}

bool check_block_density(std::string& detail) {
    ExperimentConfig cfg;
    cfg.family = dirac_pair();
    cfg.trials = 50;
    cfg.horizon = 20000;
    cfg.seed = 901;
    cfg.eps_abs = 0.02;
    cfg.coverage_frac = 0.95;
    cfg.period = 20;
    for (int i = 0; i <= 20; ++i) cfg.target_grid.push_back(0.05 * i);
    ExperimentReport rep = exp_stationary_means(cfg);
    for (const auto& v : rep.verdicts)
        if (!v.pass) {
            detail = v.name + ": " + v.detail;
            return false;
        }
    double density = rep.aggregates["worst_density_err"].get<double>();
    if (density > 0.025) {
        detail = "worst block-mean offset " + fmt(density) + " above 0.025";
        return false;
    }
    detail = "21 targets at period 20: worst block-mean offset " + fmt(density) +
             ", worst attainment fraction " +
             fmt(rep.aggregates["worst_fraction_ok"].get<double>());
    return rep.pass();
}

bool check_forced_collapse(std::string& detail) {
    ExperimentConfig cfg;
    cfg.trials = 100;
    cfg.horizon = 10000;
    cfg.seed = 1001;
    cfg.cutoff = 100;
    cfg.mu = 0.5;
    ExperimentReport rep = exp_noncompact_negative(cfg);
    for (const auto& v : rep.verdicts)
        if (!v.pass) {
            detail = v.name + ": " + v.detail;
            return false;
        }
    double max_final = rep.aggregates["max_final_avg"].get<double>();
    double min_err = rep.aggregates["min_attain_err"].get<double>();
    if (max_final > 0.01 + 1e-12) {
        detail = "a path kept its average at " + fmt(max_final) + " despite the cutoff";
        return false;
    }
    if (min_err < 0.49) {
        detail = "attainment error " + fmt(min_err) + " fell below 0.49";
        return false;
    }
    detail = "100 trials: max final average " + fmt(max_final) +
             " (ceiling 0.01), min attainment error " + fmt(min_err);
    return rep.pass();
}

bool check_parallel_determinism(std::string& detail) {
    ExperimentConfig cfg;
    cfg.family = bern_pair();
    cfg.trials = 20;
    cfg.horizon = 20000;
    cfg.seed = 1101;
    cfg.eps_abs = 0.02;
    cfg.coverage_frac = 0.95;
    cfg.mu = 0.4;
    cfg.threads = 1;
    ExperimentReport serial = run_experiment("mu_attain", cfg);
    cfg.threads = 3;
    ExperimentReport threaded = run_experiment("mu_attain", cfg);

    if (serial.digest() != threaded.digest()) {
        detail = "report digests differ: " + serial.digest() + " vs " + threaded.digest();
        return false;
    }
    if (serial.curves.size() != threaded.curves.size()) {
        detail = "curve counts differ";
        return false;
    }
    for (std::size_t i = 0; i < serial.curves.size(); ++i) {
        if (curve_to_csv(serial.curves[i]) != curve_to_csv(threaded.curves[i])) {
            detail = "CSV bytes differ for curve '" + serial.curves[i].name + "'";
            return false;
        }
    }
    nlohmann::json a = serial.to_json(), b = threaded.to_json();
    a.erase("wall_ms");
    b.erase("wall_ms");
    if (a != b) {
        detail = "reports differ beyond wall_ms";
        return false;
    }
    detail = "1-thread and 3-thread runs: digest " + serial.digest() +
             ", identical curve bytes";
    return true;
}

struct Check {
    const char* name;
    double budget_s;
    bool (*run)(std::string&);
};

} // namespace

int main() {
    const Check checks[] = {
        {"mean-steering schedule invariants", 10.0, check_schedule_invariants},
        {"lattice recursion vs full-history oracle", 60.0, check_dp_vs_bruteforce},
        {"evaluation gap decays at a power-law rate", 60.0, check_value_gap_decay},
        {"steered averages attain interior targets", 300.0, check_target_attainment},
        {"running-average tails stay in the widened envelope", 300.0, check_tail_containment},
        {"prefix-committed targeting and prefix law", 300.0, check_prefix_targeting},
        {"two-step product moments factor at maximizers", 30.0, check_covariance_factorization},
        {"one-step collapse identity for nested evaluations", 30.0, check_iid_collapse},
        {"stationary block means are dense and attained", 300.0, check_block_density},
        {"cutoff forces averages to the bottom member", 60.0, check_forced_collapse},
        {"reports are byte-identical across thread counts", 60.0, check_parallel_determinism},
    };

    const std::size_t total = sizeof(checks) / sizeof(checks[0]);
    std::size_t failed = 0;
    for (std::size_t i = 0; i < total; ++i) {
        std::string detail;
        auto start = Clock::now();
        bool ok = false;
        try {
            ok = checks[i].run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        double secs =
            std::chrono::duration_cast<std::chrono::duration<double>>(Clock::now() - start)
                .count();
        if (ok && secs > checks[i].budget_s) {
            ok = false;
            detail = "exceeded time budget of " + fmt(checks[i].budget_s) + "s: took " +
                     fmt(secs) + "s";
        }
        failed += ok ? 0 : 1;
        std::printf("[%2zu/%zu] %s  %s (%.2fs): %s\n", i + 1, total, ok ? "PASS" : "FAIL",
                    checks[i].name, secs, detail.c_str());
        std::fflush(stdout);
    }
    if (failed) {
        std::printf("acceptance: %zu of %zu checks FAILED\n", failed, total);
        return 1;
    }
    std::printf("acceptance: all %zu checks passed\n", total);
    return 0;
}
