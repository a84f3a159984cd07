#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace llnlab {

/// Finitely supported distribution on the reals.  Values are kept sorted and
/// strictly increasing; probabilities are strictly positive and sum to one
/// within 1e-12 (then renormalized exactly).
class DiscreteDist {
public:
    DiscreteDist(std::string label, std::vector<double> values, std::vector<double> probs);

    const std::string& label() const { return label_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& probs() const { return probs_; }
    std::size_t support_size() const { return values_.size(); }
    double min_value() const { return values_.front(); }
    double max_value() const { return values_.back(); }

    /// First moment, compensated summation.
    double mean() const { return mean_; }

    /// E|X|^gamma for gamma >= 1 (moment-condition witness).
    double abs_moment(double gamma) const;

private:
    std::string label_;
    std::vector<double> values_;
    std::vector<double> probs_;
    double mean_ = 0.0;
};

/// Common value grid shared by every member of a family: each support point
/// equals offset + i * step for an integer i >= 0.
struct Lattice {
    double offset = 0.0;
    double step = 1.0;
};

/// Nonempty finite set of candidate laws.  Construction computes the mean
/// envelope [mu_lo, mu_hi], witnesses for both endpoints, the support hull,
/// and the coarsest common lattice when one exists.
class AmbiguityFamily {
public:
    explicit AmbiguityFamily(std::vector<DiscreteDist> members);

    const std::vector<DiscreteDist>& members() const { return members_; }
    std::size_t size() const { return members_.size(); }
    const DiscreteDist& member(std::size_t i) const { return members_[i]; }

    double mu_lo() const { return mu_lo_; }
    double mu_hi() const { return mu_hi_; }
    /// Index of a member attaining mu_lo (lowest index on ties).
    std::size_t lo_index() const { return lo_index_; }
    /// Index of a member attaining mu_hi (lowest index on ties).
    std::size_t hi_index() const { return hi_index_; }

    double min_value() const { return min_value_; }
    double max_value() const { return max_value_; }

    /// Sorted distinct union of member supports.
    const std::vector<double>& union_support() const { return union_support_; }

    /// Present iff all support points sit on one grid with step >= 1e-9.
    const std::optional<Lattice>& lattice() const { return lattice_; }

private:
    std::vector<DiscreteDist> members_;
    double mu_lo_ = 0.0, mu_hi_ = 0.0;
    std::size_t lo_index_ = 0, hi_index_ = 0;
    double min_value_ = 0.0, max_value_ = 0.0;
    std::vector<double> union_support_;
    std::optional<Lattice> lattice_;
};

/// Point mass at v.
DiscreteDist dirac(double v, std::string label = "");
/// Distribution on {0, 1} with P[1] = p.
DiscreteDist bernoulli(double p, std::string label = "");

AmbiguityFamily family_from_json(const nlohmann::json& j);
nlohmann::json family_to_json(const AmbiguityFamily& fam);
/// Load a family from a JSON file; IoError on unreadable or malformed input.
AmbiguityFamily load_family(const std::filesystem::path& path);

} // namespace llnlab
