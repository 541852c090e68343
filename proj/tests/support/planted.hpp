#pragma once
// Synthetic data from a known conjunction: x1 > 0.7 and x2 <= 0.4 and flag.

#include "firedetect/dtree.hpp"
#include "firedetect/rng.hpp"

#include <cmath>
#include <string>

namespace planted {

inline constexpr double kX1 = 0.7;
inline constexpr double kX2 = 0.4;
// features take values on a grid with this spacing
inline constexpr double kGap = 0.01;

inline double grid_value(firedetect::Rng &rng) { return static_cast<double>(rng.below(101)) * kGap; }

inline firedetect::dtree::Dataset make(std::uint64_t seed, std::size_t rows = 10000, double noise = 0.05) {
    using firedetect::dtree::FeatureKind;
    firedetect::Rng rng(seed);
    firedetect::dtree::Dataset d;
    d.add_feature("x1", FeatureKind::numeric);
    d.add_feature("x2", FeatureKind::numeric);
    d.add_feature("flag", FeatureKind::boolean);
    d.add_feature("noise", FeatureKind::numeric);
    for (std::size_t r = 0; r < rows; ++r) {
        const double x1 = grid_value(rng);
        const double x2 = grid_value(rng);
        const double flag = rng.uniform01() < 0.5 ? 1.0 : 0.0;
        const double z = grid_value(rng);
        int label = x1 > kX1 && x2 <= kX2 && flag == 1.0 ? 1 : 0;
        if (rng.uniform01() < noise) {
            label = 1 - label;
        }
        d.add_row({x1, x2, flag, z}, label);
    }
    return d;
}

// A positive rule with x1 > ~0.7, x2 <= ~0.4 and flag is true.
inline bool recovered(const std::vector<firedetect::dtree::Rule> &rules, double min_purity, std::string *found) {
    using firedetect::dtree::Comparator;
    for (const auto &rule : rules) {
        if (rule.predicted != 1 || rule.purity < min_purity) {
            continue;
        }
        bool x1 = false, x2 = false, flag = false, extra = false;
        for (const auto &c : rule.conditions) {
            if (c.feature == "x1" && c.op == Comparator::gt) {
                x1 = std::abs(c.threshold - kX1) <= kGap;
            } else if (c.feature == "x2" && c.op == Comparator::le) {
                x2 = std::abs(c.threshold - kX2) <= kGap;
            } else if (c.feature == "flag" && c.op == Comparator::is_true) {
                flag = true;
            } else {
                extra = true;
            }
        }
        if (found) {
            *found = rule.to_string();
        }
        if (x1 && x2 && flag && !extra) {
            return true;
        }
    }
    return false;
}

} // namespace planted
