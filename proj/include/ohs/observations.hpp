#pragma once

#include <string>
#include <vector>

namespace ohs {

/// Multiset of holdout sizes with noisy cost estimates and known sampling
/// variances. `values` holds k2-rate estimates for the parametric module or
/// total-cost estimates for the emulator; both algorithms consume this
/// shape. CSV form: header `n,value,variance`.
struct ObservationSet {
    std::vector<int> sizes;
    std::vector<double> values;
    std::vector<double> variances;

    std::size_t size() const { return sizes.size(); }
    void push(int n, double value, double variance);
    void validate(double N = 0.0) const;
    int distinct_sizes() const;

    static ObservationSet from_csv(const std::string& path);
    void to_csv(const std::string& path) const;
};

}  // namespace ohs
