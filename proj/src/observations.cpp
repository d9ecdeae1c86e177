#include "ohs/observations.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ohs/csv.hpp"
#include "ohs/errors.hpp"

namespace ohs {

void ObservationSet::push(int n, double value, double variance) {
    sizes.push_back(n);
    values.push_back(value);
    variances.push_back(variance);
}

void ObservationSet::validate(double N) const {
    if (sizes.size() != values.size() || sizes.size() != variances.size())
        throw DomainError("observation set: field lengths differ");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] < 1) throw DomainError("observation set: size must be >= 1");
        if (N > 0.0 && sizes[i] > N)
            throw DomainError("observation set: size exceeds N");
        if (!std::isfinite(values[i]))
            throw DomainError("observation set: non-finite value");
        if (!(variances[i] > 0.0) || !std::isfinite(variances[i]))
            throw DomainError("observation set: variances must be positive and finite");
    }
}

int ObservationSet::distinct_sizes() const {
    return static_cast<int>(std::set<int>(sizes.begin(), sizes.end()).size());
}

ObservationSet ObservationSet::from_csv(const std::string& path) {
    const CsvTable table = read_csv(path, {"n", "value", "variance"});
    ObservationSet obs;
    for (const auto& row : table.rows)
        obs.push(static_cast<int>(std::llround(row[0])), row[1], row[2]);
    obs.validate();
    return obs;
}

void ObservationSet::to_csv(const std::string& path) const {
    std::vector<std::vector<double>> rows;
    rows.reserve(sizes.size());
    for (std::size_t i = 0; i < sizes.size(); ++i)
        rows.push_back({static_cast<double>(sizes[i]), values[i], variances[i]});
    write_csv(path, {"n", "value", "variance"}, rows);
}

}  // namespace ohs
