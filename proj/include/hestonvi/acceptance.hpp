#pragma once

#include <string>
#include <vector>

namespace hestonvi {

struct CriterionResult
{
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail; ///< measured quantities, one short line
    double seconds = 0.0;
};

constexpr int kCriterionCount = 11;

/// Runs one acceptance criterion (1..kCriterionCount). Exceptions thrown by
/// the library are caught and reported as a failure. `seed` offsets the
/// seeds of the randomized batteries (comparison pairs, energy vectors,
/// identity sample points).
CriterionResult run_criterion(int id, unsigned seed = 0);

/// Runs the listed criteria, or all of them when `ids` is empty.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids = {}, unsigned seed = 0);

} // namespace hestonvi
