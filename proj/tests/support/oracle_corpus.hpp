#pragma once

#include <array>
#include <string>
#include <vector>

#include "metriscope/metrics.hpp"

namespace metriscope::testing {

/// One hand-derived snippet: the expected value of every exported metric.
/// The derivation for each case is documented next to its entry in
/// oracle_corpus.cpp.
struct OracleCase {
    std::string name;
    std::string code;
    std::array<double, kFeatureCount> expected; // S1..S5, C1..C12, M1..M3, T1..T3
    bool parse_error = false;
};

const std::vector<OracleCase>& oracle_corpus();

} // namespace metriscope::testing
