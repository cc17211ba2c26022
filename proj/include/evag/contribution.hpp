#pragma once

#include <cstdint>

#include "evag/individual.hpp"

namespace evag {

// The unit of genetic exchange between nodes: who sent it, how many
// evaluations the sender had performed at send time, and one solution.
// Treated as an immutable value everywhere once constructed.
struct Contribution {
    std::uint32_t address = 0;
    std::uint64_t num_evaluations = 0;
    Individual solution;
};

}  // namespace evag
