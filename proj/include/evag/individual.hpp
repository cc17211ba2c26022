#pragma once

#include <optional>
#include <stdexcept>

#include "evag/benchmarks.hpp"

namespace evag {

struct Individual {
    Vector genome;
    std::optional<double> fitness;
};

// Minimization: a beats b iff a's fitness is strictly lower. Comparing an
// unevaluated individual is a programming error.
inline bool is_better(const Individual& a, const Individual& b) {
    if (!a.fitness || !b.fitness)
        throw std::logic_error("is_better: unevaluated individual");
    return *a.fitness < *b.fitness;
}

}  // namespace evag
