#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "evag/rng.hpp"

namespace evag {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ProblemKind { ShiftedSphere, ShiftedRotatedRastrigin, Schwefel213 };

const char* kind_name(ProblemKind kind);
ProblemKind parse_kind(const std::string& name);

// "%.17g": enough digits that writing and re-reading a double is lossless.
std::string format_g17(double v);

int default_dimension(ProblemKind kind);
double default_lower_bound(ProblemKind kind);
double default_upper_bound(ProblemKind kind);
double f_bias_of(ProblemKind kind);

// A fully materialized benchmark landscape. All randomized arrays are fixed
// at construction from the seed, so every run that shares a seed shares the
// landscape exactly.
struct ProblemInstance {
    ProblemKind kind;
    int dim = 0;
    std::uint64_t seed = 0;
    double f_bias = 0.0;
    Vector lower;
    Vector upper;
    Vector shift;     // sphere, rastrigin
    Matrix rotation;  // rastrigin
    bool rotated = false;
    Matrix coeff_a;   // schwefel
    Matrix coeff_b;   // schwefel
    Vector alpha;     // schwefel
    Vector amplitude; // schwefel, derived from coeff_a/coeff_b/alpha
};

// Builds an instance from (kind, dim, seed). `rotated` overrides the kind's
// default of rotating only the rastrigin landscape.
ProblemInstance make_instance(ProblemKind kind, int dim, std::uint64_t seed,
                              std::optional<bool> rotated = std::nullopt);

// The point at which evaluate() returns exactly f_bias.
Vector optimum_of(const ProblemInstance& inst);

// Throws std::invalid_argument if any invariant of the instance is broken
// (bound ordering, shift placement, rotation orthogonality, coefficient
// integrality, alpha range).
void validate_instance(const ProblemInstance& inst);

void write_instance(const ProblemInstance& inst, std::ostream& out);
void write_instance_file(const ProblemInstance& inst, const std::string& path);
ProblemInstance read_instance(std::istream& in);
ProblemInstance read_instance_file(const std::string& path);

namespace detail {
[[noreturn]] void throw_bad_point(int expected_dim, long got_dim, bool finite);
}

// f(x) for a candidate inside the box. Throws std::invalid_argument on a
// dimension mismatch, non-finite coordinates, or out-of-bound coordinates.
template <typename Derived>
double evaluate(const ProblemInstance& inst, const Eigen::MatrixBase<Derived>& x) {
    if (x.size() != inst.dim || !x.allFinite())
        detail::throw_bad_point(inst.dim, x.size(), x.allFinite());
    if ((x.array() < inst.lower.array()).any() ||
        (x.array() > inst.upper.array()).any())
        throw std::invalid_argument("evaluate: point outside bounds");

    switch (inst.kind) {
        case ProblemKind::ShiftedSphere:
            return (x - inst.shift).squaredNorm() + inst.f_bias;
        case ProblemKind::ShiftedRotatedRastrigin: {
            Vector z = inst.rotated ? Vector(inst.rotation * (x - inst.shift))
                                    : Vector(x - inst.shift);
            const double two_pi = 6.283185307179586476925286766559;
            double sum = 0.0;
            for (int i = 0; i < inst.dim; ++i) {
                const double zi = z[i];
                sum += zi * zi - 10.0 * std::cos(two_pi * zi) + 10.0;
            }
            return sum + inst.f_bias;
        }
        case ProblemKind::Schwefel213: {
            Vector b = inst.coeff_a * x.array().sin().matrix() +
                       inst.coeff_b * x.array().cos().matrix();
            return (inst.amplitude - b).squaredNorm() + inst.f_bias;
        }
    }
    throw std::logic_error("evaluate: unknown problem kind");
}

}  // namespace evag
