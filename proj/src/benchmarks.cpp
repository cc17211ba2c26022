#include "evag/benchmarks.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace evag {

namespace {

constexpr double kPi = std::numbers::pi;

void write_vector(std::ostream& out, const char* key, const Vector& v) {
    out << key;
    for (int i = 0; i < v.size(); ++i) out << ' ' << format_g17(v[i]);
    out << '\n';
}

void write_matrix(std::ostream& out, const char* key, const Matrix& m) {
    for (int r = 0; r < m.rows(); ++r) {
        out << key << ' ' << r;
        for (int c = 0; c < m.cols(); ++c) out << ' ' << format_g17(m(r, c));
        out << '\n';
    }
}

[[noreturn]] void parse_fail(const std::string& what) {
    throw std::runtime_error("instance parse error: " + what);
}

void expect_key(std::istream& in, const std::string& key) {
    std::string tok;
    if (!(in >> tok) || tok != key) parse_fail("expected '" + key + "'");
}

Vector read_vector(std::istream& in, const std::string& key, int dim) {
    expect_key(in, key);
    Vector v(dim);
    for (int i = 0; i < dim; ++i)
        if (!(in >> v[i])) parse_fail("short '" + key + "' row");
    return v;
}

Matrix read_matrix(std::istream& in, const std::string& key, int dim) {
    Matrix m(dim, dim);
    for (int r = 0; r < dim; ++r) {
        expect_key(in, key);
        int row = -1;
        if (!(in >> row) || row != r) parse_fail("bad '" + key + "' row index");
        for (int c = 0; c < dim; ++c)
            if (!(in >> m(r, c))) parse_fail("short '" + key + "' row");
    }
    return m;
}

// Haar-ish orthonormal matrix: QR of a Gaussian matrix with the sign of
// each R diagonal entry folded into the corresponding Q column.
Matrix random_rotation(int dim, Rng& rng) {
    Matrix g(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) g(r, c) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
    const Matrix& packed = qr.matrixQR();
    for (int c = 0; c < dim; ++c)
        if (packed(c, c) < 0.0) q.col(c) = -q.col(c);
    return q;
}

Vector schwefel_amplitude(const ProblemInstance& inst) {
    return inst.coeff_a * inst.alpha.array().sin().matrix() +
           inst.coeff_b * inst.alpha.array().cos().matrix();
}

}  // namespace

namespace detail {
void throw_bad_point(int expected_dim, long got_dim, bool finite) {
    std::ostringstream msg;
    if (got_dim != expected_dim)
        msg << "evaluate: point has dimension " << got_dim << ", expected "
            << expected_dim;
    else if (!finite)
        msg << "evaluate: point has non-finite coordinates";
    throw std::invalid_argument(msg.str());
}
}  // namespace detail

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const char* kind_name(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::ShiftedSphere: return "sphere";
        case ProblemKind::ShiftedRotatedRastrigin: return "rastrigin";
        case ProblemKind::Schwefel213: return "schwefel";
    }
    throw std::logic_error("kind_name: unknown problem kind");
}

ProblemKind parse_kind(const std::string& name) {
    if (name == "sphere") return ProblemKind::ShiftedSphere;
    if (name == "rastrigin") return ProblemKind::ShiftedRotatedRastrigin;
    if (name == "schwefel") return ProblemKind::Schwefel213;
    throw std::invalid_argument("unknown problem '" + name +
                                "' (expected sphere, rastrigin or schwefel)");
}

int default_dimension(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::ShiftedSphere: return 100;
        case ProblemKind::ShiftedRotatedRastrigin: return 30;
        case ProblemKind::Schwefel213: return 10;
    }
    throw std::logic_error("default_dimension: unknown problem kind");
}

double default_lower_bound(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::ShiftedSphere: return -100.0;
        case ProblemKind::ShiftedRotatedRastrigin: return -5.0;
        case ProblemKind::Schwefel213: return -kPi;
    }
    throw std::logic_error("default_lower_bound: unknown problem kind");
}

double default_upper_bound(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::ShiftedSphere: return 100.0;
        case ProblemKind::ShiftedRotatedRastrigin: return 5.0;
        case ProblemKind::Schwefel213: return kPi;
    }
    throw std::logic_error("default_upper_bound: unknown problem kind");
}

double f_bias_of(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::ShiftedSphere: return -450.0;
        case ProblemKind::ShiftedRotatedRastrigin: return -330.0;
        case ProblemKind::Schwefel213: return -460.0;
    }
    throw std::logic_error("f_bias_of: unknown problem kind");
}

ProblemInstance make_instance(ProblemKind kind, int dim, std::uint64_t seed,
                              std::optional<bool> rotated) {
    if (dim < 1) throw std::invalid_argument("make_instance: dim must be >= 1");

    ProblemInstance inst;
    inst.kind = kind;
    inst.dim = dim;
    inst.seed = seed;
    inst.f_bias = f_bias_of(kind);
    inst.lower = Vector::Constant(dim, default_lower_bound(kind));
    inst.upper = Vector::Constant(dim, default_upper_bound(kind));
    inst.rotated = rotated.value_or(kind == ProblemKind::ShiftedRotatedRastrigin);

    Rng rng(derive_seed(seed, 0x5eed0 + static_cast<std::uint64_t>(kind)));

    if (kind == ProblemKind::Schwefel213) {
        inst.rotated = false;
        inst.coeff_a = Matrix(dim, dim);
        inst.coeff_b = Matrix(dim, dim);
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c)
                inst.coeff_a(r, c) = static_cast<double>(rng.uniform_int(-100, 100));
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c)
                inst.coeff_b(r, c) = static_cast<double>(rng.uniform_int(-100, 100));
        inst.alpha = Vector(dim);
        for (int i = 0; i < dim; ++i) inst.alpha[i] = rng.uniform(-kPi, kPi);
        inst.amplitude = schwefel_amplitude(inst);
        return inst;
    }

    // Shift drawn from the central 80% of the box so the optimum never sits
    // on (or outside) the boundary.
    inst.shift = Vector(dim);
    for (int i = 0; i < dim; ++i) {
        const double width = inst.upper[i] - inst.lower[i];
        inst.shift[i] =
            rng.uniform(inst.lower[i] + 0.1 * width, inst.upper[i] - 0.1 * width);
    }
    if (inst.rotated)
        inst.rotation = random_rotation(dim, rng);
    else if (kind == ProblemKind::ShiftedRotatedRastrigin)
        inst.rotation = Matrix::Identity(dim, dim);
    return inst;
}

Vector optimum_of(const ProblemInstance& inst) {
    if (inst.kind == ProblemKind::Schwefel213) return inst.alpha;
    return inst.shift;
}

void validate_instance(const ProblemInstance& inst) {
    auto fail = [](const std::string& what) {
        throw std::invalid_argument("invalid instance: " + what);
    };
    if (inst.dim < 1) fail("dim must be >= 1");
    if (inst.lower.size() != inst.dim || inst.upper.size() != inst.dim)
        fail("bound vectors must match dim");
    if (!(inst.lower.array() < inst.upper.array()).all())
        fail("lower bound must be strictly below upper bound");
    if (inst.f_bias != f_bias_of(inst.kind)) fail("f_bias does not match kind");

    if (inst.kind == ProblemKind::Schwefel213) {
        if (inst.coeff_a.rows() != inst.dim || inst.coeff_a.cols() != inst.dim ||
            inst.coeff_b.rows() != inst.dim || inst.coeff_b.cols() != inst.dim)
            fail("coefficient matrices must be dim x dim");
        for (const Matrix* m : {&inst.coeff_a, &inst.coeff_b})
            for (int r = 0; r < inst.dim; ++r)
                for (int c = 0; c < inst.dim; ++c) {
                    const double v = (*m)(r, c);
                    if (v != std::floor(v) || v < -100.0 || v > 100.0)
                        fail("coefficients must be integers in [-100, 100]");
                }
        if (inst.alpha.size() != inst.dim) fail("alpha must match dim");
        if ((inst.alpha.array() < -kPi).any() || (inst.alpha.array() > kPi).any())
            fail("alpha out of range");
        if (inst.amplitude.size() != inst.dim) fail("amplitude must match dim");
        return;
    }

    if (inst.shift.size() != inst.dim) fail("shift must match dim");
    for (int i = 0; i < inst.dim; ++i) {
        const double width = inst.upper[i] - inst.lower[i];
        if (inst.shift[i] < inst.lower[i] + 0.1 * width ||
            inst.shift[i] > inst.upper[i] - 0.1 * width)
            fail("shift outside the central 80% of the box");
    }
    if (inst.kind == ProblemKind::ShiftedRotatedRastrigin) {
        if (inst.rotation.rows() != inst.dim || inst.rotation.cols() != inst.dim)
            fail("rotation must be dim x dim");
        const double defect =
            (inst.rotation.transpose() * inst.rotation -
             Matrix::Identity(inst.dim, inst.dim))
                .cwiseAbs()
                .maxCoeff();
        if (defect > 1e-9) fail("rotation is not orthonormal");
    }
}

void write_instance(const ProblemInstance& inst, std::ostream& out) {
    out << "evag-instance 1\n";
    out << "kind " << kind_name(inst.kind) << '\n';
    out << "dim " << inst.dim << '\n';
    out << "seed " << inst.seed << '\n';
    out << "f_bias " << format_g17(inst.f_bias) << '\n';
    write_vector(out, "lower", inst.lower);
    write_vector(out, "upper", inst.upper);
    switch (inst.kind) {
        case ProblemKind::ShiftedSphere:
            write_vector(out, "shift", inst.shift);
            break;
        case ProblemKind::ShiftedRotatedRastrigin:
            write_vector(out, "shift", inst.shift);
            out << "rotated " << (inst.rotated ? 1 : 0) << '\n';
            write_matrix(out, "rotation", inst.rotation);
            break;
        case ProblemKind::Schwefel213:
            write_matrix(out, "coeff_a", inst.coeff_a);
            write_matrix(out, "coeff_b", inst.coeff_b);
            write_vector(out, "alpha", inst.alpha);
            break;
    }
    if (!out) throw std::runtime_error("instance write failed");
}

void write_instance_file(const ProblemInstance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_instance(inst, out);
}

ProblemInstance read_instance(std::istream& in) {
    expect_key(in, "evag-instance");
    int version = 0;
    if (!(in >> version) || version != 1) parse_fail("unsupported format version");

    ProblemInstance inst;
    std::string name;
    expect_key(in, "kind");
    if (!(in >> name)) parse_fail("missing kind");
    inst.kind = parse_kind(name);
    expect_key(in, "dim");
    if (!(in >> inst.dim) || inst.dim < 1) parse_fail("bad dim");
    expect_key(in, "seed");
    if (!(in >> inst.seed)) parse_fail("bad seed");
    expect_key(in, "f_bias");
    if (!(in >> inst.f_bias)) parse_fail("bad f_bias");
    inst.lower = read_vector(in, "lower", inst.dim);
    inst.upper = read_vector(in, "upper", inst.dim);
    switch (inst.kind) {
        case ProblemKind::ShiftedSphere:
            inst.shift = read_vector(in, "shift", inst.dim);
            break;
        case ProblemKind::ShiftedRotatedRastrigin: {
            inst.shift = read_vector(in, "shift", inst.dim);
            expect_key(in, "rotated");
            int flag = 0;
            if (!(in >> flag) || (flag != 0 && flag != 1)) parse_fail("bad rotated flag");
            inst.rotated = flag == 1;
            inst.rotation = read_matrix(in, "rotation", inst.dim);
            break;
        }
        case ProblemKind::Schwefel213: {
            inst.coeff_a = read_matrix(in, "coeff_a", inst.dim);
            inst.coeff_b = read_matrix(in, "coeff_b", inst.dim);
            inst.alpha = read_vector(in, "alpha", inst.dim);
            inst.amplitude = schwefel_amplitude(inst);
            break;
        }
    }
    validate_instance(inst);
    return inst;
}

ProblemInstance read_instance_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return read_instance(in);
}

}  // namespace evag
