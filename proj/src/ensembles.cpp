#include "dyson/ensembles.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace dyson {

namespace {

// e_a e_b = sign(a, b) e_{a ^ b} for the units 1, i, j, k.
constexpr int kSign[4][4] = {
    {1, 1, 1, 1},
    {1, -1, 1, -1},
    {1, -1, -1, 1},
    {1, 1, -1, -1},
};

// Unit a > 0 flips sign under conjugation.
inline double mirror_sign(int unit) { return unit == 0 ? 1.0 : -1.0; }

constexpr int kMaxSweeps = 100;

template <class T>
double sq_abs(const T& x) {
    return std::norm(x);
}

template <class T>
T conj_of(const T& x) {
    if constexpr (std::is_same_v<T, double>) return x;
    else return std::conj(x);
}

// Cyclic Jacobi on a dense self-adjoint matrix (row-major, both halves
// stored). For complex input each off-diagonal element is first made real by
// a diagonal phase, then annihilated by a real rotation.
template <class T>
std::vector<double> jacobi(std::vector<T> a, std::size_t n, std::vector<double>* vectors) {
    auto at = [&](std::size_t i, std::size_t j) -> T& { return a[i * n + j]; };
    if (vectors) {
        vectors->assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) (*vectors)[i * n + i] = 1.0;
    }
    for (const auto& x : a)
        if (!std::isfinite(std::abs(x))) throw std::invalid_argument("matrix has non-finite entries");

    double total = 0.0;
    for (const auto& x : a) total += sq_abs(x);
    const double eps = std::numeric_limits<double>::epsilon();

    bool converged = false;
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += sq_abs(at(p, q));
        if (off <= 1e-30 * total || off == 0.0) {
            converged = true;
            break;
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double r = std::abs(at(p, q));
                if (r == 0.0) continue;
                const double app = std::real(at(p, p));
                const double aqq = std::real(at(q, q));
                if (sweep > 3 && r <= 1e-2 * eps * std::min(std::abs(app), std::abs(aqq))) {
                    at(p, q) = T(0);
                    at(q, p) = T(0);
                    continue;
                }
                if constexpr (!std::is_same_v<T, double>) {
                    // Column q times conj(phase), row q times phase.
                    const T phase = at(p, q) / r;
                    const T cph = std::conj(phase);
                    for (std::size_t i = 0; i < n; ++i) {
                        at(i, q) *= cph;
                        at(q, i) *= phase;
                    }
                    at(q, q) = T(aqq);
                    at(p, q) = T(r);
                    at(q, p) = T(r);
                } else {
                    r = at(p, q);
                }
                const double theta = (aqq - app) / (2.0 * r);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    const T aip = at(i, p);
                    const T aiq = at(i, q);
                    at(i, p) = c * aip - s * aiq;
                    at(i, q) = s * aip + c * aiq;
                    at(p, i) = conj_of(at(i, p));
                    at(q, i) = conj_of(at(i, q));
                }
                at(p, p) = T(app - t * r);
                at(q, q) = T(aqq + t * r);
                at(p, q) = T(0);
                at(q, p) = T(0);
                if (vectors) {
                    auto& v = *vectors;
                    for (std::size_t i = 0; i < n; ++i) {
                        const double vip = v[i * n + p];
                        const double viq = v[i * n + q];
                        v[i * n + p] = c * vip - s * viq;
                        v[i * n + q] = s * vip + c * viq;
                    }
                }
            }
        }
    }
    if (!converged) throw std::runtime_error("Jacobi eigensolver did not converge");

    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = std::real(at(i, i));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
    std::vector<double> sorted(n);
    for (std::size_t k = 0; k < n; ++k) sorted[k] = values[order[k]];
    if (vectors) {
        std::vector<double> v(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) v[i * n + k] = (*vectors)[i * n + order[k]];
        *vectors = std::move(v);
    }
    return sorted;
}

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;

}  // namespace

SelfAdjointMatrix::SelfAdjointMatrix(EnsembleSpec spec)
    : spec_(spec), planes_(static_cast<std::size_t>(kPlanes) * spec.dim * spec.dim, 0.0) {}

SelfAdjointMatrix SelfAdjointMatrix::from_planes(EnsembleSpec spec, std::span<const double> planes, Check check) {
    const std::size_t nn = spec.dim * spec.dim;
    const std::size_t given = planes.size() / (nn == 0 ? 1 : nn);
    if (planes.size() % nn != 0 || (given != static_cast<std::size_t>(spec.beta) && given != kPlanes))
        throw std::invalid_argument("expected " + std::to_string(spec.beta) + " or 4 planes of " +
                                    std::to_string(nn) + " coefficients, got " + std::to_string(planes.size()));
    SelfAdjointMatrix m(spec);
    for (std::size_t u = 0; u < given; ++u) {
        for (std::size_t k = 0; k < nn; ++k) {
            const double x = planes[u * nn + k];
            if (!std::isfinite(x)) throw std::invalid_argument("non-finite coefficient");
            if (u >= static_cast<std::size_t>(spec.beta) && x != 0.0)
                throw std::invalid_argument("coefficient in algebra unit " + std::to_string(u) +
                                            " is not allowed for beta = " + std::to_string(spec.beta));
            m.planes_[u * nn + k] = x;
        }
    }
    if (check == Check::Exact) {
        if (!m.is_self_adjoint()) throw std::invalid_argument("matrix is not self-adjoint");
        return m;
    }
    double scale = 1.0;
    for (double x : m.planes_) scale = std::max(scale, std::abs(x));
    const std::size_t n = spec.dim;
    for (int u = 0; u < spec.beta; ++u) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j) {
                const double upper = m.coefficient(i, j, u);
                const double lower = mirror_sign(u) * m.coefficient(j, i, u);
                const double expect = (i == j && u > 0) ? 0.0 : upper;
                if (std::abs(lower - expect) > 1e-10 * scale || (i == j && u > 0 && std::abs(upper) > 1e-10 * scale))
                    throw std::invalid_argument("matrix is not self-adjoint within 1e-10");
                m.set_coefficient(i, j, u, expect);
            }
        }
    }
    return m;
}

void SelfAdjointMatrix::set_coefficient(std::size_t i, std::size_t j, int unit, double value) {
    const std::size_t n = dim();
    if (i >= n || j >= n) throw std::out_of_range("matrix index out of range");
    if (unit < 0 || unit >= spec_.beta) throw std::out_of_range("algebra unit out of range for this beta");
    if (i == j && unit > 0 && value != 0.0)
        throw std::invalid_argument("diagonal entries of a self-adjoint matrix are real");
    const std::size_t base = static_cast<std::size_t>(unit) * n * n;
    planes_[base + i * n + j] = value;
    planes_[base + j * n + i] = i == j ? value : mirror_sign(unit) * value;
}

bool SelfAdjointMatrix::is_self_adjoint() const {
    const std::size_t n = dim();
    for (int u = 0; u < kPlanes; ++u)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                const double a = coefficient(i, j, u);
                const double b = coefficient(j, i, u);
                if (u >= spec_.beta) {
                    if (a != 0.0 || b != 0.0) return false;
                } else if (a != mirror_sign(u) * b) {
                    return false;
                }
            }
    return true;
}

double SelfAdjointMatrix::frobenius_squared() const {
    double s = 0.0;
    for (double x : planes_) s += x * x;
    return s;
}

SelfAdjointMatrix sample_gaussian(const EnsembleSpec& spec, RandomStream& rng) {
    SelfAdjointMatrix m(spec);
    const double beta = spec.beta;
    const double sd_diag = std::sqrt(1.0 / beta);
    const double sd_off = std::sqrt(1.0 / (2.0 * beta));
    for (std::size_t i = 0; i < spec.dim; ++i) {
        for (std::size_t j = i; j < spec.dim; ++j) {
            if (i == j) {
                m.set_coefficient(i, i, 0, sd_diag * rng.normal());
                continue;
            }
            for (int u = 0; u < spec.beta; ++u) m.set_coefficient(i, j, u, sd_off * rng.normal());
        }
    }
    return m;
}

void ou_advance(FlowState& state, double dt, RandomStream& rng) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("time step must be positive");
    auto& m = state.matrix;
    const std::size_t n = m.dim();
    const int beta = m.spec().beta;
    const double decay = 1.0 - dt;
    const double amp_diag = std::sqrt(2.0 / beta * dt);
    const double amp_off = std::sqrt(1.0 / beta * dt);
    auto* data = m.planes_.data();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const int units = i == j ? 1 : beta;
            const double amp = i == j ? amp_diag : amp_off;
            for (int u = 0; u < units; ++u) {
                const std::size_t base = static_cast<std::size_t>(u) * n * n;
                const double x = decay * data[base + i * n + j] + amp * rng.normal();
                data[base + i * n + j] = x;
                data[base + j * n + i] = mirror_sign(u) * x;
            }
        }
    }
    state.time += dt;
}

FlowState ou_step(const FlowState& state, double dt, RandomStream& rng) {
    FlowState next = state;
    ou_advance(next, dt, rng);
    return next;
}

std::vector<double> symmetric_eigen(std::vector<double> a, std::size_t n, std::vector<double>* vectors) {
    if (a.size() != n * n) throw std::invalid_argument("matrix storage does not match dimension");
    return jacobi<double>(std::move(a), n, vectors);
}

std::vector<double> embedded_spectrum(const SelfAdjointMatrix& m) {
    const std::size_t n = m.dim();
    switch (m.spec().beta) {
        case 1: {
            auto p = m.plane(0);
            return jacobi<double>(std::vector<double>(p.begin(), p.end()), n, nullptr);
        }
        case 2: {
            std::vector<std::complex<double>> a(n * n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) a[i * n + j] = {m.coefficient(i, j, 0), m.coefficient(i, j, 1)};
            return jacobi<std::complex<double>>(std::move(a), n, nullptr);
        }
        default: {
            // q = z + w j with z = q0 + q1 i, w = q2 + q3 i maps to [[z, w], [-conj(w), conj(z)]].
            const std::size_t n2 = 2 * n;
            std::vector<std::complex<double>> a(n2 * n2);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    const std::complex<double> z{m.coefficient(i, j, 0), m.coefficient(i, j, 1)};
                    const std::complex<double> w{m.coefficient(i, j, 2), m.coefficient(i, j, 3)};
                    a[i * n2 + j] = z;
                    a[i * n2 + (j + n)] = w;
                    a[(i + n) * n2 + j] = -std::conj(w);
                    a[(i + n) * n2 + (j + n)] = std::conj(z);
                }
            }
            return jacobi<std::complex<double>>(std::move(a), n2, nullptr);
        }
    }
}

SpectrumVector eigenvalues(const SelfAdjointMatrix& m) {
    auto all = embedded_spectrum(m);
    if (m.spec().beta != 4) return {std::move(all)};
    double scale = 1.0;
    for (double x : all) scale = std::max(scale, std::abs(x));
    SpectrumVector out;
    out.values.reserve(m.dim());
    for (std::size_t k = 0; k < all.size(); k += 2) {
        if (std::abs(all[k + 1] - all[k]) > 1e-8 * scale)
            throw std::runtime_error("quaternion spectrum is not Kramers degenerate");
        out.values.push_back(0.5 * (all[k] + all[k + 1]));
    }
    return out;
}

namespace detail {

std::vector<double> algebra_multiply(std::span<const double> a, std::span<const double> b, std::size_t n, int units) {
    const std::size_t nn = n * n;
    if (a.size() < static_cast<std::size_t>(units) * nn || b.size() < static_cast<std::size_t>(units) * nn)
        throw std::invalid_argument("algebra_multiply: plane storage too small");
    const auto rows = static_cast<Eigen::Index>(n);
    std::vector<double> out(static_cast<std::size_t>(units) * nn, 0.0);
    for (int x = 0; x < units; ++x) {
        ConstMap ax(a.data() + x * nn, rows, rows);
        for (int y = 0; y < units; ++y) {
            ConstMap by(b.data() + y * nn, rows, rows);
            Map target(out.data() + (x ^ y) * nn, rows, rows);
            if (kSign[x][y] > 0) target.noalias() += ax * by;
            else target.noalias() -= ax * by;
        }
    }
    return out;
}

}  // namespace detail

std::vector<double> traces(const SelfAdjointMatrix& m, std::size_t k_max) {
    if (k_max < 1) throw std::invalid_argument("k_max must be at least 1");
    const std::size_t n = m.dim();
    const std::size_t nn = n * n;
    const int units = m.spec().beta;
    const std::size_t half = (k_max + 1) / 2;

    // powers[a] holds M^a, a = 1..half.
    std::vector<std::vector<double>> powers(half + 1);
    auto p1 = m.planes().subspan(0, static_cast<std::size_t>(units) * nn);
    powers[1].assign(p1.begin(), p1.end());
    for (std::size_t a = 2; a <= half; ++a) powers[a] = detail::algebra_multiply(powers[a - 1], powers[1], n, units);

    std::vector<double> t(k_max + 1);
    t[0] = static_cast<double>(n);
    for (std::size_t k = 1; k <= k_max; ++k) {
        const std::size_t a = k / 2;
        const std::size_t b = k - a;
        double s = 0.0;
        if (a == 0) {
            for (std::size_t i = 0; i < n; ++i) s += powers[b][i * n + i];
        } else {
            // Re tr(X Y) = sum_ij <X_ij, conj(Y_ji)>; Y self-adjoint gives <X_ij, Y_ij>.
            const auto& x = powers[a];
            const auto& y = powers[b];
            for (std::size_t q = 0; q < static_cast<std::size_t>(units) * nn; ++q) s += x[q] * y[q];
        }
        t[k] = s;
    }
    return t;
}

symfun::TraceVector<double> trace_vector(const SelfAdjointMatrix& m, std::size_t k_max) {
    auto t = traces(m, std::max(k_max, m.dim()));
    return symfun::TraceVector<double>(m.dim(), std::vector<double>(t.begin() + 1, t.end()));
}

void to_json(nlohmann::json& j, const SelfAdjointMatrix& m) {
    nlohmann::json planes = nlohmann::json::array();
    for (int u = 0; u < m.spec().beta; ++u) {
        auto p = m.plane(u);
        planes.push_back(std::vector<double>(p.begin(), p.end()));
    }
    j = nlohmann::json{{"beta", m.spec().beta}, {"dim", m.dim()}, {"coefficients", planes}};
}

SelfAdjointMatrix matrix_from_json(const nlohmann::json& j) {
    const EnsembleSpec spec(j.at("beta").get<int>(), j.at("dim").get<std::size_t>());
    const auto& planes = j.at("coefficients");
    if (!planes.is_array() || planes.size() != static_cast<std::size_t>(spec.beta))
        throw std::invalid_argument("coefficients must hold one plane per algebra unit");
    std::vector<double> flat;
    for (const auto& p : planes) {
        auto v = p.get<std::vector<double>>();
        if (v.size() != spec.dim * spec.dim) throw std::invalid_argument("coefficient plane has wrong size");
        flat.insert(flat.end(), v.begin(), v.end());
    }
    return SelfAdjointMatrix::from_planes(spec, flat, SelfAdjointMatrix::Check::Exact);
}

}  // namespace dyson
