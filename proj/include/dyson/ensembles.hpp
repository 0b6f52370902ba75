#pragma once

#include "dyson/ensemble_spec.hpp"
#include "dyson/rng.hpp"
#include "dyson/symfun.hpp"

#include <json.hpp>

#include <cstddef>
#include <span>
#include <vector>

namespace dyson {

/// N x N self-adjoint matrix with entries M_ij = sum_a M_{ij;a} e_a over the
/// reals, complex numbers or real quaternions (e_0 = 1, e_a^2 = -1 for a > 0).
///
/// Coefficients are stored as four row-major N x N planes, one per algebra
/// unit, for every beta; planes a >= beta stay zero. The Gaussian ensemble
/// density P(M) = kappa exp(-beta/2 tr M M^dagger) has a normalisation
/// kappa that is never needed here.
class SelfAdjointMatrix {
public:
    static constexpr int kPlanes = 4;

    enum class Check { Exact, Symmetrize };

    explicit SelfAdjointMatrix(EnsembleSpec spec);

    /// Build from kPlanes (or spec.beta) row-major planes.
    /// Check::Exact requires M = M^dagger coefficient-wise; Check::Symmetrize
    /// takes the upper triangle as authoritative and mirrors it (the lower
    /// triangle must agree to 1e-10 relative).
    static SelfAdjointMatrix from_planes(EnsembleSpec spec, std::span<const double> planes,
                                         Check check = Check::Exact);

    const EnsembleSpec& spec() const noexcept { return spec_; }
    std::size_t dim() const noexcept { return spec_.dim; }

    double coefficient(std::size_t i, std::size_t j, int unit) const {
        return planes_[static_cast<std::size_t>(unit) * dim() * dim() + i * dim() + j];
    }

    /// Set M_{ij;unit} and its mirror M_{ji;unit} = +/- M_{ij;unit}.
    void set_coefficient(std::size_t i, std::size_t j, int unit, double value);

    std::span<const double> plane(int unit) const {
        return std::span<const double>(planes_).subspan(static_cast<std::size_t>(unit) * dim() * dim(),
                                                        dim() * dim());
    }
    std::span<const double> planes() const noexcept { return planes_; }

    /// Exact coefficient-level check of M = M^dagger.
    bool is_self_adjoint() const;

    /// sum_ij |M_ij|^2
    double frobenius_squared() const;

private:
    friend void ou_advance(struct FlowState& state, double dt, RandomStream& rng);

    EnsembleSpec spec_;
    std::vector<double> planes_;
};

/// Real spectrum in ascending order.
struct SpectrumVector {
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    double max() const { return values.back(); }
    double min() const { return values.front(); }
};

/// State of the matrix-space walk at fictitious time s.
struct FlowState {
    SelfAdjointMatrix matrix;
    double time = 0.0;
};

/// Independent coefficients drawn from N(0, (1 + delta_ij)/(2 beta)).
SelfAdjointMatrix sample_gaussian(const EnsembleSpec& spec, RandomStream& rng);

/// One Euler-Maruyama step of the Ornstein-Uhlenbeck flow:
/// dM_{ij;a} = -M_{ij;a} dt + sqrt((1 + delta_ij)/beta dt) xi.
FlowState ou_step(const FlowState& state, double dt, RandomStream& rng);

/// In-place variant of ou_step used by the simulators.
void ou_advance(FlowState& state, double dt, RandomStream& rng);

/// Sorted spectrum. beta = 1 uses real cyclic Jacobi, beta = 2 complex
/// Hermitian Jacobi, beta = 4 the 2N x 2N complex embedding with each
/// Kramers pair collapsed to one value.
SpectrumVector eigenvalues(const SelfAdjointMatrix& m);

/// The spectrum of the complex representation: 2N values for beta = 4
/// (doubly degenerate), N otherwise. Ascending.
std::vector<double> embedded_spectrum(const SelfAdjointMatrix& m);

/// t_k = Re tr M^k for k = 0..k_max (scalar part for quaternions); t_0 = N.
/// Only powers up to ceil(k_max/2) are formed: t_{a+b} = <M^a, M^b>.
std::vector<double> traces(const SelfAdjointMatrix& m, std::size_t k_max);

/// Trace coordinates t_1..t_K with K = max(k_max, N).
symfun::TraceVector<double> trace_vector(const SelfAdjointMatrix& m, std::size_t k_max = 0);

/// Eigenvalues of a real symmetric row-major n x n matrix by cyclic Jacobi.
/// When `vectors` is non-null it receives the eigenvectors as columns
/// (row-major), matching the ascending eigenvalue order.
std::vector<double> symmetric_eigen(std::vector<double> a, std::size_t n,
                                    std::vector<double>* vectors = nullptr);

void to_json(nlohmann::json& j, const SelfAdjointMatrix& m);
SelfAdjointMatrix matrix_from_json(const nlohmann::json& j);

namespace detail {
/// Product of two (not necessarily self-adjoint) N x N algebra matrices held
/// as `units` row-major planes each.
std::vector<double> algebra_multiply(std::span<const double> a, std::span<const double> b, std::size_t n,
                                     int units);
}  // namespace detail

}  // namespace dyson
