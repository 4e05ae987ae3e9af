#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "chsim/errors.hpp"
#include "chsim/grid.hpp"
#include "chsim/spectral.hpp"

namespace chsim {

// ---------------------------------------------------------------------------
// Double-well potential and transition profile
// ---------------------------------------------------------------------------

/// W(s) = s^2 (1-s)^2 / 2, minima at the pure phases 0 and 1.
inline double W(double s) {
    const double t = s * (1.0 - s);
    return 0.5 * t * t;
}

/// W'(s) = s (1-s) (1-2s).
inline double W_prime(double s) { return s * (1.0 - s) * (1.0 - 2.0 * s); }

/// W''(s) = 1 - 6s + 6s^2; |W''| <= 1 on [0,1].
inline double W_second(double s) { return 1.0 - 6.0 * s + 6.0 * s * s; }

/// Antiderivative of sqrt(2 W(s)) = s(1-s): G(s) = s^2/2 - s^3/3.
/// 6 G maps the pure phases to {0,1}, so integrating 6 G(u) measures the
/// enclosed volume.
inline double G(double s) { return s * s * (0.5 - s / 3.0); }

/// Optimal transition profile q(z) = (1 - tanh(z/2))/2 = 1/(1 + e^z).
/// Satisfies q' = -q(1-q) = -sqrt(2 W(q)) and q'' = W'(q); q decreases from 1
/// to 0, q(0) = 1/2. The value is kept strictly inside (0,1): positive by the
/// logistic form, below 1 by capping at the largest double under 1.
inline double profile_q(double z) {
    const double v = 1.0 / (1.0 + std::exp(std::clamp(z, -700.0, 700.0)));
    return std::min(v, 0x1.fffffffffffffp-1);
}

/// q'(z) = -q(1-q) = -e^z / (1 + e^z)^2, evaluated through e^{-|z|} so the
/// tails stay accurate down to the underflow threshold.
inline double profile_q_prime(double z) {
    const double t = std::exp(-std::abs(std::clamp(z, -700.0, 700.0)));
    const double d = 1.0 + t;
    return -t / (d * d);
}

// ---------------------------------------------------------------------------
// Model parameters
// ---------------------------------------------------------------------------

enum class Model { CCH, MCH, NMNCH };

inline const char* model_name(Model m) {
    switch (m) {
        case Model::CCH: return "cch";
        case Model::MCH: return "mch";
        default: return "nmn";
    }
}

/// Parameters of the three time-stepping schemes.
///
/// All schemes advance
///     du/dt = <model-specific flux of mu>,   mu = W'(u)/eps^2 - lap(u)
/// by one semi-implicit step of size dt, splitting the energy into an implicit
/// convex part and an explicit concave part (constant alpha), and for the
/// mobility models additionally splitting the metric (constants m, beta).
struct ModelParams {
    Model model = Model::NMNCH;
    double epsilon = 0.0;        ///< interface width, > 0
    double dt = 0.0;             ///< time step, > 0
    double alpha = 2.0;          ///< energy splitting constant, >= max |W''| = 1
    double m = 1.0;              ///< metric splitting constant, > 0
    double beta = 0.0;           ///< metric splitting zero-order constant, >= 0
    double gamma = 1.0;          ///< mobility regularization, > 0
    double mobility_scale = 36.0;///< prefactor of the degenerate mobility 2W
    bool dealias = false;        ///< optional 2/3-rule filter on nonlinear terms

    /// Largest value of the degenerate mobility scale*2W on [0,1]
    /// (attained at s = 1/2).
    double mch_mobility_max() const { return mobility_scale / 16.0; }

    void validate() const {
        if (!(epsilon > 0.0)) throw ConfigError("model.epsilon must be > 0");
        if (!(dt > 0.0)) throw ConfigError("model.dt must be > 0");
        if (!(alpha >= 1.0))
            throw ConfigError("model.alpha must be >= 1 (concavity of the explicit "
                              "energy part requires alpha >= max |W''| = 1)");
        if (!(m > 0.0)) throw ConfigError("model.m must be > 0");
        if (!(beta >= 0.0)) throw ConfigError("model.beta must be >= 0");
        if (!(gamma > 0.0)) throw ConfigError("model.gamma must be > 0");
        if (!(mobility_scale > 0.0)) throw ConfigError("model.mobility_scale must be > 0");
        if (model == Model::MCH && m < mch_mobility_max() * (1.0 - 1e-12))
            throw ConfigError("model.m must dominate the mobility: m >= max M = " +
                              std::to_string(mch_mobility_max()));
    }

    /// Defaults for a given model and step size: alpha = 2, gamma = 1,
    /// beta = 2/eps^2, and m = 1 except for the degenerate-mobility model
    /// where m = max M.
    static ModelParams defaults(Model model, double epsilon, double dt) {
        ModelParams p;
        p.model = model;
        p.epsilon = epsilon;
        p.dt = dt;
        p.beta = model == Model::NMNCH ? 2.0 / (epsilon * epsilon) : 0.0;
        if (model == Model::MCH) p.m = p.mch_mobility_max();
        return p;
    }
};

/// Mobility of the active model: 1 for the classical equation,
/// scale * 2 W(s) for the degenerate-mobility model, and the regularized
/// W(s) + gamma eps^2 for the two-mobility model.
inline double mobility_M(double s, const ModelParams& p) {
    switch (p.model) {
        case Model::CCH: return 1.0;
        case Model::MCH: return p.mobility_scale * 2.0 * W(s);
        default: return W(s) + p.gamma * p.epsilon * p.epsilon;
    }
}

/// Second mobility N(s) = 1/sqrt(W(s) + gamma eps^2) of the two-mobility
/// model; M N^2 = 1 by construction.
inline double mobility_N(double s, const ModelParams& p) {
    return 1.0 / std::sqrt(W(s) + p.gamma * p.epsilon * p.epsilon);
}

// ---------------------------------------------------------------------------
// Simulation state
// ---------------------------------------------------------------------------

/// Phase field and chemical potential at one time level.
struct SimState {
    Field u;
    Field mu;
    long step = 0;
    double time = 0.0;
};

/// Chemical potential consistent with the state: mu = W'(u)/eps^2 - lap(u).
inline Field chemical_potential(const Field& u, double epsilon) {
    Field mu = laplacian(u);
    const double inv_eps2 = 1.0 / (epsilon * epsilon);
    for (std::size_t i = 0; i < u.size(); ++i)
        mu[i] = inv_eps2 * W_prime(u[i]) - mu[i];
    return mu;
}

/// Initial state at step 0 with mu derived from u.
inline SimState make_state(Field u, const ModelParams& p) {
    if (auto bad = first_non_finite(u))
        throw Error("initial state: non-finite value at flat index " + std::to_string(*bad));
    Field mu = chemical_potential(u, p.epsilon);
    return SimState{std::move(u), std::move(mu), 0, 0.0};
}

// ---------------------------------------------------------------------------
// Inverse symbol operators
// ---------------------------------------------------------------------------

/// Effective metric constants of the implicit part: the classical scheme is
/// the mobility scheme with m = 1, beta = 0, and the degenerate-mobility
/// scheme has beta = 0.
inline std::pair<double, double> implicit_metric(const ModelParams& p) {
    switch (p.model) {
        case Model::CCH: return {1.0, 0.0};
        case Model::MCH: return {p.m, 0.0};
        default: return {p.m, p.beta};
    }
}

/// Multiplier rule of the per-step solve operator
///   L = (I + dt (m lap - beta I)(lap - alpha/eps^2 I))^-1,
/// as a function of |xi|^2: 1 / (1 + dt (m s + beta)(s + alpha/eps^2)) with
/// s = 4 pi^2 |xi|^2. Values lie in (0,1]; the zero mode is exactly 1 when
/// beta = 0.
inline auto inverse_symbol_rule(const ModelParams& p) {
    const auto [m_eff, beta_eff] = implicit_metric(p);
    const double dt = p.dt;
    const double alpha_eps2 = p.alpha / (p.epsilon * p.epsilon);
    return [=](double xi2) {
        const double s = 4.0 * std::numbers::pi * std::numbers::pi * xi2;
        return 1.0 / (1.0 + dt * (m_eff * s + beta_eff) * (s + alpha_eps2));
    };
}

/// Precomputed solve operator for a (params, grid) pair.
inline SymbolOperator solve_operator(const ModelParams& p, const GridSpec& g) {
    SymbolOperator op = build_symbol(g, inverse_symbol_rule(p));
    for (double v : op.multipliers())
        if (!(v > 0.0 && v <= 1.0))
            throw Error("solve operator multiplier outside (0,1]");
    return op;
}

// ---------------------------------------------------------------------------
// Right-hand sides and steppers
// ---------------------------------------------------------------------------

/// Expanded two-mobility flux N(u) div(M(u) grad(N(u) mu)). With
/// a = sqrt(M(u)) and w = mu / a this equals a lap(w) + 2 grad(a).grad(w);
/// derivatives are spectral, products pointwise.
inline Field nmn_rhs(const Field& u, const Field& mu, const ModelParams& p) {
    if (u.grid() != mu.grid()) throw Error("nmn_rhs: u and mu on mismatched grids");
    const GridSpec& g = u.grid();
    Field a(g), w(g);
    for (std::size_t i = 0; i < g.total(); ++i) {
        const double M = W(u[i]) + p.gamma * p.epsilon * p.epsilon;
        if (!(M > 0.0))
            throw Error("nmn_rhs: mobility not positive at flat index " + std::to_string(i));
        a[i] = std::sqrt(M);
        w[i] = mu[i] / a[i];
    }
    std::vector<Field> grad_a = gradient(a);
    std::vector<Field> grad_w = gradient(w);
    Field out = laplacian(w);
    for (std::size_t i = 0; i < g.total(); ++i) {
        double dot = 0.0;
        for (int ax = 0; ax < g.dim(); ++ax) dot += grad_a[static_cast<std::size_t>(ax)][i] *
                                                    grad_w[static_cast<std::size_t>(ax)][i];
        out[i] = a[i] * out[i] + 2.0 * dot;
    }
    return out;
}

/// One-step integrator for a fixed (params, grid) pair. The solve operator and
/// Laplacian table are precomputed at construction; advancing is deterministic
/// and owns no mutable state, so one stepper may serve concurrent states.
class Stepper {
public:
    Stepper(ModelParams p, GridSpec g)
        : p_(p), g_(std::move(g)), linv_(solve_operator(p, g_)),
          lap_(detail::laplacian_table(g_)) {
        p_.validate();
    }

    const ModelParams& params() const { return p_; }
    const GridSpec& grid() const { return g_; }
    const SymbolOperator& solve_op() const { return linv_; }

    SimState step(const SimState& s) const {
        SimState next = s;
        advance(next);
        return next;
    }

    void advance(SimState& s) const {
        if (s.u.grid() != g_) throw Error("stepper: state grid mismatch");
        switch (p_.model) {
            case Model::CCH: advance_cch(s); break;
            case Model::MCH: advance_mch(s, mobility_field(s.u)); break;
            default: advance_nmn(s); break;
        }
    }

    /// Degenerate-mobility step with an externally supplied mobility sample
    /// field (the public path evaluates scale*2W(u)).
    void advance_mch_with_mobility(SimState& s, const Field& mobility) const {
        if (s.u.grid() != g_) throw Error("stepper: state grid mismatch");
        advance_mch(s, mobility);
    }

private:
    Field mobility_field(const Field& u) const {
        Field mob(g_);
        for (std::size_t i = 0; i < u.size(); ++i) mob[i] = mobility_M(u[i], p_);
        return mob;
    }

    /// (W'(u) - alpha u)/eps^2, the explicitly treated part of mu.
    Field explicit_potential(const Field& u) const {
        const double inv_eps2 = 1.0 / (p_.epsilon * p_.epsilon);
        Field b2(g_);
        for (std::size_t i = 0; i < u.size(); ++i)
            b2[i] = inv_eps2 * (W_prime(u[i]) - p_.alpha * u[i]);
        return b2;
    }

    /// Shared tail of all three schemes: given the transforms of B1 and B2,
    /// form u_next = L[B1 + dt (m lap - beta) B2] and recover mu_next from the
    /// second row, mu_next = B2 - (lap - alpha/eps^2) u_next.
    void solve_and_update(SimState& s, SpectralField& B1, SpectralField& B2,
                          const Field& b2_phys) const {
        const auto [m_eff, beta_eff] = implicit_metric(p_);
        const double dt = p_.dt;
        std::span<const double> Linv = linv_.multipliers();
        SpectralField& unew_hat = B1;
        for (std::size_t i = 0; i < g_.total(); ++i)
            unew_hat[i] = Linv[i] * (B1[i] + dt * (m_eff * lap_[i] - beta_eff) * B2[i]);
        SpectralField lap_unew(g_);
        for (std::size_t i = 0; i < g_.total(); ++i) lap_unew[i] = lap_[i] * unew_hat[i];
        Field u_next = inverse(unew_hat);
        Field lap_next = inverse(lap_unew);
        const double alpha_eps2 = p_.alpha / (p_.epsilon * p_.epsilon);
        Field mu_next(g_);
        for (std::size_t i = 0; i < g_.total(); ++i)
            mu_next[i] = b2_phys[i] - lap_next[i] + alpha_eps2 * u_next[i];
        // |u| beyond this cannot come from a converging run; flagging it here
        // keeps the overflow of the next step's cubic nonlinearity from
        // masking the divergence.
        constexpr double divergence_guard = 1e75;
        if (first_non_finite(u_next) || field_max_abs(u_next) > divergence_guard)
            throw InstabilityError(s.step + 1, field_max_abs(u_next));
        s.u = std::move(u_next);
        s.mu = std::move(mu_next);
        s.step += 1;
        s.time = static_cast<double>(s.step) * p_.dt;
    }

    SpectralField maybe_dealias(SpectralField F) const {
        return p_.dealias ? dealias_two_thirds(std::move(F)) : std::move(F);
    }

    void advance_cch(SimState& s) const {
        Field b2 = explicit_potential(s.u);
        SpectralField B1 = forward(s.u);
        SpectralField B2 = maybe_dealias(forward(b2));
        solve_and_update(s, B1, B2, b2);
    }

    void advance_mch(SimState& s, const Field& mobility) const {
        const double mob_max = field_max(mobility);
        if (mob_max > p_.m * (1.0 + 1e-12))
            throw ConfigError("degenerate-mobility step: m = " + std::to_string(p_.m) +
                              " is below max M(u) = " + std::to_string(mob_max) +
                              " on the grid");
        std::vector<Field> grad_mu = gradient(s.mu);
        for (int a = 0; a < g_.dim(); ++a) {
            Field& c = grad_mu[static_cast<std::size_t>(a)];
            for (std::size_t i = 0; i < g_.total(); ++i) c[i] *= mobility[i] - p_.m;
        }
        Field div_flux = divergence(grad_mu);
        Field b1(g_);
        for (std::size_t i = 0; i < g_.total(); ++i)
            b1[i] = s.u[i] + p_.dt * div_flux[i];
        Field b2 = explicit_potential(s.u);
        SpectralField B1 = maybe_dealias(forward(b1));
        SpectralField B2 = maybe_dealias(forward(b2));
        solve_and_update(s, B1, B2, b2);
    }

    void advance_nmn(SimState& s) const {
        Field rhs = nmn_rhs(s.u, s.mu, p_);
        Field lap_mu = laplacian(s.mu);
        Field b1(g_);
        for (std::size_t i = 0; i < g_.total(); ++i) {
            const double h = rhs[i] - p_.m * lap_mu[i] + p_.beta * s.mu[i];
            b1[i] = s.u[i] + p_.dt * h;
        }
        Field b2 = explicit_potential(s.u);
        SpectralField B1 = maybe_dealias(forward(b1));
        SpectralField B2 = maybe_dealias(forward(b2));
        solve_and_update(s, B1, B2, b2);
    }

    ModelParams p_;
    GridSpec g_;
    SymbolOperator linv_;
    RealVec lap_;
};

inline Stepper make_stepper(const ModelParams& p, const GridSpec& g) { return Stepper(p, g); }

/// Single classical Cahn-Hilliard step (convenience wrapper over Stepper).
inline SimState step_cch(const SimState& s, ModelParams p) {
    p.model = Model::CCH;
    return Stepper(p, s.u.grid()).step(s);
}

/// Single degenerate-mobility step.
inline SimState step_mch(const SimState& s, ModelParams p) {
    p.model = Model::MCH;
    return Stepper(p, s.u.grid()).step(s);
}

/// Single two-mobility step.
inline SimState step_nmn(const SimState& s, ModelParams p) {
    p.model = Model::NMNCH;
    return Stepper(p, s.u.grid()).step(s);
}

} // namespace chsim
