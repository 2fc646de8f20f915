#include "chromonet/tc2solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <array>
#include <limits>
#include <map>
#include <functional>
#include <vector>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>
#include <boost/numeric/odeint.hpp>

#include "chromonet/errors.hpp"
#include "chromonet/liouville.hpp"
#include "chromonet/units.hpp"

namespace chromonet {

using cd = std::complex<double>;
namespace odeint = boost::numeric::odeint;

namespace {

constexpr double kMaxResolventCondition = 1e12;
constexpr cd kI{0.0, 1.0};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Exciton eigenbasis of H in rad/ps: H = U diag(w) U^T with U real orthogonal.
struct Eigenbasis {
    Eigen::VectorXd w;
    Eigen::MatrixXd u;
};

Eigenbasis diagonalize_angular(const ExcitonHamiltonian& h) {
    check_symmetric(h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.matrix * units::kWavenumberToRadPerPs);
    if (solver.info() != Eigen::Success) throw SolverError("exciton diagonalization failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

cd correlation_amplitude_angular(const BathSpec& bath) {
    return correlation_amplitude(bath) * units::kWavenumberToRadPerPs * units::kWavenumberToRadPerPs;
}

void finalize_eta(TransportResult& r) {
    r.positivity_violation = r.eta_raw < -kPositivitySlack || r.eta_raw > 1.0 + kPositivitySlack;
    r.eta = std::clamp(r.eta_raw, 0.0, 1.0);
}

}  // namespace

void SinkSpec::validate(std::size_t n_sites) const {
    if (!(r_loss >= 0.0)) throw ConfigError("r_loss must be >= 0");
    if (!(r_trap > 0.0)) throw ConfigError("r_trap must be > 0");
    if (trap_index >= n_sites) throw ConfigError("trap index out of range");
}

Eigen::Index LiouvilleOperator::sites() const {
    const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(matrix.rows()))));
    return n;
}

Eigen::MatrixXcd LiouvilleOperator::apply(const Eigen::MatrixXcd& rho) const {
    if (rho.size() != matrix.cols()) throw ConfigError("density matrix does not match operator dimension");
    return liouville::unvec(matrix * liouville::vec(rho), rho.rows());
}

std::string_view to_string(SolverMethod m) noexcept {
    return m == SolverMethod::laplace ? "laplace" : "time";
}

SolverMethod parse_solver_method(std::string_view name) {
    if (name == "laplace") return SolverMethod::laplace;
    if (name == "time" || name == "time-domain") return SolverMethod::time_domain;
    throw ConfigError("unknown solver '" + std::string(name) + "' (expected laplace|time)");
}

LiouvilleOperator coherent_generator(const ExcitonHamiltonian& h) {
    check_symmetric(h);
    const Eigen::MatrixXcd hw = (h.matrix * units::kWavenumberToRadPerPs).cast<cd>();
    return {liouville::commutator_generator(hw)};
}

LiouvilleOperator build_generator(const ExcitonHamiltonian& h, const SinkSpec& sinks) {
    check_symmetric(h);
    const auto n = static_cast<Eigen::Index>(h.size());
    sinks.validate(h.size());

    Eigen::VectorXcd rates = Eigen::VectorXcd::Constant(n, sinks.r_loss);
    rates(static_cast<Eigen::Index>(sinks.trap_index)) += sinks.r_trap;
    const Eigen::MatrixXcd r = rates.asDiagonal();

    LiouvilleOperator op = coherent_generator(h);
    op.matrix += liouville::anticommutator_decay(r);
    return op;
}

LiouvilleOperator memory_kernel(const ExcitonHamiltonian& h, const BathSpec& bath, double s) {
    bath.validate();
    if (!(s >= 0.0)) throw ConfigError("memory kernel needs real s >= 0");
    const auto n = static_cast<Eigen::Index>(h.size());
    const Eigenbasis eb = diagonalize_angular(h);
    const cd c = correlation_amplitude_angular(bath);
    const double shift = s + units::to_angular(bath.gamma);

    LiouvilleOperator k{Eigen::MatrixXcd::Zero(n * n, n * n)};
    if (c == cd(0.0)) return k;

    // ((s+gamma) - L_S) is diagonal in the exciton basis with entries
    // (s+gamma) + i(w_a - w_b); the basis change is unitary, so its 2-norm
    // condition number is max|entry| / (s+gamma).
    Eigen::MatrixXcd resolvent(n, n);
    double largest = 0.0;
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
            const cd d(shift, eb.w(a) - eb.w(b));
            largest = std::max(largest, std::abs(d));
            resolvent(a, b) = 1.0 / d;
        }
    }
    if (largest / shift > kMaxResolventCondition) {
        std::ostringstream msg;
        msg << "memory kernel resolvent is ill-conditioned (condition " << largest / shift << ")";
        throw SolverError(msg.str());
    }

    // Only S_k acts on the left of E_kl and only S_l on the right, so the
    // kernel column for E_kl is c [S_k, R(E_kl)] - c* [S_l, R(E_kl)]. The second
    // term is (Phi_l rho)^dagger rewritten with R(X)^dagger = R(X^dagger).
    const Eigen::MatrixXcd u = eb.u.cast<cd>();
    const Eigen::MatrixXcd ut = u.transpose();
    Eigen::MatrixXcd y(n, n), col(n, n);
    for (Eigen::Index l = 0; l < n; ++l) {
        for (Eigen::Index kk = 0; kk < n; ++kk) {
            const Eigen::MatrixXcd projected =
                (ut.col(kk) * ut.col(l).transpose()).cwiseProduct(resolvent);
            y.noalias() = u * projected * ut;

            col.setZero();
            col.row(kk) += c * y.row(kk);
            col.col(kk) -= c * y.col(kk);
            col.row(l) -= std::conj(c) * y.row(l);
            col.col(l) += std::conj(c) * y.col(l);
            k.matrix.col(kk + l * n) = liouville::vec(col);
        }
    }
    return k;
}

TransportResult ete_laplace(const ExcitonHamiltonian& h, const BathSpec& bath, const SinkSpec& sinks,
                            std::size_t initial_index) {
    const auto start = std::chrono::steady_clock::now();
    const auto n = static_cast<Eigen::Index>(h.size());
    sinks.validate(h.size());
    if (initial_index >= h.size()) throw ConfigError("initial index out of range");
    if (!(sinks.r_loss > 0.0)) throw ConfigError("laplace ETE needs r_loss > 0 so int rho dt converges");

    Eigen::MatrixXcd a = build_generator(h, sinks).matrix;
    a -= memory_kernel(h, bath, 0.0).matrix;

    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n * n);
    rhs(static_cast<Eigen::Index>(initial_index * (h.size() + 1))) = -1.0;

    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-15)) {
        std::ostringstream msg;
        msg << "TC2 Laplace system is singular (reciprocal condition estimate " << rcond << ")";
        throw SolverError(msg.str());
    }
    const Eigen::VectorXcd x = lu.solve(rhs);
    const Eigen::MatrixXcd sigma = liouville::unvec(x, n);

    TransportResult r;
    r.method = SolverMethod::laplace;
    const auto t = static_cast<Eigen::Index>(sinks.trap_index);
    r.eta_raw = 2.0 * sinks.r_trap * sigma(t, t).real();
    r.eta_loss = 2.0 * sinks.r_loss * sigma.trace().real();
    r.residual = (a * x - rhs).norm();
    if (!std::isfinite(r.eta_raw) || !std::isfinite(r.eta_loss))
        throw SolverError("TC2 Laplace solve produced a non-finite result");
    finalize_eta(r);
    r.wall_time = seconds_since(start);
    return r;
}

namespace {

// The augmented system is linear with constant coefficients, x' = A x, in the
// exciton eigenbasis. Only chi_j = sigma_j - sigma_j^dagger reaches rho, and
//   chi_j' = c S_j rho - c* rho S_j + (L_S - gamma) chi_j
// for Hermitian rho, so the state [rho, chi_0 .. chi_{N-1}, eta, eta_loss] evolves
// under a complex-linear A. One Radau IIA step maps x to R(hA) x with
// R(z) = P(z)/Q(z) the (2,3) Pade approximant of e^z, evaluated as
//   R(hA) x = sum_i beta_i (hA - z_i)^-1 x
// over the roots z_i of Q. Each shifted solve eliminates the chi blocks, which
// are diagonal, and leaves an N^2 x N^2 system for rho.
class AugmentedOperator {
public:
    AugmentedOperator(const Eigenbasis& eb, cd c, double gamma, const SinkSpec& sinks)
        : n_(eb.w.size()), nn_(n_ * n_), c_(c), gamma_(gamma), r_loss_(sinks.r_loss),
          r_trap_(sinks.r_trap) {
        coherent_.resize(n_, n_);
        for (Eigen::Index a = 0; a < n_; ++a)
            for (Eigen::Index b = 0; b < n_; ++b) coherent_(a, b) = -kI * (eb.w(a) - eb.w(b));
        trap_ = eb.u.row(static_cast<Eigen::Index>(sinks.trap_index)).transpose();
        sites_ = eb.u.transpose();  // column j = <j| components in the eigenbasis
    }

    Eigen::Index sites() const { return n_; }
    Eigen::Index size() const { return (1 + n_) * nn_ + 2; }
    Eigen::Index eta_index() const { return (1 + n_) * nn_; }

    struct Shifted {
        double h{0.0};
        cd z;
        Eigen::MatrixXcd inv_d;  // 1 / (h (L_S - gamma) - z), entrywise
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
        bool singular{false};
    };

    Shifted factor(double h, cd z) const {
        Shifted f;
        f.h = h;
        f.z = z;
        f.inv_d = (h * (coherent_.array() - gamma_) - z).inverse().matrix();

        Eigen::MatrixXcd t(nn_, nn_);
        Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(n_, n_);
        for (Eigen::Index l = 0; l < n_; ++l) {
            for (Eigen::Index k = 0; k < n_; ++k) {
                e(k, l) = 1.0;
                Eigen::MatrixXcd col = h * local(e) - z * e;
                for (Eigen::Index j = 0; j < n_; ++j)
                    col += (h * h) * commutator(j, bath_drive(j, e).cwiseProduct(f.inv_d));
                t.col(k + l * n_) = Eigen::Map<const Eigen::VectorXcd>(col.data(), nn_);
                e(k, l) = 0.0;
            }
        }
        f.lu.compute(t);
        f.singular = !(f.lu.rcond() > 1e-14);
        return f;
    }

    // (hA - z)^-1 x
    Eigen::VectorXcd solve(const Shifted& f, const Eigen::VectorXcd& x) const {
        const double h = f.h;
        Eigen::MatrixXcd rhs = Eigen::Map<const Eigen::MatrixXcd>(x.data(), n_, n_);
        for (Eigen::Index j = 0; j < n_; ++j)
            rhs += h * commutator(j, block(x, j).cwiseProduct(f.inv_d));

        Eigen::VectorXcd y(size());
        y.head(nn_) = f.lu.solve(Eigen::Map<const Eigen::VectorXcd>(rhs.data(), nn_));
        const Eigen::Map<const Eigen::MatrixXcd> rho(y.data(), n_, n_);
        for (Eigen::Index j = 0; j < n_; ++j) {
            Eigen::Map<Eigen::MatrixXcd> chi(y.data() + (1 + j) * nn_, n_, n_);
            chi = (block(x, j) - h * bath_drive(j, rho)).cwiseProduct(f.inv_d);
        }
        const cd trap_pop = trap_.dot((rho * trap_).eval());
        y(eta_index()) = (h * 2.0 * r_trap_ * trap_pop - x(eta_index())) / f.z;
        y(eta_index() + 1) = (h * 2.0 * r_loss_ * rho.trace() - x(eta_index() + 1)) / f.z;
        return y;
    }

private:
    Eigen::Map<const Eigen::MatrixXcd> block(const Eigen::VectorXcd& x, Eigen::Index j) const {
        return Eigen::Map<const Eigen::MatrixXcd>(x.data() + (1 + j) * nn_, n_, n_);
    }

    // (L_S + L_e-h) rho
    template <class M>
    Eigen::MatrixXcd local(const M& rho) const {
        Eigen::MatrixXcd out = coherent_.cwiseProduct(rho) - (2.0 * r_loss_) * rho;
        out -= r_trap_ * (trap_ * (trap_.transpose() * rho) + (rho * trap_) * trap_.transpose());
        return out;
    }

    // [S_j, y]
    template <class M>
    Eigen::MatrixXcd commutator(Eigen::Index j, const M& y) const {
        const auto s = sites_.col(j);
        return s * (s.transpose() * y) - (y * s) * s.transpose();
    }

    // c S_j rho - c* rho S_j
    template <class M>
    Eigen::MatrixXcd bath_drive(Eigen::Index j, const M& rho) const {
        const auto s = sites_.col(j);
        return c_ * (s * (s.transpose() * rho)) - std::conj(c_) * ((rho * s) * s.transpose());
    }

    Eigen::Index n_;
    Eigen::Index nn_;
    cd c_;
    double gamma_;
    double r_loss_;
    double r_trap_;
    Eigen::MatrixXcd coherent_;
    Eigen::VectorXd trap_;
    Eigen::MatrixXd sites_;
};

struct RadauWeights {
    std::array<cd, 3> roots;
    std::array<cd, 3> betas;
};

const RadauWeights& radau_weights() {
    static const RadauWeights weights = [] {
        // Q(z) = 1 - 3z/5 + 3z^2/20 - z^3/60, so -60 Q(z) = z^3 - 9z^2 + 36z - 60.
        Eigen::Matrix3d companion;
        companion << 9.0, -36.0, 60.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0;
        const Eigen::EigenSolver<Eigen::Matrix3d> es(companion);
        RadauWeights out;
        for (int i = 0; i < 3; ++i) {
            const cd z = es.eigenvalues()(i);
            const cd p = 1.0 + 0.4 * z + z * z / 20.0;
            const cd dq = -0.6 + 0.3 * z - z * z / 20.0;
            out.roots[i] = z;
            out.betas[i] = p / dq;
        }
        return out;
    }();
    return weights;
}

struct RadauStep {
    std::array<AugmentedOperator::Shifted, 3> parts;
    bool singular{false};
};

RadauStep make_step(const AugmentedOperator& op, double h) {
    RadauStep step;
    const auto& w = radau_weights();
    for (int i = 0; i < 3; ++i) {
        step.parts[i] = op.factor(h, w.roots[i]);
        step.singular = step.singular || step.parts[i].singular;
    }
    return step;
}

Eigen::VectorXcd apply_step(const AugmentedOperator& op, const RadauStep& step, const Eigen::VectorXcd& x) {
    const auto& w = radau_weights();
    Eigen::VectorXcd y = w.betas[0] * op.solve(step.parts[0], x);
    for (int i = 1; i < 3; ++i) y += w.betas[i] * op.solve(step.parts[i], x);
    return y;
}

// Without a bath the auxiliary blocks vanish and rho' = (L_S + L_e-h) rho is
// oscillatory rather than stiff. Integrated in the frame rotating with L_S,
// y = e^{-L_S t} rho, only the sink terms remain on the right-hand side.
class RotatingSinkSystem {
public:
    using State = std::vector<double>;

    RotatingSinkSystem(const Eigenbasis& eb, const SinkSpec& sinks)
        : n_(eb.w.size()), w_(eb.w), r_loss_(sinks.r_loss), r_trap_(sinks.r_trap) {
        trap_ = eb.u.row(static_cast<Eigen::Index>(sinks.trap_index)).transpose().cast<cd>();
        phase_.resize(n_, n_);
        rho_.resize(n_, n_);
    }

    std::size_t doubles() const { return static_cast<std::size_t>(2 * (n_ * n_ + 2)); }

    // phase(a, b) = exp(-i (w_a - w_b) t)
    const Eigen::MatrixXcd& phase(double t) {
        if (t != phase_time_) {
            Eigen::VectorXcd p(n_);
            for (Eigen::Index a = 0; a < n_; ++a) p(a) = std::polar(1.0, -w_(a) * t);
            phase_.noalias() = p * p.adjoint();
            phase_time_ = t;
        }
        return phase_;
    }

    Eigen::MatrixXcd lab_rho(const State& ys, double t) {
        return phase(t).cwiseProduct(Eigen::Map<const Eigen::MatrixXcd>(reinterpret_cast<const cd*>(ys.data()), n_, n_));
    }

    void operator()(const State& ys, State& dys, double t) {
        const cd* y = reinterpret_cast<const cd*>(ys.data());
        cd* dy = reinterpret_cast<cd*>(dys.data());
        const Eigen::MatrixXcd& ph = phase(t);
        rho_ = ph.cwiseProduct(Eigen::Map<const Eigen::MatrixXcd>(y, n_, n_));
        const Eigen::VectorXcd rt = rho_ * trap_;
        const Eigen::RowVectorXcd tr = trap_.transpose() * rho_;
        Eigen::Map<Eigen::MatrixXcd>(dy, n_, n_) =
            ph.conjugate().cwiseProduct(-(2.0 * r_loss_) * rho_ - r_trap_ * (trap_ * tr + rt * trap_.transpose()));
        dy[n_ * n_] = 2.0 * r_trap_ * (tr * trap_).value().real();
        dy[n_ * n_ + 1] = 2.0 * r_loss_ * rho_.trace().real();
    }

private:
    Eigen::Index n_;
    Eigen::VectorXd w_;
    double r_loss_;
    double r_trap_;
    Eigen::VectorXcd trap_;
    Eigen::MatrixXcd phase_;
    double phase_time_ = std::numeric_limits<double>::quiet_NaN();
    Eigen::MatrixXcd rho_;
};

}  // namespace

namespace {

struct Setup {
    Eigen::Index n;
    Eigenbasis eb;
    std::vector<double> outputs;
};

class Recorder {
public:
    Recorder(const Eigenbasis& eb, Trajectory& traj) : u_(eb.u.cast<cd>()), traj_(traj) {}
    void operator()(double t, const Eigen::MatrixXcd& rho_e) {
        Eigen::MatrixXcd rho = u_ * rho_e * u_.transpose();
        traj_.times.push_back(t);
        traj_.trace.push_back(rho.trace().real());
        traj_.rho.push_back(std::move(rho));
    }

private:
    Eigen::MatrixXcd u_;
    Trajectory& traj_;
};

[[noreturn]] void throw_divergence(double t, double tr) {
    std::ostringstream msg;
    msg << "time-domain TC2 state diverged at t = " << t << " ps (trace " << tr << ")";
    throw SolverError(msg.str());
}

[[noreturn]] void throw_underflow(double t) {
    std::ostringstream msg;
    msg << "time-domain TC2 step size underflow at t = " << t << " ps";
    throw SolverError(msg.str());
}

void propagate_stiff(const Setup& setup, const BathSpec& bath, const SinkSpec& sinks, std::size_t initial_index,
                     const TimeDomainOptions& options, Propagation& out) {
    const Eigen::Index n = setup.n;
    const Eigenbasis& eb = setup.eb;
    const std::vector<double>& outputs = setup.outputs;
    const AugmentedOperator op(eb, correlation_amplitude_angular(bath), units::to_angular(bath.gamma), sinks);

    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(op.size());
    {
        const Eigen::VectorXd init = eb.u.row(static_cast<Eigen::Index>(initial_index)).transpose();
        Eigen::Map<Eigen::MatrixXcd>(x.data(), n, n) = (init * init.transpose()).cast<cd>();
    }
    Recorder recorder(eb, out.trajectory);
    auto record = [&](double t, const Eigen::VectorXcd& v) {
        recorder(t, Eigen::Map<const Eigen::MatrixXcd>(v.data(), n, n));
    };
    auto trace_of = [&](const Eigen::VectorXcd& v) {
        return Eigen::Map<const Eigen::MatrixXcd>(v.data(), n, n).trace().real();
    };

    // Step sizes live on the ladder initial_step * 2^k so factorizations are
    // reused; a step that would cross an output time is shortened to land on it.
    std::map<int, RadauStep> ladder;
    auto rung = [&](int k) -> const RadauStep& {
        auto it = ladder.find(k);
        if (it == ladder.end()) it = ladder.emplace(k, make_step(op, std::ldexp(options.initial_step, k))).first;
        return it->second;
    };

    // Error of the two half steps, estimated against one full step (order 5).
    auto error_norm = [&](const Eigen::VectorXcd& x0, const Eigen::VectorXcd& full, const Eigen::VectorXcd& half) {
        double err = 0.0;
        for (Eigen::Index i = 0; i < x0.size(); ++i) {
            const double scale = options.abs_tol + options.rel_tol * std::max(std::abs(x0(i)), std::abs(half(i)));
            err = std::max(err, std::abs(full(i) - half(i)) / (31.0 * scale));
        }
        return std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
    };

    std::size_t next_output = 0;
    double t = 0.0;
    int k = 0;
    auto flush_outputs = [&] {
        while (next_output < outputs.size() && outputs[next_output] <= t) {
            record(outputs[next_output], x);
            ++next_output;
        }
    };
    flush_outputs();

    for (;;) {
        const double target = next_output < outputs.size() ? outputs[next_output] : options.t_max;
        const double remaining = target - t;
        double hk = std::ldexp(options.initial_step, k);

        Eigen::VectorXcd full, half;
        double step_h = hk;
        bool landed = false;
        if (hk >= remaining * (1.0 - 1e-12)) {
            step_h = remaining;
            landed = true;
            const RadauStep whole = make_step(op, step_h);
            const RadauStep halves = make_step(op, 0.5 * step_h);
            if (whole.singular || halves.singular) {
                full = Eigen::VectorXcd::Constant(op.size(), cd(std::numeric_limits<double>::infinity()));
                half = x;
            } else {
                full = apply_step(op, whole, x);
                half = apply_step(op, halves, apply_step(op, halves, x));
            }
        } else {
            const RadauStep& whole = rung(k);
            const RadauStep& halves = rung(k - 1);
            if (whole.singular || halves.singular) {
                full = Eigen::VectorXcd::Constant(op.size(), cd(std::numeric_limits<double>::infinity()));
                half = x;
            } else {
                full = apply_step(op, whole, x);
                half = apply_step(op, halves, apply_step(op, halves, x));
            }
        }

        const double err = error_norm(x, full, half);
        if (!(err <= 1.0)) {
            const int drop = std::isfinite(err) ? std::max(1, static_cast<int>(std::ceil(std::log2(err) / 6.0))) : 1;
            if (landed) k = std::min(k, static_cast<int>(std::floor(std::log2(step_h / options.initial_step))));
            k -= drop;
            if (std::ldexp(options.initial_step, k) < options.min_step) throw_underflow(t);
            continue;
        }

        x = std::move(half);
        t = landed ? target : t + step_h;
        ++out.steps;
        if (!landed && err < 1.0 / 128.0) ++k;
        flush_outputs();

        const double tr = trace_of(x);
        if (!std::isfinite(tr) || std::abs(tr) > options.divergence_limit) throw_divergence(t, tr);
        if (t >= options.t_max || tr < options.trace_floor) break;
    }

    out.t_final = t;
    out.transport.eta_raw = x(op.eta_index()).real();
    out.transport.eta_loss = x(op.eta_index() + 1).real();
    out.transport.residual = trace_of(x);
}

void propagate_rotating(const Setup& setup, const SinkSpec& sinks, std::size_t initial_index,
                        const TimeDomainOptions& options, Propagation& out) {
    using State = RotatingSinkSystem::State;
    const Eigen::Index n = setup.n;
    const Eigenbasis& eb = setup.eb;
    const std::vector<double>& outputs = setup.outputs;
    RotatingSinkSystem system(eb, sinks);

    State x(system.doubles(), 0.0);
    {
        const Eigen::VectorXd init = eb.u.row(static_cast<Eigen::Index>(initial_index)).transpose();
        Eigen::Map<Eigen::MatrixXcd>(reinterpret_cast<cd*>(x.data()), n, n) = (init * init.transpose()).cast<cd>();
    }
    Recorder recorder(eb, out.trajectory);
    auto trace_of = [&](const State& s) {
        return Eigen::Map<const Eigen::MatrixXcd>(reinterpret_cast<const cd*>(s.data()), n, n).trace().real();
    };

    auto stepper = odeint::make_dense_output(options.abs_tol, options.rel_tol, odeint::runge_kutta_dopri5<State>());
    stepper.initialize(x, 0.0, options.initial_step);

    std::size_t next_output = 0;
    while (next_output < outputs.size() && outputs[next_output] <= 0.0)
        recorder(0.0, system.lab_rho(x, 0.0)), ++next_output;

    State interp(x.size());
    State final_state;
    double t_end = 0.0;
    for (;;) {
        const auto [t0, t1] = stepper.do_step(std::ref(system));
        ++out.steps;
        const double t_stop = std::min(t1, options.t_max);
        while (next_output < outputs.size() && outputs[next_output] <= t_stop) {
            stepper.calc_state(outputs[next_output], interp);
            recorder(outputs[next_output], system.lab_rho(interp, outputs[next_output]));
            ++next_output;
        }

        const State& cur = stepper.current_state();
        const double tr = trace_of(cur);
        if (!std::isfinite(tr) || std::abs(tr) > options.divergence_limit) throw_divergence(t1, tr);
        if (t1 >= options.t_max) {
            stepper.calc_state(options.t_max, interp);
            final_state = interp;
            t_end = options.t_max;
            break;
        }
        if (tr < options.trace_floor) {
            final_state = cur;
            t_end = t1;
            break;
        }
        if (t1 - t0 < options.min_step) throw_underflow(t1);
    }

    const cd* xf = reinterpret_cast<const cd*>(final_state.data());
    out.t_final = t_end;
    out.transport.eta_raw = xf[n * n].real();
    out.transport.eta_loss = xf[n * n + 1].real();
    out.transport.residual = trace_of(final_state);
}

}  // namespace

Propagation propagate_time_domain(const ExcitonHamiltonian& h, const BathSpec& bath,
                                  const SinkSpec& sinks, std::size_t initial_index,
                                  const TimeDomainOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    bath.validate();
    sinks.validate(h.size());
    if (initial_index >= h.size()) throw ConfigError("initial index out of range");
    if (!(options.t_max > 0.0)) throw ConfigError("t_max must be positive");
    if (!(options.initial_step > 0.0)) throw ConfigError("initial_step must be positive");
    if (!(options.rel_tol > 0.0) || !(options.abs_tol >= 0.0)) throw ConfigError("invalid tolerances");

    Setup setup{static_cast<Eigen::Index>(h.size()), diagonalize_angular(h), options.output_times};
    if (setup.outputs.empty()) {
        constexpr int kDefaultOutputs = 50;
        for (int i = 0; i < kDefaultOutputs; ++i)
            setup.outputs.push_back(options.t_max * i / (kDefaultOutputs - 1));
    }
    std::sort(setup.outputs.begin(), setup.outputs.end());
    setup.outputs.erase(std::remove_if(setup.outputs.begin(), setup.outputs.end(),
                                       [&](double t) { return t < 0.0 || t > options.t_max; }),
                        setup.outputs.end());

    Propagation out;
    if (correlation_amplitude_angular(bath) == cd(0.0))
        propagate_rotating(setup, sinks, initial_index, options, out);
    else
        propagate_stiff(setup, bath, sinks, initial_index, options, out);

    out.transport.method = SolverMethod::time_domain;
    finalize_eta(out.transport);
    out.transport.wall_time = seconds_since(start);
    return out;
}

}  // namespace chromonet
