#include <adjts/forward.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "binary_io.hpp"

namespace adjts
{

Method Method::theta_method(double theta)
{
    if (!(theta >= 0.0 && theta <= 1.0)) {
        throw ConfigurationError(fmt::format("theta must lie in [0, 1], got {}", theta));
    }
    return Method{MethodKind::theta, theta};
}

Method Method::parse(const std::string &name)
{
    if (name == "rk4") {
        return rk4();
    }
    if (name == "be") {
        return backward_euler();
    }
    if (name == "cn") {
        return crank_nicolson();
    }
    if (name.rfind("theta", 0) == 0 && name.size() > 5) {
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(name.substr(5), &used);
        } catch (const std::exception &) {
            used = 0;
        }
        if (used == name.size() - 5) {
            return theta_method(value);
        }
    }
    throw ConfigurationError("unknown integration method '" + name + "' (expected theta1, theta0.5, rk4)");
}

std::string Method::name() const
{
    if (kind == MethodKind::rk4) {
        return "rk4";
    }
    return fmt::format("theta{}", theta);
}

double StepperConfig::time(std::size_t n) const
{
    if (n == num_steps) {
        return tf;
    }
    return t0 + static_cast<double>(n) * step_size();
}

void StepperConfig::validate() const
{
    if (num_steps == 0) {
        throw ConfigurationError("number of steps must be positive");
    }
    if (!(tf > t0)) {
        throw ConfigurationError(fmt::format("final time {} must exceed initial time {}", tf, t0));
    }
    if (method.kind == MethodKind::theta && !(method.theta >= 0.0 && method.theta <= 1.0)) {
        throw ConfigurationError(fmt::format("theta must lie in [0, 1], got {}", method.theta));
    }
}

Stepper::Stepper(const DAEProblem &problem, const Objective &objective, StepperConfig config, Vector p)
    : m_problem(&problem), m_objective(&objective), m_config(std::move(config)), m_param(std::move(p))
{
    m_config.validate();
    if (!problem.rhs) {
        throw ConfigurationError("problem has no right-hand side", {"rhs"});
    }
    if (static_cast<std::size_t>(m_param.size()) != problem.dim_param) {
        throw ConfigurationError(
            fmt::format("parameter vector has length {}, problem expects {}", m_param.size(), problem.dim_param));
    }
    if (m_config.method.kind == MethodKind::rk4 && !problem.mass.is_identity()) {
        throw ConfigurationError("RK4 requires an identity mass matrix; use a theta method for DAEs");
    }
    m_config.newton.linear = m_config.linear;
}

const Factorization &Stepper::mass_factorization() const
{
    if (!m_mass_lu) {
        m_mass_lu = std::make_shared<Factorization>(m_problem->mass.matrix(), m_config.linear);
    }
    return *m_mass_lu;
}

StepRecord Stepper::step(std::size_t n, const Vector &u_n) const
{
    if (n >= m_config.num_steps) {
        throw ContractViolation(fmt::format("step {} outside [0, {})", n, m_config.num_steps));
    }
    return m_config.method.kind == MethodKind::rk4 ? rk4_step(*this, n, u_n) : theta_step(*this, n, u_n);
}

namespace
{

StepRecord make_record(const Stepper &s, std::size_t n)
{
    StepRecord rec;
    rec.step = n;
    rec.t_start = s.config().time(n);
    rec.t_end = s.config().time(n + 1);
    rec.h = s.config().step_size();
    return rec;
}

} // namespace

StepRecord theta_step(const Stepper &s, std::size_t n, const Vector &u_n)
{
    const auto &prob = s.problem();
    const auto &obj = s.objective();
    const auto &p = s.param();
    const double theta = s.config().method.theta;
    StepRecord rec = make_record(s, n);
    const double h = rec.h;
    const TimePoint tp0 = step_time(rec.t_start, n);
    const TimePoint tp1 = step_time(rec.t_end, n);
    rec.stages = {u_n};

    Vector f_n;
    if (theta < 1.0) {
        f_n = prob.eval_rhs(tp0, u_n, p);
    }

    if (theta == 0.0) {
        if (prob.mass.is_identity()) {
            rec.u_end = u_n + h * f_n;
        } else {
            try {
                rec.u_end = s.mass_factorization().solve(Vector(prob.mass.apply(u_n) + h * f_n));
            } catch (const SingularMatrixError &e) {
                throw StepFailure(fmt::format("step {}: explicit theta update needs a nonsingular mass: {}", n,
                                              e.what()),
                                  n);
            }
        }
    } else {
        const double a = 1.0 / (h * theta);
        const double c = (1.0 - theta) / theta;
        const Vector Mu = prob.mass.apply(u_n);
        auto residual = [&](const Vector &x) {
            Vector r = a * (prob.mass.apply(x) - Mu) - prob.eval_rhs(tp1, x, p);
            if (c != 0.0) {
                r -= c * f_n;
            }
            return r;
        };
        auto jacobian = [&](const Vector &x) {
            return ShiftedJacobian(a, prob.mass, prob.state_jacobian(tp1, x, p)).assemble();
        };
        try {
            auto result = newton_solve(residual, jacobian, u_n, s.config().newton);
            rec.u_end = std::move(result.solution);
            rec.newton = result.stats;
        } catch (const NonconvergenceError &e) {
            throw StepFailure(fmt::format("step {}: {}", n, e.what()), n);
        }
    }

    if (!all_finite(rec.u_end)) {
        throw StepFailure(fmt::format("step {}: non-finite state", n), n);
    }

    if (obj.integrand) {
        double dq = 0.0;
        if (theta < 1.0) {
            dq += (1.0 - theta) * obj.integrand(tp0, u_n, p);
        }
        if (theta > 0.0) {
            dq += theta * obj.integrand(tp1, rec.u_end, p);
        }
        rec.cost_increment = h * dq;
    }
    return rec;
}

StepRecord rk4_step(const Stepper &s, std::size_t n, const Vector &u_n)
{
    using T = RK4Tableau;
    const auto &prob = s.problem();
    const auto &obj = s.objective();
    const auto &p = s.param();
    StepRecord rec = make_record(s, n);
    const double h = rec.h;

    rec.stages.reserve(T::stages);
    std::array<Vector, T::stages> k;
    for (int i = 0; i < T::stages; ++i) {
        Vector U = u_n;
        for (int j = 0; j < i; ++j) {
            if (T::a[i][j] != 0.0) {
                U += (h * T::a[i][j]) * k[j];
            }
        }
        k[i] = prob.eval_rhs(step_time(rec.t_start + T::c[i] * h, n), U, p);
        rec.stages.push_back(std::move(U));
    }
    rec.u_end = u_n;
    for (int i = 0; i < T::stages; ++i) {
        rec.u_end += (h * T::b[i]) * k[i];
    }
    if (!all_finite(rec.u_end)) {
        throw StepFailure(fmt::format("step {}: non-finite state", n), n);
    }

    if (obj.integrand) {
        double dq = 0.0;
        for (int i = 0; i < T::stages; ++i) {
            dq += T::b[i] * obj.integrand(step_time(rec.t_start + T::c[i] * h, n), rec.stages[i], p);
        }
        rec.cost_increment = h * dq;
    }
    return rec;
}

const Vector &Trajectory::final_tangent() const
{
    if (tangents.size() != states.size()) {
        throw ContractViolation("trajectory carries no tangent; run the tangent pass first");
    }
    return tangents.back();
}

const StepRecord &Trajectory::step_record(std::size_t n)
{
    if (records.empty()) {
        throw ContractViolation("trajectory was integrated without step records");
    }
    if (n >= records.size()) {
        throw ContractViolation(fmt::format("step {} outside trajectory of {} steps", n, records.size()));
    }
    return records[n];
}

void Trajectory::write_csv(std::ostream &os) const
{
    const std::size_t dim = states.empty() ? 0 : static_cast<std::size_t>(states.front().size());
    os << "step,time";
    for (std::size_t i = 0; i < dim; ++i) {
        os << ",u" << i;
    }
    os << '\n';
    for (std::size_t n = 0; n < states.size(); ++n) {
        fmt::print(os, "{},{:.17g}", n, times[n]);
        for (Eigen::Index i = 0; i < states[n].size(); ++i) {
            fmt::print(os, ",{:.17g}", states[n][i]);
        }
        os << '\n';
    }
}

namespace
{

constexpr char trajectory_magic[8] = {'A', 'D', 'J', 'T', 'S', 'T', 'R', 'J'};

} // namespace

void Trajectory::write_binary(std::ostream &os) const
{
    os.write(trajectory_magic, 8);
    detail::put_u64(os, states.size());
    detail::put_u64(os, states.empty() ? 0 : static_cast<std::uint64_t>(states.front().size()));
    for (std::size_t n = 0; n < states.size(); ++n) {
        detail::put_f64(os, times[n]);
        detail::put_vector(os, states[n]);
    }
}

Trajectory Trajectory::read_binary(std::istream &is)
{
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, trajectory_magic, 8) != 0) {
        throw Error("not a trajectory file");
    }
    const auto rows = detail::get_u64(is, "trajectory file");
    const auto dim = static_cast<Eigen::Index>(detail::get_u64(is, "trajectory file"));
    Trajectory t;
    t.times.reserve(rows);
    t.states.reserve(rows);
    for (std::uint64_t n = 0; n < rows; ++n) {
        t.times.push_back(detail::get_f64(is, "trajectory file"));
        t.states.push_back(detail::get_vector(is, dim, "trajectory file"));
    }
    return t;
}

double evaluate_cost(const Objective &objective, const Vector &u_final, const Vector &p, double integral)
{
    return objective.eval_terminal(u_final, p) + integral;
}

IntegrationResult integrate(const DAEProblem &problem, const Objective &objective, const ParamMap &param_map,
                            const StepperConfig &config, const Vector &p, bool keep_records)
{
    const Stepper stepper(problem, objective, config, p);
    const std::size_t N = config.num_steps;

    IntegrationResult out;
    auto &traj = out.trajectory;
    traj.times.reserve(N + 1);
    traj.states.reserve(N + 1);
    traj.times.push_back(config.time(0));
    traj.states.push_back(param_map.initial_state(p));
    if (static_cast<std::size_t>(traj.states.front().size()) != problem.dim_state) {
        throw ConfigurationError(fmt::format("initial condition has length {}, problem expects {}",
                                             traj.states.front().size(), problem.dim_state));
    }
    if (keep_records) {
        traj.records.reserve(N);
    }

    for (std::size_t n = 0; n < N; ++n) {
        StepRecord rec;
        try {
            rec = stepper.step(n, traj.states.back());
        } catch (const StepFailure &e) {
            throw IntegrationError(e.what(), e.step(), std::make_shared<const Trajectory>(traj));
        }
        traj.integral += rec.cost_increment;
        traj.times.push_back(rec.t_end);
        traj.states.push_back(rec.u_end);
        if (keep_records) {
            traj.records.push_back(std::move(rec));
        }
    }

    out.integral = traj.integral;
    out.terminal = objective.eval_terminal(traj.final_state(), p);
    out.cost = out.terminal + out.integral;
    return out;
}

} // namespace adjts
