#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <adjts/algebra.hpp>
#include <adjts/errors.hpp>
#include <adjts/problem.hpp>

namespace adjts
{

enum class MethodKind { theta, rk4 };

struct Method {
    MethodKind kind = MethodKind::theta;
    double theta = 1.0;

    static Method theta_method(double theta);
    static Method backward_euler() { return theta_method(1.0); }
    static Method crank_nicolson() { return theta_method(0.5); }
    static Method rk4() { return Method{MethodKind::rk4, 0.0}; }

    // Accepts "theta1", "theta0.5", "theta<x>", "be", "cn", "rk4".
    static Method parse(const std::string &name);
    [[nodiscard]] std::string name() const;

    // Number of stage vectors a step record carries.
    [[nodiscard]] std::size_t stage_count() const { return kind == MethodKind::rk4 ? 4 : 1; }
    [[nodiscard]] bool is_implicit() const { return kind == MethodKind::theta && theta > 0.0; }
};

// Classic RK4 tableau.
struct RK4Tableau {
    static constexpr int stages = 4;
    static constexpr double a[4][4] = {{0, 0, 0, 0}, {0.5, 0, 0, 0}, {0, 0.5, 0, 0}, {0, 0, 1, 0}};
    static constexpr double b[4] = {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0};
    static constexpr double c[4] = {0.0, 0.5, 0.5, 1.0};
};

struct StepperConfig {
    Method method;
    double t0 = 0.0;
    double tf = 1.0;
    std::size_t num_steps = 1;
    NewtonOptions newton;
    LinearOptions linear;

    [[nodiscard]] double step_size() const { return (tf - t0) / static_cast<double>(num_steps); }
    // t_n computed from n directly so replays never accumulate drift.
    [[nodiscard]] double time(std::size_t n) const;
    void validate() const;
};

// Everything a reverse step needs apart from re-running the forward step.
// Theta: stages = {u_n}. RK4: stages = {U_1, ..., U_4} with U_1 = u_n.
// Tangent fields are filled only when a directional TLM rides along.
struct StepRecord {
    std::size_t step = 0;
    double t_start = 0.0;
    double t_end = 0.0;
    double h = 0.0;
    std::vector<Vector> stages;
    Vector u_end;
    double cost_increment = 0.0;

    std::vector<Vector> tangent_stages;
    Vector tangent_end;
    double tangent_cost_increment = 0.0;

    NewtonStats newton;

    [[nodiscard]] const Vector &u_start() const { return stages.front(); }
    [[nodiscard]] bool has_tangent() const { return tangent_end.size() > 0 || !tangent_stages.empty(); }
    [[nodiscard]] const Vector &w_start() const { return tangent_stages.front(); }
};

// Time-n evaluation point for step n: both endpoints of step n carry index n,
// so step-indexed parameterizations stay constant across a step.
[[nodiscard]] inline TimePoint step_time(double t, std::size_t step) { return TimePoint{t, step}; }

// One-step forward map for a fixed problem, objective, and parameter vector.
class Stepper
{
public:
    Stepper(const DAEProblem &problem, const Objective &objective, StepperConfig config, Vector p);

    [[nodiscard]] const DAEProblem &problem() const { return *m_problem; }
    [[nodiscard]] const Objective &objective() const { return *m_objective; }
    [[nodiscard]] const StepperConfig &config() const { return m_config; }
    [[nodiscard]] const Vector &param() const { return m_param; }
    [[nodiscard]] std::size_t num_steps() const { return m_config.num_steps; }

    // Advance u_n -> u_{n+1}; throws StepFailure carrying n on failure.
    [[nodiscard]] StepRecord step(std::size_t n, const Vector &u_n) const;

    // Mass-matrix factorization (theta = 0 with a non-identity mass).
    [[nodiscard]] const Factorization &mass_factorization() const;

private:
    const DAEProblem *m_problem;
    const Objective *m_objective;
    StepperConfig m_config;
    Vector m_param;
    mutable std::shared_ptr<Factorization> m_mass_lu;
};

[[nodiscard]] StepRecord theta_step(const Stepper &stepper, std::size_t n, const Vector &u_n);
[[nodiscard]] StepRecord rk4_step(const Stepper &stepper, std::size_t n, const Vector &u_n);

// Read access to a forward trajectory by reverse sweeps. Providers may replay
// steps behind the scenes, so requests must arrive in decreasing step order.
class TrajectoryAccess
{
public:
    virtual ~TrajectoryAccess() = default;
    [[nodiscard]] virtual std::size_t num_steps() const = 0;
    [[nodiscard]] virtual const Vector &final_state() const = 0;
    // w_N; only for providers that propagate a tangent.
    [[nodiscard]] virtual const Vector &final_tangent() const = 0;
    [[nodiscard]] virtual const StepRecord &step_record(std::size_t n) = 0;
};

// Fully stored trajectory.
class Trajectory final : public TrajectoryAccess
{
public:
    std::vector<double> times;
    std::vector<Vector> states;
    std::vector<StepRecord> records; // empty when records were not kept
    std::vector<Vector> tangents;    // w_0 .. w_N after a tangent pass
    double integral = 0.0;           // q_N
    double tangent_integral = 0.0;   // accumulated r_u w + r_p v2 quadrature

    [[nodiscard]] std::size_t num_steps() const override { return states.empty() ? 0 : states.size() - 1; }
    [[nodiscard]] const Vector &final_state() const override { return states.back(); }
    [[nodiscard]] const Vector &final_tangent() const override;
    [[nodiscard]] const StepRecord &step_record(std::size_t n) override;
    [[nodiscard]] bool has_records() const { return !records.empty(); }

    // CSV: step,time,u0,...; binary: "ADJTSTRJ", u64 rows, u64 dim, then (t, u) rows as f64 LE.
    void write_csv(std::ostream &os) const;
    void write_binary(std::ostream &os) const;
    static Trajectory read_binary(std::istream &is);
};

struct IntegrationResult {
    Trajectory trajectory;
    double terminal = 0.0; // psi(u_N)
    double integral = 0.0; // q_N
    double cost = 0.0;     // psi + q
};

// Raised when a forward step fails; carries the partial trajectory.
class IntegrationError : public StepFailure
{
public:
    IntegrationError(const std::string &what, std::size_t step, std::shared_ptr<const Trajectory> partial)
        : StepFailure(what, step), m_partial(std::move(partial))
    {
    }
    [[nodiscard]] const Trajectory &partial() const { return *m_partial; }

private:
    std::shared_ptr<const Trajectory> m_partial;
};

[[nodiscard]] IntegrationResult integrate(const DAEProblem &problem, const Objective &objective,
                                          const ParamMap &param_map, const StepperConfig &config, const Vector &p,
                                          bool keep_records = true);

// Total cost of a completed trajectory.
[[nodiscard]] double evaluate_cost(const Objective &objective, const Vector &u_final, const Vector &p,
                                   double integral);

} // namespace adjts
