#pragma once

#include <adjts/problems/setup.hpp>

namespace adjts
{

// Pursuer (x, y) with piecewise-constant speed v_k and heading w_k on K equal
// control intervals, tracking a leader at (t, t):
//   x' = v cos w, y' = v sin w,  J = int ||u - u_L(t)||^2 dt.
// p = (v_0..v_{K-1}, w_0..w_{K-1}).
struct AircraftOptions {
    std::size_t intervals = 10;
    std::size_t num_steps = 100; // must be a multiple of intervals
    double tf = 2.0;
    Method method = Method::rk4();
    double v_init = 1.0;
    double heading_init = 0.78539816339744831; // pi/4
    double v_max = 2.0;
    Vector start = Vector();                   // default (1.5, 0)
    // Start on the leader with v = sqrt(2), heading pi/4: already optimal.
    bool on_leader = false;
};

[[nodiscard]] std::unique_ptr<ProblemSetup> make_aircraft(const AircraftOptions &opts = {});

// Control interval of a step.
[[nodiscard]] std::size_t aircraft_interval(std::size_t step, std::size_t num_steps, std::size_t intervals);

} // namespace adjts
