#include <adjts/checkpoint.hpp>

#include <algorithm>
#include <limits>
#include <numeric>

#include <fmt/format.h>

namespace adjts
{

std::string to_string(CheckpointMode mode)
{
    return mode == CheckpointMode::solution_only ? "sol" : "sol+stages";
}

CheckpointMode parse_checkpoint_mode(const std::string &name)
{
    if (name == "sol" || name == "solution-only" || name == "solution_only") {
        return CheckpointMode::solution_only;
    }
    if (name == "sol+stages" || name == "solution+stages" || name == "solution_and_stages") {
        return CheckpointMode::solution_and_stages;
    }
    throw ConfigurationError("unknown checkpoint mode '" + name + "' (expected sol or sol+stages)");
}

std::string Action::str() const
{
    switch (kind) {
    case ActionKind::store:
        return fmt::format("{}({})", stages ? "store+stages" : "store", from);
    case ActionKind::advance:
        return fmt::format("{}({}->{})", replay ? "replay" : "advance", from, to);
    case ActionKind::restore:
        return fmt::format("{}({})", pop ? "restore-pop" : "restore", from);
    case ActionKind::adjoin:
        return fmt::format("adjoin({})", from);
    case ActionKind::discard:
        return fmt::format("discard({})", from);
    }
    return "?";
}

namespace
{

using Table = std::vector<std::vector<std::size_t>>;

// Memoized minimal replay counts. For a stored checkpoint at the start of a
// segment of l steps with c free slots:
//   F: solution-only, reverse phase (nothing in working memory);
//   G: solution-only, forward phase (the last record is free to adjoin);
//   H, G2: the stages-mode counterparts, where a checkpoint at k also
//          carries the record of step k-1.
class Planner
{
public:
    Planner(std::size_t N, std::size_t C) : m_N(N), m_C(C)
    {
        F.assign(N + 1, std::vector<std::size_t>(C + 1, 0));
        G = F;
        H = F;
        G2 = F;
        for (std::size_t l = 1; l <= N; ++l) {
            for (std::size_t c = 0; c <= C; ++c) {
                F[l][c] = best_F(l, c).first;
                H[l][c] = best_H(l, c).first;
                G[l][c] = best_G(l, c).first;
                G2[l][c] = best_G2(l, c).first;
            }
        }
    }

    // (cost, j) with j == 0 meaning "no intermediate checkpoint".
    [[nodiscard]] std::pair<std::size_t, std::size_t> best_F(std::size_t l, std::size_t c) const
    {
        if (l <= 1) {
            return {l, 0};
        }
        std::pair<std::size_t, std::size_t> best{l + F[l - 1][c], 0};
        if (c >= 1) {
            for (std::size_t j = 1; j < l; ++j) {
                const std::size_t v = j + F[l - j][c - 1] + F[j][c];
                if (v < best.first) {
                    best = {v, j};
                }
            }
        }
        return best;
    }

    [[nodiscard]] std::pair<std::size_t, std::size_t> best_G(std::size_t l, std::size_t c) const
    {
        if (l <= 1) {
            return {0, 0};
        }
        std::pair<std::size_t, std::size_t> best{F[l - 1][c], 0};
        if (c >= 1) {
            for (std::size_t j = 1; j < l; ++j) {
                const std::size_t v = G[l - j][c - 1] + F[j][c];
                if (v < best.first) {
                    best = {v, j};
                }
            }
        }
        return best;
    }

    [[nodiscard]] std::pair<std::size_t, std::size_t> best_H(std::size_t l, std::size_t c) const
    {
        if (l <= 1) {
            return {l, 0};
        }
        std::pair<std::size_t, std::size_t> best{l + H[l - 1][c], 0};
        if (c >= 1) {
            for (std::size_t j = 1; j < l; ++j) {
                const std::size_t v = j + H[l - j][c - 1] + H[j - 1][c];
                if (v < best.first) {
                    best = {v, j};
                }
            }
        }
        return best;
    }

    [[nodiscard]] std::pair<std::size_t, std::size_t> best_G2(std::size_t l, std::size_t c) const
    {
        if (l <= 1) {
            return {0, 0};
        }
        std::pair<std::size_t, std::size_t> best{H[l - 1][c], 0};
        if (c >= 1) {
            for (std::size_t j = 1; j < l; ++j) {
                const std::size_t v = G2[l - j][c - 1] + H[j - 1][c];
                if (v < best.first) {
                    best = {v, j};
                }
            }
        }
        return best;
    }

    // Solution-only: the segment's start checkpoint is popped by the segment.
    void emit_F(std::size_t a, std::size_t l, std::size_t c, std::vector<Action> &out) const
    {
        if (l == 1) {
            out.push_back(Action::restore(a, true));
            out.push_back(Action::advance(a, a + 1, true));
            out.push_back(Action::adjoin(a));
            return;
        }
        const auto [cost, j] = best_F(l, c);
        out.push_back(Action::restore(a, false));
        if (j == 0) {
            out.push_back(Action::advance(a, a + l, true));
            out.push_back(Action::adjoin(a + l - 1));
            emit_F(a, l - 1, c, out);
        } else {
            out.push_back(Action::advance(a, a + j, true));
            out.push_back(Action::store(a + j, false));
            emit_F(a + j, l - j, c - 1, out);
            emit_F(a, j, c, out);
        }
    }

    void emit_G(std::size_t a, std::size_t l, std::size_t c, std::vector<Action> &out) const
    {
        if (l == 1) {
            out.push_back(Action::advance(a, a + 1, false));
            out.push_back(Action::adjoin(a));
            out.push_back(Action::discard(a));
            return;
        }
        const auto [cost, j] = best_G(l, c);
        if (j == 0) {
            out.push_back(Action::advance(a, a + l, false));
            out.push_back(Action::adjoin(a + l - 1));
            emit_F(a, l - 1, c, out);
        } else {
            out.push_back(Action::advance(a, a + j, false));
            out.push_back(Action::store(a + j, false));
            emit_G(a + j, l - j, c - 1, out);
            emit_F(a, j, c, out);
        }
    }

    // Stages mode: segments never pop their start checkpoint; the caller does.
    void emit_H(std::size_t a, std::size_t l, std::size_t c, std::vector<Action> &out) const
    {
        if (l == 0) {
            return;
        }
        const auto [cost, j] = best_H(l, c);
        out.push_back(Action::restore(a, false));
        if (j == 0) {
            out.push_back(Action::advance(a, a + l, true));
            out.push_back(Action::adjoin(a + l - 1));
            emit_H(a, l - 1, c, out);
        } else {
            out.push_back(Action::advance(a, a + j, true));
            out.push_back(Action::store(a + j, true));
            emit_H(a + j, l - j, c - 1, out);
            out.push_back(Action::restore(a + j, true));
            out.push_back(Action::adjoin(a + j - 1));
            emit_H(a, j - 1, c, out);
        }
    }

    void emit_G2(std::size_t a, std::size_t l, std::size_t c, std::vector<Action> &out) const
    {
        const auto [cost, j] = best_G2(l, c);
        if (j == 0) {
            out.push_back(Action::advance(a, a + l, false));
            out.push_back(Action::adjoin(a + l - 1));
            emit_H(a, l - 1, c, out);
        } else {
            out.push_back(Action::advance(a, a + j, false));
            out.push_back(Action::store(a + j, true));
            emit_G2(a + j, l - j, c - 1, out);
            out.push_back(Action::restore(a + j, true));
            out.push_back(Action::adjoin(a + j - 1));
            emit_H(a, j - 1, c, out);
        }
    }

    Table F, G, H, G2;

private:
    std::size_t m_N;
    std::size_t m_C;
};

void check_arguments(std::size_t num_steps, std::size_t capacity)
{
    if (num_steps == 0) {
        throw ConfigurationError("checkpoint schedule needs at least one step");
    }
    if (capacity == 0) {
        throw ConfigurationError("checkpoint capacity must be at least 1");
    }
}

// Slots beyond N never help; clamping keeps the tables small.
std::size_t effective_slots(std::size_t num_steps, std::size_t capacity)
{
    return std::min(capacity, num_steps + 1);
}

} // namespace

std::size_t minimal_recomputations(std::size_t num_steps, std::size_t capacity, CheckpointMode mode)
{
    check_arguments(num_steps, capacity);
    const std::size_t s = effective_slots(num_steps, capacity);
    const Planner planner(num_steps, s);
    if (mode == CheckpointMode::solution_only) {
        return planner.G[num_steps][s - 1];
    }
    if (num_steps == 1) {
        return 0;
    }
    return std::min(planner.G2[num_steps][s - 1], planner.G2[num_steps - 1][s - 1]);
}

CheckpointSchedule plan_schedule(std::size_t num_steps, std::size_t capacity, CheckpointMode mode)
{
    check_arguments(num_steps, capacity);
    const std::size_t s = effective_slots(num_steps, capacity);
    const Planner planner(num_steps, s);

    CheckpointSchedule sched;
    sched.num_steps = num_steps;
    sched.capacity = capacity;
    sched.mode = mode;
    auto &out = sched.actions;

    if (mode == CheckpointMode::solution_only) {
        out.push_back(Action::store(0, false));
        planner.emit_G(0, num_steps, s - 1, out);
    } else if (num_steps == 1) {
        out.push_back(Action::advance(0, 1, false));
        out.push_back(Action::adjoin(0));
    } else if (planner.G2[num_steps][s - 1] <= planner.G2[num_steps - 1][s - 1]) {
        out.push_back(Action::store(0, false));
        planner.emit_G2(0, num_steps, s - 1, out);
        out.push_back(Action::discard(0));
    } else {
        // The first checkpoint sits at step 1 and carries step 0's record.
        out.push_back(Action::advance(0, 1, false));
        out.push_back(Action::store(1, true));
        planner.emit_G2(1, num_steps - 1, s - 1, out);
        out.push_back(Action::restore(1, true));
        out.push_back(Action::adjoin(0));
    }
    sched.predicted_recomputations = count_recomputations(sched);
    sched.peak_checkpoints = validate_schedule(sched);
    return sched;
}

std::size_t count_recomputations(const CheckpointSchedule &schedule)
{
    std::size_t total = 0;
    for (const auto &a : schedule.actions) {
        if (a.kind == ActionKind::advance && a.replay) {
            total += a.to - a.from;
        }
    }
    return total;
}

namespace
{

// C(n, k) saturating at SIZE_MAX.
std::size_t binomial(std::size_t n, std::size_t k)
{
    if (k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    constexpr std::size_t max = std::numeric_limits<std::size_t>::max();
    std::size_t r = 1; // C(n - k + i, i) after step i
    for (std::size_t i = 1; i <= k; ++i) {
        const std::size_t m = n - k + i;
        // r * m / i is exact; divide first by the common factor to delay overflow.
        const std::size_t g = std::gcd(r, i);
        const std::size_t rr = r / g, ii = i / g;
        if (rr > max / (m / ii)) {
            return max;
        }
        r = rr * (m / ii);
    }
    return r;
}

} // namespace

std::size_t binomial_recomputations(std::size_t num_steps, std::size_t capacity)
{
    check_arguments(num_steps, capacity);
    const std::size_t s = capacity;
    const std::size_t l = num_steps;
    // r with C(s + r - 1, s) < l <= C(s + r, s).
    std::size_t r = 0;
    while (binomial(s + r, s) < l) {
        ++r;
    }
    if (r == 0) {
        return 0;
    }
    return r * l - binomial(s + r, s + 1);
}

std::size_t validate_schedule(const CheckpointSchedule &sched)
{
    const std::size_t N = sched.num_steps;
    const bool stages_mode = sched.mode == CheckpointMode::solution_and_stages;
    auto fail = [](std::size_t idx, const Action &a, const std::string &why) {
        throw ContractViolation(fmt::format("schedule action {} ({}): {}", idx, a.str(), why));
    };

    struct Slot {
        std::size_t step;
        bool record;
    };
    std::vector<Slot> stack;
    std::optional<std::size_t> position = 0; // nullopt: state unknown
    std::optional<std::size_t> record;       // step whose record is in working memory
    std::size_t next_adjoin = N;             // adjoins must hit N-1, N-2, ..., 0
    std::size_t forward_reach = 0;           // forward phase has run up to here
    bool reverse_started = false;
    std::size_t peak = 0;

    for (std::size_t idx = 0; idx < sched.actions.size(); ++idx) {
        const Action &a = sched.actions[idx];
        switch (a.kind) {
        case ActionKind::store: {
            if (position != a.from) {
                fail(idx, a, "current state is not at this step");
            }
            const bool with_record = a.stages && a.from >= 1;
            if (a.stages && !stages_mode) {
                fail(idx, a, "stage checkpoint in solution-only mode");
            }
            if (with_record && record != a.from - 1) {
                fail(idx, a, "record of the preceding step is not in memory");
            }
            if (std::any_of(stack.begin(), stack.end(), [&](const Slot &s) { return s.step == a.from; })) {
                fail(idx, a, "checkpoint already stored");
            }
            stack.push_back({a.from, with_record});
            peak = std::max(peak, stack.size());
            if (stack.size() > sched.capacity) {
                fail(idx, a, "capacity exceeded");
            }
            break;
        }
        case ActionKind::advance:
            if (position != a.from || a.to <= a.from || a.to > N) {
                fail(idx, a, "advance from the wrong position");
            }
            if (!a.replay) {
                if (reverse_started || a.from != forward_reach) {
                    fail(idx, a, "forward advance outside the forward phase");
                }
                forward_reach = a.to;
            }
            position = a.to;
            record = a.to - 1;
            break;
        case ActionKind::restore:
            if (stack.empty() || stack.back().step != a.from) {
                fail(idx, a, "restore does not target the top checkpoint");
            }
            position = a.from;
            record = stack.back().record ? std::optional<std::size_t>(a.from - 1) : std::nullopt;
            if (a.pop) {
                stack.pop_back();
            }
            break;
        case ActionKind::adjoin:
            if (next_adjoin == 0 || a.from != next_adjoin - 1) {
                fail(idx, a, "adjoin out of order");
            }
            if (record != a.from) {
                fail(idx, a, "record of this step is not available");
            }
            if (!reverse_started && forward_reach != N) {
                fail(idx, a, "reverse sweep starts before the forward sweep finished");
            }
            reverse_started = true;
            next_adjoin = a.from;
            record.reset();
            break;
        case ActionKind::discard:
            if (stack.empty() || stack.back().step != a.from) {
                fail(idx, a, "discard does not target the top checkpoint");
            }
            stack.pop_back();
            break;
        }
    }
    if (next_adjoin != 0) {
        throw ContractViolation(fmt::format("schedule ends with step {} not adjoined", next_adjoin - 1));
    }
    if (!stack.empty()) {
        throw ContractViolation("schedule leaves checkpoints behind");
    }
    return peak;
}

} // namespace adjts
