#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <adjts/forward.hpp>

namespace adjts
{

// solution_only: a checkpoint holds u_k; adjoining step k-1 from it needs a replay.
// solution_and_stages: a checkpoint at k >= 1 also holds the record of step k-1,
// so that step can be adjoined straight from the checkpoint.
enum class CheckpointMode { solution_only, solution_and_stages };

[[nodiscard]] std::string to_string(CheckpointMode mode);
// "sol" or "sol+stages" (also "solution-only", "solution+stages").
[[nodiscard]] CheckpointMode parse_checkpoint_mode(const std::string &name);

enum class ActionKind { store, advance, restore, adjoin, discard };

struct Action {
    ActionKind kind = ActionKind::advance;
    std::size_t from = 0; // step index; the start for advance
    std::size_t to = 0;   // advance only
    bool replay = false;  // advance: counted as recomputation
    bool pop = false;     // restore: remove the checkpoint afterwards
    bool stages = false;  // store: keep the record of step from-1 too

    static Action store(std::size_t i, bool with_stages) { return {ActionKind::store, i, i, false, false, with_stages}; }
    static Action advance(std::size_t i, std::size_t j, bool replay) { return {ActionKind::advance, i, j, replay}; }
    static Action restore(std::size_t i, bool pop) { return {ActionKind::restore, i, i, false, pop}; }
    static Action adjoin(std::size_t i) { return {ActionKind::adjoin, i, i}; }
    static Action discard(std::size_t i) { return {ActionKind::discard, i, i}; }

    [[nodiscard]] std::string str() const;
};

struct CheckpointSchedule {
    std::size_t num_steps = 0;
    std::size_t capacity = 0;
    CheckpointMode mode = CheckpointMode::solution_only;
    std::vector<Action> actions;
    std::size_t predicted_recomputations = 0;
    std::size_t peak_checkpoints = 0;
};

// Offline schedule with the minimal number of replayed steps for N steps and
// `capacity` checkpoint slots. In solution-only mode the initial state counts
// against the capacity.
[[nodiscard]] CheckpointSchedule plan_schedule(std::size_t num_steps, std::size_t capacity, CheckpointMode mode);

// Sum of replayed advance lengths.
[[nodiscard]] std::size_t count_recomputations(const CheckpointSchedule &schedule);

// The DP minimum without emitting actions.
[[nodiscard]] std::size_t minimal_recomputations(std::size_t num_steps, std::size_t capacity, CheckpointMode mode);

// Closed-form binomial count for solution-only checkpointing (initial state
// included in the capacity); an independent check on the DP.
[[nodiscard]] std::size_t binomial_recomputations(std::size_t num_steps, std::size_t capacity);

// Simulates the action list and throws ContractViolation on any broken
// invariant: order of adjoints, data availability, capacity, stack discipline.
// Returns the peak number of live checkpoints.
std::size_t validate_schedule(const CheckpointSchedule &schedule);

// Units of memory for one checkpoint: 1 for a solution, 1 + stages for a
// solution with stage values.
[[nodiscard]] inline std::size_t checkpoint_units(CheckpointMode mode, std::size_t stage_count)
{
    return mode == CheckpointMode::solution_only ? 1 : 1 + stage_count;
}

// What a checkpoint slot holds.
struct CheckpointUnit {
    std::size_t step = 0;
    Vector solution;
    Vector tangent;                   // empty unless a tangent rides along
    std::optional<StepRecord> record; // record of step - 1 (stages mode)

    [[nodiscard]] bool has_tangent() const { return tangent.size() > 0; }
};

// Binary layout: "ADJTSCKP", u32 version, u32 flags (bit0 tangent, bit1
// record), u64 step, u64 N_d, u64 stage count, then little-endian f64s:
// solution, tangent, record scalars (t_start, t_end, h, cost, tangent cost),
// stages, tangent stages.
void write_unit(std::ostream &os, const CheckpointUnit &unit);
[[nodiscard]] CheckpointUnit read_unit(std::istream &is);

class CheckpointStore
{
public:
    virtual ~CheckpointStore() = default;
    virtual void put(CheckpointUnit unit) = 0;
    [[nodiscard]] virtual CheckpointUnit get(std::size_t step) const = 0;
    virtual void erase(std::size_t step) = 0;
    [[nodiscard]] virtual std::size_t size() const = 0;
    [[nodiscard]] virtual bool contains(std::size_t step) const = 0;
};

class MemoryStore final : public CheckpointStore
{
public:
    void put(CheckpointUnit unit) override;
    [[nodiscard]] CheckpointUnit get(std::size_t step) const override;
    void erase(std::size_t step) override;
    [[nodiscard]] std::size_t size() const override { return m_units.size(); }
    [[nodiscard]] bool contains(std::size_t step) const override { return m_units.count(step) != 0; }

private:
    std::map<std::size_t, CheckpointUnit> m_units;
};

// One file per checkpoint in a directory; files are removed on erase and
// when the store is destroyed.
class FileStore final : public CheckpointStore
{
public:
    explicit FileStore(std::filesystem::path dir);
    ~FileStore() override;
    FileStore(const FileStore &) = delete;
    FileStore &operator=(const FileStore &) = delete;

    void put(CheckpointUnit unit) override;
    [[nodiscard]] CheckpointUnit get(std::size_t step) const override;
    void erase(std::size_t step) override;
    [[nodiscard]] std::size_t size() const override { return m_steps.size(); }
    [[nodiscard]] bool contains(std::size_t step) const override;
    [[nodiscard]] std::filesystem::path path_for(std::size_t step) const;

private:
    std::filesystem::path m_dir;
    std::vector<std::size_t> m_steps;
};

// Writes the unit to a temporary file and reads it back.
[[nodiscard]] CheckpointUnit disk_store_roundtrip(const CheckpointUnit &unit);

struct StorageOptions {
    std::optional<std::size_t> capacity; // empty: store everything
    CheckpointMode mode = CheckpointMode::solution_and_stages;
    std::optional<std::filesystem::path> disk_dir; // empty: keep checkpoints in memory
};

// Tangent seed carried through forward runs and replays.
struct TangentSeed {
    Vector w0;
    Vector v2;
};

// Executes a checkpoint schedule, serving step records to a reverse sweep and
// replaying forward steps from stored checkpoints as needed.
class StepProvider final : public TrajectoryAccess
{
public:
    StepProvider(const Stepper &stepper, Vector u0, const StorageOptions &storage,
                 std::optional<TangentSeed> tangent = std::nullopt);

    // Runs the forward phase of the schedule; returns q_N.
    double run_forward();

    [[nodiscard]] std::size_t num_steps() const override { return m_stepper->num_steps(); }
    [[nodiscard]] const Vector &final_state() const override;
    [[nodiscard]] const Vector &final_tangent() const override;
    [[nodiscard]] const StepRecord &step_record(std::size_t n) override;
    [[nodiscard]] const StepRecord &provide_step(std::size_t n) { return step_record(n); }

    [[nodiscard]] double integral() const { return m_integral; }
    [[nodiscard]] std::size_t recomputations() const { return m_recomputations; }
    [[nodiscard]] const CheckpointSchedule &schedule() const { return m_schedule; }
    [[nodiscard]] std::size_t peak_checkpoints() const { return m_peak; }
    [[nodiscard]] bool forward_done() const { return m_forward_done; }

private:
    void execute(const Action &a);
    void run_step(std::size_t n, bool replay);

    const Stepper *m_stepper;
    CheckpointSchedule m_schedule;
    std::unique_ptr<CheckpointStore> m_store;
    std::optional<TangentSeed> m_tangent;

    std::size_t m_cursor = 0;
    std::size_t m_position = 0;
    Vector m_u;
    Vector m_w;
    std::optional<StepRecord> m_record;
    StepRecord m_served;
    std::optional<std::size_t> m_last_request;

    Vector m_final_u;
    Vector m_final_w;
    double m_integral = 0.0;
    std::size_t m_recomputations = 0;
    std::size_t m_peak = 0;
    bool m_forward_done = false;
};

} // namespace adjts
