#include <adjts/checkpoint.hpp>
#include <adjts/tlm.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>

#include <fmt/format.h>

#include "binary_io.hpp"

namespace adjts
{

namespace
{

constexpr char unit_magic[8] = {'A', 'D', 'J', 'T', 'S', 'C', 'K', 'P'};
constexpr std::uint32_t unit_version = 1;
constexpr std::uint32_t flag_tangent = 1u << 0;
constexpr std::uint32_t flag_record = 1u << 1;

} // namespace

void write_unit(std::ostream &os, const CheckpointUnit &unit)
{
    const auto nd = unit.solution.size();
    std::uint32_t flags = 0;
    if (unit.has_tangent()) {
        flags |= flag_tangent;
    }
    const std::size_t stage_count = unit.record ? unit.record->stages.size() : 0;
    if (unit.record) {
        flags |= flag_record;
        if (unit.has_tangent() && unit.record->tangent_stages.size() != stage_count) {
            throw ContractViolation("checkpoint record lacks tangent stages");
        }
    }
    os.write(unit_magic, 8);
    detail::put_u32(os, unit_version);
    detail::put_u32(os, flags);
    detail::put_u64(os, unit.step);
    detail::put_u64(os, static_cast<std::uint64_t>(nd));
    detail::put_u64(os, stage_count);
    detail::put_vector(os, unit.solution);
    if (unit.has_tangent()) {
        detail::put_vector(os, unit.tangent);
    }
    if (unit.record) {
        const auto &r = *unit.record;
        detail::put_f64(os, r.t_start);
        detail::put_f64(os, r.t_end);
        detail::put_f64(os, r.h);
        detail::put_f64(os, r.cost_increment);
        detail::put_f64(os, r.tangent_cost_increment);
        for (const auto &s : r.stages) {
            detail::put_vector(os, s);
        }
        if (unit.has_tangent()) {
            for (const auto &s : r.tangent_stages) {
                detail::put_vector(os, s);
            }
        }
    }
    if (!os) {
        throw Error("failed to write checkpoint");
    }
}

CheckpointUnit read_unit(std::istream &is)
{
    constexpr const char *what = "checkpoint";
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, unit_magic, 8) != 0) {
        throw Error("not a checkpoint file");
    }
    const auto version = detail::get_u32(is, what);
    if (version != unit_version) {
        throw Error(fmt::format("unsupported checkpoint version {}", version));
    }
    const auto flags = detail::get_u32(is, what);
    CheckpointUnit unit;
    unit.step = detail::get_u64(is, what);
    const auto nd = static_cast<Eigen::Index>(detail::get_u64(is, what));
    const auto stage_count = detail::get_u64(is, what);
    unit.solution = detail::get_vector(is, nd, what);
    if (flags & flag_tangent) {
        unit.tangent = detail::get_vector(is, nd, what);
    }
    if (flags & flag_record) {
        StepRecord r;
        r.step = unit.step - 1;
        r.t_start = detail::get_f64(is, what);
        r.t_end = detail::get_f64(is, what);
        r.h = detail::get_f64(is, what);
        r.cost_increment = detail::get_f64(is, what);
        r.tangent_cost_increment = detail::get_f64(is, what);
        for (std::uint64_t i = 0; i < stage_count; ++i) {
            r.stages.push_back(detail::get_vector(is, nd, what));
        }
        if (flags & flag_tangent) {
            for (std::uint64_t i = 0; i < stage_count; ++i) {
                r.tangent_stages.push_back(detail::get_vector(is, nd, what));
            }
            r.tangent_end = unit.tangent;
        }
        r.u_end = unit.solution;
        unit.record = std::move(r);
    }
    return unit;
}

void MemoryStore::put(CheckpointUnit unit)
{
    const std::size_t step = unit.step;
    m_units.insert_or_assign(step, std::move(unit));
}

CheckpointUnit MemoryStore::get(std::size_t step) const
{
    auto it = m_units.find(step);
    if (it == m_units.end()) {
        throw ContractViolation(fmt::format("no checkpoint stored for step {}", step));
    }
    return it->second;
}

void MemoryStore::erase(std::size_t step)
{
    m_units.erase(step);
}

FileStore::FileStore(std::filesystem::path dir) : m_dir(std::move(dir))
{
    std::filesystem::create_directories(m_dir);
}

FileStore::~FileStore()
{
    for (auto step : m_steps) {
        std::error_code ec;
        std::filesystem::remove(path_for(step), ec);
    }
}

std::filesystem::path FileStore::path_for(std::size_t step) const
{
    return m_dir / fmt::format("ckpt_{:08d}.bin", step);
}

bool FileStore::contains(std::size_t step) const
{
    return std::find(m_steps.begin(), m_steps.end(), step) != m_steps.end();
}

void FileStore::put(CheckpointUnit unit)
{
    std::ofstream os(path_for(unit.step), std::ios::binary | std::ios::trunc);
    if (!os) {
        throw Error("cannot open checkpoint file " + path_for(unit.step).string());
    }
    write_unit(os, unit);
    if (!contains(unit.step)) {
        m_steps.push_back(unit.step);
    }
}

CheckpointUnit FileStore::get(std::size_t step) const
{
    if (!contains(step)) {
        throw ContractViolation(fmt::format("no checkpoint stored for step {}", step));
    }
    std::ifstream is(path_for(step), std::ios::binary);
    if (!is) {
        throw Error("cannot open checkpoint file " + path_for(step).string());
    }
    return read_unit(is);
}

void FileStore::erase(std::size_t step)
{
    auto it = std::find(m_steps.begin(), m_steps.end(), step);
    if (it != m_steps.end()) {
        m_steps.erase(it);
        std::error_code ec;
        std::filesystem::remove(path_for(step), ec);
    }
}

CheckpointUnit disk_store_roundtrip(const CheckpointUnit &unit)
{
    static std::atomic<unsigned> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    const auto dir = std::filesystem::temp_directory_path()
                     / fmt::format("adjts_roundtrip_{}_{}", stamp, counter.fetch_add(1));
    CheckpointUnit out;
    {
        FileStore store(dir);
        store.put(unit);
        out = store.get(unit.step);
    }
    std::error_code ec;
    std::filesystem::remove_all(dir, ec);
    return out;
}

StepProvider::StepProvider(const Stepper &stepper, Vector u0, const StorageOptions &storage,
                           std::optional<TangentSeed> tangent)
    : m_stepper(&stepper), m_tangent(std::move(tangent)), m_u(std::move(u0))
{
    const std::size_t N = stepper.num_steps();
    if (static_cast<std::size_t>(m_u.size()) != stepper.problem().dim_state) {
        throw ConfigurationError(fmt::format("initial state has length {}, problem expects {}", m_u.size(),
                                             stepper.problem().dim_state));
    }
    if (storage.capacity) {
        m_schedule = plan_schedule(N, *storage.capacity, storage.mode);
    } else {
        // Everything fits: one stage checkpoint per step, no replays.
        m_schedule = plan_schedule(N, N, CheckpointMode::solution_and_stages);
    }
    if (storage.disk_dir) {
        m_store = std::make_unique<FileStore>(*storage.disk_dir);
    } else {
        m_store = std::make_unique<MemoryStore>();
    }
    if (m_tangent) {
        m_w = m_tangent->w0;
    }
}

const Vector &StepProvider::final_state() const
{
    if (!m_forward_done) {
        throw ContractViolation("forward phase has not run");
    }
    return m_final_u;
}

const Vector &StepProvider::final_tangent() const
{
    if (!m_tangent) {
        throw ContractViolation("provider carries no tangent");
    }
    if (!m_forward_done) {
        throw ContractViolation("forward phase has not run");
    }
    return m_final_w;
}

void StepProvider::run_step(std::size_t n, bool replay)
{
    StepRecord rec = m_stepper->step(n, m_u);
    if (m_tangent) {
        tlm_step_directional(*m_stepper, rec, m_w, m_tangent->v2);
        m_w = rec.tangent_end;
    }
    m_u = rec.u_end;
    m_position = n + 1;
    if (replay) {
        ++m_recomputations;
    } else {
        m_integral += rec.cost_increment;
        if (n + 1 == m_stepper->num_steps()) {
            m_final_u = m_u;
            m_final_w = m_w;
        }
    }
    m_record = std::move(rec);
}

void StepProvider::execute(const Action &a)
{
    switch (a.kind) {
    case ActionKind::store: {
        CheckpointUnit unit;
        unit.step = a.from;
        unit.solution = m_u;
        if (m_tangent) {
            unit.tangent = m_w;
        }
        if (a.stages && a.from >= 1) {
            if (!m_record || m_record->step + 1 != a.from) {
                throw ContractViolation(fmt::format("no record of step {} to checkpoint", a.from - 1));
            }
            unit.record = *m_record;
        }
        m_store->put(std::move(unit));
        m_peak = std::max(m_peak, m_store->size());
        break;
    }
    case ActionKind::advance:
        if (m_position != a.from) {
            throw ContractViolation(fmt::format("advance from {} while positioned at {}", a.from, m_position));
        }
        for (std::size_t n = a.from; n < a.to; ++n) {
            run_step(n, a.replay);
        }
        break;
    case ActionKind::restore: {
        CheckpointUnit unit = m_store->get(a.from);
        if (a.pop) {
            m_store->erase(a.from);
        }
        m_u = std::move(unit.solution);
        if (m_tangent) {
            m_w = std::move(unit.tangent);
        }
        m_position = a.from;
        m_record = std::move(unit.record);
        break;
    }
    case ActionKind::discard:
        m_store->erase(a.from);
        break;
    case ActionKind::adjoin:
        throw ContractViolation("adjoin actions are served by step_record");
    }
}

double StepProvider::run_forward()
{
    if (m_forward_done) {
        return m_integral;
    }
    const auto &acts = m_schedule.actions;
    while (m_cursor < acts.size() && acts[m_cursor].kind != ActionKind::adjoin) {
        execute(acts[m_cursor++]);
    }
    m_forward_done = true;
    return m_integral;
}

const StepRecord &StepProvider::step_record(std::size_t n)
{
    if (!m_forward_done) {
        run_forward();
    }
    const std::size_t expected = m_last_request ? *m_last_request - 1 : num_steps() - 1;
    if ((m_last_request && *m_last_request == 0) || n != expected) {
        throw ContractViolation(fmt::format("step {} requested out of order (expected {})", n, expected));
    }
    const auto &acts = m_schedule.actions;
    while (m_cursor < acts.size() && acts[m_cursor].kind != ActionKind::adjoin) {
        execute(acts[m_cursor++]);
    }
    if (m_cursor >= acts.size() || acts[m_cursor].from != n) {
        throw ContractViolation(fmt::format("schedule has no adjoint action for step {}", n));
    }
    ++m_cursor;
    if (!m_record || m_record->step != n) {
        throw ContractViolation(fmt::format("record of step {} is not available", n));
    }
    m_served = std::move(*m_record);
    m_record.reset();
    m_last_request = n;
    if (n == 0) {
        while (m_cursor < acts.size()) {
            execute(acts[m_cursor++]);
        }
    }
    return m_served;
}

} // namespace adjts
