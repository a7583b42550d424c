#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pulse/common.hpp"

namespace pulse::energy {

// Per-component energy costs in femtojoules. Leakage is charged per cycle
// per component instance over the whole kernel region; the other entries
// are charged per event or per cycle spent in that operating state.
struct PeCosts {
    std::int64_t leakage, nop, alu, fp, l1, l2, cg;
};
struct FpuCosts {
    std::int64_t leakage, operative, idle;
};
struct BankCosts {
    std::int64_t leakage, read, write, idle;
};
struct IcacheCosts {
    std::int64_t leakage, use, refill;
};
struct DmaCosts {
    std::int64_t leakage, transfer, idle;
};
struct OtherCosts {
    std::int64_t leakage, active;
};

struct EnergyCostTable {
    PeCosts pe;
    FpuCosts fpu;
    BankCosts l1_bank;
    BankCosts l2_bank;
    IcacheCosts icache;
    DmaCosts dma;
    OtherCosts other;

    void validate() const;  // all 26 costs must be >= 0

    // Flat view keyed by the dotted names (pe.leakage .. other.active),
    // in canonical order. Used by the override-file format and the CLI.
    std::vector<std::pair<std::string, std::int64_t>> entries() const;
};

// Default calibration of the cluster cost model.
EnergyCostTable default_cost_table();

// Reads a flat "key = integer" override file covering all 26 dotted keys.
// Unknown keys, missing keys and negative values are rejected with the
// offending key named. '#' comments and blank lines are ignored.
EnergyCostTable load_cost_table(const std::string& path);

// Parses the same format from memory (path only used in messages).
EnergyCostTable parse_cost_table(std::string_view text, const std::string& origin);

struct ClusterTopology {
    int n_cores = 8;
    int n_fpus = 4;
    int n_l1_banks = 16;
    int n_l2_banks = 32;

    void validate() const;

    // Fixed core-to-FPU mapping: consecutive cores share one FPU.
    int fpu_of_core(int core) const { return core * n_fpus / n_cores; }
};

struct CoreActivity {
    std::int64_t alu_ops = 0;
    std::int64_t fp_ops = 0;
    std::int64_t l1_ops = 0;
    std::int64_t l2_ops = 0;
    std::int64_t idle_cycles = 0;  // active-wait cycles, charged at NOP cost
    std::int64_t cg_cycles = 0;    // clock-gated cycles

    std::int64_t issued() const { return alu_ops + fp_ops + l1_ops + l2_ops; }
    std::int64_t total() const { return issued() + idle_cycles + cg_cycles; }
};

struct FpuActivity {
    std::int64_t active_cycles = 0;
};

struct L1BankActivity {
    std::int64_t reads = 0;
    std::int64_t writes = 0;
    std::int64_t conflict_cycles = 0;
    std::int64_t idle_cycles = 0;
};

struct L2BankActivity {
    std::int64_t reads = 0;
    std::int64_t writes = 0;
    std::int64_t idle_cycles = 0;
};

struct IcacheActivity {
    std::int64_t uses = 0;
    std::int64_t refills = 0;
};

struct DmaActivity {
    std::int64_t transfer_beats = 0;
    std::int64_t idle_cycles = 0;
};

// Aggregated per-component tallies over one kernel region.
//
// Invariants (checked by validate):
//  - per core: issued + idle + cg cycles == region_cycles (single-issue core)
//  - per bank: reads + writes + idle == region_cycles (one service slot/cycle)
//  - fpu active, dma idle, cluster_active_cycles <= region_cycles
struct ActivityCounts {
    std::int64_t region_cycles = 0;
    std::vector<CoreActivity> per_core;
    std::vector<FpuActivity> per_fpu;
    std::vector<L1BankActivity> per_l1_bank;
    std::vector<L2BankActivity> per_l2_bank;
    IcacheActivity icache;
    DmaActivity dma;
    std::int64_t cluster_active_cycles = 0;

    explicit ActivityCounts(const ClusterTopology& topo = ClusterTopology{})
        : per_core(topo.n_cores), per_fpu(topo.n_fpus), per_l1_bank(topo.n_l1_banks), per_l2_bank(topo.n_l2_banks) {}

    void validate(const ClusterTopology& topo) const;
};

struct EnergyBreakdown {
    std::int64_t total_fj = 0;
    std::vector<std::pair<std::string, std::int64_t>> per_component;
};

// Per-component energy: leakage * region_cycles + sum(state count * cost).
// Each overload checks its slice against the region capacity.
std::int64_t component_energy(const CoreActivity& c, std::int64_t region_cycles, const EnergyCostTable& costs);
std::int64_t component_energy(const FpuActivity& f, std::int64_t region_cycles, const EnergyCostTable& costs);
std::int64_t component_energy(const L1BankActivity& b, std::int64_t region_cycles, const EnergyCostTable& costs);
std::int64_t component_energy(const L2BankActivity& b, std::int64_t region_cycles, const EnergyCostTable& costs);
std::int64_t component_energy(const IcacheActivity& i, std::int64_t region_cycles, const EnergyCostTable& costs);
std::int64_t component_energy(const DmaActivity& d, std::int64_t region_cycles, const EnergyCostTable& costs);

// Energy of the shared uninstrumented cluster logic (bus, event unit).
std::int64_t other_energy(std::int64_t cluster_active_cycles, std::int64_t region_cycles, const EnergyCostTable& costs);

// Whole-cluster energy with an exact per-component breakdown.
// total_fj equals the sum of the breakdown entries; integer arithmetic only.
EnergyBreakdown total_energy(const ActivityCounts& activity, const ClusterTopology& topo, const EnergyCostTable& costs);

namespace detail {
// Unchecked accounting formulas (no capacity/closure validation). The
// checked component_energy overloads wrap these.
std::int64_t core_energy_raw(const CoreActivity& c, std::int64_t region_cycles, const EnergyCostTable& t);
std::int64_t fpu_energy_raw(const FpuActivity& f, std::int64_t region_cycles, const EnergyCostTable& t);
std::int64_t l1_bank_energy_raw(const L1BankActivity& b, std::int64_t region_cycles, const EnergyCostTable& t);
std::int64_t l2_bank_energy_raw(const L2BankActivity& b, std::int64_t region_cycles, const EnergyCostTable& t);
std::int64_t icache_energy_raw(const IcacheActivity& i, std::int64_t region_cycles, const EnergyCostTable& t);
std::int64_t dma_energy_raw(const DmaActivity& d, std::int64_t region_cycles, const EnergyCostTable& t);
std::int64_t other_energy_raw(std::int64_t active, std::int64_t region_cycles, const EnergyCostTable& t);
}  // namespace detail

}  // namespace pulse::energy
