#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pulse/energy_model.hpp"

namespace pulse::trace {

// One parsed trace line: "CYCLE: PATH: PAYLOAD".
struct TraceEvent {
    std::int64_t cycle = 0;
    std::string path;
    std::string payload;
};

// Splits a line at the first two ": " separators. Throws ParseError on a
// non-numeric cycle or fewer than two separators.
TraceEvent parse_trace_line(std::string_view line);

enum class OpcodeClass { Alu, Fp, L1, L2, Nop };

// TCDM and off-cluster scratchpad address windows used to classify memory
// opcodes by the address attached to the payload ("addr=0x...").
inline constexpr std::uint32_t kTcdmBase = 0x1000'0000;
inline constexpr std::uint32_t kTcdmEnd = 0x1001'0000;
inline constexpr std::uint32_t kL2Base = 0x1C00'0000;
inline constexpr std::uint32_t kL2End = 0x1C08'0000;

// Classifies the leading mnemonic of an instruction payload. Loads/stores
// are split into L1/L2 by address window; unknown mnemonics are an error
// (silent misclassification would corrupt the energy accounting).
OpcodeClass classify_opcode(std::string_view payload);

struct KernelRegion {
    std::int64_t start_cycle = 0;
    std::int64_t end_cycle = 0;  // inclusive

    std::int64_t cycles() const { return end_cycle - start_cycle + 1; }
    bool contains(std::int64_t cycle) const { return cycle >= start_cycle && cycle <= end_cycle; }
};

inline constexpr std::string_view kRegionEnterMarker = "region kernel enter";
inline constexpr std::string_view kRegionExitMarker = "region kernel exit";

// Locates the enter/exit marker pair on the core trace paths. Missing,
// duplicated, or misordered markers raise distinct ParseErrors.
KernelRegion find_kernel_region(std::span<const TraceEvent> events);

// Routes events to per-component tallies. One listener per core (two
// subscribed paths), one per L1 bank, one per L2 bank; icache refill and
// DMA transfer events ride on fixed built-in paths that are not counted
// as listeners.
class ListenerRegistry {
public:
    enum class Target { CoreInsn, CoreTrace, L1Bank, L2Bank };

    explicit ListenerRegistry(const energy::ClusterTopology& topo);

    // Adds a path subscription; rejects duplicate paths.
    void subscribe(const std::string& path, Target target, int index);

    int listener_count() const { return listener_count_; }

    // Tallies one event. Events outside the region or on unmatched paths
    // are skipped/ignored, never errors. Events must arrive in
    // non-decreasing cycle order.
    void dispatch(const TraceEvent& event, const KernelRegion& region);

    // Applies the closing rules (silent core-cycles count as clock-gated,
    // bank idle = region - serviced, FPU activity from paired cores) and
    // validates the result. Throws ValidationError when a core was booked
    // twice in one cycle.
    energy::ActivityCounts close_books(const KernelRegion& region) const;

    std::int64_t ignored_events() const { return ignored_events_; }
    std::int64_t skipped_out_of_region() const { return skipped_out_of_region_; }

private:
    struct Binding {
        Target target;
        int index;
    };
    struct CoreState {
        std::int64_t alu_ops = 0, fp_ops = 0, l1_ops = 0, l2_ops = 0, idle_events = 0, cg_events = 0;
        std::int64_t occupied_cycles = 0;
        std::int64_t last_cycle = -1;
        bool double_booked = false;
        std::int64_t double_booked_cycle = 0;
    };
    struct BankState {
        std::int64_t reads = 0, writes = 0, conflicts = 0;
        std::int64_t last_access_cycle = -1;
        bool double_access = false;
    };

    void tally_core_insn(int core, const TraceEvent& event);
    void tally_core_trace(int core, const TraceEvent& event);
    void note_core_cycle(CoreState& core, std::int64_t cycle);
    void note_active_cycle(std::int64_t cycle);

    energy::ClusterTopology topo_;
    std::unordered_map<std::string, Binding> bindings_;
    int listener_count_ = 0;
    std::vector<CoreState> cores_;
    std::vector<BankState> l1_banks_;
    std::vector<BankState> l2_banks_;
    std::int64_t icache_uses_ = 0;
    std::int64_t icache_refills_ = 0;
    std::int64_t dma_beats_ = 0;
    std::int64_t dma_busy_cycles_ = 0;
    std::int64_t dma_last_cycle_ = -1;
    std::int64_t active_cycles_ = 0;
    std::int64_t last_active_cycle_ = -1;
    std::int64_t ignored_events_ = 0;
    std::int64_t skipped_out_of_region_ = 0;
};

// Standard registry wiring: core i on cluster/pe{i}/insn and
// cluster/pe{i}/trace, L1 bank k on cluster/l1/bank{k}/trace, L2 bank m on
// cluster/l2/bank{m}/trace.
ListenerRegistry build_listener_registry(const energy::ClusterTopology& topo);

struct CollectResult {
    energy::ActivityCounts activity;
    KernelRegion region;
};

// Reads a whole trace (one event per line; blank lines and '#' comments
// skipped; cycles non-decreasing), finds the kernel region unless a hint
// is given, dispatches every event and closes the books.
CollectResult collect_activity(std::istream& in, const energy::ClusterTopology& topo,
                               std::optional<KernelRegion> region_hint = std::nullopt);
CollectResult collect_activity_text(std::string_view text, const energy::ClusterTopology& topo,
                                    std::optional<KernelRegion> region_hint = std::nullopt);
CollectResult collect_activity_file(const std::string& path, const energy::ClusterTopology& topo,
                                    std::optional<KernelRegion> region_hint = std::nullopt);

}  // namespace pulse::trace
