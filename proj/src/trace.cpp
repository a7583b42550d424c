#include "pulse/trace.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace pulse::trace {

namespace {

constexpr std::string_view kSep = ": ";

std::string_view first_token(std::string_view s) {
    s = trim(s);
    std::size_t pos = s.find_first_of(" \t");
    return pos == std::string_view::npos ? s : s.substr(0, pos);
}

const std::unordered_set<std::string_view>& alu_mnemonics() {
    static const std::unordered_set<std::string_view> set = {
        "add", "addi", "sub",  "and",  "andi", "or",    "ori",  "xor",  "xori", "sll",  "slli",
        "srl", "srli", "sra",  "srai", "slt",  "slti",  "sltu", "sltiu", "lui", "auipc", "mul",
        "mulh", "mulhsu", "mulhu", "div", "divu", "rem", "remu", "beq",  "bne",  "blt",  "bge",
        "bltu", "bgeu", "jal", "jalr"};
    return set;
}

const std::unordered_set<std::string_view>& memory_mnemonics() {
    static const std::unordered_set<std::string_view> set = {"lb", "lbu", "lh", "lhu", "lw",
                                                             "sb", "sh",  "sw", "flw", "fsw"};
    return set;
}

std::optional<std::uint32_t> payload_address(std::string_view payload) {
    std::size_t pos = payload.find("addr=0x");
    if (pos == std::string_view::npos) return std::nullopt;
    std::string_view hex = payload.substr(pos + 7);
    std::uint32_t value = 0;
    auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), value, 16);
    if (ec != std::errc() || ptr == hex.data()) return std::nullopt;
    return value;
}

bool is_core_trace_path(std::string_view path) {
    return path.starts_with("cluster/pe") && path.ends_with("/trace");
}

}  // namespace

TraceEvent parse_trace_line(std::string_view line) {
    std::size_t first = line.find(kSep);
    if (first == std::string_view::npos) {
        throw ParseError("malformed trace line (no \"" + std::string(kSep) + "\" separator): " + std::string(line));
    }
    std::size_t second = line.find(kSep, first + kSep.size());
    if (second == std::string_view::npos) {
        throw ParseError("malformed trace line (missing second separator): " + std::string(line));
    }
    std::string_view cycle_text = trim(line.substr(0, first));
    TraceEvent event;
    auto [ptr, ec] = std::from_chars(cycle_text.data(), cycle_text.data() + cycle_text.size(), event.cycle);
    if (ec != std::errc() || ptr != cycle_text.data() + cycle_text.size() || cycle_text.empty()) {
        throw ParseError("malformed trace line (non-numeric cycle \"" + std::string(cycle_text) + "\")");
    }
    if (event.cycle < 0) throw ParseError("malformed trace line (negative cycle)");
    event.path = std::string(trim(line.substr(first + kSep.size(), second - first - kSep.size())));
    if (event.path.empty()) throw ParseError("malformed trace line (empty component path)");
    event.payload = std::string(trim(line.substr(second + kSep.size())));
    return event;
}

OpcodeClass classify_opcode(std::string_view payload) {
    std::string_view mnem = first_token(payload);
    if (mnem.empty()) throw ParseError("empty instruction payload");
    if (mnem == "nop") return OpcodeClass::Nop;
    if (memory_mnemonics().contains(mnem)) {
        auto addr = payload_address(payload);
        if (!addr) throw ParseError("memory opcode \"" + std::string(mnem) + "\" without addr= annotation");
        if (*addr >= kTcdmBase && *addr < kTcdmEnd) return OpcodeClass::L1;
        if (*addr >= kL2Base && *addr < kL2End) return OpcodeClass::L2;
        std::ostringstream ss;
        ss << "memory address 0x" << std::hex << *addr << " outside the TCDM and L2 windows";
        throw ParseError(ss.str());
    }
    if (alu_mnemonics().contains(mnem)) return OpcodeClass::Alu;
    if (mnem.front() == 'f' && mnem.find('.') != std::string_view::npos) return OpcodeClass::Fp;
    throw ParseError("unknown opcode mnemonic \"" + std::string(mnem) + "\"");
}

KernelRegion find_kernel_region(std::span<const TraceEvent> events) {
    std::optional<std::int64_t> enter, exit;
    for (const TraceEvent& e : events) {
        if (!is_core_trace_path(e.path)) continue;
        if (e.payload == kRegionEnterMarker) {
            if (enter) throw ParseError("duplicate region enter marker (cycles " + std::to_string(*enter) + " and " +
                                        std::to_string(e.cycle) + ")");
            enter = e.cycle;
        } else if (e.payload == kRegionExitMarker) {
            if (exit) throw ParseError("duplicate region exit marker (cycles " + std::to_string(*exit) + " and " +
                                       std::to_string(e.cycle) + ")");
            exit = e.cycle;
        }
    }
    if (!enter) throw ParseError("missing region enter marker");
    if (!exit) throw ParseError("missing region exit marker");
    if (*exit < *enter) {
        throw ParseError("region exit marker (cycle " + std::to_string(*exit) + ") precedes enter marker (cycle " +
                         std::to_string(*enter) + ")");
    }
    return KernelRegion{*enter, *exit};
}

ListenerRegistry::ListenerRegistry(const energy::ClusterTopology& topo)
    : topo_(topo),
      cores_(topo.n_cores),
      l1_banks_(topo.n_l1_banks),
      l2_banks_(topo.n_l2_banks) {
    topo.validate();
}

void ListenerRegistry::subscribe(const std::string& path, Target target, int index) {
    int limit = 0;
    switch (target) {
        case Target::CoreInsn:
        case Target::CoreTrace: limit = topo_.n_cores; break;
        case Target::L1Bank: limit = topo_.n_l1_banks; break;
        case Target::L2Bank: limit = topo_.n_l2_banks; break;
    }
    if (index < 0 || index >= limit) {
        throw ValidationError("listener index " + std::to_string(index) + " out of range for path " + path);
    }
    auto [it, inserted] = bindings_.emplace(path, Binding{target, index});
    if (!inserted) throw ValidationError("duplicate listener registration for path " + path);
    // A core listener owns two paths but counts once.
    if (target != Target::CoreTrace) ++listener_count_;
}

ListenerRegistry build_listener_registry(const energy::ClusterTopology& topo) {
    ListenerRegistry registry(topo);
    for (int i = 0; i < topo.n_cores; ++i) {
        registry.subscribe("cluster/pe" + std::to_string(i) + "/insn", ListenerRegistry::Target::CoreInsn, i);
        registry.subscribe("cluster/pe" + std::to_string(i) + "/trace", ListenerRegistry::Target::CoreTrace, i);
    }
    for (int k = 0; k < topo.n_l1_banks; ++k) {
        registry.subscribe("cluster/l1/bank" + std::to_string(k) + "/trace", ListenerRegistry::Target::L1Bank, k);
    }
    for (int m = 0; m < topo.n_l2_banks; ++m) {
        registry.subscribe("cluster/l2/bank" + std::to_string(m) + "/trace", ListenerRegistry::Target::L2Bank, m);
    }
    return registry;
}

void ListenerRegistry::note_core_cycle(CoreState& core, std::int64_t cycle) {
    if (core.last_cycle == cycle) {
        if (!core.double_booked) {
            core.double_booked = true;
            core.double_booked_cycle = cycle;
        }
        return;
    }
    core.last_cycle = cycle;
    ++core.occupied_cycles;
}

void ListenerRegistry::note_active_cycle(std::int64_t cycle) {
    if (last_active_cycle_ == cycle) return;
    last_active_cycle_ = cycle;
    ++active_cycles_;
}

void ListenerRegistry::tally_core_insn(int core_index, const TraceEvent& event) {
    CoreState& core = cores_[core_index];
    switch (classify_opcode(event.payload)) {
        case OpcodeClass::Alu: ++core.alu_ops; break;
        case OpcodeClass::Fp: ++core.fp_ops; break;
        case OpcodeClass::L1: ++core.l1_ops; break;
        case OpcodeClass::L2: ++core.l2_ops; break;
        case OpcodeClass::Nop: ++core.idle_events; break;
    }
    ++icache_uses_;  // shared cluster I$: one fetch per issued instruction
    note_core_cycle(core, event.cycle);
    note_active_cycle(event.cycle);
}

void ListenerRegistry::tally_core_trace(int core_index, const TraceEvent& event) {
    CoreState& core = cores_[core_index];
    if (event.payload == "idle") {
        ++core.idle_events;
        note_core_cycle(core, event.cycle);
        note_active_cycle(event.cycle);
    } else if (event.payload == "cg") {
        ++core.cg_events;
        note_core_cycle(core, event.cycle);
    } else if (event.payload == kRegionEnterMarker || event.payload == kRegionExitMarker) {
        // Region markers are bookkeeping, not core activity.
    } else {
        ++ignored_events_;
    }
}

void ListenerRegistry::dispatch(const TraceEvent& event, const KernelRegion& region) {
    if (!region.contains(event.cycle)) {
        ++skipped_out_of_region_;
        return;
    }
    auto it = bindings_.find(event.path);
    if (it == bindings_.end()) {
        if (event.path == "cluster/icache/trace") {
            if (first_token(event.payload) == "refill") {
                ++icache_refills_;
            } else {
                ++ignored_events_;
            }
            return;
        }
        if (event.path == "cluster/dma/trace") {
            if (first_token(event.payload) == "transfer") {
                ++dma_beats_;
                if (dma_last_cycle_ != event.cycle) {
                    dma_last_cycle_ = event.cycle;
                    ++dma_busy_cycles_;
                }
            } else {
                ++ignored_events_;
            }
            return;
        }
        ++ignored_events_;  // real traces carry unrelated components
        return;
    }
    const Binding& binding = it->second;
    switch (binding.target) {
        case Target::CoreInsn: tally_core_insn(binding.index, event); break;
        case Target::CoreTrace: tally_core_trace(binding.index, event); break;
        case Target::L1Bank:
        case Target::L2Bank: {
            BankState& bank =
                binding.target == Target::L1Bank ? l1_banks_[binding.index] : l2_banks_[binding.index];
            std::string_view kind = first_token(event.payload);
            if (kind == "read" || kind == "write") {
                if (bank.last_access_cycle == event.cycle) bank.double_access = true;
                bank.last_access_cycle = event.cycle;
                if (kind == "read") {
                    ++bank.reads;
                } else {
                    ++bank.writes;
                }
            } else if (kind == "conflict" && binding.target == Target::L1Bank) {
                ++bank.conflicts;
            } else {
                ++ignored_events_;
            }
            break;
        }
    }
}

energy::ActivityCounts ListenerRegistry::close_books(const KernelRegion& region) const {
    const std::int64_t r = region.cycles();
    energy::ActivityCounts activity(topo_);
    activity.region_cycles = r;

    for (std::size_t i = 0; i < cores_.size(); ++i) {
        const CoreState& s = cores_[i];
        if (s.double_booked) {
            throw ValidationError("core " + std::to_string(i) + " has two events in cycle " +
                                  std::to_string(s.double_booked_cycle) + "; accounting does not close");
        }
        energy::CoreActivity& c = activity.per_core[i];
        c.alu_ops = s.alu_ops;
        c.fp_ops = s.fp_ops;
        c.l1_ops = s.l1_ops;
        c.l2_ops = s.l2_ops;
        c.idle_cycles = s.idle_events;
        // Cycles with no event at all: the core was clock-gated (gated
        // cores emit nothing).
        c.cg_cycles = s.cg_events + (r - s.occupied_cycles);
    }
    for (std::size_t k = 0; k < l1_banks_.size(); ++k) {
        const BankState& s = l1_banks_[k];
        if (s.double_access) {
            throw ValidationError("l1 bank " + std::to_string(k) + " serviced two accesses in one cycle");
        }
        energy::L1BankActivity& b = activity.per_l1_bank[k];
        b.reads = s.reads;
        b.writes = s.writes;
        b.conflict_cycles = s.conflicts;
        b.idle_cycles = r - s.reads - s.writes;
    }
    for (std::size_t m = 0; m < l2_banks_.size(); ++m) {
        const BankState& s = l2_banks_[m];
        if (s.double_access) {
            throw ValidationError("l2 bank " + std::to_string(m) + " serviced two accesses in one cycle");
        }
        energy::L2BankActivity& b = activity.per_l2_bank[m];
        b.reads = s.reads;
        b.writes = s.writes;
        b.idle_cycles = r - s.reads - s.writes;
    }
    // No dedicated FPU listener: a floating-point issue by core c occupies
    // the FPU it is hard-wired to for that cycle (paired cores never issue
    // simultaneously on a consistent trace).
    for (std::size_t i = 0; i < cores_.size(); ++i) {
        activity.per_fpu[topo_.fpu_of_core(static_cast<int>(i))].active_cycles += cores_[i].fp_ops;
    }
    activity.icache.uses = icache_uses_;
    activity.icache.refills = icache_refills_;
    activity.dma.transfer_beats = dma_beats_;
    activity.dma.idle_cycles = r - dma_busy_cycles_;
    activity.cluster_active_cycles = active_cycles_;
    activity.validate(topo_);
    return activity;
}

namespace {

struct ParsedTrace {
    std::vector<TraceEvent> events;
    std::vector<std::int64_t> lines;
};

ParsedTrace read_events(std::istream& in) {
    ParsedTrace out;
    std::string line;
    std::int64_t line_no = 0;
    std::int64_t last_cycle = -1;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        TraceEvent event;
        try {
            event = parse_trace_line(s);
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (event.cycle < last_cycle) {
            throw ParseError("line " + std::to_string(line_no) + ": cycle " + std::to_string(event.cycle) +
                             " goes backwards (previous " + std::to_string(last_cycle) + ")");
        }
        last_cycle = event.cycle;
        out.events.push_back(std::move(event));
        out.lines.push_back(line_no);
    }
    return out;
}

}  // namespace

CollectResult collect_activity(std::istream& in, const energy::ClusterTopology& topo,
                               std::optional<KernelRegion> region_hint) {
    ParsedTrace parsed = read_events(in);
    KernelRegion region = region_hint ? *region_hint : find_kernel_region(parsed.events);
    if (region.end_cycle < region.start_cycle) throw ValidationError("region hint: end before start");

    ListenerRegistry registry = build_listener_registry(topo);
    for (std::size_t i = 0; i < parsed.events.size(); ++i) {
        try {
            registry.dispatch(parsed.events[i], region);
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(parsed.lines[i]) + ": " + e.what());
        }
    }
    return CollectResult{registry.close_books(region), region};
}

CollectResult collect_activity_text(std::string_view text, const energy::ClusterTopology& topo,
                                    std::optional<KernelRegion> region_hint) {
    std::istringstream in{std::string(text)};
    return collect_activity(in, topo, region_hint);
}

CollectResult collect_activity_file(const std::string& path, const energy::ClusterTopology& topo,
                                    std::optional<KernelRegion> region_hint) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trace file: " + path);
    try {
        return collect_activity(in, topo, region_hint);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

}  // namespace pulse::trace
