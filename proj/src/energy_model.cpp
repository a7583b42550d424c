#include "pulse/energy_model.hpp"

#include <map>

namespace pulse::energy {

EnergyCostTable default_cost_table() {
    EnergyCostTable t;
    t.pe = {182, 1212, 2558, 2468, 3242, 1011, 20};
    t.fpu = {191, 299, 0};
    t.l1_bank = {49, 2543, 2568, 64};
    t.l2_bank = {105, 2942, 3480, 13};
    t.icache = {774, 4492, 5932};
    t.dma = {165, 1750, 46};
    t.other = {655, 2702};
    return t;
}

std::vector<std::pair<std::string, std::int64_t>> EnergyCostTable::entries() const {
    return {
        {"pe.leakage", pe.leakage},
        {"pe.nop", pe.nop},
        {"pe.alu", pe.alu},
        {"pe.fp", pe.fp},
        {"pe.l1", pe.l1},
        {"pe.l2", pe.l2},
        {"pe.cg", pe.cg},
        {"fpu.leakage", fpu.leakage},
        {"fpu.operative", fpu.operative},
        {"fpu.idle", fpu.idle},
        {"l1_bank.leakage", l1_bank.leakage},
        {"l1_bank.read", l1_bank.read},
        {"l1_bank.write", l1_bank.write},
        {"l1_bank.idle", l1_bank.idle},
        {"l2_bank.leakage", l2_bank.leakage},
        {"l2_bank.read", l2_bank.read},
        {"l2_bank.write", l2_bank.write},
        {"l2_bank.idle", l2_bank.idle},
        {"icache.leakage", icache.leakage},
        {"icache.use", icache.use},
        {"icache.refill", icache.refill},
        {"dma.leakage", dma.leakage},
        {"dma.transfer", dma.transfer},
        {"dma.idle", dma.idle},
        {"other.leakage", other.leakage},
        {"other.active", other.active},
    };
}

void EnergyCostTable::validate() const {
    for (const auto& [key, value] : entries()) {
        if (value < 0) throw ValidationError("negative cost for " + key);
    }
}

namespace {

std::int64_t* slot_for_key(EnergyCostTable& t, std::string_view key) {
    struct Entry {
        const char* name;
        std::int64_t* ptr;
    };
    const Entry entries[] = {
        {"pe.leakage", &t.pe.leakage},       {"pe.nop", &t.pe.nop},
        {"pe.alu", &t.pe.alu},               {"pe.fp", &t.pe.fp},
        {"pe.l1", &t.pe.l1},                 {"pe.l2", &t.pe.l2},
        {"pe.cg", &t.pe.cg},                 {"fpu.leakage", &t.fpu.leakage},
        {"fpu.operative", &t.fpu.operative}, {"fpu.idle", &t.fpu.idle},
        {"l1_bank.leakage", &t.l1_bank.leakage}, {"l1_bank.read", &t.l1_bank.read},
        {"l1_bank.write", &t.l1_bank.write}, {"l1_bank.idle", &t.l1_bank.idle},
        {"l2_bank.leakage", &t.l2_bank.leakage}, {"l2_bank.read", &t.l2_bank.read},
        {"l2_bank.write", &t.l2_bank.write}, {"l2_bank.idle", &t.l2_bank.idle},
        {"icache.leakage", &t.icache.leakage}, {"icache.use", &t.icache.use},
        {"icache.refill", &t.icache.refill}, {"dma.leakage", &t.dma.leakage},
        {"dma.transfer", &t.dma.transfer},   {"dma.idle", &t.dma.idle},
        {"other.leakage", &t.other.leakage}, {"other.active", &t.other.active},
    };
    for (const auto& e : entries) {
        if (key == e.name) return e.ptr;
    }
    return nullptr;
}

}  // namespace

EnergyCostTable parse_cost_table(std::string_view text, const std::string& origin) {
    EnergyCostTable table{};  // zero-initialized; every key must be assigned
    std::map<std::string, bool> seen;
    for (const auto& [key, _] : table.entries()) seen[key] = false;

    std::size_t line_no = 0;
    for (std::string_view line : split(text, '\n')) {
        ++line_no;
        std::string_view s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        std::size_t eq = s.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError(origin + ":" + std::to_string(line_no) + ": expected \"key = value\"");
        }
        std::string key(trim(s.substr(0, eq)));
        std::int64_t* slot = slot_for_key(table, key);
        if (slot == nullptr) {
            throw ParseError(origin + ":" + std::to_string(line_no) + ": unknown cost key \"" + key + "\"");
        }
        if (seen.at(key)) {
            throw ParseError(origin + ":" + std::to_string(line_no) + ": duplicate cost key \"" + key + "\"");
        }
        std::int64_t value = parse_int(s.substr(eq + 1), "cost " + key);
        if (value < 0) {
            throw ValidationError(origin + ":" + std::to_string(line_no) + ": negative cost for " + key);
        }
        *slot = value;
        seen[key] = true;
    }
    for (const auto& [key, present] : seen) {
        if (!present) throw ValidationError(origin + ": missing cost key \"" + key + "\"");
    }
    return table;
}

EnergyCostTable load_cost_table(const std::string& path) {
    return parse_cost_table(read_text_file(path), path);
}

void ClusterTopology::validate() const {
    if (n_cores < 1) throw ValidationError("topology: n_cores must be >= 1");
    if (n_fpus < 1 || n_l1_banks < 1 || n_l2_banks < 1) {
        throw ValidationError("topology: component counts must be >= 1");
    }
}

void ActivityCounts::validate(const ClusterTopology& topo) const {
    topo.validate();
    if (region_cycles < 0) throw ValidationError("activity: negative region_cycles");
    auto shape = [&](std::size_t have, int want, const char* what) {
        if (have != static_cast<std::size_t>(want)) {
            throw ValidationError(std::string("activity: ") + what + " count " + std::to_string(have) +
                                  " does not match topology " + std::to_string(want));
        }
    };
    shape(per_core.size(), topo.n_cores, "core");
    shape(per_fpu.size(), topo.n_fpus, "fpu");
    shape(per_l1_bank.size(), topo.n_l1_banks, "l1 bank");
    shape(per_l2_bank.size(), topo.n_l2_banks, "l2 bank");

    for (std::size_t i = 0; i < per_core.size(); ++i) {
        const auto& c = per_core[i];
        if (c.alu_ops < 0 || c.fp_ops < 0 || c.l1_ops < 0 || c.l2_ops < 0 || c.idle_cycles < 0 || c.cg_cycles < 0) {
            throw ValidationError("activity: negative count on core " + std::to_string(i));
        }
        if (c.total() != region_cycles) {
            throw ValidationError("activity: core " + std::to_string(i) + " cycle accounting does not close (" +
                                  std::to_string(c.total()) + " of " + std::to_string(region_cycles) + " cycles)");
        }
    }
    for (std::size_t j = 0; j < per_fpu.size(); ++j) {
        if (per_fpu[j].active_cycles < 0 || per_fpu[j].active_cycles > region_cycles) {
            throw ValidationError("activity: fpu " + std::to_string(j) + " active cycles exceed region");
        }
    }
    for (std::size_t k = 0; k < per_l1_bank.size(); ++k) {
        const auto& b = per_l1_bank[k];
        if (b.reads < 0 || b.writes < 0 || b.conflict_cycles < 0 || b.idle_cycles < 0) {
            throw ValidationError("activity: negative count on l1 bank " + std::to_string(k));
        }
        if (b.reads + b.writes + b.idle_cycles != region_cycles) {
            throw ValidationError("activity: l1 bank " + std::to_string(k) + " service accounting does not close");
        }
    }
    for (std::size_t m = 0; m < per_l2_bank.size(); ++m) {
        const auto& b = per_l2_bank[m];
        if (b.reads < 0 || b.writes < 0 || b.idle_cycles < 0) {
            throw ValidationError("activity: negative count on l2 bank " + std::to_string(m));
        }
        if (b.reads + b.writes + b.idle_cycles != region_cycles) {
            throw ValidationError("activity: l2 bank " + std::to_string(m) + " service accounting does not close");
        }
    }
    if (icache.uses < 0 || icache.refills < 0) throw ValidationError("activity: negative icache count");
    if (dma.transfer_beats < 0 || dma.idle_cycles < 0 || dma.idle_cycles > region_cycles) {
        throw ValidationError("activity: dma counts out of range");
    }
    if (cluster_active_cycles < 0 || cluster_active_cycles > region_cycles) {
        throw ValidationError("activity: cluster_active_cycles exceed region");
    }
}

namespace detail {

std::int64_t core_energy_raw(const CoreActivity& c, std::int64_t r, const EnergyCostTable& t) {
    return t.pe.leakage * r + t.pe.alu * c.alu_ops + t.pe.fp * c.fp_ops + t.pe.l1 * c.l1_ops + t.pe.l2 * c.l2_ops +
           t.pe.nop * c.idle_cycles + t.pe.cg * c.cg_cycles;
}

std::int64_t fpu_energy_raw(const FpuActivity& f, std::int64_t r, const EnergyCostTable& t) {
    return t.fpu.leakage * r + t.fpu.operative * f.active_cycles + t.fpu.idle * (r - f.active_cycles);
}

std::int64_t l1_bank_energy_raw(const L1BankActivity& b, std::int64_t r, const EnergyCostTable& t) {
    return t.l1_bank.leakage * r + t.l1_bank.read * b.reads + t.l1_bank.write * b.writes +
           t.l1_bank.idle * b.idle_cycles;
}

std::int64_t l2_bank_energy_raw(const L2BankActivity& b, std::int64_t r, const EnergyCostTable& t) {
    return t.l2_bank.leakage * r + t.l2_bank.read * b.reads + t.l2_bank.write * b.writes +
           t.l2_bank.idle * b.idle_cycles;
}

std::int64_t icache_energy_raw(const IcacheActivity& i, std::int64_t r, const EnergyCostTable& t) {
    return t.icache.leakage * r + t.icache.use * i.uses + t.icache.refill * i.refills;
}

std::int64_t dma_energy_raw(const DmaActivity& d, std::int64_t r, const EnergyCostTable& t) {
    return t.dma.leakage * r + t.dma.transfer * d.transfer_beats + t.dma.idle * d.idle_cycles;
}

std::int64_t other_energy_raw(std::int64_t active, std::int64_t r, const EnergyCostTable& t) {
    return t.other.leakage * r + t.other.active * active;
}

}  // namespace detail

std::int64_t component_energy(const CoreActivity& c, std::int64_t region_cycles, const EnergyCostTable& costs) {
    if (c.alu_ops < 0 || c.fp_ops < 0 || c.l1_ops < 0 || c.l2_ops < 0 || c.idle_cycles < 0 || c.cg_cycles < 0) {
        throw ValidationError("core energy: negative count");
    }
    if (c.total() != region_cycles) {
        throw ValidationError("core energy: cycle accounting does not close");
    }
    return detail::core_energy_raw(c, region_cycles, costs);
}

std::int64_t component_energy(const FpuActivity& f, std::int64_t region_cycles, const EnergyCostTable& costs) {
    if (f.active_cycles < 0 || f.active_cycles > region_cycles) {
        throw ValidationError("fpu energy: active cycles exceed region");
    }
    return detail::fpu_energy_raw(f, region_cycles, costs);
}

std::int64_t component_energy(const L1BankActivity& b, std::int64_t region_cycles, const EnergyCostTable& costs) {
    if (b.reads < 0 || b.writes < 0 || b.conflict_cycles < 0 || b.idle_cycles < 0) {
        throw ValidationError("l1 bank energy: negative count");
    }
    if (b.reads + b.writes + b.idle_cycles != region_cycles) {
        throw ValidationError("l1 bank energy: service accounting does not close");
    }
    return detail::l1_bank_energy_raw(b, region_cycles, costs);
}

std::int64_t component_energy(const L2BankActivity& b, std::int64_t region_cycles, const EnergyCostTable& costs) {
    if (b.reads < 0 || b.writes < 0 || b.idle_cycles < 0) {
        throw ValidationError("l2 bank energy: negative count");
    }
    if (b.reads + b.writes + b.idle_cycles != region_cycles) {
        throw ValidationError("l2 bank energy: service accounting does not close");
    }
    return detail::l2_bank_energy_raw(b, region_cycles, costs);
}

std::int64_t component_energy(const IcacheActivity& i, std::int64_t region_cycles, const EnergyCostTable& costs) {
    if (i.uses < 0 || i.refills < 0 || region_cycles < 0) {
        throw ValidationError("icache energy: negative count");
    }
    return detail::icache_energy_raw(i, region_cycles, costs);
}

std::int64_t component_energy(const DmaActivity& d, std::int64_t region_cycles, const EnergyCostTable& costs) {
    if (d.transfer_beats < 0 || d.idle_cycles < 0 || d.idle_cycles > region_cycles) {
        throw ValidationError("dma energy: counts out of range");
    }
    return detail::dma_energy_raw(d, region_cycles, costs);
}

std::int64_t other_energy(std::int64_t cluster_active_cycles, std::int64_t region_cycles,
                          const EnergyCostTable& costs) {
    if (cluster_active_cycles < 0 || cluster_active_cycles > region_cycles) {
        throw ValidationError("other energy: active cycles exceed region");
    }
    return detail::other_energy_raw(cluster_active_cycles, region_cycles, costs);
}

EnergyBreakdown total_energy(const ActivityCounts& activity, const ClusterTopology& topo,
                             const EnergyCostTable& costs) {
    activity.validate(topo);
    costs.validate();

    EnergyBreakdown out;
    const std::int64_t r = activity.region_cycles;
    auto add = [&](std::string name, std::int64_t fj) {
        out.per_component.emplace_back(std::move(name), fj);
        out.total_fj += fj;
    };
    for (std::size_t i = 0; i < activity.per_core.size(); ++i) {
        add("pe" + std::to_string(i), component_energy(activity.per_core[i], r, costs));
    }
    for (std::size_t j = 0; j < activity.per_fpu.size(); ++j) {
        add("fpu" + std::to_string(j), component_energy(activity.per_fpu[j], r, costs));
    }
    for (std::size_t k = 0; k < activity.per_l1_bank.size(); ++k) {
        add("l1_bank" + std::to_string(k), component_energy(activity.per_l1_bank[k], r, costs));
    }
    for (std::size_t m = 0; m < activity.per_l2_bank.size(); ++m) {
        add("l2_bank" + std::to_string(m), component_energy(activity.per_l2_bank[m], r, costs));
    }
    add("icache", component_energy(activity.icache, r, costs));
    add("dma", component_energy(activity.dma, r, costs));
    add("other", other_energy(activity.cluster_active_cycles, r, costs));
    return out;
}

}  // namespace pulse::energy
