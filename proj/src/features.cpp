#include "pulse/features.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_set>

namespace pulse::features {

void RawMetrics::validate() const {
    if (op < 0 || tcdm < 0 || transfer < 0 || avgws < 0) {
        throw ValidationError("raw metrics must be non-negative");
    }
}

AggFeatures compute_agg(const RawMetrics& raw) {
    raw.validate();
    AggFeatures out;
    out.f3 = raw.avgws;
    if (raw.op + raw.tcdm == 0) {
        out.f1 = 0.0;
        out.degenerate = true;
    } else {
        out.f1 = static_cast<double>(raw.transfer) / static_cast<double>(raw.op + raw.tcdm);
    }
    if (raw.tcdm == 0) {
        out.f4 = 0.0;
        out.degenerate = true;
    } else {
        out.f4 = static_cast<double>(raw.op) / static_cast<double>(raw.tcdm);
    }
    return out;
}

namespace {

const std::unordered_set<std::string_view>& ir_op_mnemonics() {
    static const std::unordered_set<std::string_view> set = {
        "add",  "sub",  "mul",  "sdiv", "udiv", "srem", "urem", "fadd", "fsub", "fmul",
        "fdiv", "frem", "fneg", "and",  "or",   "xor",  "shl",  "lshr", "ashr", "icmp",
        "fcmp", "br",   "switch", "ret", "indirectbr"};
    return set;
}

std::string_view ir_line_mnemonic(std::string_view line) {
    // Instruction mnemonics appear as the first token after '=' or at the
    // start of the line.
    std::size_t eq = line.find('=');
    std::string_view rest = eq == std::string_view::npos ? line : line.substr(eq + 1);
    rest = trim(rest);
    std::size_t end = rest.find_first_of(" \t");
    return end == std::string_view::npos ? rest : rest.substr(0, end);
}

}  // namespace

IrCategoryCounts count_ir_categories(std::string_view ir_text) {
    IrCategoryCounts counts;
    for (std::string_view raw_line : split(ir_text, '\n')) {
        std::string_view line = trim(raw_line);
        if (line.empty() || line.front() == ';' || line.back() == ':') continue;
        std::string_view mnem = ir_line_mnemonic(line);
        if (mnem.empty()) continue;
        if (mnem == "load" || mnem == "store") {
            ++counts.tcdm;
        } else if (ir_op_mnemonics().contains(mnem)) {
            ++counts.op;
        } else {
            ++counts.residue;
        }
    }
    return counts;
}

const std::array<std::string, 13>& McaReport::field_names() {
    static const std::array<std::string, 13> names = {"uOPSpc", "IPC", "RBP", "RPDiv", "RPFPDiv", "RP0", "RP1",
                                                      "RP2",    "RP3", "RP4", "RP5",   "RP6",     "RP7"};
    return names;
}

std::array<double, 13> McaReport::values() const {
    return {uopspc, ipc, rbp, rp_div, rp_fpdiv, rp[0], rp[1], rp[2], rp[3], rp[4], rp[5], rp[6], rp[7]};
}

void McaReport::validate() const {
    for (double v : values()) {
        if (!std::isfinite(v) || v < 0) throw ValidationError("analyzer report fields must be finite and >= 0");
    }
}

namespace {

double find_summary_value(std::string_view text, std::string_view key) {
    for (std::string_view raw_line : split(text, '\n')) {
        std::string_view line = trim(raw_line);
        if (line.starts_with(key)) {
            return parse_double(line.substr(key.size()), key);
        }
    }
    throw ParseError("analyzer report is missing the \"" + std::string(key) + "\" summary line");
}

std::vector<double> find_pressure_row(std::string_view text) {
    auto lines = split(text, '\n');
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]) != "Resource pressure per iteration:") continue;
        // Skip the column-index header, take the first non-empty row after.
        for (std::size_t j = i + 1; j < lines.size(); ++j) {
            std::string_view row = trim(lines[j]);
            if (row.empty()) continue;
            if (row.front() == '[') continue;  // "[0] [1] ..." header
            std::vector<double> cells;
            std::istringstream ss{std::string(row)};
            std::string cell;
            while (ss >> cell) {
                cells.push_back(cell == "-" ? 0.0 : parse_double(cell, "resource pressure cell"));
            }
            if (cells.size() != 10) {
                throw ParseError("resource pressure row has " + std::to_string(cells.size()) +
                                 " columns, expected 10 (Div, FPDiv, P0..P7)");
            }
            return cells;
        }
        break;
    }
    throw ParseError("analyzer report is missing the \"Resource pressure per iteration:\" section");
}

}  // namespace

McaReport parse_mca_report(std::string_view text) {
    McaReport report;
    report.uopspc = find_summary_value(text, "uOps Per Cycle:");
    report.ipc = find_summary_value(text, "IPC:");
    report.rbp = find_summary_value(text, "Block RThroughput:");
    std::vector<double> cells = find_pressure_row(text);
    report.rp_div = cells[0];
    report.rp_fpdiv = cells[1];
    for (int i = 0; i < 8; ++i) report.rp[i] = cells[2 + i];
    report.validate();
    return report;
}

std::string render_mca_report(const McaReport& report) {
    report.validate();
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.2f", v);
        return std::string(buf);
    };
    auto cell = [&](double v) { return v == 0.0 ? std::string("-") : num(v); };
    std::ostringstream out;
    out << "Iterations:        100\n";
    out << "uOps Per Cycle:    " << num(report.uopspc) << "\n";
    out << "IPC:               " << num(report.ipc) << "\n";
    out << "Block RThroughput: " << num(report.rbp) << "\n";
    out << "\n";
    out << "Resource pressure per iteration:\n";
    out << "[0]    [1]    [2]    [3]    [4]    [5]    [6]    [7]    [8]    [9]\n";
    out << cell(report.rp_div) << "   " << cell(report.rp_fpdiv);
    for (double v : report.rp) out << "   " << cell(v);
    out << "\n";
    return out.str();
}

const std::array<std::string, 10>& DynamicSlice::field_names() {
    static const std::array<std::string, 10> names = {"PE_idle", "PE_sleep", "PE_alu",  "PE_fp",    "PE_l1",
                                                      "PE_l2",   "L1_idle",  "L1_read", "L1_write", "L1_conflicts"};
    return names;
}

std::array<double, 10> DynamicSlice::values() const {
    return {pe_idle, pe_sleep, pe_alu, pe_fp, pe_l1, pe_l2, l1_idle, l1_read, l1_write, l1_conflicts};
}

DynamicSlice extract_dynamic(const energy::ActivityCounts& activity, const energy::ClusterTopology& topo) {
    activity.validate(topo);
    if (activity.region_cycles == 0) {
        throw ValidationError("dynamic features undefined for an empty region (region_cycles = 0)");
    }
    DynamicSlice slice;
    const double r = static_cast<double>(activity.region_cycles);
    const double n = static_cast<double>(topo.n_cores);
    for (const auto& core : activity.per_core) {
        slice.pe_idle += static_cast<double>(core.idle_cycles) / r;
        slice.pe_sleep += static_cast<double>(core.cg_cycles) / r;
        slice.pe_alu += static_cast<double>(core.alu_ops);
        slice.pe_fp += static_cast<double>(core.fp_ops);
        slice.pe_l1 += static_cast<double>(core.l1_ops);
        slice.pe_l2 += static_cast<double>(core.l2_ops);
    }
    slice.pe_idle /= n;
    slice.pe_sleep /= n;
    for (const auto& bank : activity.per_l1_bank) {
        slice.l1_idle += static_cast<double>(bank.idle_cycles);
        slice.l1_read += static_cast<double>(bank.reads);
        slice.l1_write += static_cast<double>(bank.writes);
        slice.l1_conflicts += static_cast<double>(bank.conflict_cycles);
    }
    return slice;
}

FeatureSetTag parse_feature_set_tag(std::string_view name) {
    if (name == "AGG") return FeatureSetTag::Agg;
    if (name == "MCA") return FeatureSetTag::Mca;
    if (name == "AGG+MCA") return FeatureSetTag::AggMca;
    if (name == "RAW+AGG+MCA") return FeatureSetTag::RawAggMca;
    if (name == "DYNAMIC") return FeatureSetTag::Dynamic;
    if (name == "OPTIMISED") return FeatureSetTag::Optimised;
    throw ValidationError("unknown feature set \"" + std::string(name) +
                          "\" (expected AGG, MCA, AGG+MCA, RAW+AGG+MCA, DYNAMIC or OPTIMISED)");
}

std::string_view feature_set_tag_name(FeatureSetTag tag) {
    switch (tag) {
        case FeatureSetTag::Agg: return "AGG";
        case FeatureSetTag::Mca: return "MCA";
        case FeatureSetTag::AggMca: return "AGG+MCA";
        case FeatureSetTag::RawAggMca: return "RAW+AGG+MCA";
        case FeatureSetTag::Dynamic: return "DYNAMIC";
        case FeatureSetTag::Optimised: return "OPTIMISED";
    }
    throw ValidationError("invalid feature set tag");
}

namespace {

std::vector<std::string> raw_names() { return {"op", "tcdm", "transfer", "avgws"}; }
std::vector<std::string> agg_names() { return {"F1", "F3", "F4"}; }

std::vector<std::string> mca_names() {
    const auto& fields = McaReport::field_names();
    return {fields.begin(), fields.end()};
}

std::vector<std::string> dynamic_names() {
    std::vector<std::string> names;
    names.reserve(80);
    for (int p = 1; p <= 8; ++p) {
        for (const std::string& field : DynamicSlice::field_names()) {
            names.push_back(field + "_p" + std::to_string(p));
        }
    }
    return names;
}

// Top six static features by tree importance.
std::vector<std::string> optimised_names() { return {"avgws", "F4", "F1", "RP4", "uOPSpc", "RP7"}; }

void append(std::vector<std::string>& dst, std::vector<std::string> src) {
    for (auto& s : src) dst.push_back(std::move(s));
}

}  // namespace

std::vector<std::string> feature_names(FeatureSetTag tag) {
    std::vector<std::string> names;
    switch (tag) {
        case FeatureSetTag::Agg: return agg_names();
        case FeatureSetTag::Mca: return mca_names();
        case FeatureSetTag::AggMca:
            append(names, agg_names());
            append(names, mca_names());
            return names;
        case FeatureSetTag::RawAggMca:
            append(names, raw_names());
            append(names, agg_names());
            append(names, mca_names());
            return names;
        case FeatureSetTag::Dynamic: return dynamic_names();
        case FeatureSetTag::Optimised: return optimised_names();
    }
    throw ValidationError("invalid feature set tag");
}

FeatureVector assemble_vector(FeatureSetTag tag, const FeatureParts& parts) {
    auto need_raw = [&]() -> const RawMetrics& {
        if (!parts.raw) throw ValidationError("feature set needs raw metrics (op/tcdm/transfer/avgws)");
        return *parts.raw;
    };
    auto need_agg = [&]() -> const AggFeatures& {
        if (!parts.agg) throw ValidationError("feature set needs aggregate features");
        return *parts.agg;
    };
    auto need_mca = [&]() -> const McaReport& {
        if (!parts.mca) throw ValidationError("feature set needs an analyzer report");
        return *parts.mca;
    };

    FeatureVector vec;
    vec.tag = tag;
    vec.names = feature_names(tag);
    auto push_agg = [&] {
        const AggFeatures& agg = need_agg();
        vec.values.push_back(agg.f1);
        vec.values.push_back(agg.f3);
        vec.values.push_back(agg.f4);
    };
    auto push_mca = [&] {
        for (double v : need_mca().values()) vec.values.push_back(v);
    };
    switch (tag) {
        case FeatureSetTag::Agg: push_agg(); break;
        case FeatureSetTag::Mca: push_mca(); break;
        case FeatureSetTag::AggMca:
            push_agg();
            push_mca();
            break;
        case FeatureSetTag::RawAggMca: {
            const RawMetrics& raw = need_raw();
            vec.values.push_back(static_cast<double>(raw.op));
            vec.values.push_back(static_cast<double>(raw.tcdm));
            vec.values.push_back(static_cast<double>(raw.transfer));
            vec.values.push_back(raw.avgws);
            push_agg();
            push_mca();
            break;
        }
        case FeatureSetTag::Dynamic: {
            for (int p = 1; p <= 8; ++p) {
                auto it = parts.dynamic.find(p);
                if (it == parts.dynamic.end()) {
                    throw ValidationError("DYNAMIC features need all 8 core counts; missing p=" + std::to_string(p));
                }
                for (double v : it->second.values()) vec.values.push_back(v);
            }
            break;
        }
        case FeatureSetTag::Optimised: {
            const RawMetrics& raw = need_raw();
            const AggFeatures& agg = need_agg();
            const McaReport& mca = need_mca();
            vec.values.push_back(raw.avgws);
            vec.values.push_back(agg.f4);
            vec.values.push_back(agg.f1);
            vec.values.push_back(mca.rp[4]);
            vec.values.push_back(mca.uopspc);
            vec.values.push_back(mca.rp[7]);
            break;
        }
    }
    if (vec.values.size() != vec.names.size()) {
        throw ValidationError("assembled feature vector length mismatch");
    }
    return vec;
}

void ManifestRecord::validate() const {
    if (kernel.empty()) throw ValidationError("manifest record: empty kernel name");
    if (dtype != "int32" && dtype != "fp32") {
        throw ValidationError("manifest record " + kernel + ": dtype must be int32 or fp32, got \"" + dtype + "\"");
    }
    if (size_bytes <= 0) throw ValidationError("manifest record " + kernel + ": size_bytes must be positive");
    if (transfer < 0 || avgws < 0) throw ValidationError("manifest record " + kernel + ": negative metric");
    if ((op && *op < 0) || (tcdm && *tcdm < 0)) {
        throw ValidationError("manifest record " + kernel + ": negative op/tcdm override");
    }
}

}  // namespace pulse::features
