#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pulse/energy_model.hpp"

namespace pulse::features {

// Raw static code metrics. op counts ALU+FP+JUMP opcodes, tcdm counts
// scratchpad accesses, transfer is the payload size in bytes, avgws the
// average number of concurrent iterations of the parallel regions.
struct RawMetrics {
    std::int64_t op = 0;
    std::int64_t tcdm = 0;
    std::int64_t transfer = 0;
    double avgws = 0.0;

    void validate() const;
};

// Aggregate ratios. A zero denominator yields 0 with the degenerate flag
// set so the vector stays finite without losing the information.
struct AggFeatures {
    double f1 = 0.0;  // transfer / (op + tcdm)
    double f3 = 0.0;  // avgws
    double f4 = 0.0;  // op / tcdm
    bool degenerate = false;
};

AggFeatures compute_agg(const RawMetrics& raw);

// Opcode-category counts scraped from LLVM-style textual IR. Loads and
// stores all count as scratchpad traffic; unknown instructions land in
// residue.
struct IrCategoryCounts {
    std::int64_t op = 0;
    std::int64_t tcdm = 0;
    std::int64_t residue = 0;
};

IrCategoryCounts count_ir_categories(std::string_view ir_text);

// Machine-code-analyzer fingerprint: throughput summary plus per-port
// resource pressures in the canonical 10-port order
// (Div, FPDiv, P0..P7).
struct McaReport {
    double uopspc = 0.0;
    double ipc = 0.0;
    double rbp = 0.0;
    double rp_div = 0.0;
    double rp_fpdiv = 0.0;
    std::array<double, 8> rp{};

    static const std::array<std::string, 13>& field_names();
    std::array<double, 13> values() const;
    void validate() const;  // finite and >= 0
};

// Parses an analyzer report: the three summary lines and the resource
// pressure row ('-' cells read as 0). Missing summary lines and malformed
// pressure rows are named in the error.
McaReport parse_mca_report(std::string_view text);

// Renders the equivalent report text (fixture format; parse of a render
// is the identity for two-decimal values).
std::string render_mca_report(const McaReport& report);

// Per-core-count profile slice. Fractions average over all physical
// cores (inactive cores count as sleeping); counts sum over cores/banks.
struct DynamicSlice {
    double pe_idle = 0.0;
    double pe_sleep = 0.0;
    double pe_alu = 0.0;
    double pe_fp = 0.0;
    double pe_l1 = 0.0;
    double pe_l2 = 0.0;
    double l1_idle = 0.0;
    double l1_read = 0.0;
    double l1_write = 0.0;
    double l1_conflicts = 0.0;

    static const std::array<std::string, 10>& field_names();
    std::array<double, 10> values() const;
};

DynamicSlice extract_dynamic(const energy::ActivityCounts& activity, const energy::ClusterTopology& topo);

enum class FeatureSetTag { Agg, Mca, AggMca, RawAggMca, Dynamic, Optimised };

FeatureSetTag parse_feature_set_tag(std::string_view name);
std::string_view feature_set_tag_name(FeatureSetTag tag);

// Canonical feature ordering for a tag; CSV headers reproduce it
// byte-for-byte.
std::vector<std::string> feature_names(FeatureSetTag tag);

struct FeatureVector {
    FeatureSetTag tag = FeatureSetTag::Agg;
    std::vector<std::string> names;
    std::vector<double> values;
};

struct FeatureParts {
    std::optional<RawMetrics> raw;
    std::optional<AggFeatures> agg;
    std::optional<McaReport> mca;
    std::map<int, DynamicSlice> dynamic;  // core count p in 1..8 -> slice
};

// Assembles the fixed-order vector for a tag; every part the tag needs
// must be present (DYNAMIC needs all 8 core counts).
FeatureVector assemble_vector(FeatureSetTag tag, const FeatureParts& parts);

// Kernel manifest record (one per kernel instance). op/tcdm are optional
// static-count overrides; feature sets that need them fail loudly when
// they are absent.
struct ManifestRecord {
    std::string kernel;
    std::string suite;
    std::string dtype;  // int32 | fp32
    std::int64_t size_bytes = 0;
    std::int64_t transfer = 0;
    double avgws = 0.0;
    std::optional<std::int64_t> op;
    std::optional<std::int64_t> tcdm;

    std::string sample_id() const { return kernel + "." + dtype + "." + std::to_string(size_bytes); }
    void validate() const;
};

}  // namespace pulse::features
