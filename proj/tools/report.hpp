#pragma once

#include <optional>
#include <string>
#include <vector>

#include "covfair/baselines.hpp"
#include "covfair/corpus.hpp"
#include "covfair/coverage_parity.hpp"
#include "covfair/equal_coverage.hpp"
#include "json.hpp"

namespace covfair::app {

using Json = nlohmann::ordered_json;

/// One scored system on one dataset, as loaded from a `score` output dir.
struct RunData {
    std::string dataset;
    std::string system;
    std::string dir;
    Corpus corpus;
    std::vector<std::optional<CoverageMatrix>> matrices;  // parallel to corpus.samples
    Json manifest;
};

struct ReportOptions {
    stats::BootstrapOptions bootstrap;
    PrMode pr_mode = PrMode::Soft;
    bool dominance = false;
};

struct SystemSummary {
    Json json;
    std::optional<double> ec;  // EC(G)
    std::optional<double> cp;  // CP(G)
    std::vector<std::string> undefined;  // sample ids excluded from the measures
};

/// Computes EC, CP, PR (and dominance analyses on request) for one run.
/// Samples whose measures are undefined are listed and excluded.
SystemSummary summarize_system(const RunData& run, const ReportOptions& options);

Json cp_json(const CpResult& cp, const AttributeSchema& schema);
std::string label_or_none(const std::optional<ValueIndex>& k, const AttributeSchema& schema);

/// Tab-separated rendering of a report produced by the `report` command.
std::string report_to_tsv(const Json& report);

}  // namespace covfair::app
