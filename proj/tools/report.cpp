#include "report.hpp"

#include <sstream>

#include "covfair/errors.hpp"
#include "covfair/stats.hpp"

namespace covfair::app {

std::string label_or_none(const std::optional<ValueIndex>& k, const AttributeSchema& schema) {
    return k ? schema.label(*k) : std::string("none");
}

Json cp_json(const CpResult& cp, const AttributeSchema& schema) {
    Json j;
    j["CP(G)"] = cp.cp;
    j["over"] = label_or_none(cp.most_over, schema);
    j["under"] = label_or_none(cp.most_under, schema);
    Json rows = Json::array();
    for (ValueIndex k = 0; k < cp.per_value.size(); ++k) {
        const auto& v = cp.per_value[k];
        Json row;
        row["label"] = schema.label(k);
        row["E(C_k)"] = v.mean_diff;
        row["count"] = v.count;
        row["ci_low"] = v.ci_low;
        row["ci_high"] = v.ci_high;
        row["significant"] = v.significant;
        rows.push_back(std::move(row));
    }
    j["per_value"] = std::move(rows);
    return j;
}

namespace {

Json ec_row(const EcResult& r, const AttributeSchema& schema) {
    Json row;
    row["sample_id"] = r.sample_id;
    row["ec"] = r.ec;
    row["p(d,s)"] = r.doc_coverage;
    Json per = Json::object();
    Json absent = Json::array();
    for (ValueIndex k = 0; k < schema.size(); ++k) {
        if (r.per_value_coverage[k]) {
            per[schema.label(k)] = *r.per_value_coverage[k];
        } else {
            per[schema.label(k)] = nullptr;
            absent.push_back(schema.label(k));
        }
    }
    row["p(d,s|a=k)"] = std::move(per);
    row["absent_values"] = std::move(absent);
    return row;
}

Json dominance_json(const DominanceDifference& d, DominanceMeasure measure,
                    const AttributeSchema& schema) {
    Json j;
    j["max_diff"] = d.max_diff;
    Json strata = Json::object();
    for (ValueIndex k = 0; k < schema.size(); ++k) {
        if (measure == DominanceMeasure::Ec) {
            strata[schema.label(k)] = d.per_stratum[k][0] ? Json(*d.per_stratum[k][0]) : Json();
        } else {
            Json per = Json::object();
            for (ValueIndex v = 0; v < schema.size(); ++v) {
                per[schema.label(v)] = d.per_stratum[k][v] ? Json(*d.per_stratum[k][v]) : Json();
            }
            strata[schema.label(k)] = std::move(per);
        }
    }
    j["per_stratum"] = std::move(strata);
    j["pair"] = {label_or_none(d.stratum_a, schema), label_or_none(d.stratum_b, schema)};
    if (measure == DominanceMeasure::CpPerValue) j["value"] = label_or_none(d.value, schema);
    j["ci_low"] = d.ci.ci_low;
    j["ci_high"] = d.ci.ci_high;
    j["significant"] = d.significant;
    return j;
}

}  // namespace

SystemSummary summarize_system(const RunData& run, const ReportOptions& options) {
    const auto& schema = run.corpus.schema;
    SystemSummary out;
    Corpus defined;
    defined.schema = schema;
    std::vector<CoverageMatrix> matrices;
    for (std::size_t s = 0; s < run.corpus.samples.size(); ++s) {
        const auto& sample = run.corpus.samples[s];
        if (!run.matrices[s] || sample.summary_units.empty()) {
            out.undefined.push_back(sample.id);
            continue;
        }
        defined.samples.push_back(sample);
        matrices.push_back(*run.matrices[s]);
    }

    Json& j = out.json;
    j["system"] = run.system;
    j["run_dir"] = run.dir;
    j["provider"] = run.manifest.value("provider", "unknown");
    j["run_config_hash"] = run.manifest.value("config_hash", "");
    j["samples"] = run.corpus.samples.size();
    j["undefined_samples"] = out.undefined;
    if (defined.samples.empty()) {
        j["note"] = "no sample has a defined measure";
        return out;
    }

    auto ec = corpus_ec(defined, matrices);
    out.ec = ec.ec;
    Json ec_json;
    ec_json["EC(G)"] = ec.ec;
    Json rows = Json::array();
    std::vector<std::string> audited;
    for (const auto& r : ec.samples) {
        rows.push_back(ec_row(r, schema));
        if (r.has_absent_values()) audited.push_back(r.sample_id);
    }
    ec_json["samples_with_absent_values"] = audited;
    ec_json["samples"] = std::move(rows);
    j["ec"] = std::move(ec_json);

    try {
        auto cp = coverage_parity(defined, matrices, options.bootstrap);
        out.cp = cp.cp;
        j["cp"] = cp_json(cp, schema);
    } catch (const CoverageError& e) {
        j["cp"] = Json{{"error", e.what()}};
    }

    Json pr_json;
    Json pr_rows = Json::array();
    std::vector<double> pr_values;
    std::vector<double> ec_values;
    for (std::size_t s = 0; s < defined.samples.size(); ++s) {
        auto pr = proportional_representation(matrices[s], defined.samples[s], schema,
                                              options.pr_mode);
        pr_values.push_back(pr.pr);
        ec_values.push_back(ec.samples[s].ec);
        Json row;
        row["sample_id"] = pr.sample_id;
        row["pr"] = pr.pr;
        row["summary_dist"] = pr.summary_dist;
        row["input_dist"] = pr.input_dist;
        pr_rows.push_back(std::move(row));
    }
    pr_json["mode"] = options.pr_mode == PrMode::Soft ? "soft" : "hard";
    pr_json["PR(G)"] = stats::mean(pr_values);
    try {
        pr_json["spearman_ec_pr"] = stats::spearman(ec_values, pr_values);
    } catch (const Error&) {
        pr_json["spearman_ec_pr"] = nullptr;
    }
    pr_json["samples"] = std::move(pr_rows);
    j["pr"] = std::move(pr_json);

    if (options.dominance) {
        Json dom;
        auto partition = dominance_partition(defined);
        Json sizes = Json::object();
        for (ValueIndex k = 0; k < schema.size(); ++k) sizes[schema.label(k)] = partition.strata[k].size();
        dom["strata_sizes"] = std::move(sizes);
        dom["unassigned"] = partition.unassigned.size();
        for (auto [name, measure] : {std::pair{"ec", DominanceMeasure::Ec},
                                     std::pair{"cp", DominanceMeasure::CpPerValue}}) {
            try {
                dom[name] = dominance_json(
                    dominance_differences(defined, matrices, measure, options.bootstrap), measure,
                    schema);
            } catch (const Error& e) {
                dom[name] = Json{{"error", e.what()}};
            }
        }
        j["dominance"] = std::move(dom);
    }
    return out;
}

namespace {

std::string num(const Json& v) {
    if (v.is_null()) return "NA";
    std::ostringstream ss;
    ss.precision(6);
    ss << std::fixed << v.get<double>();
    return ss.str();
}

}  // namespace

std::string report_to_tsv(const Json& report) {
    std::ostringstream out;
    out << "# tool\t" << report["tool"].get<std::string>() << '\t'
        << report["version"].get<std::string>() << '\n';
    out << "# config_hash\t" << report["config_hash"].get<std::string>() << '\n';
    out << "# seed\t" << report["seed"].get<std::uint64_t>() << '\n';

    out << "section\tdataset\tsystem\tprovider\tEC(G)\tCP(G)\tover\tunder\tPR(G)\n";
    for (const auto& ds : report["datasets"]) {
        for (const auto& sys : ds["systems"]) {
            out << "corpus\t" << ds["name"].get<std::string>() << '\t'
                << sys["system"].get<std::string>() << '\t' << sys["provider"].get<std::string>();
            if (sys.contains("ec")) {
                out << '\t' << num(sys["ec"]["EC(G)"]);
            } else {
                out << "\tNA";
            }
            if (sys.contains("cp") && sys["cp"].contains("CP(G)")) {
                const auto& cp = sys["cp"];
                out << '\t' << num(cp["CP(G)"]) << '\t' << cp["over"].get<std::string>() << '\t'
                    << cp["under"].get<std::string>();
            } else {
                out << "\tNA\tNA\tNA";
            }
            out << '\t' << (sys.contains("pr") ? num(sys["pr"]["PR(G)"]) : "NA") << '\n';
        }
    }

    out << "section\tdataset\tsystem\tlabel\tE(C_k)\tcount\tci_low\tci_high\tsignificant\n";
    for (const auto& ds : report["datasets"]) {
        for (const auto& sys : ds["systems"]) {
            if (!sys.contains("cp") || !sys["cp"].contains("per_value")) continue;
            for (const auto& v : sys["cp"]["per_value"]) {
                out << "value\t" << ds["name"].get<std::string>() << '\t'
                    << sys["system"].get<std::string>() << '\t' << v["label"].get<std::string>()
                    << '\t' << num(v["E(C_k)"]) << '\t' << v["count"].get<std::size_t>() << '\t'
                    << num(v["ci_low"]) << '\t' << num(v["ci_high"]) << '\t'
                    << (v["significant"].get<bool>() ? "true" : "false") << '\n';
            }
        }
    }

    for (const auto& ds : report["datasets"]) {
        const auto& labels = ds["schema"]["values"];
        out << "section\tdataset\tsystem\tsample_id\tec\tp(d,s)";
        for (const auto& l : labels) out << "\tp(d,s|a=" << l.get<std::string>() << ")";
        out << '\n';
        for (const auto& sys : ds["systems"]) {
            if (!sys.contains("ec")) continue;
            for (const auto& row : sys["ec"]["samples"]) {
                out << "sample\t" << ds["name"].get<std::string>() << '\t'
                    << sys["system"].get<std::string>() << '\t'
                    << row["sample_id"].get<std::string>() << '\t' << num(row["ec"]) << '\t'
                    << num(row["p(d,s)"]);
                for (const auto& l : labels) out << '\t' << num(row["p(d,s|a=k)"][l.get<std::string>()]);
                out << '\n';
            }
        }
    }

    if (report.contains("overall")) {
        out << "section\tmeasure\tsystem\toverall\n";
        for (const auto& [measure, scores] : report["overall"].items()) {
            for (const auto& [system, v] : scores.items()) {
                out << "overall\t" << measure << '\t' << system << '\t' << num(v) << '\n';
            }
        }
    } else if (report.contains("overall_note")) {
        out << "# overall\t" << report["overall_note"].get<std::string>() << '\n';
    }
    return out.str();
}

}  // namespace covfair::app
