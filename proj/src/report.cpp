#include "gqr/report.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

#include <nlohmann/json.hpp>

#include "gqr/error.hpp"

namespace gqr {

namespace {

std::string fmt(double v, int decimals = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string fmt_p(double p) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", p);
    return buf;
}

std::string summary_cell(const MetricSummary& s) {
    return fmt(s.avg) + " ± " + fmt(s.std);
}

std::string with_sig(std::string cell, const std::string& sig) {
    if (!sig.empty()) cell += " ^{" + sig + "}";
    return cell;
}

std::string bold(std::string cell, bool on) {
    return on ? "**" + cell + "**" : cell;
}

void substitution_table(std::string& out, const std::string& title,
                        const SubstitutionRow& baseline,
                        const std::vector<SubstitutionRow>& rows) {
    out += "## " + title + "\n\n";
    out += "| Model | Min | Max | Avg ± Std |\n";
    out += "|---|---|---|---|\n";
    out += "| " + baseline.system + " | " + fmt(baseline.summary.min) + " | " +
           fmt(baseline.summary.max) + " | " + summary_cell(baseline.summary) +
           " |\n";
    double best_min = rows[0].summary.min, best_max = rows[0].summary.max,
           best_avg = rows[0].summary.avg;
    for (const auto& row : rows) {
        best_min = std::max(best_min, row.summary.min);
        best_max = std::max(best_max, row.summary.max);
        best_avg = std::max(best_avg, row.summary.avg);
    }
    for (const auto& row : rows) {
        out += "| " + row.system + " | " +
               bold(fmt(row.summary.min), row.summary.min == best_min) + " | " +
               bold(fmt(row.summary.max), row.summary.max == best_max) + " | " +
               with_sig(bold(summary_cell(row.summary),
                             row.summary.avg == best_avg),
                        row.sig) +
               " |\n";
    }
    out += "\n";
}

void concat_table(std::string& out, const std::string& title, int k,
                  const ConcatTableRow& baseline,
                  const std::vector<ConcatTableRow>& rows) {
    out += "## " + title + "\n\n";
    out += "| Model |";
    for (int r = 1; r <= k; ++r) out += " rank " + std::to_string(r) + " |";
    out += "\n|---|";
    for (int r = 1; r <= k; ++r) out += "---|";
    out += "\n| " + baseline.system + " |";
    for (double v : baseline.means) out += " " + fmt(v) + " |";
    out += "\n";
    std::vector<double> best(static_cast<std::size_t>(k),
                             -std::numeric_limits<double>::infinity());
    for (const auto& row : rows)
        for (std::size_t r = 0; r < row.means.size(); ++r)
            best[r] = std::max(best[r], row.means[r]);
    for (const auto& row : rows) {
        out += "| " + row.system + " |";
        for (std::size_t r = 0; r < row.means.size(); ++r) {
            out += " " +
                   with_sig(bold(fmt(row.means[r]), row.means[r] == best[r]),
                            row.sig[r]) +
                   " |";
        }
        out += "\n";
    }
    out += "\n";
}

} // namespace

std::string render_markdown(const EvalReport& report) {
    std::string out;
    out += "# Evaluation report\n\n";
    out += "- queries: " + std::to_string(report.query_count) + "\n";
    out += "- recommendations per query (k): " + std::to_string(report.k) + "\n";
    out += "- reference system: " + report.reference + "\n";
    out += "- significance: paired t-test with Holm-Bonferroni correction at "
           "alpha = " + fmt_p(report.alpha) +
           "; letters on the reference row mark systems whose difference is "
           "significant\n\n";
    if (!report.letters.empty()) {
        out += "System letters:";
        bool first = true;
        for (const auto& system : report.systems) {
            auto it = report.letters.find(system);
            if (it == report.letters.end()) continue;
            out += (first ? " " : ", ") + ("(" + it->second + ") " + system);
            first = false;
        }
        out += "\n\n";
    }

    substitution_table(out, "Substitution — SCS", report.baseline_sub_scs,
                       report.sub_scs);
    substitution_table(out, "Substitution — NDCG@10", report.baseline_sub_ndcg,
                       report.sub_ndcg);
    concat_table(out, "Concat — SCS", report.k, report.baseline_concat_scs,
                 report.concat_scs);
    concat_table(out, "Concat — NDCG@10", report.k, report.baseline_concat_ndcg,
                 report.concat_ndcg);

    out += "## Coverage\n\n";
    out += "| Model | At least one | All " + std::to_string(report.k) +
           " | Avg |\n|---|---|---|---|\n";
    for (const auto& row : report.coverage_rows) {
        out += "| " + row.system + " | " + fmt(row.stats.pct_at_least_one, 2) +
               "% | " + fmt(row.stats.pct_all_k, 2) + "% | " +
               fmt(row.stats.avg_count) + " |\n";
    }
    out += "\n";

    if (!report.significance.empty()) {
        out += "## Significance details\n\n";
        out += "| Table | Hypothesis | p | Rejected |\n|---|---|---|---|\n";
        for (const auto& [table, pairs] : report.significance) {
            for (const auto& pair : pairs) {
                out += "| " + table + " | " + pair.label + " | " +
                       fmt_p(pair.raw_p) + " | " +
                       (pair.rejected ? "yes" : "no") + " |\n";
            }
        }
        out += "\n";
    }
    return out;
}

std::string render_csv(const EvalReport& report) {
    std::string out;
    out += "table,system,min,max,avg,std,sig\n";
    auto sub_rows = [&](const std::string& table, const SubstitutionRow& baseline,
                        const std::vector<SubstitutionRow>& rows) {
        auto emit = [&](const SubstitutionRow& row) {
            out += table + "," + row.system + "," + fmt(row.summary.min) + "," +
                   fmt(row.summary.max) + "," + fmt(row.summary.avg) + "," +
                   fmt(row.summary.std) + "," + row.sig + "\n";
        };
        emit(baseline);
        for (const auto& row : rows) emit(row);
    };
    sub_rows("substitution_scs", report.baseline_sub_scs, report.sub_scs);
    sub_rows("substitution_ndcg10", report.baseline_sub_ndcg, report.sub_ndcg);

    out += "\ntable,system,rank,value,sig\n";
    auto concat_rows = [&](const std::string& table,
                           const ConcatTableRow& baseline,
                           const std::vector<ConcatTableRow>& rows) {
        auto emit = [&](const ConcatTableRow& row) {
            for (std::size_t r = 0; r < row.means.size(); ++r)
                out += table + "," + row.system + "," + std::to_string(r + 1) +
                       "," + fmt(row.means[r]) + "," + row.sig[r] + "\n";
        };
        emit(baseline);
        for (const auto& row : rows) emit(row);
    };
    concat_rows("concat_scs", report.baseline_concat_scs, report.concat_scs);
    concat_rows("concat_ndcg10", report.baseline_concat_ndcg,
                report.concat_ndcg);

    out += "\ntable,system,pct_at_least_one,pct_all_k,avg_count\n";
    for (const auto& row : report.coverage_rows) {
        out += "coverage," + row.system + "," +
               fmt(row.stats.pct_at_least_one, 2) + "," +
               fmt(row.stats.pct_all_k, 2) + "," + fmt(row.stats.avg_count) +
               "\n";
    }

    out += "\ntable,family,label,p,rejected\n";
    for (const auto& [table, pairs] : report.significance) {
        for (const auto& pair : pairs) {
            out += "significance," + table + "," + pair.label + "," +
                   fmt_p(pair.raw_p) + "," + (pair.rejected ? "1" : "0") + "\n";
        }
    }
    return out;
}

// --- JSON round trip ----------------------------------------------------------

namespace {

using nlohmann::json;

json summary_json(const MetricSummary& s) {
    return json{{"min", s.min}, {"max", s.max}, {"avg", s.avg}, {"std", s.std}};
}

MetricSummary summary_from(const json& j) {
    return {j.at("min").get<double>(), j.at("max").get<double>(),
            j.at("avg").get<double>(), j.at("std").get<double>()};
}

json sub_row_json(const SubstitutionRow& row) {
    return json{{"system", row.system},
                {"summary", summary_json(row.summary)},
                {"sig", row.sig}};
}

SubstitutionRow sub_row_from(const json& j) {
    return {j.at("system").get<std::string>(), summary_from(j.at("summary")),
            j.at("sig").get<std::string>()};
}

json concat_row_json(const ConcatTableRow& row) {
    return json{{"system", row.system}, {"means", row.means}, {"sig", row.sig}};
}

ConcatTableRow concat_row_from(const json& j) {
    return {j.at("system").get<std::string>(),
            j.at("means").get<std::vector<double>>(),
            j.at("sig").get<std::vector<std::string>>()};
}

} // namespace

std::string report_to_json(const EvalReport& report) {
    json j;
    j["k"] = report.k;
    j["alpha"] = report.alpha;
    j["query_count"] = report.query_count;
    j["reference"] = report.reference;
    j["systems"] = report.systems;
    j["letters"] = report.letters;
    j["baseline"] = {{"sub_scs", sub_row_json(report.baseline_sub_scs)},
                     {"sub_ndcg", sub_row_json(report.baseline_sub_ndcg)},
                     {"concat_scs", concat_row_json(report.baseline_concat_scs)},
                     {"concat_ndcg", concat_row_json(report.baseline_concat_ndcg)}};
    for (const auto& row : report.sub_scs) j["sub_scs"].push_back(sub_row_json(row));
    for (const auto& row : report.sub_ndcg)
        j["sub_ndcg"].push_back(sub_row_json(row));
    for (const auto& row : report.concat_scs)
        j["concat_scs"].push_back(concat_row_json(row));
    for (const auto& row : report.concat_ndcg)
        j["concat_ndcg"].push_back(concat_row_json(row));
    for (const auto& row : report.coverage_rows) {
        j["coverage"].push_back(json{{"system", row.system},
                                     {"pct_at_least_one", row.stats.pct_at_least_one},
                                     {"pct_all_k", row.stats.pct_all_k},
                                     {"avg_count", row.stats.avg_count}});
    }
    for (const auto& [table, pairs] : report.significance) {
        json rows = json::array();
        for (const auto& pair : pairs)
            rows.push_back(json{{"label", pair.label},
                                {"p", pair.raw_p},
                                {"rejected", pair.rejected}});
        j["significance"][table] = std::move(rows);
    }
    return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& ex) {
        throw Error(std::string("malformed report json: ") + ex.what());
    }
    EvalReport report;
    report.k = j.at("k").get<int>();
    report.alpha = j.at("alpha").get<double>();
    report.query_count = j.at("query_count").get<int>();
    report.reference = j.at("reference").get<std::string>();
    report.systems = j.at("systems").get<std::vector<std::string>>();
    report.letters =
        j.at("letters").get<std::map<std::string, std::string>>();
    report.baseline_sub_scs = sub_row_from(j.at("baseline").at("sub_scs"));
    report.baseline_sub_ndcg = sub_row_from(j.at("baseline").at("sub_ndcg"));
    report.baseline_concat_scs =
        concat_row_from(j.at("baseline").at("concat_scs"));
    report.baseline_concat_ndcg =
        concat_row_from(j.at("baseline").at("concat_ndcg"));
    for (const auto& row : j.value("sub_scs", json::array()))
        report.sub_scs.push_back(sub_row_from(row));
    for (const auto& row : j.value("sub_ndcg", json::array()))
        report.sub_ndcg.push_back(sub_row_from(row));
    for (const auto& row : j.value("concat_scs", json::array()))
        report.concat_scs.push_back(concat_row_from(row));
    for (const auto& row : j.value("concat_ndcg", json::array()))
        report.concat_ndcg.push_back(concat_row_from(row));
    for (const auto& row : j.value("coverage", json::array())) {
        report.coverage_rows.push_back(
            {row.at("system").get<std::string>(),
             {row.at("pct_at_least_one").get<double>(),
              row.at("pct_all_k").get<double>(),
              row.at("avg_count").get<double>()}});
    }
    if (j.contains("significance")) {
        for (const auto& [table, rows] : j.at("significance").items()) {
            std::vector<SignificancePair> pairs;
            for (const auto& row : rows)
                pairs.push_back({row.at("label").get<std::string>(),
                                 row.at("p").get<double>(),
                                 row.at("rejected").get<bool>()});
            report.significance[table] = std::move(pairs);
        }
    }
    return report;
}

std::string render_sweep_markdown(const SweepReport& report) {
    std::string out;
    out += "# Prompt-size sweep\n\n";
    out += "| Num. examples | SCS ± Std | NDCG@10 ± Std |\n|---|---|---|\n";
    for (const auto& row : report.rows) {
        out += "| " + std::to_string(row.size) + " | " + summary_cell(row.scs) +
               " | " + summary_cell(row.ndcg) + " |\n";
    }
    return out;
}

std::string render_sweep_csv(const SweepReport& report) {
    std::string out = "num_examples,scs_avg,scs_std,ndcg10_avg,ndcg10_std\n";
    for (const auto& row : report.rows) {
        out += std::to_string(row.size) + "," + fmt(row.scs.avg) + "," +
               fmt(row.scs.std) + "," + fmt(row.ndcg.avg) + "," +
               fmt(row.ndcg.std) + "\n";
    }
    return out;
}

} // namespace gqr
