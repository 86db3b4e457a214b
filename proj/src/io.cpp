#include "gqr/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gqr/error.hpp"

namespace gqr {

namespace {

using nlohmann::json;

std::ifstream open_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path);
    return in;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

json parse_line(const std::string& line, const std::string& path,
                std::size_t line_no) {
    try {
        return json::parse(line);
    } catch (const json::exception& ex) {
        throw Error(path + " line " + std::to_string(line_no) +
                    ": malformed json: " + ex.what());
    }
}

} // namespace

std::vector<Document> read_corpus_jsonl(const std::string& path) {
    auto in = open_text(path);
    std::vector<Document> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        json j = parse_line(line, path, line_no);
        if (!j.contains("id") || !j.contains("text"))
            throw Error(path + " line " + std::to_string(line_no) +
                        ": expected fields \"id\" and \"text\"");
        docs.push_back(
            {j.at("id").get<std::string>(), j.at("text").get<std::string>()});
        if (docs.back().id.empty())
            throw Error(path + " line " + std::to_string(line_no) +
                        ": empty document id");
    }
    return docs;
}

std::vector<std::pair<std::string, std::string>> read_queries(
    const std::string& path) {
    auto in = open_text(path);
    std::vector<std::pair<std::string, std::string>> queries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        auto tab = line.find('\t');
        std::string qid, text;
        if (tab == std::string::npos) {
            qid = "q" + std::to_string(queries.size() + 1);
            text = line;
        } else {
            qid = line.substr(0, tab);
            text = line.substr(tab + 1);
        }
        if (qid.empty() || text.empty())
            throw Error(path + " line " + std::to_string(line_no) +
                        ": empty query id or text");
        queries.emplace_back(std::move(qid), std::move(text));
    }
    return queries;
}

Qrels read_qrels(const std::string& path) {
    auto in = open_text(path);
    Qrels qrels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string qid, iteration, docid;
        int grade;
        if (!(fields >> qid >> iteration >> docid >> grade))
            throw Error(path + " line " + std::to_string(line_no) +
                        ": expected \"qid 0 docid grade\"");
        if (grade < 0)
            throw Error(path + " line " + std::to_string(line_no) +
                        ": negative relevance grade");
        qrels.grades[qid][docid] = grade;
    }
    return qrels;
}

std::string format_trec_run(std::span<const RankedList> lists,
                            const std::string& tag) {
    std::string out;
    char buf[64];
    for (const auto& list : lists) {
        int rank = 1;
        for (const auto& entry : list.entries) {
            std::snprintf(buf, sizeof buf, "%.6f", entry.score);
            out += list.query_id + " Q0 " + entry.doc_id + " " +
                   std::to_string(rank) + " " + buf + " " + tag + "\n";
            ++rank;
        }
    }
    return out;
}

std::vector<RankedList> parse_trec_run(const std::string& text) {
    std::vector<RankedList> lists;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string qid, q0, docid, tag;
        int rank;
        double score;
        if (!(fields >> qid >> q0 >> docid >> rank >> score >> tag))
            throw Error("run line " + std::to_string(line_no) +
                        ": expected \"qid Q0 docid rank score tag\"");
        if (lists.empty() || lists.back().query_id != qid) {
            lists.push_back({qid, {}});
        }
        lists.back().entries.push_back({docid, score});
    }
    return lists;
}

std::vector<PromptExample> read_prompt_pool(const std::string& path) {
    auto in = open_text(path);
    std::vector<PromptExample> pool;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        json j = parse_line(line, path, line_no);
        try {
            pool.push_back(make_prompt_example(
                j.at("query").get<std::string>(),
                j.at("recommendations").get<std::vector<std::string>>()));
        } catch (const std::exception& ex) {
            throw Error(path + " line " + std::to_string(line_no) + ": " +
                        ex.what());
        }
    }
    return pool;
}

std::map<std::string, RecommendationList> read_run_cache(
    const std::string& path) {
    auto in = open_text(path);
    std::map<std::string, RecommendationList> runs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        json j = parse_line(line, path, line_no);
        RecommendationList recs;
        recs.query_id = j.at("query_id").get<std::string>();
        recs.items = j.at("items").get<std::vector<std::string>>();
        recs.generation_failed = j.value("generation_failed", recs.items.empty());
        runs[recs.query_id] = std::move(recs);
    }
    return runs;
}

void write_run_cache(const std::string& path,
                     const std::map<std::string, RecommendationList>& runs) {
    std::string out;
    for (const auto& [qid, recs] : runs) {
        json j{{"query_id", qid},
               {"items", recs.items},
               {"generation_failed", recs.generation_failed}};
        out += j.dump() + "\n";
    }
    spit(path, out);
}

void write_audit_log(const std::string& path,
                     std::span<const AuditRecord> records) {
    std::string out;
    for (const auto& record : records) {
        json j{{"query", record.query},
               {"prompt", record.prompt},
               {"raw_continuation", record.raw_continuation},
               {"parsed_items", record.parsed_items},
               {"flags", record.flags}};
        out += j.dump() + "\n";
    }
    spit(path, out);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed: " + path);
}

} // namespace gqr
