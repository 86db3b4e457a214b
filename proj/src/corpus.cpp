#include "gqr/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "gqr/error.hpp"

namespace gqr {

double CollectionStats::p_collection(const std::string& term) const {
    auto it = term_count.find(term);
    if (it == term_count.end() || total_tokens == 0) return 0.0;
    return static_cast<double>(it->second) / static_cast<double>(total_tokens);
}

CollectionStats build_stats(std::span<const Document> docs,
                            const TokenizeOptions& options) {
    if (docs.empty()) throw Error("empty collection");
    CollectionStats stats;
    stats.doc_count = static_cast<std::int64_t>(docs.size());
    for (const auto& doc : docs) {
        std::unordered_set<std::string> seen;
        for (auto& token : tokenize(doc.text, options)) {
            stats.term_count[token] += 1;
            stats.total_tokens += 1;
            if (seen.insert(token).second) stats.doc_freq[token] += 1;
        }
    }
    if (stats.total_tokens == 0) throw Error("collection has no tokens");
    stats.avg_doc_len = static_cast<double>(stats.total_tokens) /
                        static_cast<double>(stats.doc_count);
    return stats;
}

InvertedIndex build_index(std::span<const Document> docs,
                          const TokenizeOptions& options) {
    if (docs.empty()) throw Error("empty collection");

    InvertedIndex index;
    index.tokenizer = options;

    // Dense handles follow ascending doc id order so that posting lists come
    // out sorted and score ties resolve by id without extra bookkeeping.
    std::vector<std::size_t> order(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return docs[a].id < docs[b].id;
    });
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        if (docs[order[i]].id == docs[order[i + 1]].id)
            throw Error("duplicate document id: " + docs[order[i]].id);
    }

    index.doc_ids.reserve(docs.size());
    index.doc_len.reserve(docs.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const Document& doc = docs[order[pos]];
        if (doc.id.empty()) throw Error("empty document id");
        index.doc_ids.push_back(doc.id);

        std::map<std::string, std::int32_t> counts;
        std::int32_t len = 0;
        for (auto& token : tokenize(doc.text, options)) {
            counts[token] += 1;
            ++len;
        }
        index.doc_len.push_back(len);
        for (auto& [term, tf] : counts) {
            index.postings[term].push_back(
                {static_cast<std::int32_t>(pos), tf});
        }
    }

    CollectionStats& stats = index.stats;
    stats.doc_count = static_cast<std::int64_t>(index.doc_ids.size());
    for (auto& [term, plist] : index.postings) {
        std::int64_t total = 0;
        for (const Posting& p : plist) total += p.tf;
        stats.term_count[term] = total;
        stats.doc_freq[term] = static_cast<std::int64_t>(plist.size());
        stats.total_tokens += total;
    }
    if (stats.total_tokens == 0) throw Error("collection has no tokens");
    stats.avg_doc_len = static_cast<double>(stats.total_tokens) /
                        static_cast<double>(stats.doc_count);
    return index;
}

double bm25_idf(std::int64_t doc_count, std::int64_t doc_freq) {
    return std::log((static_cast<double>(doc_count) - doc_freq + 0.5) /
                        (doc_freq + 0.5) +
                    1.0);
}

RankedList bm25_search(const InvertedIndex& index, std::string_view query_text,
                       int cutoff, const Bm25Params& params) {
    RankedList result;
    auto tokens = tokenize(query_text, index.tokenizer);
    if (tokens.empty()) return result;

    std::vector<std::string> terms(tokens.begin(), tokens.end());
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

    const std::int64_t n_docs = index.stats.doc_count;
    std::unordered_map<std::int32_t, double> scores;
    for (const auto& term : terms) {
        auto it = index.postings.find(term);
        if (it == index.postings.end()) continue;
        const double idf = bm25_idf(n_docs, index.stats.doc_freq.at(term));
        for (const Posting& p : it->second) {
            const double tf = static_cast<double>(p.tf);
            const double dl = static_cast<double>(index.doc_len[p.doc]);
            const double norm =
                1.0 - params.b + params.b * dl / index.stats.avg_doc_len;
            scores[p.doc] += idf * tf * (params.k1 + 1.0) / (tf + params.k1 * norm);
        }
    }

    std::vector<std::pair<std::int32_t, double>> ranked;
    ranked.reserve(scores.size());
    for (auto& [doc, score] : scores) {
        if (score > 0.0) ranked.emplace_back(doc, score);
    }
    // Handles ascend with doc id, so the tiebreak is ascending doc id.
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (cutoff >= 0 && ranked.size() > static_cast<std::size_t>(cutoff))
        ranked.resize(static_cast<std::size_t>(cutoff));

    result.entries.reserve(ranked.size());
    for (auto& [doc, score] : ranked)
        result.entries.push_back({index.doc_ids[doc], score});
    return result;
}

std::vector<RankedList> bm25_search_many(
    const InvertedIndex& index,
    std::span<const std::pair<std::string, std::string>> queries, int cutoff,
    const Bm25Params& params, int threads) {
    std::vector<RankedList> out(queries.size());
    if (threads <= 0) {
        for (std::size_t i = 0; i < queries.size(); ++i) {
            out[i] = bm25_search(index, queries[i].second, cutoff, params);
            out[i].query_id = queries[i].first;
        }
        return out;
    }
    const std::int64_t n = static_cast<std::int64_t>(queries.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::int64_t i = 0; i < n; ++i) {
        out[i] = bm25_search(index, queries[i].second, cutoff, params);
        out[i].query_id = queries[i].first;
    }
    return out;
}

// --- persistence ----------------------------------------------------------
//
// Little-endian, fixed-width fields; all containers already iterate in a
// deterministic (sorted) order, giving the bit-exact rewrite guarantee.
// Layout: magic, flags, doc table, postings, FNV-1a checksum trailer.

namespace {

constexpr char kMagic[8] = {'G', 'Q', 'R', 'I', 'D', 'X', '0', '1'};
constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

struct Writer {
    std::ofstream out;
    std::uint64_t checksum = kFnvOffset;

    void raw(const void* p, std::size_t n) {
        out.write(static_cast<const char*>(p),
                  static_cast<std::streamsize>(n));
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            checksum ^= b[i];
            checksum *= kFnvPrime;
        }
    }
    void u32(std::uint32_t v) { raw(&v, sizeof v); }
    void u64(std::uint64_t v) { raw(&v, sizeof v); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        if (!s.empty()) raw(s.data(), s.size());
    }
};

struct Reader {
    std::ifstream in;
    std::uint64_t checksum = kFnvOffset;

    void raw(void* p, std::size_t n) {
        in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (!in) throw Error("truncated index file");
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            checksum ^= b[i];
            checksum *= kFnvPrime;
        }
    }
    std::uint32_t u32() { std::uint32_t v; raw(&v, sizeof v); return v; }
    std::uint64_t u64() { std::uint64_t v; raw(&v, sizeof v); return v; }
    std::string str() {
        std::string s(u32(), '\0');
        if (!s.empty()) raw(s.data(), s.size());
        return s;
    }
};

} // namespace

void save_index(const InvertedIndex& index, const std::string& path) {
    Writer w;
    w.out.open(path, std::ios::binary | std::ios::trunc);
    if (!w.out) throw Error("cannot open for writing: " + path);

    w.raw(kMagic, sizeof kMagic);
    std::uint32_t flags = (index.tokenizer.remove_stopwords ? 1u : 0u) |
                          (index.tokenizer.stem ? 2u : 0u);
    w.u32(flags);

    w.u64(index.doc_ids.size());
    for (std::size_t i = 0; i < index.doc_ids.size(); ++i) {
        w.str(index.doc_ids[i]);
        w.u32(static_cast<std::uint32_t>(index.doc_len[i]));
    }

    w.u64(index.postings.size());
    for (const auto& [term, plist] : index.postings) {
        w.str(term);
        w.u64(plist.size());
        for (const Posting& p : plist) {
            w.u32(static_cast<std::uint32_t>(p.doc));
            w.u32(static_cast<std::uint32_t>(p.tf));
        }
    }

    std::uint64_t checksum = w.checksum;
    w.raw(&checksum, sizeof checksum);
    if (!w.out) throw Error("write failed: " + path);
}

InvertedIndex load_index(const std::string& path) {
    Reader r;
    r.in.open(path, std::ios::binary);
    if (!r.in) throw Error("cannot open index file: " + path);

    char magic[8];
    r.raw(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof magic) != 0)
        throw Error("not a gqr index file: " + path);

    InvertedIndex index;
    std::uint32_t flags = r.u32();
    index.tokenizer.remove_stopwords = (flags & 1u) != 0;
    index.tokenizer.stem = (flags & 2u) != 0;

    std::uint64_t n_docs = r.u64();
    index.doc_ids.reserve(n_docs);
    index.doc_len.reserve(n_docs);
    for (std::uint64_t i = 0; i < n_docs; ++i) {
        index.doc_ids.push_back(r.str());
        index.doc_len.push_back(static_cast<std::int32_t>(r.u32()));
    }

    std::uint64_t n_terms = r.u64();
    for (std::uint64_t t = 0; t < n_terms; ++t) {
        std::string term = r.str();
        std::uint64_t n_postings = r.u64();
        std::vector<Posting> plist;
        plist.reserve(n_postings);
        for (std::uint64_t i = 0; i < n_postings; ++i) {
            std::int32_t doc = static_cast<std::int32_t>(r.u32());
            std::int32_t tf = static_cast<std::int32_t>(r.u32());
            plist.push_back({doc, tf});
        }
        index.postings.emplace(std::move(term), std::move(plist));
    }

    // capture before raw() mixes the trailer itself into the running hash
    std::uint64_t expected = r.checksum;
    std::uint64_t stored;
    r.raw(&stored, sizeof stored);
    if (stored != expected) throw Error("index checksum mismatch: " + path);

    CollectionStats& stats = index.stats;
    stats.doc_count = static_cast<std::int64_t>(index.doc_ids.size());
    for (const auto& [term, plist] : index.postings) {
        std::int64_t total = 0;
        for (const Posting& p : plist) total += p.tf;
        stats.term_count[term] = total;
        stats.doc_freq[term] = static_cast<std::int64_t>(plist.size());
        stats.total_tokens += total;
    }
    stats.avg_doc_len = stats.doc_count == 0
                            ? 0.0
                            : static_cast<double>(stats.total_tokens) /
                                  static_cast<double>(stats.doc_count);
    return index;
}

} // namespace gqr
