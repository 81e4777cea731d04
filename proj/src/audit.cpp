#include "dili/audit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include <httplib.h>
#include <json.hpp>

#include "dili/model.hpp"

namespace dili::audit {

std::string_view to_string(RecognitionBucket b) {
    switch (b) {
        case RecognitionBucket::NotRecognized: return "Not Recognized";
        case RecognitionBucket::RecognizedCorrectly: return "Recognized Correctly";
        case RecognitionBucket::RecognizedIncorrectly: return "Recognized Incorrectly";
    }
    return "?";
}

std::string normalize_name(std::string_view raw) {
    // Case-fold and collapse whitespace runs.
    std::string folded;
    folded.reserve(raw.size());
    bool in_space = true;  // swallow leading whitespace
    for (char c : raw) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!in_space) folded.push_back(' ');
            in_space = true;
        } else {
            folded.push_back(
                static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            in_space = false;
        }
    }
    // Strip surrounding punctuation and the space that may now surround it.
    std::size_t begin = 0;
    std::size_t end = folded.size();
    auto strippable = [&](char c) {
        return std::ispunct(static_cast<unsigned char>(c)) || c == ' ';
    };
    while (begin < end && strippable(folded[begin])) ++begin;
    while (end > begin && strippable(folded[end - 1])) --end;
    return folded.substr(begin, end - begin);
}

SynonymTable SynonymTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw AuditError("cannot open " + path);
    SynonymTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw AuditError(where + ": malformed JSON record: " + e.what());
        }
        if (!j.contains("inchikey") || !j["inchikey"].is_string())
            throw AuditError(where + ": missing field 'inchikey'");
        if (!j.contains("synonyms") || !j["synonyms"].is_array())
            throw AuditError(where + ": missing field 'synonyms'");
        std::vector<std::string> synonyms;
        for (const auto& s : j["synonyms"]) {
            if (!s.is_string()) throw AuditError(where + ": synonyms must be strings");
            synonyms.push_back(s.get<std::string>());
        }
        if (synonyms.empty())
            throw AuditError(where + ": synonym set must be non-empty");
        table.add(normalize_inchikey(j["inchikey"].get<std::string>()), synonyms);
    }
    return table;
}

void SynonymTable::add(const std::string& inchikey,
                       const std::vector<std::string>& synonyms) {
    auto& set = entries_[inchikey];
    for (const auto& s : synonyms) {
        const auto normalized = normalize_name(s);
        if (!normalized.empty()) set.insert(normalized);
    }
    if (set.empty())
        throw AuditError("synonym set for " + inchikey + " is empty after normalization");
}

const std::set<std::string>* SynonymTable::find(const std::string& inchikey) const {
    auto it = entries_.find(inchikey);
    return it == entries_.end() ? nullptr : &it->second;
}

namespace {

std::string apply_suffix_strip(std::string name, const AuditOptions& opts) {
    for (const auto& raw_suffix : opts.strip_suffixes) {
        const std::string suffix = " " + normalize_name(raw_suffix);
        if (suffix.size() > 1 && name.size() > suffix.size() &&
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
            name.erase(name.size() - suffix.size());
        }
    }
    return name;
}

}  // namespace

RecognitionBucket bucket(const RecognitionClaim& claim, const SynonymTable& table,
                         const AuditOptions& opts) {
    if (!claim.claimed_name) return RecognitionBucket::NotRecognized;
    const auto* synonyms = table.find(claim.inchikey);
    if (!synonyms)
        throw AuditError("compound " + claim.inchikey +
                         " has a claim but no synonym-table entry");
    const auto name = apply_suffix_strip(normalize_name(*claim.claimed_name), opts);
    return synonyms->count(name) ? RecognitionBucket::RecognizedCorrectly
                                 : RecognitionBucket::RecognizedIncorrectly;
}

BucketDistribution bucket_distribution(const std::vector<RecognitionClaim>& claims,
                                       const SynonymTable& table,
                                       const AuditOptions& opts) {
    BucketDistribution dist;
    for (const auto& claim : claims) {
        try {
            ++dist.counts[static_cast<std::size_t>(bucket(claim, table, opts))];
            ++dist.total;
        } catch (const AuditError&) {
            dist.missing_synonyms.push_back(claim.inchikey);
        }
    }
    if (dist.total > 0) {
        for (std::size_t i = 0; i < kBucketCount; ++i) {
            const double pct =
                100.0 * static_cast<double>(dist.counts[i]) / static_cast<double>(dist.total);
            dist.percentages[i] = std::round(pct * 10.0) / 10.0;
        }
    }
    return dist;
}

PerBucketResult per_bucket_metrics(const std::vector<RecognitionClaim>& claims,
                                   const SynonymTable& table,
                                   const std::vector<LabeledScore>& scored,
                                   double threshold, const AuditOptions& opts) {
    std::map<std::string, const LabeledScore*> by_key;
    for (const auto& s : scored) by_key.emplace(s.inchikey, &s);

    std::array<std::vector<const LabeledScore*>, kBucketCount> members;
    PerBucketResult result;
    for (const auto& claim : claims) {
        auto it = by_key.find(claim.inchikey);
        if (it == by_key.end()) {
            result.skipped.push_back(claim.inchikey);
            continue;
        }
        try {
            const auto b = bucket(claim, table, opts);
            members[static_cast<std::size_t>(b)].push_back(it->second);
        } catch (const AuditError&) {
            result.skipped.push_back(claim.inchikey);
        }
    }

    auto build_row = [&](RecognitionBucket b,
                         const std::vector<const LabeledScore*>& population) {
        BucketMetricsRow row;
        row.bucket = b;
        row.n = population.size();
        std::vector<double> scores;
        std::vector<int> labels;
        scores.reserve(population.size());
        labels.reserve(population.size());
        for (const auto* s : population) {
            scores.push_back(s->score);
            labels.push_back(s->label);
        }
        row.confusion = classify::confusion_from_scores(scores, labels, threshold);
        row.metrics = classify::binary_metrics(row.confusion);
        try {
            row.roc_auc = classify::roc_auc(scores, labels);
        } catch (const classify::MetricError&) {
            // single-class bucket: ROC-AUC undefined, reported absent
        }
        return row;
    };

    std::vector<const LabeledScore*> all;
    for (std::size_t i = 0; i < kBucketCount; ++i) {
        if (members[i].empty()) continue;
        result.rows.push_back(build_row(static_cast<RecognitionBucket>(i), members[i]));
        all.insert(all.end(), members[i].begin(), members[i].end());
    }
    result.aggregate = build_row(RecognitionBucket::NotRecognized, all);
    return result;
}

std::vector<RecognitionClaim> parse_claims(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw AuditError("cannot open " + path);
    std::vector<RecognitionClaim> out;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw AuditError(where + ": malformed JSON record: " + e.what());
        }
        if (!j.contains("inchikey") || !j["inchikey"].is_string())
            throw AuditError(where + ": missing field 'inchikey'");
        RecognitionClaim claim;
        claim.inchikey = normalize_inchikey(j["inchikey"].get<std::string>());
        if (!seen.insert(claim.inchikey).second)
            throw AuditError(where + ": duplicate claim for " + claim.inchikey);
        if (j.contains("claimed_name") && !j["claimed_name"].is_null()) {
            const auto name = j["claimed_name"].get<std::string>();
            if (normalize_name(name).empty())
                throw AuditError(where + ": claimed_name is empty after normalization");
            claim.claimed_name = name;
        }
        out.push_back(std::move(claim));
    }
    return out;
}

HttpSynonymFetcher::HttpSynonymFetcher(std::string base_url)
    : base_url_(std::move(base_url)) {}

std::vector<std::string> HttpSynonymFetcher::fetch(const std::string& inchikey) {
    const std::string prefix = "http://";
    if (base_url_.rfind(prefix, 0) != 0)
        throw AuditError("synonym service URL must be http://, got '" + base_url_ + "'");
    std::string rest = base_url_.substr(prefix.size());
    const auto slash = rest.find('/');
    std::string hostport = rest.substr(0, slash);
    std::string path = slash == std::string::npos ? "" : rest.substr(slash);
    std::string host = hostport;
    int port = 80;
    if (const auto colon = hostport.find(':'); colon != std::string::npos) {
        host = hostport.substr(0, colon);
        port = std::atoi(hostport.c_str() + colon + 1);
    }
    httplib::Client client(host, port);
    auto res = client.Get(path + "/" + inchikey);
    if (!res)
        throw AuditError("synonym lookup failed for " + inchikey + ": " +
                         httplib::to_string(res.error()));
    if (res->status != 200)
        throw AuditError("synonym lookup for " + inchikey + " returned HTTP " +
                         std::to_string(res->status));
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
        throw AuditError(std::string("synonym lookup response is not JSON: ") + e.what());
    }
    if (!j.contains("synonyms") || !j["synonyms"].is_array())
        throw AuditError("synonym lookup response missing 'synonyms'");
    std::vector<std::string> out;
    for (const auto& s : j["synonyms"]) out.push_back(s.get<std::string>());
    return out;
}

void refresh_synonym_cache(const std::string& path, const std::vector<std::string>& keys,
                           SynonymFetcher& fetcher, const std::string& fetched_at) {
    std::vector<std::string> sorted = keys;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    std::ofstream out(path, std::ios::binary);
    if (!out) throw AuditError("cannot write " + path);
    for (const auto& key : sorted) {
        nlohmann::ordered_json j;
        j["inchikey"] = key;
        j["synonyms"] = fetcher.fetch(key);
        j["fetched_at"] = fetched_at;
        out << j.dump() << '\n';
    }
}

}  // namespace dili::audit
