#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <unordered_set>

#include <json.hpp>

#include "metriscope/corpus.hpp"

namespace metriscope {

std::string_view to_string(Split s) {
    switch (s) {
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    default: return "test";
    }
}

Split split_from_string(std::string_view s) {
    if (s == "train") return Split::Train;
    if (s == "valid" || s == "validation" || s == "dev") return Split::Valid;
    if (s == "test") return Split::Test;
    throw Error("unknown split '" + std::string(s) + "' (expected train/valid/test)");
}

namespace {

std::string json_to_id(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    return v.dump();
}

int json_to_label(const nlohmann::json& v, const std::string& path, int line) {
    long long label = -1;
    if (v.is_number_integer() || v.is_number_unsigned()) {
        label = v.get<long long>();
    } else if (v.is_boolean()) {
        label = v.get<bool>() ? 1 : 0;
    } else if (v.is_string()) {
        const auto& s = v.get_ref<const std::string&>();
        if (s == "0") label = 0;
        if (s == "1") label = 1;
    }
    if (label != 0 && label != 1) {
        throw Error(path + ":" + std::to_string(line) + ": label must be 0 or 1");
    }
    return static_cast<int>(label);
}

} // namespace

void append_jsonl(LabeledCorpus& corpus, const std::string& path, Split split,
                  const JsonlFieldMap& fields) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");

    std::unordered_set<std::string> ids;
    ids.reserve(corpus.samples.size());
    for (const auto& s : corpus.samples) ids.insert(s.id);

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            throw Error(path + ":" + std::to_string(line_no) + ": malformed JSON object");
        }
        if (!obj.contains(fields.code)) {
            throw Error(path + ":" + std::to_string(line_no) + ": missing required field '" +
                        fields.code + "'");
        }
        if (!obj.contains(fields.label)) {
            throw Error(path + ":" + std::to_string(line_no) + ": missing required field '" +
                        fields.label + "'");
        }
        LabeledSample sample;
        sample.code = obj[fields.code].get<std::string>();
        sample.label = json_to_label(obj[fields.label], path, line_no);
        sample.split = split;
        sample.line = line_no;
        sample.id = obj.contains(fields.id) ? json_to_id(obj[fields.id])
                                            : path + ":" + std::to_string(line_no);
        if (obj.contains(fields.project) && obj[fields.project].is_string()) {
            sample.project = obj[fields.project].get<std::string>();
        }
        if (obj.contains(fields.commit) && obj[fields.commit].is_string()) {
            sample.commit = obj[fields.commit].get<std::string>();
        }
        nlohmann::json rest = nlohmann::json::object();
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            if (it.key() == fields.code || it.key() == fields.label || it.key() == fields.id ||
                it.key() == fields.project || it.key() == fields.commit) {
                continue;
            }
            rest[it.key()] = it.value();
        }
        if (!rest.empty()) sample.metadata = rest.dump();
        if (!ids.insert(sample.id).second) {
            throw Error(path + ":" + std::to_string(line_no) + ": duplicate sample id '" +
                        sample.id + "'");
        }
        corpus.samples.push_back(std::move(sample));
    }
}

LabeledCorpus load_jsonl(const std::string& path, Split split, const JsonlFieldMap& fields) {
    LabeledCorpus corpus;
    append_jsonl(corpus, path, split, fields);
    return corpus;
}

LabeledCorpus stratified_subsample(const LabeledCorpus& corpus, std::size_t n,
                                   std::uint64_t seed) {
    if (n > corpus.samples.size()) {
        throw Error("subsample size " + std::to_string(n) + " exceeds corpus size " +
                    std::to_string(corpus.samples.size()));
    }
    std::vector<std::size_t> positives, negatives;
    for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
        (corpus.samples[i].label == 1 ? positives : negatives).push_back(i);
    }
    std::mt19937_64 rng(seed);
    std::shuffle(positives.begin(), positives.end(), rng);
    std::shuffle(negatives.begin(), negatives.end(), rng);

    // Round to the nearest count so proportions stay within one sample.
    double pos_share = corpus.samples.empty()
                           ? 0.0
                           : static_cast<double>(positives.size()) /
                                 static_cast<double>(corpus.samples.size());
    std::size_t n_pos = static_cast<std::size_t>(std::llround(pos_share * static_cast<double>(n)));
    n_pos = std::min(n_pos, positives.size());
    std::size_t n_neg = std::min(n - n_pos, negatives.size());
    n_pos = std::min(positives.size(), n - n_neg); // rebalance if negatives ran short

    std::vector<std::size_t> chosen(positives.begin(), positives.begin() + n_pos);
    chosen.insert(chosen.end(), negatives.begin(), negatives.begin() + n_neg);
    std::sort(chosen.begin(), chosen.end());

    LabeledCorpus out;
    out.samples.reserve(chosen.size());
    for (std::size_t idx : chosen) out.samples.push_back(corpus.samples[idx]);
    return out;
}

std::vector<RevisionPair> load_revision_pairs(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::vector<RevisionPair> pairs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            throw Error(path + ":" + std::to_string(line_no) + ": malformed JSON object");
        }
        for (const char* field : {"code_before", "code_after"}) {
            if (!obj.contains(field)) {
                throw Error(path + ":" + std::to_string(line_no) + ": missing required field '" +
                            field + "'");
            }
        }
        RevisionPair pair;
        pair.id = obj.contains("id") ? json_to_id(obj["id"]) : std::to_string(line_no);
        pair.code_before = obj["code_before"].get<std::string>();
        pair.code_after = obj["code_after"].get<std::string>();
        for (auto [field, slot] :
             {std::pair{"prediction_before", &pair.prediction_before},
              std::pair{"prediction_after", &pair.prediction_after}}) {
            if (obj.contains(field) && !obj[field].is_null()) {
                double v = obj[field].get<double>();
                if (v < 0.0 || v > 1.0) {
                    throw Error(path + ":" + std::to_string(line_no) + ": " + field +
                                " outside [0,1]");
                }
                *slot = v;
            }
        }
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

void atomic_write_file(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw Error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

} // namespace metriscope
