#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "metriscope/corpus.hpp"

namespace metriscope {

namespace {

int worker_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("METRISCOPE_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

// Splits one CSV record; handles quoted fields with doubled quotes.
std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

} // namespace

Eigen::MatrixXd FeatureTable::matrix() const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), kFeatureCount);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int j = 0; j < kFeatureCount; ++j) {
            m(static_cast<Eigen::Index>(i), j) = rows[i].values[static_cast<std::size_t>(j)];
        }
    }
    return m;
}

Eigen::VectorXi FeatureTable::labels() const {
    Eigen::VectorXi y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) y(static_cast<Eigen::Index>(i)) = rows[i].label;
    return y;
}

FeatureTable extract_corpus_features(const LabeledCorpus& corpus, const MetricCatalog& catalog,
                                     const NodeCategoryTable& table,
                                     const ExtractOptions& options) {
    const auto& samples = corpus.samples;
    std::vector<FeatureRow> rows(samples.size());
    int threads = std::min<int>(worker_count(options.threads),
                                std::max<std::size_t>(samples.size(), 1));

    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= samples.size()) break;
            const LabeledSample& sample = samples[i];
            FeatureRow& row = rows[i];
            row.id = sample.id;
            row.label = sample.label;
            SourceFunction src{sample.id, sample.code, options.dialect};
            if (options.truncate_bytes > 0 && src.code.size() > options.truncate_bytes) {
                src.code.resize(options.truncate_bytes);
            }
            try {
                SyntaxTree tree = parse_function(src);
                FeatureVector fv = extract_features(tree, catalog, table);
                row.values = fv.values;
                row.parse_error = fv.parse_error;
            } catch (const Error&) {
                // Unusable sample (e.g. empty source): keep the row, flag it.
                row.values = {};
                row.parse_error = true;
            }
        }
    };

    if (threads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    std::sort(rows.begin(), rows.end(),
              [](const FeatureRow& a, const FeatureRow& b) { return a.id < b.id; });
    return FeatureTable{std::move(rows)};
}

void write_features_csv(const FeatureTable& table, const std::string& path) {
    std::ostringstream os;
    os << "id";
    for (const auto& name : feature_names()) os << "," << name;
    os << ",label,parse_error\n";
    for (const auto& row : table.rows) {
        os << csv_escape(row.id);
        for (double v : row.values) os << "," << format_double(v);
        os << "," << row.label << "," << (row.parse_error ? 1 : 0) << "\n";
    }
    atomic_write_file(path, os.str());
}

FeatureTable read_features_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw Error("empty feature file '" + path + "'");

    std::ostringstream expected;
    expected << "id";
    for (const auto& name : feature_names()) expected << "," << name;
    expected << ",label,parse_error";
    std::string header = line;
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != expected.str()) {
        throw Error("unexpected feature CSV header in '" + path + "'");
    }

    FeatureTable table;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = csv_split(line);
        if (fields.size() != 1 + kFeatureCount + 2) {
            throw Error(path + ":" + std::to_string(line_no) + ": wrong column count");
        }
        FeatureRow row;
        row.id = fields[0];
        for (int j = 0; j < kFeatureCount; ++j) {
            const std::string& f = fields[static_cast<std::size_t>(1 + j)];
            double v = 0;
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc() || ptr != f.data() + f.size()) {
                throw Error(path + ":" + std::to_string(line_no) + ": bad number '" + f + "'");
            }
            row.values[static_cast<std::size_t>(j)] = v;
        }
        row.label = std::stoi(fields[1 + kFeatureCount]);
        row.parse_error = fields[2 + kFeatureCount] != "0";
        table.rows.push_back(std::move(row));
    }
    return table;
}

PredictionFile read_predictions_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw Error("empty prediction file '" + path + "'");
    PredictionFile out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = csv_split(line);
        if (fields.size() != 2) {
            throw Error(path + ":" + std::to_string(line_no) + ": expected 'id,score'");
        }
        out.ids.push_back(fields[0]);
        out.scores.push_back(std::stod(fields[1]));
    }
    return out;
}

EmbeddingFile read_embeddings_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw Error("empty embedding file '" + path + "'");
    std::size_t dim = csv_split(line).size();
    if (dim < 2) throw Error("embedding file '" + path + "' needs at least one coordinate");
    dim -= 1;

    std::vector<std::string> ids;
    std::vector<double> data;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = csv_split(line);
        if (fields.size() != dim + 1) {
            throw Error(path + ":" + std::to_string(line_no) + ": wrong column count");
        }
        ids.push_back(fields[0]);
        for (std::size_t j = 1; j < fields.size(); ++j) data.push_back(std::stod(fields[j]));
    }
    EmbeddingFile out;
    out.ids = std::move(ids);
    out.rows.resize(static_cast<Eigen::Index>(out.ids.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < out.ids.size(); ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            out.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                data[i * dim + j];
        }
    }
    return out;
}

} // namespace metriscope
