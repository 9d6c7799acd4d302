#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "metriscope/corpus.hpp"
#include "metriscope/learner.hpp"
#include "metriscope/metrics.hpp"
#include "metriscope/stats.hpp"
#include "metriscope/studies.hpp"
#include "metriscope/version.hpp"

using json = nlohmann::ordered_json;
using namespace metriscope;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

char hex_digit(unsigned v) { return v < 10 ? static_cast<char>('0' + v) : static_cast<char>('a' + v - 10); }

std::string hash_hex(std::uint64_t h) {
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = hex_digit(h & 0xF);
        h >>= 4;
    }
    return out;
}

json report_envelope(const std::string& kind, json config) {
    json j;
    j["kind"] = kind;
    j["tool_version"] = kVersion;
    j["catalog_hash"] = hash_hex(catalog_hash(default_catalog()));
    j["config"] = std::move(config);
    return j;
}

void emit(const json& j, const std::string& out_path) {
    std::string text = j.dump(2) + "\n";
    if (out_path.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        atomic_write_file(out_path, text);
    }
}

Dialect dialect_from(const std::string& s) {
    if (s == "c") return Dialect::C;
    if (s == "cpp" || s == "c++") return Dialect::Cpp;
    if (s == "auto") return Dialect::Auto;
    throw Error("unknown dialect '" + s + "' (expected auto/c/cpp)");
}

struct SplitFiles {
    std::string train, valid, test;
};

struct PooledData {
    Eigen::MatrixXd train_X;
    Eigen::VectorXi train_y;
    Eigen::MatrixXd test_X;
    Eigen::VectorXi test_y;
    std::size_t n_train = 0, n_valid = 0, n_test = 0;
};

// Train and valid rows form the reshuffled fitting pool; the test split
// stays fixed across runs.
PooledData load_pool(const SplitFiles& files) {
    FeatureTable train = read_features_csv(files.train);
    FeatureTable test = read_features_csv(files.test);
    PooledData data;
    data.n_train = train.rows.size();
    data.n_test = test.rows.size();
    if (!files.valid.empty()) {
        FeatureTable valid = read_features_csv(files.valid);
        data.n_valid = valid.rows.size();
        for (auto& row : valid.rows) train.rows.push_back(std::move(row));
    }
    data.train_X = train.matrix();
    data.train_y = train.labels();
    data.test_X = test.matrix();
    data.test_y = test.labels();
    return data;
}

json run_scores_json(const RunScores& s) {
    json j;
    j["f1"] = s.f1;
    j["auprc"] = s.auprc;
    j["mcc"] = s.mcc;
    j["bacc"] = s.bacc;
    j["vd_s"] = s.vds;
    j["threshold"] = s.threshold;
    return j;
}

json eval_report_json(const EvalReport& r) {
    json j;
    j["runs"] = r.runs;
    j["ci_defined"] = r.ci_defined;
    j["mean"] = run_scores_json(r.mean);
    j["ci_half_width"] = run_scores_json(r.ci_half_width);
    json per_run = json::array();
    for (const auto& run : r.per_run) per_run.push_back(run_scores_json(run));
    j["per_run"] = std::move(per_run);
    j["parameter_count"] = r.parameter_count;
    j["random_baseline_f1"] = r.random_baseline_f1;
    j["parameter_efficiency"] = r.parameter_efficiency;
    return j;
}

void print_eval_table(const EvalReport& r, const std::string& predictor) {
    auto row = [](const std::string& name, const std::string& params, const RunScores& mean,
                  const RunScores& ci, bool with_ci) {
        auto cell = [&](double m, double c) {
            char buf[64];
            if (with_ci) {
                std::snprintf(buf, sizeof(buf), "%6.2f ± %.2f", m, c);
            } else {
                std::snprintf(buf, sizeof(buf), "%6.2f", m);
            }
            return std::string(buf);
        };
        std::printf("%-14s %10s %16s %16s %16s %16s %16s\n", name.c_str(), params.c_str(),
                    cell(mean.f1, ci.f1).c_str(), cell(mean.auprc, ci.auprc).c_str(),
                    cell(mean.mcc, ci.mcc).c_str(), cell(mean.bacc, ci.bacc).c_str(),
                    cell(mean.vds, ci.vds).c_str());
    };
    std::printf("%-14s %10s %16s %16s %16s %16s %16s\n", "Predictor", "Params", "F1", "AUPRC",
                "MCC", "BAcc", "VD-S");
    row(predictor, std::to_string(r.parameter_count), r.mean, r.ci_half_width, r.ci_defined);
    RunScores random_mean;
    random_mean.f1 = r.random_baseline_f1;
    std::printf("%-14s %10s %16s\n", "Random", "-",
                (std::ostringstream() << random_mean.f1).str().substr(0, 6).c_str());
}

// ---- subcommand implementations -------------------------------------------

int cmd_catalog(const std::string& out) {
    std::string manifest = catalog_manifest(default_catalog());
    if (out.empty()) {
        std::fputs(manifest.c_str(), stdout);
    } else {
        atomic_write_file(out, manifest);
    }
    return 0;
}

int cmd_extract(const std::string& in, const std::string& out, const std::string& split,
                const JsonlFieldMap& fields, const std::string& dialect, int threads,
                std::size_t truncate_bytes) {
    LabeledCorpus corpus = load_jsonl(in, split_from_string(split), fields);
    ExtractOptions options;
    options.threads = threads;
    options.truncate_bytes = truncate_bytes;
    options.dialect = dialect_from(dialect);
    FeatureTable table = extract_corpus_features(corpus, default_catalog(),
                                                 default_category_table(), options);
    write_features_csv(table, out);
    std::fprintf(stderr, "extracted %zu samples -> %s\n", table.rows.size(), out.c_str());
    return 0;
}

int cmd_query(const std::string& pattern_text, const std::string& in, const std::string& code,
              const std::string& out, bool dump, const JsonlFieldMap& fields,
              const std::string& dialect) {
    QueryPattern pattern = parse_query(pattern_text);
    json config;
    config["pattern"] = pattern_text;
    json j = report_envelope("query", std::move(config));
    json results = json::array();
    std::size_t total = 0;

    auto run_one = [&](const std::string& id, const std::string& source) {
        SyntaxTree tree = parse_function({id, source, dialect_from(dialect)});
        AttributeOracle oracle = pointer_attribute_oracle(tree);
        auto matches = match_pattern(tree, pattern, default_category_table(), oracle);
        json entry;
        entry["id"] = id;
        entry["matches"] = matches.size();
        entry["parse_error"] = tree.parse_error();
        results.push_back(std::move(entry));
        total += matches.size();
        if (dump) std::fputs(dump_tree(tree).c_str(), stdout);
    };

    if (!code.empty()) {
        run_one("<code>", code);
    } else if (!in.empty()) {
        LabeledCorpus corpus = load_jsonl(in, Split::Train, fields);
        for (const auto& sample : corpus.samples) run_one(sample.id, sample.code);
    } else {
        throw Error("query needs --in or --code");
    }
    j["results"] = std::move(results);
    j["total_matches"] = total;
    emit(j, out);
    return 0;
}

TrainConfig config_from_flags(std::uint64_t seed, int epochs, double lr, double l2,
                              double pos_weight, int ensemble, double valid_fraction) {
    TrainConfig config;
    config.seed = seed;
    config.epochs = epochs;
    config.learning_rate = lr;
    config.l2 = l2;
    config.positive_weight = pos_weight;
    config.ensemble = ensemble;
    config.valid_fraction = valid_fraction;
    return config;
}

json train_config_json(const TrainConfig& c, int k) {
    json j;
    j["seed"] = c.seed;
    j["epochs"] = c.epochs;
    j["learning_rate"] = c.learning_rate;
    j["l2"] = c.l2;
    j["positive_weight"] = c.positive_weight;
    j["ensemble"] = c.ensemble;
    j["valid_fraction"] = c.valid_fraction;
    j["k"] = k;
    return j;
}

int cmd_train(const SplitFiles& files, const std::string& model_out, const std::string& report_out,
              const TrainConfig& config, int k, double fpr_budget) {
    PooledData data = load_pool(files);
    EvalReport report = run_repeated(data.train_X, data.train_y, data.test_X, data.test_y,
                                     config, k, fpr_budget);
    if (!model_out.empty()) {
        BaselineModel model = fit(data.train_X, data.train_y, config);
        atomic_write_file(model_out, model_to_json(model));
    }
    json j = report_envelope("eval", train_config_json(config, k));
    j["config"]["fpr_budget"] = fpr_budget;
    j["splits"] = {{"train", data.n_train}, {"valid", data.n_valid}, {"test", data.n_test}};
    j["report"] = eval_report_json(report);
    emit(j, report_out);
    if (!report_out.empty()) print_eval_table(report, "metriscope");
    return 0;
}

int cmd_eval(const std::string& model_path, const std::string& features_path,
             const std::string& out, double fpr_budget) {
    BaselineModel model = model_from_json(read_file(model_path));
    FeatureTable table = read_features_csv(features_path);
    RunScores scores = evaluate_model(model, table.matrix(), table.labels(), fpr_budget);
    json config;
    config["model"] = model_path;
    config["features"] = features_path;
    config["fpr_budget"] = fpr_budget;
    json j = report_envelope("eval", std::move(config));
    EvalReport r;
    r.runs = 1;
    r.per_run = {scores};
    r.mean = scores;
    r.parameter_count = model.parameter_count();
    j["report"] = eval_report_json(r);
    emit(j, out);
    return 0;
}

int cmd_study(bool isolation, const SplitFiles& files, const std::string& out,
              const TrainConfig& config) {
    PooledData data = load_pool(files);
    StudyReport report = isolation
                             ? isolation_study(data.train_X, data.train_y, data.test_X,
                                               data.test_y, config)
                             : leave_one_out_study(data.train_X, data.train_y, data.test_X,
                                                   data.test_y, config);
    json j = report_envelope(isolation ? "isolation" : "leave_one_out",
                             train_config_json(config, 1));
    j["full_f1"] = report.full_f1;
    json metrics = json::array();
    for (int i = 0; i < kFeatureCount; ++i) {
        json entry;
        entry["metric"] = feature_names()[static_cast<std::size_t>(i)];
        entry["relative_f1"] = report.relative_f1[static_cast<std::size_t>(i)];
        metrics.push_back(std::move(entry));
    }
    j["metrics"] = std::move(metrics);
    emit(j, out);
    return 0;
}

int cmd_probe(const std::string& train_emb, const std::string& train_feat,
              const std::string& test_emb, const std::string& test_feat, const std::string& source,
              const std::string& out) {
    ProbeReport report = linear_probe(read_embeddings_csv(train_emb),
                                      read_features_csv(train_feat),
                                      read_embeddings_csv(test_emb), read_features_csv(test_feat),
                                      source);
    json config;
    config["train_embeddings"] = train_emb;
    config["test_embeddings"] = test_emb;
    config["source_id"] = source;
    json j = report_envelope("probe", std::move(config));
    json metrics = json::array();
    for (int i = 0; i < kFeatureCount; ++i) {
        json entry;
        entry["metric"] = feature_names()[static_cast<std::size_t>(i)];
        entry["r2"] = report.r2[static_cast<std::size_t>(i)];
        metrics.push_back(std::move(entry));
    }
    j["metrics"] = std::move(metrics);
    emit(j, out);
    return 0;
}

int cmd_xgain(const std::string& train_emb, const std::string& train_feat,
              const std::string& test_emb, const std::string& test_feat,
              const TrainConfig& config, int k, const std::string& out) {
    XGainReport report = cross_information_gain(
        read_embeddings_csv(train_emb), read_features_csv(train_feat),
        read_embeddings_csv(test_emb), read_features_csv(test_feat), config, k);
    json j = report_envelope("xgain", train_config_json(config, k));
    j["f1_embeddings_mean"] = report.f1_embeddings_mean;
    j["f1_combined_mean"] = report.f1_combined_mean;
    j["delta_f1"] = report.delta_f1;
    j["f1_embeddings"] = report.f1_embeddings;
    j["f1_combined"] = report.f1_combined;
    emit(j, out);
    return 0;
}

int cmd_correlate(const std::string& features_path, const std::string& predictions_path,
                  const std::string& out, int bins) {
    FeatureTable features = read_features_csv(features_path);
    PredictionFile predictions = read_predictions_csv(predictions_path);
    CorrelationReport report = prediction_correlation(features, predictions);
    std::vector<double> mi = feature_mutual_information(features, bins);

    json config;
    config["features"] = features_path;
    config["predictions"] = predictions_path;
    config["bins"] = bins;
    json j = report_envelope("correlate", std::move(config));

    // Fig.-4-style ordering: mutual information descending, ties by id.
    std::vector<int> order(kFeatureCount);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&mi](int a, int b) {
        if (mi[static_cast<std::size_t>(a)] != mi[static_cast<std::size_t>(b)]) {
            return mi[static_cast<std::size_t>(a)] > mi[static_cast<std::size_t>(b)];
        }
        return a < b;
    });
    json metrics = json::array();
    for (int idx : order) {
        json entry;
        entry["metric"] = feature_names()[static_cast<std::size_t>(idx)];
        entry["mutual_information"] = mi[static_cast<std::size_t>(idx)];
        const auto& r = report.r[static_cast<std::size_t>(idx)];
        if (r.has_value()) {
            entry["pearson_r"] = *r;
        } else {
            entry["pearson_r"] = nullptr; // constant column: undefined, not 0
        }
        metrics.push_back(std::move(entry));
    }
    j["metrics"] = std::move(metrics);
    emit(j, out);
    return 0;
}

int cmd_causal(const std::string& pairs_path, const std::string& out, bool include_flagged,
               const std::string& dialect, double holdout, std::uint64_t seed) {
    auto pairs = load_revision_pairs(pairs_path);
    ExtractOptions options;
    options.dialect = dialect_from(dialect);
    DeltaTable deltas = compute_metric_deltas(pairs, default_catalog(), default_category_table(),
                                              options);

    std::vector<Eigen::Index> usable;
    for (std::size_t i = 0; i < deltas.ids.size(); ++i) {
        if (!deltas.delta_predictions[i].has_value()) continue;
        if (!include_flagged && deltas.parse_flagged[i]) continue;
        usable.push_back(static_cast<Eigen::Index>(i));
    }
    Eigen::MatrixXd dmu(static_cast<Eigen::Index>(usable.size()), kFeatureCount);
    Eigen::VectorXd dy(static_cast<Eigen::Index>(usable.size()));
    for (std::size_t i = 0; i < usable.size(); ++i) {
        dmu.row(static_cast<Eigen::Index>(i)) = deltas.delta_features.row(usable[i]);
        dy(static_cast<Eigen::Index>(i)) = *deltas.delta_predictions[static_cast<std::size_t>(
            usable[i])];
    }
    CausalReport report = holdout > 0.0
                              ? causal_dependence_holdout(dmu, dy, holdout, seed)
                              : causal_dependence(dmu, dy);

    json config;
    config["pairs"] = pairs_path;
    config["include_parse_errors"] = include_flagged;
    config["holdout_fraction"] = holdout;
    if (holdout > 0.0) config["seed"] = seed;
    json j = report_envelope("causal", std::move(config));
    j["pairs_total"] = deltas.ids.size();
    j["pairs_used"] = report.pairs_used;
    j["r2"] = report.r2;
    j["intercept"] = report.intercept;
    json weights = json::array();
    for (int i = 0; i < kFeatureCount; ++i) {
        json entry;
        entry["metric"] = feature_names()[static_cast<std::size_t>(i)];
        entry["weight"] = report.weights(i);
        weights.push_back(std::move(entry));
    }
    j["weights"] = std::move(weights);
    emit(j, out);
    return 0;
}

int cmd_mi(const std::string& features_path, int bins, const std::string& out) {
    FeatureTable features = read_features_csv(features_path);
    std::vector<double> mi = feature_mutual_information(features, bins);
    json config;
    config["features"] = features_path;
    config["bins"] = bins;
    json j = report_envelope("mi", std::move(config));
    json metrics = json::array();
    for (int i = 0; i < kFeatureCount; ++i) {
        json entry;
        entry["metric"] = feature_names()[static_cast<std::size_t>(i)];
        entry["mi_nats"] = mi[static_cast<std::size_t>(i)];
        metrics.push_back(std::move(entry));
    }
    j["metrics"] = std::move(metrics);
    emit(j, out);
    return 0;
}

int cmd_report(const std::string& in) {
    json j = json::parse(read_file(in));
    std::string kind = j.value("kind", "");
    if (kind == "eval") {
        const auto& r = j.at("report");
        std::printf("%-10s %14s %14s %14s %14s %14s\n", "Predictor", "F1", "AUPRC", "MCC", "BAcc",
                    "VD-S");
        auto cell = [&r](const char* name) {
            double m = r.at("mean").at(name).get<double>();
            double c = r.at("ci_half_width").at(name).get<double>();
            char buf[32];
            if (r.value("ci_defined", false)) {
                std::snprintf(buf, sizeof(buf), "%6.2f ± %4.2f", m, c);
            } else {
                std::snprintf(buf, sizeof(buf), "%6.2f", m);
            }
            return std::string(buf);
        };
        std::printf("%-10s %14s %14s %14s %14s %14s\n", "metriscope", cell("f1").c_str(),
                    cell("auprc").c_str(), cell("mcc").c_str(), cell("bacc").c_str(),
                    cell("vd_s").c_str());
        std::printf("parameters: %lld   random F1: %.2f   efficiency: %.3f /M params\n",
                    r.at("parameter_count").get<long long>(),
                    r.at("random_baseline_f1").get<double>(),
                    r.at("parameter_efficiency").get<double>());
        return 0;
    }
    if (kind == "isolation" || kind == "leave_one_out") {
        std::printf("full F1 = %.2f\n%-8s %12s\n", j.at("full_f1").get<double>(), "metric",
                    "% of F1");
        for (const auto& m : j.at("metrics")) {
            std::printf("%-8s %12.2f\n", m.at("metric").get<std::string>().c_str(),
                        m.at("relative_f1").get<double>());
        }
        return 0;
    }
    if (kind == "probe" || kind == "correlate" || kind == "mi") {
        std::printf("%-8s %14s\n", "metric",
                    kind == "probe" ? "R^2" : (kind == "mi" ? "MI (nats)" : "pearson r"));
        for (const auto& m : j.at("metrics")) {
            const char* field = kind == "probe" ? "r2" : (kind == "mi" ? "mi_nats" : "pearson_r");
            if (m.contains(field) && !m.at(field).is_null()) {
                std::printf("%-8s %14.4f\n", m.at("metric").get<std::string>().c_str(),
                            m.at(field).get<double>());
            } else {
                std::printf("%-8s %14s\n", m.at("metric").get<std::string>().c_str(), "undefined");
            }
        }
        return 0;
    }
    if (kind == "causal") {
        std::printf("pairs used: %llu of %llu\nR^2 = %.4f\n",
                    j.at("pairs_used").get<unsigned long long>(),
                    j.at("pairs_total").get<unsigned long long>(), j.at("r2").get<double>());
        return 0;
    }
    if (kind == "xgain") {
        std::printf("F1 embeddings: %.2f\nF1 combined:   %.2f\ndelta F1:      %.4f\n",
                    j.at("f1_embeddings_mean").get<double>(),
                    j.at("f1_combined_mean").get<double>(), j.at("delta_f1").get<double>());
        return 0;
    }
    if (kind == "query") {
        for (const auto& entry : j.at("results")) {
            std::printf("%s: %llu\n", entry.at("id").get<std::string>().c_str(),
                        entry.at("matches").get<unsigned long long>());
        }
        return 0;
    }
    throw Error("unknown report kind '" + kind + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"metriscope: syntactic code metrics over C/C++ functions"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    // Shared option storage.
    std::string in, out, code, pattern, split = "train", dialect = "auto";
    std::string model_path, features_path, predictions_path, pairs_path, source_id;
    SplitFiles files;
    std::string train_emb, test_emb, train_feat, test_feat;
    JsonlFieldMap fields;
    int threads = 0, k = 10, epochs = 300, ensemble = 5, bins = 16;
    std::size_t truncate_bytes = 0;
    std::uint64_t seed = 1;
    double lr = 0.5, l2 = 1e-4, pos_weight = 0, valid_fraction = 0.2;
    double fpr_budget = 0.0005; // VD-S false-positive-rate budget (0.05%)
    double holdout_fraction = 0.0;
    bool dump_tree_flag = false, include_flagged = false;

    auto add_field_flags = [&fields](CLI::App* cmd) {
        cmd->add_option("--func-field", fields.code, "JSONL field holding the function source");
        cmd->add_option("--label-field", fields.label, "JSONL field holding the 0/1 label");
        cmd->add_option("--id-field", fields.id, "JSONL field holding the sample id");
    };
    auto add_train_flags = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "base RNG seed");
        cmd->add_option("--k", k, "number of repeated runs");
        cmd->add_option("--epochs", epochs, "gradient descent epochs");
        cmd->add_option("--lr", lr, "learning rate");
        cmd->add_option("--l2", l2, "L2 penalty");
        cmd->add_option("--pos-weight", pos_weight, "positive class weight (0 = auto)");
        cmd->add_option("--ensemble", ensemble, "ensemble members per model");
        cmd->add_option("--valid-fraction", valid_fraction, "held-out share for the threshold");
    };
    auto add_split_files = [&files](CLI::App* cmd) {
        cmd->add_option("--train-features", files.train, "train split feature CSV")->required();
        cmd->add_option("--valid-features", files.valid, "valid split feature CSV");
        cmd->add_option("--test-features", files.test, "test split feature CSV")->required();
    };

    CLI::App* c_catalog = app.add_subcommand("catalog", "print the metric catalog manifest");
    c_catalog->add_option("--out", out, "write to file instead of stdout");

    CLI::App* c_extract = app.add_subcommand("extract", "extract features from a JSONL corpus");
    c_extract->add_option("--in", in, "input JSONL file")->required();
    c_extract->add_option("--out", out, "output feature CSV")->required();
    c_extract->add_option("--split", split, "split label recorded for the samples");
    c_extract->add_option("--dialect", dialect, "auto|c|cpp");
    c_extract->add_option("--threads", threads, "worker threads (0 = auto)");
    c_extract->add_option("--truncate-bytes", truncate_bytes,
                          "compute metrics over a byte prefix only (0 = whole function)");
    add_field_flags(c_extract);

    CLI::App* c_query = app.add_subcommand("query", "run an ad-hoc tree query");
    c_query->add_option("--pattern", pattern, "query pattern")->required();
    c_query->add_option("--in", in, "JSONL corpus to match against");
    c_query->add_option("--code", code, "inline code snippet to match against");
    c_query->add_option("--out", out, "write JSON report here");
    c_query->add_option("--dialect", dialect, "auto|c|cpp");
    c_query->add_flag("--dump-tree", dump_tree_flag, "also dump the syntax tree(s)");
    add_field_flags(c_query);

    CLI::App* c_train = app.add_subcommand("train", "train and evaluate the baseline");
    add_split_files(c_train);
    c_train->add_option("--model-out", model_path, "save the fitted model as JSON");
    c_train->add_option("--out", out, "write the evaluation report here");
    c_train->add_option("--fpr-budget", fpr_budget, "VD-S false positive rate budget");
    add_train_flags(c_train);

    CLI::App* c_eval = app.add_subcommand("eval", "evaluate a saved model on a feature CSV");
    c_eval->add_option("--model", model_path, "model JSON")->required();
    c_eval->add_option("--features", features_path, "feature CSV")->required();
    c_eval->add_option("--fpr-budget", fpr_budget, "VD-S false positive rate budget");
    c_eval->add_option("--out", out, "write the report here");

    CLI::App* c_isolation =
        app.add_subcommand("study-isolation", "per-metric single-feature retraining");
    add_split_files(c_isolation);
    c_isolation->add_option("--out", out, "write the report here");
    add_train_flags(c_isolation);

    CLI::App* c_loo = app.add_subcommand("study-loo", "per-metric leave-one-out retraining");
    add_split_files(c_loo);
    c_loo->add_option("--out", out, "write the report here");
    add_train_flags(c_loo);

    CLI::App* c_probe = app.add_subcommand("probe", "linear probes from embeddings to metrics");
    c_probe->add_option("--train-embeddings", train_emb)->required();
    c_probe->add_option("--train-features", train_feat)->required();
    c_probe->add_option("--test-embeddings", test_emb)->required();
    c_probe->add_option("--test-features", test_feat)->required();
    c_probe->add_option("--source-id", source_id, "embedding source label for the report");
    c_probe->add_option("--out", out, "write the report here");

    CLI::App* c_xgain = app.add_subcommand("xgain", "embeddings vs embeddings+metrics F1 gain");
    c_xgain->add_option("--train-embeddings", train_emb)->required();
    c_xgain->add_option("--train-features", train_feat)->required();
    c_xgain->add_option("--test-embeddings", test_emb)->required();
    c_xgain->add_option("--test-features", test_feat)->required();
    c_xgain->add_option("--out", out, "write the report here");
    add_train_flags(c_xgain);

    CLI::App* c_correlate =
        app.add_subcommand("correlate", "per-metric correlation with prediction scores");
    c_correlate->add_option("--features", features_path)->required();
    c_correlate->add_option("--predictions", predictions_path)->required();
    c_correlate->add_option("--bins", bins, "bins for the mutual-information ordering");
    c_correlate->add_option("--out", out, "write the report here");

    CLI::App* c_causal = app.add_subcommand("causal", "metric-delta regression on revision pairs");
    c_causal->add_option("--pairs", pairs_path, "revision pair JSONL")->required();
    c_causal->add_option("--out", out, "write the report here");
    c_causal->add_option("--dialect", dialect, "auto|c|cpp");
    c_causal->add_flag("--include-parse-errors", include_flagged,
                       "keep pairs whose sides parsed with errors");
    c_causal->add_option("--holdout-fraction", holdout_fraction,
                         "score the regression on a held-out share instead of in-sample");
    c_causal->add_option("--seed", seed, "holdout shuffle seed");

    CLI::App* c_mi = app.add_subcommand("mi", "per-metric mutual information with the label");
    c_mi->add_option("--features", features_path)->required();
    c_mi->add_option("--bins", bins, "equal-frequency bins");
    c_mi->add_option("--out", out, "write the report here");

    CLI::App* c_report = app.add_subcommand("report", "render a JSON report as text");
    c_report->add_option("--in", in, "report JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code_ = app.exit(e);
        return code_ == 0 ? 0 : 2;
    }

    try {
        if (c_catalog->parsed()) return cmd_catalog(out);
        if (c_extract->parsed())
            return cmd_extract(in, out, split, fields, dialect, threads, truncate_bytes);
        if (c_query->parsed())
            return cmd_query(pattern, in, code, out, dump_tree_flag, fields, dialect);
        TrainConfig config =
            config_from_flags(seed, epochs, lr, l2, pos_weight, ensemble, valid_fraction);
        if (c_train->parsed()) return cmd_train(files, model_path, out, config, k, fpr_budget);
        if (c_eval->parsed()) return cmd_eval(model_path, features_path, out, fpr_budget);
        if (c_isolation->parsed()) return cmd_study(true, files, out, config);
        if (c_loo->parsed()) return cmd_study(false, files, out, config);
        if (c_probe->parsed())
            return cmd_probe(train_emb, train_feat, test_emb, test_feat, source_id, out);
        if (c_xgain->parsed())
            return cmd_xgain(train_emb, train_feat, test_emb, test_feat, config, k, out);
        if (c_correlate->parsed()) return cmd_correlate(features_path, predictions_path, out, bins);
        if (c_causal->parsed())
            return cmd_causal(pairs_path, out, include_flagged, dialect, holdout_fraction, seed);
        if (c_mi->parsed()) return cmd_mi(features_path, bins, out);
        if (c_report->parsed()) return cmd_report(in);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
