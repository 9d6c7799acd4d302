// Acceptance suite. Runs every criterion at its stated tolerance and prints
// one PASS/FAIL line per criterion; exit status is nonzero when any ran
// criterion failed. The dataset-gated criterion is skipped (and says so)
// when PRIMEVUL_DIR is not set.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>

#include "metriscope/corpus.hpp"
#include "metriscope/learner.hpp"
#include "metriscope/metrics.hpp"
#include "metriscope/stats.hpp"
#include "metriscope/studies.hpp"
#include "support/brute_match.hpp"
#include "support/oracle_corpus.hpp"
#include "support/random_cases.hpp"
#include "support/score_oracles.hpp"

using namespace metriscope;
namespace mt = metriscope::testing;

namespace {

int failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
    std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", name, detail.empty() ? "" : ": ",
                detail.c_str());
    if (!ok) ++failures;
}

void skip(const char* name, const std::string& why) {
    std::printf("[SKIP] %s: %s\n", name, why.c_str());
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Criterion 1: the hand-derived metric corpus matches exactly, in under 5 s.
void criterion_1() {
    auto start = std::chrono::steady_clock::now();
    const auto& cases = mt::oracle_corpus();
    const MetricCatalog& catalog = default_catalog();
    const NodeCategoryTable& table = default_category_table();
    int mismatches = 0;
    std::string first;
    for (const auto& oc : cases) {
        SyntaxTree tree = parse_function({oc.name, oc.code, Dialect::Auto});
        FeatureVector fv = extract_features(tree, catalog, table);
        for (int i = 0; i < kFeatureCount; ++i) {
            double got = fv.values[static_cast<std::size_t>(i)];
            double want = oc.expected[static_cast<std::size_t>(i)];
            bool ok = feature_names()[static_cast<std::size_t>(i)] == "T3"
                          ? std::abs(got - want) <= 1e-9
                          : got == want;
            if (!ok) {
                ++mismatches;
                if (first.empty()) {
                    std::ostringstream os;
                    os << oc.name << "/" << feature_names()[static_cast<std::size_t>(i)]
                       << " got " << got << " want " << want;
                    first = os.str();
                }
            }
        }
        if (tree.parse_error() != oc.parse_error && first.empty()) {
            ++mismatches;
            first = oc.name + "/parse_error flag";
        }
    }
    double elapsed = seconds_since(start);
    std::ostringstream os;
    os << cases.size() << " snippets, " << mismatches << " mismatches"
       << (first.empty() ? "" : " (first: " + first + ")") << ", " << elapsed << " s";
    report("criterion 1: metric oracle suite", cases.size() >= 40 && mismatches == 0 &&
                                                   elapsed < 5.0,
           os.str());
}

// Criterion 2: query construct conformance plus matcher/brute equivalence on
// 1000 seeded random cases, in under 60 s.
void criterion_2() {
    auto start = std::chrono::steady_clock::now();
    const NodeCategoryTable& table = default_category_table();

    struct ConstructCase {
        const char* construct;
        const char* pattern;
        const char* code;
        std::size_t expected;
    };
    // One positive and one negative case per Table construct.
    const ConstructCase cases[] = {
        {"node", "(goto_stmt)", "void f(){ goto x; x:; }", 1},
        {"node", "(goto_stmt)", "void f(){ a(); }", 0},
        {"parent-child", "(expr_stmt (call_expr))", "void f(){ g(); }", 1},
        {"parent-child", "(expr_stmt (call_expr))", "void f(){ x = g(); }", 0},
        {"siblings", "(parameter_list (parameter_declaration) (parameter_declaration))",
         "void f(int a, int b, int c){}", 1},
        {"siblings", "(parameter_declaration (identifier) (primitive_type))",
         "void f(int a){}", 0},
        {"sibling-quantifier-star", "(compound_statement (expression_statement)*)",
         "void f(){ }", 1},
        {"sibling-quantifier-plus", "(compound_statement (expression_statement)+)",
         "void f(){ }", 0},
        {"descendant-quantifier", "(while_statement ((!loop_stmt)^* (for_statement)))",
         "void f(){ while(a){ if(b) for(;;) g(); } }", 1},
        {"descendant-quantifier", "(while_statement ((!loop_stmt)^* (for_statement)))",
         "void f(){ while(a) g(); for(;;) h(); }", 0},
        {"alternative", "((goto_stmt) | (return_stmt))", "void f(){ goto x; x: return; }", 2},
        {"alternative", "((goto_stmt) | (return_stmt))", "void f(){ a(); }", 0},
        {"negation", "(!goto_statement)", "void f(){}", 6},
        {"negation", "(!identifier)", "void f(){}", 5}, // excludes exactly the identifier
        {"wildcard", "(_)", "void f(){}", 6},
        {"annotation", "(number_literal) @num", "int f(){ return 4; }", 1},
        {"negated-field", "(if_stmt !alternative)",
         "void f(){ if(a) b(); else c(); if(d) e(); }", 1},
        {"negated-field", "(if_stmt !alternative)", "void f(){ if(a) b(); else c(); }", 0},
        {"field-constraint", "(call_expr function: (identifier) @name)", "void f(){ g(); }", 1},
        {"field-constraint", "(call_expr function: (identifier))", "void f(){ a.b(); }", 0},
        {"group-chain", "(loop_stmt ((!loop_stmt)^* (loop_stmt))^*)",
         "void f(){ for(;;) while(a) g(); }", 2},
        {"group-chain", "(loop_stmt ((!loop_stmt)^* (loop_stmt))^*)", "void f(){ g(); }", 0},
    };
    int bad = 0;
    std::string first;
    for (const auto& c : cases) {
        SyntaxTree t = parse_function({"conf", c.code, Dialect::Auto});
        QueryPattern p = parse_query(c.pattern);
        auto fast = match_pattern(t, p, table);
        auto slow = mt::brute_force_match(t, p, table);
        bool ok = fast.size() == c.expected && slow.size() == c.expected;
        if (ok) {
            for (std::size_t i = 0; i < fast.size(); ++i) {
                if (fast[i].root != slow[i].root || fast[i].captures != slow[i].captures) {
                    ok = false;
                }
            }
        }
        if (!ok) {
            ++bad;
            if (first.empty()) first = std::string(c.construct) + " " + c.pattern;
        }
    }

    // Annotation capture content check.
    {
        SyntaxTree t = parse_function({"conf", "int f(){ return a+b; }", Dialect::Auto});
        auto results = match_pattern(t, parse_query("(binary_expr (identifier) @x)"), table);
        if (results.size() != 1 || results[0].captures.at("x").size() != 2) {
            ++bad;
            if (first.empty()) first = "annotation bindings";
        }
    }

    // Attribute construct: positive and negative via the pointer oracle.
    {
        SyntaxTree t = parse_function({"conf", "void f(int *p, int q){ p+1; q+2; }",
                                       Dialect::Auto});
        AttributeOracle oracle = pointer_attribute_oracle(t);
        QueryPattern p = parse_query("({type: 'pointer'})");
        auto fast = match_pattern(t, p, table, oracle);
        auto slow = mt::brute_force_match(t, p, table, oracle);
        bool has_p = false, has_q = false;
        for (const auto& m : fast) {
            if (t.text(*m.root) == "p") has_p = true;
            if (t.text(*m.root) == "q") has_q = true;
        }
        if (fast.size() != slow.size() || !has_p || has_q) {
            ++bad;
            if (first.empty()) first = "attribute";
        }
    }

    // 1000 seeded random tree/pattern equivalence cases.
    std::mt19937_64 rng(0xC0FFEE);
    const NodeCategoryTable& synth = mt::synthetic_table();
    int random_bad = 0;
    for (int iter = 0; iter < 1000; ++iter) {
        SyntaxTree t = mt::random_tree(rng);
        QueryPattern p = parse_query(mt::random_pattern_text(rng));
        auto fast = match_pattern(t, p, synth);
        auto slow = mt::brute_force_match(t, p, synth);
        bool ok = fast.size() == slow.size();
        if (ok) {
            for (std::size_t i = 0; i < fast.size(); ++i) {
                if (fast[i].root != slow[i].root || fast[i].captures != slow[i].captures) {
                    ok = false;
                }
            }
        }
        if (!ok) ++random_bad;
    }
    double elapsed = seconds_since(start);
    std::ostringstream os;
    os << "constructs bad=" << bad << (first.empty() ? "" : " (" + first + ")")
       << ", random mismatches=" << random_bad << "/1000, " << elapsed << " s";
    report("criterion 2: query conformance", bad == 0 && random_bad == 0 && elapsed < 60.0,
           os.str());
}

// Criterion 3: score implementations match brute-force recomputation at
// 1e-9 on 200 random sets; VD-S of a degenerate scorer is exactly 100.
void criterion_3() {
    std::mt19937_64 rng(1337);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    int bad = 0;
    for (int iter = 0; iter < 200; ++iter) {
        int n = 10 + static_cast<int>(rng() % 991);
        std::vector<double> s(static_cast<std::size_t>(n));
        std::vector<int> l(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            double grid = uni(rng) < 0.5 ? 16.0 : 1e9; // half the sets have ties
            s[static_cast<std::size_t>(i)] = std::floor(uni(rng) * grid) / grid;
            l[static_cast<std::size_t>(i)] = uni(rng) < 0.25 ? 1 : 0;
        }
        l[0] = 1;
        l[1 % n] = 0;
        double threshold = uni(rng);
        double budget = uni(rng) * 0.1;
        ClassificationScores cs = classification_scores(s, l, threshold);
        bool ok = std::abs(cs.f1 - mt::brute_f1(s, l, threshold)) <= 1e-9 &&
                  std::abs(cs.mcc - mt::brute_mcc(s, l, threshold)) <= 1e-9 &&
                  std::abs(cs.bacc - mt::brute_bacc(s, l, threshold)) <= 1e-9 &&
                  std::abs(auprc(s, l) - mt::brute_auprc(s, l)) <= 1e-9 &&
                  std::abs(vd_s(s, l, budget) - mt::brute_vds(s, l, budget)) <= 1e-9;
        if (!ok) ++bad;
    }
    // Degenerate scorer: constant score on an imbalanced set.
    std::vector<double> constant(1000, 0.42);
    std::vector<int> labels(1000, 0);
    for (int i = 0; i < 30; ++i) labels[static_cast<std::size_t>(i)] = 1;
    bool degenerate_ok = vd_s(constant, labels, 0.0005) == 100.0;
    std::ostringstream os;
    os << bad << "/200 mismatches, degenerate VD-S="
       << vd_s(constant, labels, 0.0005);
    report("criterion 3: statistics oracles", bad == 0 && degenerate_ok, os.str());
}

// Criterion 4: causal/probe/MI synthetic kernels at their tolerances.
void criterion_4() {
    std::mt19937_64 rng(4242);
    std::normal_distribution<double> g(0.0, 1.0);
    std::ostringstream os;
    bool ok = true;

    { // Exact linear dependence: R^2 = 1 +- 1e-6.
        int n = 2000;
        Eigen::MatrixXd dmu(n, kFeatureCount);
        Eigen::VectorXd w(kFeatureCount);
        for (int j = 0; j < kFeatureCount; ++j) w(j) = g(rng);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < kFeatureCount; ++j) dmu(i, j) = g(rng);
        }
        Eigen::VectorXd dy = dmu * w;
        double r2 = causal_dependence(dmu, dy).r2;
        ok = ok && std::abs(r2 - 1.0) <= 1e-6;
        os << "exact R2=" << r2;
    }
    { // Independent noise at n = 1e4: R^2 <= 0.01 + 23/n.
        int n = 10000;
        Eigen::MatrixXd dmu(n, kFeatureCount);
        Eigen::VectorXd dy(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < kFeatureCount; ++j) dmu(i, j) = g(rng);
            dy(i) = g(rng);
        }
        double r2 = causal_dependence(dmu, dy).r2;
        ok = ok && r2 <= 0.01 + static_cast<double>(kFeatureCount) / n;
        os << ", noise R2=" << r2;
    }
    { // Probe recoverability: embeddings carrying log(1+metric) coordinates.
        int n = 600, d = 6;
        Eigen::MatrixXd X(n, kFeatureCount), E(n, d);
        Eigen::VectorXi y(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < kFeatureCount; ++j) X(i, j) = std::floor(std::abs(g(rng)) * 6.0);
            E(i, 0) = std::log1p(X(i, 2));
            E(i, 1) = std::log1p(X(i, 17));
            for (int j = 2; j < d; ++j) E(i, j) = g(rng);
            y(i) = i % 5 == 0;
        }
        FeatureTable train, test;
        EmbeddingFile etrain, etest;
        for (int i = 0; i < n; ++i) {
            FeatureRow row;
            row.id = "s" + std::to_string(i);
            for (int j = 0; j < kFeatureCount; ++j) row.values[static_cast<std::size_t>(j)] = X(i, j);
            row.label = y(i);
            (i < n / 2 ? train : test).rows.push_back(row);
            (i < n / 2 ? etrain : etest).ids.push_back(row.id);
        }
        etrain.rows = E.topRows(n / 2);
        etest.rows = E.bottomRows(n / 2);
        ProbeReport probe = linear_probe(etrain, train, etest, test, "synthetic");
        ok = ok && probe.r2[2] >= 0.99 && probe.r2[17] >= 0.99;
        os << ", probe R2=" << probe.r2[2] << "/" << probe.r2[17];
    }
    { // MI of label = 1[x > median] with 2 bins: within 0.01 of ln 2 at 1e4.
        int n = 10000;
        std::vector<double> xs(static_cast<std::size_t>(n));
        for (auto& x : xs) x = g(rng);
        std::vector<double> sorted = xs;
        std::sort(sorted.begin(), sorted.end());
        double median = sorted[static_cast<std::size_t>(n / 2)];
        std::vector<int> labels(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            labels[static_cast<std::size_t>(i)] = xs[static_cast<std::size_t>(i)] > median ? 1 : 0;
        }
        double mi = mutual_information(xs, labels, 2);
        ok = ok && std::abs(mi - std::log(2.0)) <= 0.01;
        os << ", MI=" << mi << " (ln2=" << std::log(2.0) << ")";
    }
    report("criterion 4: causal/probe kernels", ok, os.str());
}

// Criterion 6: the paper-scale LLM-dependent numbers are not reproducible at
// desk scale; their pipelines are exercised on miniature files instead.
void criterion_6() {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "metriscope_accept_mini";
    fs::create_directories(dir);
    bool ok = true;
    std::ostringstream os;
    try {
        // Miniature prediction + embedding + feature files through the real
        // file formats.
        FeatureTable features;
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (int i = 0; i < 60; ++i) {
            FeatureRow row;
            row.id = "m" + std::to_string(100 + i);
            for (int j = 0; j < kFeatureCount; ++j) {
                row.values[static_cast<std::size_t>(j)] = std::floor(uni(rng) * 6.0);
            }
            row.label = i % 4 == 0;
            features.rows.push_back(row);
        }
        std::string feat_path = (dir / "features.csv").string();
        write_features_csv(features, feat_path);
        FeatureTable roundtrip = read_features_csv(feat_path);
        ok = ok && roundtrip.rows.size() == features.rows.size();

        std::ostringstream pred;
        pred << "id,score\n";
        for (const auto& row : features.rows) pred << row.id << "," << uni(rng) << "\n";
        std::string pred_path = (dir / "pred.csv").string();
        atomic_write_file(pred_path, pred.str());
        CorrelationReport corr =
            prediction_correlation(roundtrip, read_predictions_csv(pred_path));
        ok = ok && corr.r.size() == kFeatureCount;

        std::ostringstream emb;
        emb << "id,e1,e2,e3\n";
        for (const auto& row : features.rows) {
            emb << row.id << "," << uni(rng) << "," << uni(rng) << "," << uni(rng) << "\n";
        }
        std::string emb_path = (dir / "emb.csv").string();
        atomic_write_file(emb_path, emb.str());
        EmbeddingFile emb_file = read_embeddings_csv(emb_path);
        ProbeReport probe = linear_probe(emb_file, roundtrip, emb_file, roundtrip, "mini");
        ok = ok && probe.r2.size() == kFeatureCount;

        os << "miniature prediction/embedding ingestion exercised; "
           << "probe R2(T1)=0.91, causal R2=0.42 and dF1<0.14 from the paper "
           << "require the authors' model artifacts and are covered by the "
           << "synthetic kernels of criterion 4";
    } catch (const std::exception& e) {
        ok = false;
        os << "exception: " << e.what();
    }
    fs::remove_all(dir);
    report("criterion 6: LLM-dependent numbers out of desk scale", ok, os.str());
}

// Criterion 5: PrimeVul reproduction, gated on the dataset being present.
void criterion_5() {
    const char* env = std::getenv("PRIMEVUL_DIR");
    if (env == nullptr) {
        skip("criterion 5: PrimeVul reproduction",
             "PRIMEVUL_DIR not set; place primevul_train.jsonl / primevul_valid.jsonl / "
             "primevul_test.jsonl in a directory and export PRIMEVUL_DIR to run");
        return;
    }
    namespace fs = std::filesystem;
    fs::path dir(env);
    auto find_split = [&dir](const char* split) -> std::string {
        for (const auto& name :
             {std::string("primevul_") + split + ".jsonl", std::string(split) + ".jsonl"}) {
            if (fs::exists(dir / name)) return (dir / name).string();
        }
        return "";
    };
    std::string train_path = find_split("train");
    std::string valid_path = find_split("valid");
    std::string test_path = find_split("test");
    if (train_path.empty() || test_path.empty()) {
        skip("criterion 5: PrimeVul reproduction", "expected split files not found under " +
                                                       std::string(env));
        return;
    }

    std::ostringstream os;
    auto t0 = std::chrono::steady_clock::now();
    LabeledCorpus corpus = load_jsonl(train_path, Split::Train);
    if (!valid_path.empty()) append_jsonl(corpus, valid_path, Split::Valid);
    std::size_t n_trainvalid = corpus.samples.size();
    LabeledCorpus test_corpus = load_jsonl(test_path, Split::Test);

    FeatureTable train_features =
        extract_corpus_features(corpus, default_catalog(), default_category_table());
    FeatureTable test_features =
        extract_corpus_features(test_corpus, default_catalog(), default_category_table());
    double extract_minutes = seconds_since(t0) / 60.0;
    os << "extracted " << n_trainvalid + test_corpus.samples.size() << " functions in "
       << extract_minutes << " min";

    TrainConfig config;
    config.seed = 7;
    EvalReport eval = run_repeated(train_features.matrix(), train_features.labels(),
                                   test_features.matrix(), test_features.labels(), config, 10);
    os << "; F1=" << eval.mean.f1 << "±" << eval.ci_half_width.f1
       << " AUPRC=" << eval.mean.auprc << " params=" << eval.parameter_count;

    StudyReport isolation =
        isolation_study(train_features.matrix(), train_features.labels(),
                        test_features.matrix(), test_features.labels(), config);
    double best_single = 0;
    for (double v : isolation.relative_f1) best_single = std::max(best_single, v);
    StudyReport loo = leave_one_out_study(train_features.matrix(), train_features.labels(),
                                          test_features.matrix(), test_features.labels(), config);
    double worst_loo = 1e9;
    for (double v : loo.relative_f1) worst_loo = std::min(worst_loo, v);
    os << "; best isolation=" << best_single << "% worst LOO=" << worst_loo << "%";

    bool ok = extract_minutes < 30.0 && eval.mean.f1 >= 16.0 && eval.mean.f1 >= 3.0 * 4.42 &&
              best_single >= 75.0 && worst_loo >= 95.0;
    report("criterion 5: PrimeVul reproduction", ok, os.str());
}

} // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all run criteria passed\n");
    return 0;
}
