// Batch frontend for the mimic model-tree learner:
//   train   ingest -> label -> (augment) -> grow -> prune -> evaluate
//   explain importance table, branch rules and a DOT graph for a tree file
//   bench   wall-clock table of the split heuristics over a size grid

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mimictree/errors.hpp"
#include "mimictree/interpret.hpp"
#include "mimictree/mimic.hpp"
#include "mimictree/oracle.hpp"
#include "mimictree/tree.hpp"

namespace mt = mimictree;
using json = nlohmann::json;

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t stage_seed(std::uint64_t master, std::uint64_t stage) {
    return mix64(master ^ mix64(stage + 0x517cc1b727220a95ULL));
}

std::string hex_u64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_atomically(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw mt::config_error("cannot write '" + tmp + "'");
        out << content;
        if (!out.good()) throw mt::config_error("failed writing '" + tmp + "'");
    }
    std::filesystem::rename(tmp, path);
}

std::vector<std::string> split_csv_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

struct TrainOptions {
    std::string data_path;
    std::string schema_path;
    std::vector<std::string> feature_flags;
    std::string target;
    std::string episode;
    std::string heuristic = "variance";
    std::size_t min_leaf = 100;
    int max_depth = 12;
    int window = 1;
    double lambda = 0.0;
    std::string norm = "l0";
    double test_fraction = 0.2;
    std::string oracle_cmd;
    std::string labels_file;
    std::string target_kind = "qvalue";
    double impact_baseline = 0.0;
    std::string augment_action;
    double augment_rate = 0.1;
    std::uint64_t seed = 0;
    int threads = 0;
    bool segmented_variance_gap = false;
    std::string out_prefix;
};

mt::Schema resolve_schema(const TrainOptions& opt) {
    mt::Schema schema;
    if (!opt.schema_path.empty()) {
        schema = mt::Schema::parse_file(opt.schema_path);
    } else if (!opt.feature_flags.empty()) {
        for (const auto& flag : opt.feature_flags)
            schema.features.push_back(mt::Schema::parse_feature_flag(flag));
    } else {
        throw mt::config_error("either --schema or at least one --feature is required");
    }
    if (!opt.target.empty()) schema.target_column = opt.target;
    if (!opt.episode.empty()) schema.episode_column = opt.episode;
    const bool external_labels = !opt.oracle_cmd.empty() || !opt.labels_file.empty();
    if (schema.target_column.empty() && !external_labels) {
        throw mt::config_error("no target column: pass --target, or label via "
                               "--labels-file/--oracle-cmd");
    }
    schema.validate();
    return schema;
}

mt::penalty_norm norm_from_flag(const std::string& s) {
    if (s == "l0") return mt::penalty_norm::l0;
    if (s == "l1") return mt::penalty_norm::l1;
    if (s == "l2") return mt::penalty_norm::l2;
    throw mt::config_error("--norm must be l0, l1 or l2");
}

int cmd_train(const TrainOptions& opt) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();

    const mt::Schema schema = resolve_schema(opt);
    if (!opt.oracle_cmd.empty() && !opt.labels_file.empty())
        throw mt::config_error("--oracle-cmd and --labels-file are mutually exclusive");
    if (!opt.augment_action.empty() && opt.target_kind == "impact")
        throw mt::config_error("augmentation and --target-kind impact cannot be combined: "
                               "counterfactual rows have no episode successor");
    if (!opt.augment_action.empty() && opt.oracle_cmd.empty())
        throw mt::config_error("--augment-action needs --oracle-cmd to label counterfactual rows");

    mt::Dataset data = mt::load_csv(opt.data_path, schema);
    auto [normed, stats] = mt::normalize(data);
    mt::Dataset full = mt::lag_expand(normed, opt.window);

    // Soft labels: aligned file, teacher subprocess, or the CSV target.
    std::optional<mt::OracleClient> oracle;
    if (!opt.labels_file.empty()) {
        oracle = mt::OracleClient::aligned_file(opt.labels_file);
    } else if (!opt.oracle_cmd.empty()) {
        oracle = mt::OracleClient::subprocess(opt.oracle_cmd);
    }
    if (oracle) full.target = oracle->query(full);

    if (opt.target_kind == "impact") {
        full.target = mt::compute_impact(full.target, full.episode_ids, opt.impact_baseline);
    } else if (opt.target_kind != "qvalue") {
        throw mt::config_error("--target-kind must be qvalue or impact");
    }

    auto [train, test] = mt::split_train_test(full, opt.test_fraction, stage_seed(opt.seed, 1));

    std::size_t augmented_rows = 0;
    if (!opt.augment_action.empty()) {
        const auto eq = opt.augment_action.find('=');
        if (eq == std::string::npos)
            throw mt::config_error("--augment-action takes '<feature>=<level>'");
        mt::AugmentationPlan plan;
        plan.action_feature = opt.augment_action.substr(0, eq);
        plan.target_level = opt.augment_action.substr(eq + 1);
        plan.rate = opt.augment_rate;
        plan.seed = stage_seed(opt.seed, 2);
        mt::AugmentedSet aug = mt::action_replace(train, plan);
        if (aug.data.rows() > 0) {
            aug.data.target = oracle->query(aug.data);
            augmented_rows = aug.data.rows();
            train.append_rows(aug.data);
        }
    }

    mt::GrowthConfig growth;
    growth.heuristic = mt::split_heuristic_from_string(opt.heuristic);
    growth.min_leaf = opt.min_leaf;
    growth.max_depth = opt.max_depth;
    growth.seed = stage_seed(opt.seed, 3);
    growth.threads = opt.threads;
    growth.segmented.score_by_variance_gap = opt.segmented_variance_gap;

    mt::ModelTree grown = mt::grow(train, growth);
    const std::size_t nodes_before = grown.node_count();

    mt::PruneConfig prune_cfg{opt.lambda, norm_from_flag(opt.norm)};
    mt::ModelTree tree = mt::prune(grown, train, prune_cfg);

    const std::vector<double> pred = tree.predict(test);
    const double train_mean = mt::null_model_mean(train.target);
    const mt::FidelityReport fid = mt::fidelity(pred, test.target, train_mean);

    json config{{"data", opt.data_path},
                {"schema", opt.schema_path},
                {"features", opt.feature_flags},
                {"target", schema.target_column},
                {"episode", schema.episode_column},
                {"heuristic", opt.heuristic},
                {"min_leaf", opt.min_leaf},
                {"max_depth", opt.max_depth},
                {"window", opt.window},
                {"lambda", opt.lambda},
                {"norm", opt.norm},
                {"test_fraction", opt.test_fraction},
                {"oracle_cmd", opt.oracle_cmd},
                {"labels_file", opt.labels_file},
                {"target_kind", opt.target_kind},
                {"impact_baseline", opt.impact_baseline},
                {"augment_action", opt.augment_action},
                {"augment_rate", opt.augment_rate},
                {"seed", opt.seed},
                {"threads", opt.threads}};

    json report;
    report["config"] = config;
    report["schema_fingerprint"] = hex_u64(train.schema_fingerprint());
    report["rows"] = {{"train", train.rows()},
                      {"test", test.rows()},
                      {"augmented", augmented_rows},
                      {"features", train.n_features()}};
    report["tree"] = {{"nodes_before_prune", nodes_before},
                      {"nodes", tree.node_count()},
                      {"leaves", tree.leaf_count()},
                      {"depth", tree.depth()},
                      {"heuristic_failures", tree.heuristic_failures()}};
    report["fidelity"] = {{"rmse", fid.rmse},
                          {"null_rmse", fid.null_rmse},
                          {"pearson_r", fid.pearson_defined ? json(fid.pearson_r)
                                                            : json("undefined")},
                          {"n_test", fid.n_test}};

    write_atomically(opt.out_prefix + ".tree.json", tree.to_json_string());
    write_atomically(opt.out_prefix + ".report.json", report.dump(2) + "\n");

    const double secs = std::chrono::duration<double>(clock::now() - t0).count();
    std::cout << "trained " << opt.heuristic << " tree: " << tree.node_count() << " nodes ("
              << tree.leaf_count() << " leaves, depth " << tree.depth() << ", "
              << nodes_before - tree.node_count() << " pruned)\n";
    std::cout << "fidelity: rmse=" << fid.rmse << " null_rmse=" << fid.null_rmse
              << " pearson=";
    if (fid.pearson_defined) {
        std::cout << fid.pearson_r;
    } else {
        std::cout << "undefined";
    }
    std::cout << " on " << fid.n_test << " test rows\n";
    std::cout << "wrote " << opt.out_prefix << ".tree.json and " << opt.out_prefix
              << ".report.json in " << secs << "s\n";
    return 0;
}

struct ExplainOptions {
    std::string tree_path;
    std::size_t top_k = 0;
    std::size_t min_n = 0;
    int depth_limit = 0;
    bool aggregate_lags = false;
    bool normalized = false;
    std::string out_prefix;
};

int cmd_explain(const ExplainOptions& opt) {
    const mt::ModelTree tree = mt::ModelTree::load(opt.tree_path);

    const auto table = mt::feature_importance(tree, opt.aggregate_lags, opt.normalized);
    const std::string tsv = mt::importance_tsv(table, opt.top_k);

    const auto selector =
        opt.min_n > 0 ? mt::RuleSelector::with_min_n(opt.min_n) : mt::RuleSelector::all();
    const auto rules = mt::extract_rules(tree, selector);
    std::ostringstream rules_text;
    for (const auto& rule : rules) rules_text << mt::format_rule(tree, rule) << "\n";

    const std::string dot = mt::export_graph(
        tree, opt.depth_limit > 0 ? std::optional<int>(opt.depth_limit) : std::nullopt);

    if (opt.out_prefix.empty()) {
        std::cout << "# importance\n" << tsv << "\n# rules\n" << rules_text.str() << "\n# graph\n"
                  << dot;
    } else {
        write_atomically(opt.out_prefix + ".importance.tsv", tsv);
        write_atomically(opt.out_prefix + ".rules.txt", rules_text.str());
        write_atomically(opt.out_prefix + ".dot", dot);
        std::cout << "wrote " << opt.out_prefix << ".importance.tsv, .rules.txt, .dot ("
                  << table.size() << " features, " << rules.size() << " rules)\n";
    }
    return 0;
}

struct BenchOptions {
    std::string sizes = "1000,10000,100000";
    std::string heuristics = "variance,ttest,segmented,gmm";
    std::size_t features = 10;
    std::size_t min_leaf = 100;
    int max_depth = 8;
    std::uint64_t seed = 0;
    double budget_sec = 86400.0;
    bool strict = false;
    int threads = 0;
};

// Piecewise-linear synthetic table with a few planted thresholds, enough
// structure for every heuristic to chew on.
mt::Dataset bench_dataset(std::size_t n, std::size_t p, std::uint64_t seed) {
    mt::Dataset data;
    std::uint64_t state = seed + 0xabcdef;
    auto next_unit = [&state]() {
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return static_cast<double>(z >> 11) * 0x1.0p-53;
    };
    data.columns.assign(p, std::vector<double>(n));
    for (std::size_t j = 0; j < p; ++j) {
        data.schema.push_back({"f" + std::to_string(j), "", mt::feature_kind::continuous, 0, -1});
        for (std::size_t i = 0; i < n; ++i) data.columns[j][i] = next_unit();
    }
    data.target.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double y = 0.3 * data.columns[0][i];
        if (data.columns[0][i] > 0.5) y += 1.0 + 0.5 * data.columns[1 % p][i];
        if (data.columns[2 % p][i] > 0.3) y += 0.7 - data.columns[3 % p][i];
        y += 0.05 * (next_unit() - 0.5);
        data.target[i] = y;
    }
    return data;
}

int cmd_bench(const BenchOptions& opt) {
    const auto sizes = split_csv_list(opt.sizes);
    const auto heuristics = split_csv_list(opt.heuristics);
    if (sizes.empty() || heuristics.empty())
        throw mt::config_error("--sizes and --heuristics must be non-empty");

    bool over_budget = false;
    std::cout << "heuristic\tsize\tseconds\tstatus\n";
    for (const auto& size_str : sizes) {
        const std::size_t n = std::stoull(size_str);
        const mt::Dataset data = bench_dataset(n, opt.features, opt.seed);
        for (const auto& name : heuristics) {
            mt::GrowthConfig cfg;
            cfg.heuristic = mt::split_heuristic_from_string(name);
            cfg.min_leaf = opt.min_leaf;
            cfg.max_depth = opt.max_depth;
            cfg.seed = opt.seed;
            cfg.threads = opt.threads;
            const auto t0 = std::chrono::steady_clock::now();
            mt::ModelTree tree = mt::grow(data, cfg);
            tree = mt::prune(tree, data, {});
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const bool timeout = secs > opt.budget_sec;
            over_budget = over_budget || timeout;
            std::printf("%s\t%zu\t%.6f\t%s\n", name.c_str(), n, secs, timeout ? "timeout" : "ok");
            std::fflush(stdout);
        }
    }
    return over_budget && opt.strict ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mimic model-tree learner: distill a black-box regression teacher "
                 "into a linear model tree"};
    app.require_subcommand(1);

    TrainOptions train;
    auto* t = app.add_subcommand("train", "train, prune and evaluate a mimic tree");
    t->add_option("--data", train.data_path, "input CSV")->required();
    t->add_option("--schema", train.schema_path, "schema sidecar file");
    t->add_option("--feature", train.feature_flags,
                  "feature as 'name:kind[:levels]' (alternative to --schema)");
    t->add_option("--target", train.target, "target column in the CSV");
    t->add_option("--episode", train.episode, "episode-boundary column");
    t->add_option("--heuristic", train.heuristic, "variance|ttest|segmented|gmm");
    t->add_option("--min-leaf", train.min_leaf, "minimum records per leaf (m)");
    t->add_option("--max-depth", train.max_depth, "maximum tree depth");
    t->add_option("--window", train.window, "history window, lags 0..window-1");
    t->add_option("--lambda", train.lambda, "pruning penalty weight");
    t->add_option("--norm", train.norm, "pruning penalty: l0|l1|l2");
    t->add_option("--test-fraction", train.test_fraction, "held-out fraction");
    t->add_option("--oracle-cmd", train.oracle_cmd, "teacher command (subprocess protocol)");
    t->add_option("--labels-file", train.labels_file, "aligned soft-label file");
    t->add_option("--target-kind", train.target_kind, "qvalue|impact");
    t->add_option("--impact-baseline", train.impact_baseline,
                  "q baseline for the first event of an episode");
    t->add_option("--augment-action", train.augment_action,
                  "action replacement target as '<feature>=<level>'");
    t->add_option("--augment-rate", train.augment_rate, "augmented rows / training rows");
    t->add_option("--seed", train.seed, "master seed; stage seeds derive from it");
    t->add_option("--threads", train.threads, "worker threads (0 = hardware)");
    t->add_flag("--segmented-variance-gap", train.segmented_variance_gap,
                "score segmented candidates by |Var(left)-Var(right)|");
    t->add_option("--out", train.out_prefix, "output prefix for .tree.json/.report.json")
        ->required();

    ExplainOptions explain;
    auto* e = app.add_subcommand("explain", "importance, rules and DOT graph for a tree file");
    e->add_option("--tree", explain.tree_path, "tree file from train")->required();
    e->add_option("--top", explain.top_k, "keep only the top-k importance rows");
    e->add_option("--min-n", explain.min_n, "only rules for leaves with n >= this");
    e->add_option("--depth", explain.depth_limit, "truncate the graph below this depth");
    e->add_flag("--aggregate-lags", explain.aggregate_lags,
                "sum importance across lags of the same base feature");
    e->add_flag("--normalized", explain.normalized, "normalize importances to sum to 1");
    e->add_option("--out", explain.out_prefix, "output prefix (default: stdout)");

    BenchOptions bench;
    auto* b = app.add_subcommand("bench", "time every heuristic over a dataset size grid");
    b->add_option("--sizes", bench.sizes, "comma list of row counts");
    b->add_option("--heuristics", bench.heuristics, "comma list of heuristics");
    b->add_option("--features", bench.features, "synthetic feature count");
    b->add_option("--min-leaf", bench.min_leaf, "minimum records per leaf");
    b->add_option("--max-depth", bench.max_depth, "maximum tree depth");
    b->add_option("--seed", bench.seed, "generator seed");
    b->add_option("--budget", bench.budget_sec, "per-run budget in seconds");
    b->add_flag("--strict", bench.strict, "exit nonzero when a run exceeds the budget");
    b->add_option("--threads", bench.threads, "worker threads (0 = hardware)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (t->parsed()) return cmd_train(train);
        if (e->parsed()) return cmd_explain(explain);
        if (b->parsed()) return cmd_bench(bench);
    } catch (const mt::error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "unexpected error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
