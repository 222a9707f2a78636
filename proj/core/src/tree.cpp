#include "mimictree/tree.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "mimictree/errors.hpp"

namespace mimictree {

namespace {

using json = nlohmann::json;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

int effective_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs task(0..count-1) on up to `threads` workers; results must be
/// written to per-index slots so scheduling order cannot matter.
void run_indexed(std::size_t count, int threads, const std::function<void(std::size_t)>& task) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) task(i);
    };
    std::vector<std::thread> pool;
    const int n_workers = std::min<int>(threads, static_cast<int>(count));
    pool.reserve(static_cast<std::size_t>(n_workers) - 1);
    for (int t = 1; t < n_workers; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

double mean_over(const std::vector<double>& v, const std::vector<std::size_t>& rows) {
    double s = 0.0;
    for (std::size_t r : rows) s += v[r];
    return rows.empty() ? 0.0 : s / static_cast<double>(rows.size());
}

struct GrowContext {
    const Dataset& data;
    const GrowthConfig& cfg;
    std::vector<Node>& nodes;
    std::size_t heuristic_failures = 0;
    int threads = 1;
};

std::optional<SplitCandidate> evaluate_feature(const GrowContext& ctx, std::size_t feature,
                                               const std::vector<std::size_t>& rows,
                                               const std::vector<double>& y, int node_id) {
    const auto& col = ctx.data.columns[feature];
    std::vector<double> x(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) x[i] = col[rows[i]];

    switch (ctx.cfg.heuristic) {
    case split_heuristic::variance:
        return best_split_variance(x, y, ctx.cfg.min_leaf);
    case split_heuristic::ttest:
        return best_split_ttest(x, y, ctx.cfg.min_leaf);
    case split_heuristic::segmented:
        return best_split_segmented(x, y, ctx.cfg.min_leaf, ctx.cfg.segmented);
    case split_heuristic::gmm: {
        GmmConfig gmm = ctx.cfg.gmm;
        gmm.seed = mix64(ctx.cfg.seed ^ mix64(static_cast<std::uint64_t>(node_id) + 1) ^
                         mix64((static_cast<std::uint64_t>(feature) + 1) << 20));
        return best_split_gmm(x, y, ctx.cfg.min_leaf, gmm);
    }
    }
    return std::nullopt;
}

void grow_node(GrowContext& ctx, int node_id, std::vector<std::size_t> rows, int depth) {
    Node& node = ctx.nodes[static_cast<std::size_t>(node_id)];
    node.n = rows.size();
    node.mean_y = mean_over(ctx.data.target, rows);

    const std::size_t m = ctx.cfg.min_leaf;
    const bool may_split = depth < ctx.cfg.max_depth && rows.size() >= 2 * m &&
                           ctx.nodes.size() + 2 <= ctx.cfg.max_nodes;

    std::optional<SplitCandidate> best;
    if (may_split) {
        std::vector<double> y(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) y[i] = ctx.data.target[rows[i]];

        const std::size_t n_feat = ctx.data.n_features();
        std::vector<std::optional<SplitCandidate>> candidates(n_feat);
        std::atomic<std::size_t> failures{0};
        const int threads = rows.size() >= 8192 ? ctx.threads : 1;
        run_indexed(n_feat, threads, [&](std::size_t f) {
            try {
                candidates[f] = evaluate_feature(ctx, f, rows, y, node_id);
                if (candidates[f]) candidates[f]->feature_index = static_cast<int>(f);
            } catch (const error&) {
                failures.fetch_add(1);
            }
        });
        ctx.heuristic_failures += failures.load();

        for (std::size_t f = 0; f < n_feat; ++f) {
            const auto& cand = candidates[f];
            if (!cand || !(cand->variance_reduction > 0.0)) continue;
            if (cand->left_count < m || cand->right_count < m) continue;
            if (!best || cand->variance_reduction > best->variance_reduction) best = cand;
        }
    }

    if (best) {
        const auto& col = ctx.data.columns[static_cast<std::size_t>(best->feature_index)];
        std::vector<std::size_t> left_rows;
        std::vector<std::size_t> right_rows;
        left_rows.reserve(best->left_count);
        right_rows.reserve(best->right_count);
        for (std::size_t r : rows) {
            (col[r] <= best->threshold ? left_rows : right_rows).push_back(r);
        }
        if (left_rows.size() >= m && right_rows.size() >= m) {
            rows.clear();
            rows.shrink_to_fit();
            const int left_id = static_cast<int>(ctx.nodes.size());
            ctx.nodes.emplace_back();
            const int right_id = static_cast<int>(ctx.nodes.size());
            ctx.nodes.emplace_back();
            Node& split = ctx.nodes[static_cast<std::size_t>(node_id)];
            split.is_leaf = false;
            split.feature = best->feature_index;
            split.threshold = best->threshold;
            split.variance_reduction = best->variance_reduction;
            split.left = left_id;
            split.right = right_id;
            grow_node(ctx, left_id, std::move(left_rows), depth + 1);
            grow_node(ctx, right_id, std::move(right_rows), depth + 1);
            return;
        }
    }

    Node& leaf = ctx.nodes[static_cast<std::size_t>(node_id)];
    leaf.is_leaf = true;
    leaf.model = fit_leaf(ctx.data, rows, ctx.cfg.ridge_eps);
}

} // namespace

std::string to_string(split_heuristic h) {
    switch (h) {
    case split_heuristic::variance: return "variance";
    case split_heuristic::ttest: return "ttest";
    case split_heuristic::segmented: return "segmented";
    case split_heuristic::gmm: return "gmm";
    }
    return "?";
}

split_heuristic split_heuristic_from_string(const std::string& name) {
    if (name == "variance") return split_heuristic::variance;
    if (name == "ttest") return split_heuristic::ttest;
    if (name == "segmented") return split_heuristic::segmented;
    if (name == "gmm") return split_heuristic::gmm;
    throw config_error("unknown heuristic '" + name + "' (variance|ttest|segmented|gmm)");
}

ModelTree grow(const Dataset& train, const GrowthConfig& cfg) {
    train.check_consistent();
    if (train.rows() == 0) throw config_error("cannot grow a tree on an empty dataset");
    if (cfg.min_leaf < 2) throw config_error("min_leaf must be >= 2");
    if (cfg.max_depth < 1) throw config_error("max_depth must be >= 1");
    if (train.rows() < cfg.min_leaf)
        throw config_error("dataset holds fewer rows than min_leaf");

    ModelTree tree;
    tree.fingerprint_ = train.schema_fingerprint();
    tree.feature_names_.reserve(train.n_features());
    for (const auto& c : train.schema) tree.feature_names_.push_back(c.name());
    tree.growth_ = cfg;

    tree.nodes_.emplace_back();
    tree.root_ = 0;

    GrowContext ctx{train, cfg, tree.nodes_};
    ctx.threads = effective_threads(cfg.threads);
    std::vector<std::size_t> all(train.rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    grow_node(ctx, tree.root_, std::move(all), 0);
    tree.heuristic_failures_ = ctx.heuristic_failures;
    return tree;
}

namespace {

struct PruneContext {
    const Dataset& data;
    const PruneConfig& cfg;
    double ridge_eps;
    std::vector<Node>& nodes;
};

// Returns the node's E value iff the node is a leaf once its subtree has
// been maximally pruned.
std::optional<double> prune_node(PruneContext& ctx, int node_id,
                                 const std::vector<std::size_t>& rows) {
    Node& node = ctx.nodes[static_cast<std::size_t>(node_id)];
    if (node.is_leaf) {
        return node_loss(ctx.data, rows, node.model, ctx.cfg);
    }

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    const auto& col = ctx.data.columns[static_cast<std::size_t>(node.feature)];
    for (std::size_t r : rows) {
        (col[r] <= node.threshold ? left_rows : right_rows).push_back(r);
    }

    const auto left_e = prune_node(ctx, node.left, left_rows);
    const auto right_e = prune_node(ctx, node.right, right_rows);
    if (!left_e || !right_e) return std::nullopt;

    LeafModel parent_model = fit_leaf(ctx.data, rows, ctx.ridge_eps);
    const double parent_e = node_loss(ctx.data, rows, parent_model, ctx.cfg);
    if (parent_e < *left_e + *right_e) {
        node.is_leaf = true;
        node.feature = -1;
        node.threshold = 0.0;
        node.left = -1;
        node.right = -1;
        node.variance_reduction = 0.0;
        node.model = std::move(parent_model);
        return parent_e;
    }
    return std::nullopt;
}

int copy_live(const std::vector<Node>& src, int id, std::vector<Node>& dst) {
    const int out = static_cast<int>(dst.size());
    dst.push_back(src[static_cast<std::size_t>(id)]);
    if (!src[static_cast<std::size_t>(id)].is_leaf) {
        dst[static_cast<std::size_t>(out)].left = copy_live(src, src[static_cast<std::size_t>(id)].left, dst);
        dst[static_cast<std::size_t>(out)].right = copy_live(src, src[static_cast<std::size_t>(id)].right, dst);
    }
    return out;
}

} // namespace

ModelTree prune(const ModelTree& tree, const Dataset& train, const PruneConfig& cfg) {
    train.check_consistent();
    if (train.schema_fingerprint() != tree.schema_fingerprint())
        throw config_error("prune: dataset schema does not match the tree");
    if (cfg.lambda < 0.0) throw config_error("lambda must be >= 0");

    ModelTree out = tree;
    out.prune_ = cfg;

    PruneContext ctx{train, cfg, tree.growth_config().ridge_eps, out.nodes_};
    std::vector<std::size_t> all(train.rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    prune_node(ctx, out.root_, all);

    // Compact the arena so node_count reflects the live tree.
    std::vector<Node> compact;
    compact.reserve(out.nodes_.size());
    copy_live(out.nodes_, out.root_, compact);
    out.nodes_ = std::move(compact);
    out.root_ = 0;
    return out;
}

void ModelTree::check_row(std::span<const double> row) const {
    if (row.size() != feature_names_.size())
        throw config_error("row has " + std::to_string(row.size()) + " features, tree expects " +
                           std::to_string(feature_names_.size()));
    for (double v : row) {
        if (!std::isfinite(v)) throw data_error("non-finite feature value in prediction row");
    }
}

int ModelTree::leaf_for(std::span<const double> row) const {
    check_row(row);
    int id = root_;
    while (!nodes_[static_cast<std::size_t>(id)].is_leaf) {
        const Node& nd = nodes_[static_cast<std::size_t>(id)];
        id = row[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
    }
    return id;
}

double ModelTree::predict_row(std::span<const double> row) const {
    return nodes_[static_cast<std::size_t>(leaf_for(row))].model.predict(row);
}

std::vector<double> ModelTree::predict(const Dataset& data) const {
    data.check_consistent();
    if (data.schema_fingerprint() != fingerprint_)
        throw config_error("predict: dataset schema does not match the tree");
    std::vector<double> out(data.rows());
    std::vector<double> row(data.n_features());
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (std::size_t j = 0; j < data.n_features(); ++j) row[j] = data.columns[j][i];
        out[i] = predict_row(row);
    }
    return out;
}

std::size_t ModelTree::leaf_count() const {
    std::size_t count = 0;
    for (const Node& n : nodes_) count += n.is_leaf ? 1 : 0;
    return count;
}

int ModelTree::depth() const {
    if (root_ < 0) return 0;
    std::function<int(int)> walk = [&](int id) -> int {
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        if (n.is_leaf) return 0;
        return 1 + std::max(walk(n.left), walk(n.right));
    };
    return walk(root_);
}

namespace {

constexpr const char* kTreeFormat = "mimictree.tree/1";

std::string hex_u64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t parse_hex_u64(const std::string& s) {
    return std::strtoull(s.c_str(), nullptr, 16);
}

json growth_to_json(const GrowthConfig& g) {
    return json{{"heuristic", to_string(g.heuristic)},
                {"min_leaf", g.min_leaf},
                {"max_depth", g.max_depth},
                {"max_nodes", g.max_nodes},
                {"seed", g.seed},
                {"ridge_eps", g.ridge_eps},
                {"threads", g.threads},
                {"segmented", {{"tol_scale", g.segmented.tol_scale},
                               {"max_iters", g.segmented.max_iters},
                               {"score_by_variance_gap", g.segmented.score_by_variance_gap}}},
                {"gmm", {{"max_em_iters", g.gmm.max_em_iters}, {"tol", g.gmm.tol}}}};
}

GrowthConfig growth_from_json(const json& j) {
    GrowthConfig g;
    g.heuristic = split_heuristic_from_string(j.at("heuristic").get<std::string>());
    g.min_leaf = j.at("min_leaf").get<std::size_t>();
    g.max_depth = j.at("max_depth").get<int>();
    g.max_nodes = j.at("max_nodes").get<std::size_t>();
    g.seed = j.at("seed").get<std::uint64_t>();
    g.ridge_eps = j.at("ridge_eps").get<double>();
    g.threads = j.at("threads").get<int>();
    const auto& seg = j.at("segmented");
    g.segmented.tol_scale = seg.at("tol_scale").get<double>();
    g.segmented.max_iters = seg.at("max_iters").get<int>();
    g.segmented.score_by_variance_gap = seg.at("score_by_variance_gap").get<bool>();
    const auto& gmm = j.at("gmm");
    g.gmm.max_em_iters = gmm.at("max_em_iters").get<int>();
    g.gmm.tol = gmm.at("tol").get<double>();
    return g;
}

penalty_norm norm_from_string(const std::string& s) {
    if (s == "l0") return penalty_norm::l0;
    if (s == "l1") return penalty_norm::l1;
    if (s == "l2") return penalty_norm::l2;
    throw config_error("unknown penalty norm '" + s + "'");
}

} // namespace

std::string ModelTree::to_json_string() const {
    json doc;
    doc["format"] = kTreeFormat;
    doc["schema_fingerprint"] = hex_u64(fingerprint_);
    doc["feature_names"] = feature_names_;
    doc["growth"] = growth_to_json(growth_);
    doc["prune"] = json{{"lambda", prune_.lambda}, {"norm", to_string(prune_.norm)}};
    doc["heuristic_failures"] = heuristic_failures_;
    doc["root"] = root_;
    json nodes = json::array();
    for (const Node& n : nodes_) {
        json jn;
        if (n.is_leaf) {
            jn["type"] = "leaf";
            jn["weights"] = n.model.weights;
            jn["intercept"] = n.model.intercept;
            jn["residual_loss"] = n.model.residual_loss;
        } else {
            jn["type"] = "split";
            jn["feature"] = n.feature;
            jn["threshold"] = n.threshold;
            jn["left"] = n.left;
            jn["right"] = n.right;
            jn["variance_reduction"] = n.variance_reduction;
        }
        jn["n"] = n.n;
        jn["mean_y"] = n.mean_y;
        nodes.push_back(std::move(jn));
    }
    doc["nodes"] = std::move(nodes);
    return doc.dump(2) + "\n";
}

ModelTree ModelTree::from_json_string(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw parse_error(std::string("tree document is not valid JSON: ") + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != kTreeFormat)
            throw config_error("unsupported tree format '" +
                               doc.at("format").get<std::string>() + "'");
        ModelTree tree;
        tree.fingerprint_ = parse_hex_u64(doc.at("schema_fingerprint").get<std::string>());
        tree.feature_names_ = doc.at("feature_names").get<std::vector<std::string>>();
        tree.growth_ = growth_from_json(doc.at("growth"));
        tree.prune_.lambda = doc.at("prune").at("lambda").get<double>();
        tree.prune_.norm = norm_from_string(doc.at("prune").at("norm").get<std::string>());
        tree.heuristic_failures_ = doc.at("heuristic_failures").get<std::size_t>();
        tree.root_ = doc.at("root").get<int>();
        for (const auto& jn : doc.at("nodes")) {
            Node n;
            n.n = jn.at("n").get<std::size_t>();
            n.mean_y = jn.at("mean_y").get<double>();
            if (jn.at("type").get<std::string>() == "leaf") {
                n.is_leaf = true;
                n.model.weights = jn.at("weights").get<std::vector<double>>();
                n.model.intercept = jn.at("intercept").get<double>();
                n.model.residual_loss = jn.at("residual_loss").get<double>();
            } else {
                n.is_leaf = false;
                n.feature = jn.at("feature").get<int>();
                n.threshold = jn.at("threshold").get<double>();
                n.left = jn.at("left").get<int>();
                n.right = jn.at("right").get<int>();
                n.variance_reduction = jn.at("variance_reduction").get<double>();
            }
            tree.nodes_.push_back(std::move(n));
        }
        if (tree.root_ < 0 || tree.nodes_.empty() ||
            static_cast<std::size_t>(tree.root_) >= tree.nodes_.size())
            throw config_error("tree document has no valid root");
        return tree;
    } catch (const json::exception& e) {
        throw parse_error(std::string("tree document is malformed: ") + e.what());
    }
}

void ModelTree::save(const std::string& path) const {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw config_error("cannot write tree file '" + path + "'");
    file << to_json_string();
    if (!file.good()) throw config_error("failed writing tree file '" + path + "'");
}

ModelTree ModelTree::load(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw config_error("cannot open tree file '" + path + "'");
    std::ostringstream buf;
    buf << file.rdbuf();
    return from_json_string(buf.str());
}

} // namespace mimictree
