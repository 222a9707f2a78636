#include "mimictree/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string_view>
#include <unordered_map>

#include "mimictree/errors.hpp"

namespace mimictree {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_mix(std::uint64_t& h, std::string_view s) {
    for (unsigned char c : s) {
        h ^= c;
        h *= kFnvPrime;
    }
    h ^= 0xff;
    h *= kFnvPrime;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::string_view strip_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
}

std::string_view trim_view(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

void split_fields(std::string_view line, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim_view(line.substr(start)));
            break;
        }
        out.push_back(trim_view(line.substr(start, comma - start)));
        start = comma + 1;
    }
}

double parse_numeric(std::string_view cell, std::size_t row, const std::string& column) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto [ptr, ec] = std::from_chars(begin, end, value, std::chars_format::general);
    if (ec != std::errc{} || ptr != end) {
        throw parse_error("row " + std::to_string(row) + ", column '" + column +
                          "': cannot parse numeric cell '" + std::string(cell) + "'");
    }
    return value;
}

double parse_binary(std::string_view cell, std::size_t row, const std::string& column) {
    std::string lower(cell);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "1" || lower == "true") return 1.0;
    if (lower == "0" || lower == "false") return 0.0;
    throw parse_error("row " + std::to_string(row) + ", column '" + column +
                      "': binary cell must be true/false/1/0, got '" + std::string(cell) + "'");
}

} // namespace

std::string ColumnInfo::name() const {
    std::string out = base;
    if (!level.empty()) out += "=" + level;
    if (lag > 0) {
        out += " (t-" + std::to_string(lag) + ")";
    } else if (lag == 0 && tagged) {
        out += " (t0)";
    }
    return out;
}

int Dataset::find_column(const std::string& name) const {
    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (schema[i].name() == name) return static_cast<int>(i);
    }
    return -1;
}

std::uint64_t Dataset::schema_fingerprint() const {
    std::uint64_t h = kFnvOffset;
    for (const auto& c : schema) {
        fnv_mix(h, c.name());
        fnv_mix(h, to_string(c.kind));
        fnv_mix(h, std::to_string(c.lag));
        fnv_mix(h, std::to_string(c.group));
    }
    return h;
}

void Dataset::check_consistent() const {
    if (schema.size() != columns.size())
        throw data_error("dataset schema/column count mismatch");
    for (const auto& col : columns) {
        if (col.size() != target.size())
            throw data_error("dataset column lengths disagree with target");
    }
    if (!episode_ids.empty() && episode_ids.size() != target.size())
        throw data_error("episode id column length disagrees with target");
}

void Dataset::append_rows(const Dataset& other) {
    if (other.schema_fingerprint() != schema_fingerprint())
        throw schema_error("cannot append rows: schema fingerprints differ");
    for (std::size_t j = 0; j < columns.size(); ++j) {
        columns[j].insert(columns[j].end(), other.columns[j].begin(), other.columns[j].end());
    }
    target.insert(target.end(), other.target.begin(), other.target.end());
    if (!episode_ids.empty() || !other.episode_ids.empty()) {
        // Extend with fresh episode ids so appended rows never merge into
        // an existing episode.
        std::int64_t next = 0;
        if (!episode_ids.empty()) next = *std::max_element(episode_ids.begin(), episode_ids.end()) + 1;
        episode_ids.resize(target.size() - other.target.size(), 0);
        if (other.episode_ids.empty()) {
            for (std::size_t i = 0; i < other.target.size(); ++i)
                episode_ids.push_back(next + static_cast<std::int64_t>(i));
        } else {
            for (auto id : other.episode_ids) episode_ids.push_back(next + id);
        }
    }
}

Dataset load_csv(const std::string& path, const Schema& schema) {
    schema.validate();
    std::ifstream file(path, std::ios::binary);
    if (!file) throw config_error("cannot open data file '" + path + "'");

    std::string header_line;
    if (!std::getline(file, header_line)) throw parse_error("'" + path + "': empty file");

    std::vector<std::string_view> fields;
    split_fields(strip_cr(header_line), fields);
    std::unordered_map<std::string, std::size_t> header;
    for (std::size_t i = 0; i < fields.size(); ++i) header.emplace(std::string(fields[i]), i);

    auto require_column = [&](const std::string& name) -> std::size_t {
        auto it = header.find(name);
        if (it == header.end())
            throw schema_error("'" + path + "': header is missing column '" + name + "'");
        return it->second;
    };

    struct SourceColumn {
        std::size_t csv_index;
        const FeatureSpec* spec;
        std::size_t first_output; // index of the first output column
    };

    Dataset out;
    std::vector<SourceColumn> sources;
    int next_group = 0;
    for (const auto& spec : schema.features) {
        sources.push_back({require_column(spec.name), &spec, out.schema.size()});
        if (spec.kind == feature_kind::categorical) {
            int group = next_group++;
            for (const auto& level : spec.levels) {
                out.schema.push_back({spec.name, level, feature_kind::binary, 0, group});
            }
        } else {
            out.schema.push_back({spec.name, "", spec.kind, 0, -1});
        }
    }
    std::size_t target_index = 0;
    if (!schema.target_column.empty()) target_index = require_column(schema.target_column);
    std::size_t episode_index = 0;
    if (!schema.episode_column.empty()) episode_index = require_column(schema.episode_column);

    out.columns.assign(out.schema.size(), {});

    const std::size_t n_header = fields.size();
    std::string line;
    std::size_t row = 0;
    std::string prev_episode_token;
    std::int64_t episode_id = -1;
    while (std::getline(file, line)) {
        std::string_view body = strip_cr(line);
        if (body.empty() && file.peek() == EOF) break; // trailing newline
        split_fields(body, fields);
        if (fields.size() != n_header) {
            throw parse_error("row " + std::to_string(row) + ": expected " +
                              std::to_string(n_header) + " cells, got " +
                              std::to_string(fields.size()));
        }
        for (const auto& src : sources) {
            std::string_view cell = fields[src.csv_index];
            const FeatureSpec& spec = *src.spec;
            switch (spec.kind) {
            case feature_kind::continuous:
                out.columns[src.first_output].push_back(parse_numeric(cell, row, spec.name));
                break;
            case feature_kind::binary:
                out.columns[src.first_output].push_back(parse_binary(cell, row, spec.name));
                break;
            case feature_kind::categorical: {
                std::size_t hit = spec.levels.size();
                for (std::size_t l = 0; l < spec.levels.size(); ++l) {
                    if (cell == spec.levels[l]) {
                        hit = l;
                        break;
                    }
                }
                if (hit == spec.levels.size()) {
                    throw data_error("row " + std::to_string(row) + ", column '" + spec.name +
                                     "': unknown categorical level '" + std::string(cell) + "'");
                }
                for (std::size_t l = 0; l < spec.levels.size(); ++l) {
                    out.columns[src.first_output + l].push_back(l == hit ? 1.0 : 0.0);
                }
                break;
            }
            }
        }
        if (!schema.target_column.empty()) {
            out.target.push_back(parse_numeric(fields[target_index], row, schema.target_column));
        } else {
            out.target.push_back(0.0);
        }
        if (!schema.episode_column.empty()) {
            std::string token(fields[episode_index]);
            if (row == 0 || token != prev_episode_token) {
                ++episode_id;
                prev_episode_token = std::move(token);
            }
            out.episode_ids.push_back(episode_id);
        }
        ++row;
    }
    out.check_consistent();
    return out;
}

Dataset lag_expand(const Dataset& data, int window, double pad) {
    if (window < 1) throw config_error("lag window must be >= 1");
    data.check_consistent();
    if (window == 1) return data;

    const std::size_t n = data.rows();
    Dataset out;
    out.target = data.target;
    out.episode_ids = data.episode_ids;

    // Remap one-hot groups so each (group, lag) copy stays a distinct group.
    int next_group = 0;
    std::unordered_map<std::int64_t, int> group_map;
    auto lagged_group = [&](int group, int lag) -> int {
        if (group < 0) return -1;
        std::int64_t key = static_cast<std::int64_t>(group) * window + lag;
        auto [it, inserted] = group_map.emplace(key, next_group);
        if (inserted) ++next_group;
        return it->second;
    };

    out.schema.reserve(data.schema.size() * static_cast<std::size_t>(window));
    out.columns.reserve(out.schema.capacity());
    for (std::size_t j = 0; j < data.schema.size(); ++j) {
        const ColumnInfo& info = data.schema[j];
        const auto& src = data.columns[j];
        for (int lag = 0; lag < window; ++lag) {
            ColumnInfo lagged = info;
            lagged.lag = lag;
            lagged.tagged = true;
            lagged.group = lagged_group(info.group, lag);
            out.schema.push_back(lagged);

            std::vector<double> col(n);
            if (lag == 0) {
                col = src;
            } else {
                for (std::size_t i = 0; i < n; ++i) {
                    bool in_episode = i >= static_cast<std::size_t>(lag);
                    if (in_episode && !data.episode_ids.empty()) {
                        in_episode = data.episode_ids[i - lag] == data.episode_ids[i];
                    }
                    col[i] = in_episode ? src[i - lag] : pad;
                }
            }
            out.columns.push_back(std::move(col));
        }
    }

    // Norm stats were captured per pre-expansion column; lag copies inherit
    // their source column's stats.
    if (data.norm) {
        NormStats stats;
        for (std::size_t j = 0; j < data.schema.size(); ++j) {
            for (int lag = 0; lag < window; ++lag) {
                stats.mean.push_back(data.norm->mean[j]);
                stats.stddev.push_back(data.norm->stddev[j]);
                stats.zero_variance.push_back(data.norm->zero_variance[j]);
                stats.affected.push_back(data.norm->affected[j]);
            }
        }
        out.norm = std::move(stats);
    }
    out.check_consistent();
    return out;
}

Dataset apply_norm(const Dataset& data, const NormStats& stats) {
    data.check_consistent();
    if (stats.size() != data.n_features())
        throw config_error("norm stats cover " + std::to_string(stats.size()) +
                           " columns, dataset has " + std::to_string(data.n_features()));
    Dataset out = data;
    for (std::size_t j = 0; j < out.columns.size(); ++j) {
        if (!stats.affected[j]) continue;
        const double mean = stats.mean[j];
        const double inv = stats.zero_variance[j] ? 0.0 : 1.0 / stats.stddev[j];
        for (double& v : out.columns[j]) v = (v - mean) * inv;
    }
    out.norm = stats;
    return out;
}

std::pair<Dataset, NormStats> normalize(const Dataset& data) {
    data.check_consistent();
    NormStats stats;
    const std::size_t n = data.rows();
    stats.mean.resize(data.n_features(), 0.0);
    stats.stddev.resize(data.n_features(), 0.0);
    stats.zero_variance.resize(data.n_features(), 0);
    stats.affected.resize(data.n_features(), 0);
    for (std::size_t j = 0; j < data.n_features(); ++j) {
        if (data.schema[j].kind != feature_kind::continuous) continue;
        stats.affected[j] = 1;
        const auto& col = data.columns[j];
        double mean = 0.0;
        for (double v : col) mean += v;
        mean /= n == 0 ? 1.0 : static_cast<double>(n);
        double ss = 0.0;
        for (double v : col) ss += (v - mean) * (v - mean);
        double var = n == 0 ? 0.0 : ss / static_cast<double>(n);
        stats.mean[j] = mean;
        stats.stddev[j] = std::sqrt(var);
        if (stats.stddev[j] <= 0.0) {
            stats.zero_variance[j] = 1;
            stats.stddev[j] = 0.0;
        }
    }
    return {apply_norm(data, stats), std::move(stats)};
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& data, double test_fraction,
                                             std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw config_error("test fraction must lie in (0, 1)");
    const std::size_t n = data.rows();
    if (n < 2) throw config_error("need at least 2 rows to split");

    const std::size_t test_n =
        static_cast<std::size_t>(std::floor(static_cast<double>(n) * test_fraction));

    // Hand-rolled Fisher-Yates so partitions are stable across platforms.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::uint64_t state = seed;
    for (std::size_t i = n - 1; i > 0; --i) {
        std::size_t j = static_cast<std::size_t>(splitmix64(state) % (i + 1));
        std::swap(order[i], order[j]);
    }

    std::vector<std::uint8_t> in_test(n, 0);
    for (std::size_t i = 0; i < test_n; ++i) in_test[order[i]] = 1;

    auto take = [&](bool test_side) {
        Dataset part;
        part.schema = data.schema;
        part.norm = data.norm;
        part.columns.resize(data.n_features());
        for (std::size_t i = 0; i < n; ++i) {
            if ((in_test[i] != 0) != test_side) continue;
            for (std::size_t j = 0; j < data.n_features(); ++j)
                part.columns[j].push_back(data.columns[j][i]);
            part.target.push_back(data.target[i]);
            if (!data.episode_ids.empty()) part.episode_ids.push_back(data.episode_ids[i]);
        }
        return part;
    };
    return {take(false), take(true)};
}

} // namespace mimictree
