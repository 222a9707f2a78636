#include "mimictree/schema.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "mimictree/errors.hpp"

namespace mimictree {

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

feature_kind kind_from_string(const std::string& word, const std::string& origin, int line) {
    if (word == "continuous") return feature_kind::continuous;
    if (word == "categorical") return feature_kind::categorical;
    if (word == "binary") return feature_kind::binary;
    throw schema_error(origin + ":" + std::to_string(line) + ": unknown feature kind '" +
                       word + "'");
}

FeatureSpec parse_feature_parts(const std::vector<std::string>& parts,
                                const std::string& origin, int line) {
    if (parts.size() < 2 || parts[0].empty()) {
        throw schema_error(origin + ":" + std::to_string(line) +
                           ": feature needs '<name> : <kind> [: levels]'");
    }
    FeatureSpec spec;
    spec.name = parts[0];
    spec.kind = kind_from_string(parts[1], origin, line);
    if (spec.kind == feature_kind::categorical) {
        if (parts.size() < 3 || parts[2].empty()) {
            throw schema_error(origin + ":" + std::to_string(line) + ": categorical feature '" +
                               spec.name + "' needs a level list");
        }
        spec.levels = split_on(parts[2], ',');
    } else if (parts.size() > 2 && !parts[2].empty()) {
        throw schema_error(origin + ":" + std::to_string(line) + ": feature '" + spec.name +
                           "' of kind " + parts[1] + " takes no level list");
    }
    spec.validate();
    return spec;
}

} // namespace

std::string to_string(feature_kind kind) {
    switch (kind) {
    case feature_kind::continuous: return "continuous";
    case feature_kind::categorical: return "categorical";
    case feature_kind::binary: return "binary";
    }
    return "?";
}

void FeatureSpec::validate() const {
    if (name.empty()) throw schema_error("feature with empty name");
    if (lag < 0) throw schema_error("feature '" + name + "': negative lag");
    if (kind == feature_kind::categorical) {
        if (levels.empty()) throw schema_error("categorical feature '" + name + "' has no levels");
        std::unordered_set<std::string> seen;
        for (const auto& level : levels) {
            if (level.empty())
                throw schema_error("categorical feature '" + name + "' has an empty level");
            if (!seen.insert(level).second)
                throw schema_error("categorical feature '" + name + "' repeats level '" + level +
                                   "'");
        }
    } else if (!levels.empty()) {
        throw schema_error("feature '" + name + "' is not categorical but declares levels");
    }
}

void Schema::validate() const {
    if (features.empty()) throw schema_error("schema declares no features");
    std::unordered_set<std::string> seen;
    for (const auto& f : features) {
        f.validate();
        if (!seen.insert(f.name).second)
            throw schema_error("schema repeats feature '" + f.name + "'");
    }
}

Schema Schema::parse_text(const std::string& text, const std::string& origin) {
    Schema schema;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        auto comment = raw.find('#');
        if (comment != std::string::npos) raw.erase(comment);
        std::string line = trim(raw);
        if (line.empty()) continue;

        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw schema_error(origin + ":" + std::to_string(line_no) +
                               ": expected '<key> = <value>'");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key == "target") {
            schema.target_column = value;
        } else if (key == "episode") {
            schema.episode_column = value;
        } else if (key == "feature") {
            schema.features.push_back(parse_feature_parts(split_on(value, ':'), origin, line_no));
        } else {
            throw schema_error(origin + ":" + std::to_string(line_no) + ": unknown directive '" +
                               key + "'");
        }
    }
    schema.validate();
    return schema;
}

Schema Schema::parse_file(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw config_error("cannot open schema file '" + path + "'");
    std::ostringstream buf;
    buf << file.rdbuf();
    return parse_text(buf.str(), path);
}

FeatureSpec Schema::parse_feature_flag(const std::string& flag) {
    return parse_feature_parts(split_on(flag, ':'), "<flag>", 1);
}

} // namespace mimictree
