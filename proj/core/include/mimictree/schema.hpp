#pragma once

#include <string>
#include <vector>

namespace mimictree {

enum class feature_kind { continuous, categorical, binary };

std::string to_string(feature_kind kind);

/// Declaration of one raw input feature before encoding.
struct FeatureSpec {
    std::string name;
    feature_kind kind = feature_kind::continuous;
    std::vector<std::string> levels; // categorical only
    int lag = 0;                     // 0 = current event, k = k events before

    /// Throws schema_error on empty/duplicate level lists or negative lag.
    void validate() const;
};

/// Full ingestion schema: feature list plus the target and optional
/// episode-boundary column. Parsed from a sidecar text file with one
/// directive per line:
///
///   target  = <column name>
///   episode = <column name>          # optional
///   feature = <name> : continuous
///   feature = <name> : binary
///   feature = <name> : categorical : <level1,level2,...>
///
/// '#' starts a comment; blank lines are ignored; names may contain spaces.
struct Schema {
    std::vector<FeatureSpec> features;
    std::string target_column;  // may be empty when labels come from an oracle
    std::string episode_column; // empty = single episode

    void validate() const;

    static Schema parse_file(const std::string& path);
    static Schema parse_text(const std::string& text, const std::string& origin = "<text>");

    /// Parses one "name:kind[:levels]" feature description (CLI flag form).
    static FeatureSpec parse_feature_flag(const std::string& flag);
};

} // namespace mimictree
