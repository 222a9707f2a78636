#pragma once

#include <string>
#include <vector>

#include "mimictree/dataset.hpp"

namespace mimictree {

/// Handle to the black-box teacher that assigns soft labels to feature
/// rows. Two modes:
///
///  - aligned file: newline-delimited decimal numbers, row i of the file
///    labels row i of the queried dataset;
///  - subprocess: the command is launched per query; we write a header
///    line "n_features=<k>" followed by one CSV line per row to its stdin,
///    close stdin, and read exactly one decimal label per line from its
///    stdout, in row order.
class OracleClient {
public:
    enum class mode_t { aligned_file, subprocess };

    /// Reads labels eagerly; throws oracle_error on unreadable files or
    /// non-finite values.
    static OracleClient aligned_file(const std::string& path);
    static OracleClient subprocess(const std::string& command);

    /// One finite label per row, order-preserving. oracle_error on count
    /// mismatch (message carries the row index), non-finite labels, or a
    /// nonzero teacher exit status.
    std::vector<double> query(const Dataset& rows) const;

    mode_t mode() const { return mode_; }

private:
    OracleClient(mode_t mode, std::string spec) : mode_(mode), spec_(std::move(spec)) {}

    mode_t mode_;
    std::string spec_;           // command line for subprocess mode
    std::vector<double> labels_; // cached aligned-file labels
};

} // namespace mimictree
